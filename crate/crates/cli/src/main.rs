//! `cwp`: command-line front end of the compressed word problem solver.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand};
use num_bigint::BigUint;
use serde_json::{json, Value};
use thiserror::Error;

use cwp_core::alphabet::Alphabet;
use cwp_core::equality::slp_equal;
use cwp_core::extensions::ExtError;
use cwp_core::group::{ConstantsBundle, GroupContext, GroupError};
use cwp_core::oracle::{calibrate, random_slp, Profile};
use cwp_core::pipeline::{self, build_nf_tcslp, compressed_index_convert, convert, PipelineError};
use cwp_core::slp::{Slp, SlpError};
use cwp_core::text::ParseError;

#[derive(Parser)]
#[command(name = "cwp", version, about = "Compressed word problem for free products of free abelian groups")]
struct Cli {
    /// Print a JSON object instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct GroupArgs {
    /// Group file.
    group: PathBuf,
    /// File with a `constants` line overriding the group file's.
    #[arg(long)]
    constants: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a program's value is the identity.
    Cwp {
        #[command(flatten)]
        group: GroupArgs,
        program: PathBuf,
        /// Directory for intermediate programs.
        #[arg(long)]
        trace_dir: Option<PathBuf>,
    },
    /// Write a program for the normal form of a program's value.
    Nf {
        #[command(flatten)]
        group: GroupArgs,
        program: PathBuf,
        /// Output file; standard output when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        trace_dir: Option<PathBuf>,
    },
    /// Compare the values of two programs letter by letter.
    Eq {
        a: PathBuf,
        b: PathBuf,
        /// Read both programs over this group's alphabet.
        #[arg(long)]
        group: Option<PathBuf>,
    },
    /// Print the value length.
    Len {
        program: PathBuf,
        #[arg(long)]
        group: Option<PathBuf>,
    },
    /// Write a program for a factor of the value.
    Cut {
        program: PathBuf,
        start: BigUint,
        end: BigUint,
        /// Positions count components of the value; needs `--group`.
        #[arg(long)]
        compressed: bool,
        #[arg(long)]
        group: Option<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Print the value, refusing values longer than `--max-len`.
    Decompress {
        program: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        max_len: u64,
        #[arg(long)]
        group: Option<PathBuf>,
    },
    /// Measure constants and print the group file with them.
    Calibrate {
        group: PathBuf,
        #[arg(long, default_value_t = 12)]
        max_word_len: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Time the solver on generated programs; prints CSV.
    Bench {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long, default_value = "balanced")]
        profile: String,
        /// Comma-separated program sizes.
        #[arg(long, default_value = "64,128,256,512,1024")]
        sizes: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Instances per size.
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("{path}: {source}")]
    Group { path: PathBuf, source: GroupError },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Slp(#[from] SlpError),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Pipeline(PipelineError::NoWitness { .. }) => 3,
            CliError::Slp(SlpError::TooLong { .. })
            | CliError::Pipeline(PipelineError::Slp(SlpError::TooLong { .. }))
            | CliError::Pipeline(PipelineError::Ext(ExtError::TooLong { .. })) => 4,
            _ => 2,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_owned(),
        message: e.to_string(),
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io {
        path: path.to_owned(),
        message: e.to_string(),
    })
}

fn load_group(path: &Path) -> Result<GroupContext, CliError> {
    GroupContext::parse(&read(path)?).map_err(|source| CliError::Group {
        path: path.to_owned(),
        source,
    })
}

fn load_context(args: &GroupArgs) -> Result<GroupContext, CliError> {
    let ctx = load_group(&args.group)?;
    match &args.constants {
        None => Ok(ctx),
        Some(path) => {
            let bundle = ConstantsBundle::parse(&read(path)?).map_err(|source| CliError::Group {
                path: path.clone(),
                source,
            })?;
            ctx.with_constants(bundle).map_err(|source| CliError::Group {
                path: path.clone(),
                source,
            })
        }
    }
}

fn load_program(path: &Path, alphabet: Option<&Arc<Alphabet>>) -> Result<Slp, CliError> {
    let text = read(path)?;
    match alphabet {
        Some(a) => Slp::parse_with(&text, a.clone()),
        None => Slp::parse(&text),
    }
    .map_err(|source| CliError::Parse {
        path: path.to_owned(),
        source,
    })
}

fn load_optional_group(path: &Option<PathBuf>) -> Result<Option<GroupContext>, CliError> {
    path.as_deref().map(load_group).transpose()
}

/// Output of one command: text lines and the matching JSON object.
struct Report {
    text: String,
    json: Value,
}

impl Report {
    fn print(&self, json: bool) {
        if json {
            println!("{}", self.json);
        } else {
            print!("{}", self.text);
        }
    }
}

fn trace(dir: &Option<PathBuf>, name: &str, text: &str) -> Result<(), CliError> {
    if let Some(dir) = dir {
        fs::create_dir_all(dir).map_err(|e| CliError::Io {
            path: dir.clone(),
            message: e.to_string(),
        })?;
        write(&dir.join(name), text)?;
    }
    Ok(())
}

fn emit_program(out: &Option<PathBuf>, p: &Slp, json: bool) -> Result<Report, CliError> {
    let text = p.to_text();
    let info = json!({
        "size": p.size(),
        "length": p.value_length().to_string(),
    });
    match out {
        Some(path) => {
            write(path, &text)?;
            Ok(Report {
                text: format!("size {}\nlength {}\n", p.size(), p.value_length()),
                json: info,
            })
        }
        None if json => Ok(Report {
            text: String::new(),
            json: json!({ "size": p.size(), "length": p.value_length().to_string(), "program": text }),
        }),
        None => Ok(Report { text, json: info }),
    }
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Cwp {
            group,
            program,
            trace_dir,
        } => {
            let ctx = load_context(group)?;
            let g = load_program(program, Some(ctx.alphabet()))?;
            let started = Instant::now();
            let report = if trace_dir.is_some() {
                let t = build_nf_tcslp(&g, &ctx)?;
                trace(trace_dir, "input.slp", &g.to_text())?;
                trace(trace_dir, "nf.tcslp", &t.to_text())?;
                let s = convert(&t, &ctx)?;
                trace(trace_dir, "nf.slp", &s.to_text())?;
                pipeline::CwpReport {
                    trivial: s.value_length() == BigUint::ZERO,
                    prefiltered: false,
                    input_size: g.size(),
                    tcslp_size: t.size(),
                    nf_size: s.size(),
                }
            } else {
                pipeline::solve_cwp(&g, &ctx)?
            };
            eprintln!("time_ms {:.3}", started.elapsed().as_secs_f64() * 1e3);
            let answer = if report.trivial { "trivial" } else { "nontrivial" };
            let mut text = format!("{answer}\n");
            let _ = writeln!(text, "input_size {}", report.input_size);
            let _ = writeln!(text, "tcslp_size {}", report.tcslp_size);
            let _ = writeln!(text, "nf_size {}", report.nf_size);
            let _ = writeln!(text, "prefiltered {}", report.prefiltered);
            Ok(Report {
                text,
                json: json!({
                    "answer": answer,
                    "input_size": report.input_size,
                    "tcslp_size": report.tcslp_size,
                    "nf_size": report.nf_size,
                    "prefiltered": report.prefiltered,
                }),
            })
        }
        Command::Nf {
            group,
            program,
            out,
            trace_dir,
        } => {
            let ctx = load_context(group)?;
            let g = load_program(program, Some(ctx.alphabet()))?;
            let t = build_nf_tcslp(&g, &ctx)?;
            trace(trace_dir, "input.slp", &g.to_text())?;
            trace(trace_dir, "nf.tcslp", &t.to_text())?;
            let s = convert(&t, &ctx)?;
            trace(trace_dir, "nf.slp", &s.to_text())?;
            emit_program(out, &s, cli.json)
        }
        Command::Eq { a, b, group } => {
            let (p, q) = match load_optional_group(group)? {
                Some(ctx) => (
                    load_program(a, Some(ctx.alphabet()))?,
                    load_program(b, Some(ctx.alphabet()))?,
                ),
                None => {
                    let (p, q) = (load_program(a, None)?, load_program(b, None)?);
                    let names: Vec<String> = p
                        .alphabet()
                        .letters()
                        .chain(q.alphabet().letters().filter(|&l| p.alphabet().get(q.alphabet().name(l)).is_none()))
                        .enumerate()
                        .map(|(i, l)| {
                            let src = if i < p.alphabet().len() { p.alphabet() } else { q.alphabet() };
                            src.name(l).to_string()
                        })
                        .collect();
                    let union = Arc::new(Alphabet::from_names(names).map_err(|e| CliError::Invalid(e.to_string()))?);
                    (load_program(a, Some(&union))?, load_program(b, Some(&union))?)
                }
            };
            let equal = slp_equal(&p, &q)?;
            let answer = if equal { "equal" } else { "different" };
            Ok(Report {
                text: format!("{answer}\n"),
                json: json!({ "answer": answer }),
            })
        }
        Command::Len { program, group } => {
            let ctx = load_optional_group(group)?;
            let p = load_program(program, ctx.as_ref().map(GroupContext::alphabet))?;
            let len = p.value_length();
            Ok(Report {
                text: format!("{len}\n"),
                json: json!({ "length": len.to_string() }),
            })
        }
        Command::Cut {
            program,
            start,
            end,
            compressed,
            group,
            out,
        } => {
            let ctx = load_optional_group(group)?;
            let p = load_program(program, ctx.as_ref().map(GroupContext::alphabet))?;
            let (i, j) = if *compressed {
                let ctx = ctx
                    .as_ref()
                    .ok_or_else(|| CliError::Invalid("--compressed needs --group".into()))?;
                compressed_index_convert(&p, ctx, start, end)?
            } else {
                (start.clone(), end.clone())
            };
            emit_program(out, &p.extract(&i, &j)?, cli.json)
        }
        Command::Decompress {
            program,
            max_len,
            group,
        } => {
            let ctx = load_optional_group(group)?;
            let p = load_program(program, ctx.as_ref().map(GroupContext::alphabet))?;
            let w = p.decompress(*max_len)?;
            let spelled = p.alphabet().format_word(&w);
            Ok(Report {
                text: format!("{spelled}\n"),
                json: json!({ "length": w.len(), "word": spelled }),
            })
        }
        Command::Calibrate {
            group,
            max_word_len,
            seed,
            out,
        } => {
            let ctx = load_group(group)?;
            let c = calibrate(&ctx, *max_word_len, *seed);
            let ctx = ctx
                .with_constants(c.bundle.clone())
                .map_err(|e| CliError::Invalid(e.to_string()))?;
            let mut text = format!(
                "# calibrated: samples {} max distance {} end margin {}\n",
                c.samples, c.max_distance, c.end_margin
            );
            text.push_str(&ctx.to_text());
            let info = json!({
                "samples": c.samples,
                "max_distance": c.max_distance,
                "end_margin": c.end_margin,
                "constants": c.bundle.to_line(),
            });
            match out {
                Some(path) => {
                    write(path, &text)?;
                    Ok(Report {
                        text: format!("{}\n", c.bundle.to_line()),
                        json: info,
                    })
                }
                None => Ok(Report { text, json: info }),
            }
        }
        Command::Bench {
            group,
            profile,
            sizes,
            seed,
            count,
        } => {
            let ctx = load_context(group)?;
            let profile =
                Profile::parse(profile).ok_or_else(|| CliError::Invalid(format!("unknown profile `{profile}`")))?;
            let sizes = sizes
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Invalid(format!("bad --sizes: {e}")))?;
            let mut text = String::from("id,profile,size,length,build_ms,convert_ms,total_ms,answer\n");
            let mut rows = Vec::new();
            for (k, &size) in sizes.iter().enumerate() {
                for c in 0..*count {
                    let id = k * count + c;
                    let g = random_slp(&ctx, seed.wrapping_add(id as u64), size, profile);
                    let t0 = Instant::now();
                    let t = build_nf_tcslp(&g, &ctx)?;
                    let t1 = Instant::now();
                    let s = convert(&t, &ctx)?;
                    let t2 = Instant::now();
                    let ms = |a: Instant, b: Instant| (b - a).as_secs_f64() * 1e3;
                    let answer = if s.value_length() == BigUint::ZERO { "trivial" } else { "nontrivial" };
                    let _ = writeln!(
                        text,
                        "{id},{},{},{},{:.3},{:.3},{:.3},{answer}",
                        profile.name(),
                        g.size(),
                        g.value_length(),
                        ms(t0, t1),
                        ms(t1, t2),
                        ms(t0, t2)
                    );
                    rows.push(json!({
                        "id": id,
                        "profile": profile.name(),
                        "size": g.size(),
                        "length": g.value_length().to_string(),
                        "build_ms": ms(t0, t1),
                        "convert_ms": ms(t1, t2),
                        "total_ms": ms(t0, t2),
                        "answer": answer,
                    }));
                }
            }
            Ok(Report {
                text,
                json: Value::Array(rows),
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            report.print(cli.json);
            ExitCode::SUCCESS
        }
        Err(e) => {
            if cli.json {
                println!("{}", json!({ "error": e.to_string(), "exit_code": e.exit_code() }));
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
