use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cwp_core::group::GroupContext;
use cwp_core::slp::Slp;
use tempfile::TempDir;

const GROUP: &str = "factor H1 rank 2\nfactor H2 rank 1\n\
                     constants delta=0 K=3 L=4 e1=4 e2=4 eprime=4 ff=1,8\n";

fn cwp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cwp")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

struct Files {
    dir: TempDir,
}

impl Files {
    fn new() -> Self {
        let f = Files {
            dir: TempDir::new().unwrap(),
        };
        f.put("g.txt", GROUP);
        f
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn put(&self, name: &str, text: &str) -> String {
        let p = self.path(name);
        fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_string()
    }
}

fn doubling(n: usize) -> String {
    let mut s = format!("start X{n}\nX0 = 'a' 'b'\n");
    for i in 1..=n {
        s.push_str(&format!("X{i} = X{} X{}\n", i - 1, i - 1));
    }
    s
}

#[test]
fn cwp_answers() {
    let f = Files::new();
    let triv = f.put("t.slp", "start S\nS = 'z1' 'z3' 'z3^-1' 'z1^-1'\n");
    let non = f.put("n.slp", "start S\nS = 'z1' 'z3' 'z1' 'z3^-1'\n");
    let o = cwp(&["cwp", &f.arg("g.txt"), &triv]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().next(), Some("trivial"));
    let o = cwp(&["cwp", &f.arg("g.txt"), &non]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("nontrivial"));
    let o = cwp(&["--json", "cwp", &f.arg("g.txt"), &non]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["answer"], "nontrivial");
}

#[test]
fn parse_errors_exit_2() {
    let f = Files::new();
    let bad = f.put("bad.slp", "start S\nS = 'z1'\nnonsense here\n");
    let o = cwp(&["cwp", &f.arg("g.txt"), &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    let g0 = f.put("g0.txt", "factor H1 rank 2\n");
    let ok = f.put("ok.slp", "start S\nS = 'z1'\n");
    assert_eq!(cwp(&["cwp", &g0, &ok]).status.code(), Some(2));
    // constants supplied separately
    let c = f.put("c.txt", "constants delta=0 K=3 L=4 e1=4 e2=4 eprime=4 ff=1,8\n");
    let o = cwp(&["cwp", &g0, &ok, "--constants", &c]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn nf_round_trips() {
    let f = Files::new();
    let ctx = GroupContext::parse(GROUP).unwrap();
    let cases = [
        ("start S\nS = 'z1' 'z1^-1'\n", ""),
        ("start S\nS = B C\nB = 'z1' 'z3'\nC = 'z3^-1' 'z1'\n", "'z1^2'"),
        ("start S\nS = A A\nA = 'z1' 'z2' 'z3'\n", "'z1' 'z2' 'z3' 'z1' 'z2' 'z3'"),
    ];
    for (i, (input, expect)) in cases.iter().enumerate() {
        let inp = f.put(&format!("in{i}.slp"), input);
        let out = f.arg(&format!("out{i}.slp"));
        let o = cwp(&["nf", &f.arg("g.txt"), &inp, "-o", &out]);
        assert!(o.status.success());
        let p = Slp::parse_with(&fs::read_to_string(&out).unwrap(), ctx.alphabet().clone()).unwrap();
        assert!(ctx.is_nf_reduced_slp(&p));
        assert_eq!(ctx.alphabet().format_word(&p.decompress(100).unwrap()), *expect);
    }
}

#[test]
fn utilities() {
    let f = Files::new();
    let ab = f.put("ab.slp", &doubling(10));
    let o = cwp(&["len", &ab]);
    assert_eq!(stdout(&o), "2048\n");
    let ab2 = f.put("ab2.slp", "start S\nS = T T\nT = U U\nU = 'a' 'b' 'a' 'b'\n");
    let ab3 = f.put("ab3.slp", "start S\nS = 'a' 'b' 'a' 'b' 'a' 'b' 'a' 'b' 'a' 'b' 'a' 'b' 'a' 'b' 'a' 'b'\n");
    assert_eq!(stdout(&cwp(&["eq", &ab2, &ab3])), "equal\n");
    let ab4 = f.put("ab4.slp", "start S\nS = 'b' 'a'\n");
    assert_eq!(stdout(&cwp(&["eq", &ab2, &ab4])), "different\n");
    let big = f.put("big.slp", &doubling(79));
    let o = cwp(&["decompress", "--max-len", "100", &big]);
    assert_eq!(o.status.code(), Some(4));
    let o = cwp(&["decompress", &ab4]);
    assert_eq!(stdout(&o), "'b' 'a'\n");
    let o = cwp(&["cut", &big, "1", "3"]);
    let p = Slp::parse(&stdout(&o)).unwrap();
    assert_eq!(p.alphabet().format_word(&p.decompress(10).unwrap()), "'b' 'a'");
    let w = f.put("w.slp", "start S\nS = 'z3' 'z1' 'z1' 'z3'\n");
    let o = cwp(&["cut", "--compressed", "--group", &f.arg("g.txt"), &w, "1", "2"]);
    let p = Slp::parse(&stdout(&o)).unwrap();
    assert_eq!(p.decompress(10).unwrap().len(), 2);
}

#[test]
fn calibrate_writes_a_group_file() {
    let f = Files::new();
    let g0 = f.put("g0.txt", "factor A rank 2\nfactor B rank 1\n");
    let out = f.arg("cal.txt");
    assert!(cwp(&["calibrate", &g0, "--max-word-len", "8", "-o", &out]).status.success());
    let ctx = GroupContext::parse(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(ctx.constants().is_some());
}

#[test]
fn bench_prints_csv() {
    let f = Files::new();
    let o = cwp(&["bench", &f.arg("g.txt"), "--sizes", "16,32", "--count", "2"]);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "id,profile,size,length,build_ms,convert_ms,total_ms,answer");
    assert_eq!(rows.len(), 5);
    assert!(cwp(&["bench", &f.arg("g.txt"), "--profile", "nope"]).status.code() == Some(2));
}

#[test]
fn trace_dir_and_determinism() {
    let f = Files::new();
    let inp = f.put("in.slp", "start S\nS = B C\nB = 'z1' 'z3'\nC = 'z3^-1' 'z1'\n");
    let dir = f.arg("trace");
    let a = cwp(&["cwp", &f.arg("g.txt"), &inp, "--trace-dir", &dir]);
    let b = cwp(&["cwp", &f.arg("g.txt"), &inp, "--trace-dir", &dir]);
    assert_eq!(a.stdout, b.stdout);
    for name in ["input.slp", "nf.tcslp", "nf.slp"] {
        assert!(Path::new(&dir).join(name).exists());
    }
    let x = cwp(&["nf", &f.arg("g.txt"), &inp]);
    let y = cwp(&["nf", &f.arg("g.txt"), &inp]);
    assert_eq!(x.stdout, y.stdout);
}
