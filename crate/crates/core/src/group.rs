//! Free products of free abelian groups: the generating set, derived
//! words, explicit normal forms and the constants bundle.

use std::fmt::Write as _;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::abelian::{counts_to_word, AbelianError, ExpVector, ExtraGen, FactorSpec};
use crate::alphabet::{Alphabet, AlphabetError, LetterId};
use crate::extensions::TetherSemantics;
use crate::pipeline::store::Store;
use crate::slp::Slp;

/// Default limit on explicit words handled by [`GroupContext::nf_word`].
pub const DEFAULT_WORD_LIMIT: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("factor `{0}` declared twice")]
    DuplicateFactor(String),
    #[error("unknown factor `{0}`")]
    UnknownFactor(String),
    #[error("the group has no factors")]
    NoFactors,
    #[error("invalid constants: {0}")]
    BadConstants(String),
    #[error("no constants bundle; run calibration or pass constants")]
    MissingConstants,
    #[error("word of length {len} exceeds the limit {limit}")]
    WordTooLong { len: usize, limit: usize },
    #[error("factor `{factor}`: {source}")]
    Factor { factor: String, source: AbelianError },
    #[error(transparent)]
    Alphabet(#[from] AlphabetError),
}

/// An increasing linear function `n -> slope * n + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LinearFn {
    pub slope: u64,
    pub intercept: u64,
}

impl LinearFn {
    pub fn apply(&self, n: u64) -> u64 {
        self.slope * n + self.intercept
    }
}

/// Group-dependent constants. The values are configuration produced by
/// calibration, not derived.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstantsBundle {
    pub delta: u64,
    pub k: u64,
    /// Bound on word differences; also the tether bound `J`.
    pub l: usize,
    pub e_prime: u64,
    pub e1: u64,
    pub e2: u64,
    pub ff: LinearFn,
    /// Quasigeodesic parameters.
    pub lambda: u64,
    pub c: u64,
}

impl ConstantsBundle {
    pub fn validate(&self) -> Result<(), GroupError> {
        let bad = |m: &str| Err(GroupError::BadConstants(m.to_string()));
        if self.k == 0 || self.l == 0 {
            return bad("K and L must be positive");
        }
        if self.e_prime == 0 || self.e1 == 0 || self.e2 == 0 {
            return bad("e1, e2 and eprime must be positive");
        }
        if self.ff.slope == 0 {
            return bad("ff must have slope at least 1");
        }
        if self.lambda == 0 {
            return bad("lambda must be positive");
        }
        Ok(())
    }

    /// The tether bound `J`.
    pub fn tether_bound(&self) -> usize {
        self.l
    }

    pub fn to_line(&self) -> String {
        format!(
            "constants delta={} K={} L={} e1={} e2={} eprime={} ff={},{} lambda={} c={}",
            self.delta,
            self.k,
            self.l,
            self.e1,
            self.e2,
            self.e_prime,
            self.ff.slope,
            self.ff.intercept,
            self.lambda,
            self.c
        )
    }

    /// Reads the `constants` line of a group file or a constants file;
    /// other lines are ignored.
    pub fn parse(text: &str) -> Result<Self, GroupError> {
        for (i, raw) in text.lines().enumerate() {
            let tokens: Vec<&str> = raw.split('#').next().unwrap_or("").split_whitespace().collect();
            if let ["constants", rest @ ..] = tokens.as_slice() {
                return Self::parse_line(i + 1, rest);
            }
        }
        Err(GroupError::MissingConstants)
    }

    fn parse_line(line: usize, tokens: &[&str]) -> Result<Self, GroupError> {
        let err = |m: String| GroupError::Syntax { line, message: m };
        let mut get = std::collections::HashMap::new();
        for t in tokens {
            let (k, v) = t
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, found `{t}`")))?;
            if get.insert(k, v).is_some() {
                return Err(err(format!("constant `{k}` given twice")));
            }
        }
        let num = |key: &str, default: Option<u64>| -> Result<u64, GroupError> {
            match get.get(key) {
                Some(v) => v
                    .parse()
                    .map_err(|_| err(format!("constant `{key}` is not a nonnegative integer"))),
                None => default.ok_or_else(|| err(format!("missing constant `{key}`"))),
            }
        };
        let ff = get.get("ff").ok_or_else(|| err("missing constant `ff`".into()))?;
        let (s, c) = ff
            .split_once(',')
            .ok_or_else(|| err("ff must be `slope,intercept`".into()))?;
        let ff = LinearFn {
            slope: s.parse().map_err(|_| err("bad ff slope".into()))?,
            intercept: c.parse().map_err(|_| err("bad ff intercept".into()))?,
        };
        for k in get.keys() {
            if !["delta", "K", "L", "e1", "e2", "eprime", "ff", "lambda", "c"].contains(k) {
                return Err(err(format!("unknown constant `{k}`")));
            }
        }
        let bundle = ConstantsBundle {
            delta: num("delta", None)?,
            k: num("K", None)?,
            l: num("L", None)? as usize,
            e1: num("e1", None)?,
            e2: num("e2", None)?,
            e_prime: num("eprime", None)?,
            ff,
            lambda: num("lambda", Some(1))?,
            c: num("c", Some(2))?,
        };
        bundle.validate().map_err(|e| err(e.to_string()))?;
        Ok(bundle)
    }
}

/// One free abelian factor of the product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factor {
    pub name: String,
    pub spec: FactorSpec,
    /// Global id of the first letter of this factor's `Y`.
    pub base: u32,
}

/// A maximal run of letters from one factor, summarized by its vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Syllable {
    pub factor: usize,
    pub vector: ExpVector,
}

/// Position of a component in an explicit word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Component {
    pub start: usize,
    pub end: usize,
    pub factor: usize,
}

/// A free product of free abelian groups with the ordered generating set
/// `Sigma`, the disjoint union of the factors' `Y` sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupContext {
    factors: Vec<Factor>,
    alphabet: Arc<Alphabet>,
    /// factor and local index of every letter
    letter_info: Vec<(usize, usize)>,
    inverses: Vec<LetterId>,
    constants: Option<ConstantsBundle>,
    word_limit: usize,
}

impl GroupContext {
    /// Builds a context from `(name, rank, extra generators)` triples;
    /// basis letters are numbered globally in declaration order.
    pub fn new(
        factors: Vec<(String, usize, Vec<ExtraGen>)>,
        constants: Option<ConstantsBundle>,
    ) -> Result<Self, GroupError> {
        if factors.is_empty() {
            return Err(GroupError::NoFactors);
        }
        if let Some(c) = &constants {
            c.validate()?;
        }
        let mut built = Vec::new();
        let mut names = Vec::new();
        let mut letter_info = Vec::new();
        let mut inverses = Vec::new();
        let mut first_basis = 1;
        for (fi, (name, rank, extras)) in factors.into_iter().enumerate() {
            if built.iter().any(|f: &Factor| f.name == name) {
                return Err(GroupError::DuplicateFactor(name));
            }
            let spec = FactorSpec::new(rank, extras, first_basis).map_err(|source| GroupError::Factor {
                factor: name.clone(),
                source,
            })?;
            first_basis += rank;
            let base = names.len() as u32;
            for (i, y) in spec.letters().iter().enumerate() {
                names.push(y.name.clone());
                letter_info.push((fi, i));
                inverses.push(LetterId(base + y.inverse as u32));
            }
            built.push(Factor { name, spec, base });
        }
        let alphabet = Arc::new(Alphabet::from_names(names)?);
        Ok(GroupContext {
            factors: built,
            alphabet,
            letter_info,
            inverses,
            constants,
            word_limit: DEFAULT_WORD_LIMIT,
        })
    }

    /// Free product of free abelian groups of the given ranks, factors
    /// named `H1`, `H2`, ..., with no extra generators.
    pub fn from_ranks(ranks: &[usize], constants: Option<ConstantsBundle>) -> Result<Self, GroupError> {
        Self::new(
            ranks
                .iter()
                .enumerate()
                .map(|(i, &r)| (format!("H{}", i + 1), r, Vec::new()))
                .collect(),
            constants,
        )
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn factor(&self, i: usize) -> &Factor {
        &self.factors[i]
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn constants(&self) -> Option<&ConstantsBundle> {
        self.constants.as_ref()
    }

    /// The constants, or the error the engine reports without them.
    pub fn require_constants(&self) -> Result<&ConstantsBundle, GroupError> {
        self.constants.as_ref().ok_or(GroupError::MissingConstants)
    }

    pub fn with_constants(mut self, constants: ConstantsBundle) -> Result<Self, GroupError> {
        constants.validate()?;
        self.constants = Some(constants);
        Ok(self)
    }

    pub fn word_limit(&self) -> usize {
        self.word_limit
    }

    pub fn set_word_limit(&mut self, limit: usize) {
        self.word_limit = limit;
    }

    pub fn num_letters(&self) -> usize {
        self.letter_info.len()
    }

    pub fn letters(&self) -> impl Iterator<Item = LetterId> {
        (0..self.num_letters() as u32).map(LetterId)
    }

    pub fn factor_of(&self, l: LetterId) -> usize {
        self.letter_info[l.index()].0
    }

    /// Index of `l` within its factor's `Y`.
    pub fn local_index(&self, l: LetterId) -> usize {
        self.letter_info[l.index()].1
    }

    pub fn inverse(&self, l: LetterId) -> LetterId {
        self.inverses[l.index()]
    }

    /// The global letter for local index `y` of factor `f`.
    pub fn global_letter(&self, f: usize, y: usize) -> LetterId {
        LetterId(self.factors[f].base + y as u32)
    }

    pub fn inverse_word(&self, w: &[LetterId]) -> Vec<LetterId> {
        w.iter().rev().map(|&l| self.inverse(l)).collect()
    }

    /// Maximal single-factor runs of `w`.
    pub fn components(&self, w: &[LetterId]) -> Vec<Component> {
        let mut out: Vec<Component> = Vec::new();
        for (i, &l) in w.iter().enumerate() {
            let f = self.factor_of(l);
            match out.last_mut() {
                Some(c) if c.factor == f => c.end = i + 1,
                _ => out.push(Component {
                    start: i,
                    end: i + 1,
                    factor: f,
                }),
            }
        }
        out
    }

    /// The derived word: one syllable per component.
    pub fn derived_word(&self, w: &[LetterId]) -> Vec<Syllable> {
        self.components(w)
            .into_iter()
            .map(|c| {
                let spec = &self.factors[c.factor].spec;
                let local: Vec<usize> = w[c.start..c.end].iter().map(|&l| self.local_index(l)).collect();
                Syllable {
                    factor: c.factor,
                    vector: spec.word_vector(&local),
                }
            })
            .collect()
    }

    /// Free-product reduction of a syllable sequence: merge equal
    /// neighbours and drop zero syllables until alternating.
    pub fn reduce_syllables(&self, syllables: impl IntoIterator<Item = Syllable>) -> Vec<Syllable> {
        let mut out: Vec<Syllable> = Vec::new();
        for s in syllables {
            if s.vector.iter().all(Zero::is_zero) {
                continue;
            }
            match out.last_mut() {
                Some(top) if top.factor == s.factor => {
                    for (a, b) in top.vector.iter_mut().zip(&s.vector) {
                        *a += b;
                    }
                    if top.vector.iter().all(Zero::is_zero) {
                        out.pop();
                    }
                }
                _ => out.push(s),
            }
        }
        out
    }

    /// The normal-form word of a reduced syllable sequence. Intended for
    /// syllables with small vectors.
    pub fn syllables_to_word(&self, syllables: &[Syllable]) -> Vec<LetterId> {
        let mut w = Vec::new();
        for s in syllables {
            let spec = &self.factors[s.factor].spec;
            w.extend(
                counts_to_word(&spec.slex_counts(&s.vector))
                    .into_iter()
                    .map(|y| self.global_letter(s.factor, y)),
            );
        }
        w
    }

    /// The normal form of an explicit word, within the word limit.
    pub fn nf_word(&self, w: &[LetterId]) -> Result<Vec<LetterId>, GroupError> {
        if w.len() > self.word_limit {
            return Err(GroupError::WordTooLong {
                len: w.len(),
                limit: self.word_limit,
            });
        }
        Ok(self.nf_word_unbounded(w))
    }

    fn nf_word_unbounded(&self, w: &[LetterId]) -> Vec<LetterId> {
        self.syllables_to_word(&self.reduce_syllables(self.derived_word(w)))
    }

    /// Whether an explicit word is in normal form.
    pub fn is_nf_word(&self, w: &[LetterId]) -> bool {
        self.nf_word_unbounded(w) == w
    }

    /// Geodesic length over `Sigma` of the element of a reduced syllable
    /// sequence.
    pub fn geodesic_length(&self, syllables: &[Syllable]) -> num_bigint::BigUint {
        syllables
            .iter()
            .map(|s| self.factors[s.factor].spec.geodesic_length(&s.vector))
            .sum()
    }

    /// Per-factor abelianization of a syllable sequence.
    pub fn abelianization(&self, syllables: &[Syllable]) -> Vec<ExpVector> {
        let mut out: Vec<ExpVector> = self.factors.iter().map(|f| f.spec.zero()).collect();
        for s in syllables {
            for (a, b) in out[s.factor].iter_mut().zip(&s.vector) {
                *a += b;
            }
        }
        out
    }

    /// Parses a group file.
    pub fn parse(text: &str) -> Result<Self, GroupError> {
        let mut factors: Vec<(String, usize, Vec<ExtraGen>)> = Vec::new();
        let mut constants = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |m: String| GroupError::Syntax { line, message: m };
            let content = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = content.split_whitespace().collect();
            match tokens.as_slice() {
                [] => {}
                ["factor", name, "rank", r] => {
                    let rank: usize = r.parse().map_err(|_| err(format!("bad rank `{r}`")))?;
                    if factors.iter().any(|f| f.0 == *name) {
                        return Err(GroupError::DuplicateFactor(name.to_string()));
                    }
                    factors.push((name.to_string(), rank, Vec::new()));
                }
                ["extragen", factor, name, "=", ints @ ..] => {
                    let vector = ints
                        .iter()
                        .map(|t| t.parse::<i64>().map_err(|_| err(format!("bad integer `{t}`"))))
                        .collect::<Result<Vec<_>, _>>()?;
                    let f = factors
                        .iter_mut()
                        .find(|f| f.0 == *factor)
                        .ok_or_else(|| GroupError::UnknownFactor(factor.to_string()))?;
                    f.2.push(ExtraGen {
                        name: name.to_string(),
                        vector,
                    });
                }
                ["constants", rest @ ..] => {
                    if constants.is_some() {
                        return Err(err("constants given twice".into()));
                    }
                    constants = Some(ConstantsBundle::parse_line(line, rest)?);
                }
                [kw, ..] => return Err(err(format!("unexpected `{kw}`"))),
            }
        }
        Self::new(factors, constants)
    }

    /// The group file text; parses back to an equal context.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for f in &self.factors {
            let _ = writeln!(s, "factor {} rank {}", f.name, f.spec.rank());
        }
        for f in &self.factors {
            for x in f.spec.extras() {
                let ints: Vec<String> = x.vector.iter().map(i64::to_string).collect();
                let _ = writeln!(s, "extragen {} {} = {}", f.name, x.name, ints.join(" "));
            }
        }
        if let Some(c) = &self.constants {
            let _ = writeln!(s, "{}", c.to_line());
        }
        s
    }

    /// The syllable for `count` copies of a letter.
    pub fn letter_syllable(&self, l: LetterId, count: i64) -> Syllable {
        let f = self.factor_of(l);
        let spec = &self.factors[f].spec;
        let mut v = spec.zero();
        spec.add_letter(&mut v, self.local_index(l), &BigInt::from(count));
        Syllable { factor: f, vector: v }
    }

    /// Whether the value of `p` is in normal form, decided on the
    /// compressed derived word without decompression.
    pub fn is_nf_reduced_slp(&self, p: &Slp) -> bool {
        let mut store = Store::new(self);
        match store.import(p) {
            Ok(n) => store.is_nf(n),
            Err(_) => false,
        }
    }
}

impl TetherSemantics for GroupContext {
    fn normal_form(&self, word: &[LetterId]) -> Vec<LetterId> {
        self.nf_word_unbounded(word)
    }

    fn factor_of(&self, letter: LetterId) -> usize {
        GroupContext::factor_of(self, letter)
    }

    fn inverse(&self, letter: LetterId) -> LetterId {
        GroupContext::inverse(self, letter)
    }
}

#[cfg(test)]
mod tests;
