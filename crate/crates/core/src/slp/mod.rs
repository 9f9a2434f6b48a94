//! Straight-line programs: acyclic grammars deriving exactly one word.
//!
//! Variables live in one flat table kept in topological order: every
//! variable referenced by rule `i` has an index smaller than `i`. Bottom-up
//! passes are therefore plain forward loops.

mod ops;

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::alphabet::{Alphabet, LetterId};

pub use ops::{Dfa, Part};
pub(crate) use ops::Cutter;

/// Arbitrary-precision length or position.
pub type BigLength = BigUint;

/// Index of a variable inside a program.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X{}", self.0)
    }
}

/// One symbol of a right-hand side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Symbol {
    Letter(LetterId),
    Var(VarId),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SlpError {
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("letter {0} is outside the alphabet")]
    LetterOutOfRange(LetterId),
    #[error("the successor relation has a cycle through {0}")]
    Cycle(String),
    #[error("index out of range: [{start}, {end}) in a word of length {len}")]
    IndexOutOfRange {
        start: BigLength,
        end: BigLength,
        len: BigLength,
    },
    #[error("value of length {len} exceeds the limit {max}")]
    TooLong { len: BigLength, max: BigLength },
    #[error("programs are over different alphabets")]
    AlphabetMismatch,
    #[error("program has no variables")]
    Empty,
}

static SIZE_BOUND_CHECKS: AtomicU64 = AtomicU64::new(0);
static SIZE_BOUND_VIOLATIONS: AtomicU64 = AtomicU64::new(0);

/// Number of `|val| <= 3^(size/3)` checks performed so far in this process.
pub fn size_bound_checks() -> u64 {
    SIZE_BOUND_CHECKS.load(Ordering::Relaxed)
}

/// Number of those checks that failed.
pub fn size_bound_violations() -> u64 {
    SIZE_BOUND_VIOLATIONS.load(Ordering::Relaxed)
}

/// Checks `len^3 <= 3^size`, the bound on the value length of a program of
/// the given size. Counted by [`size_bound_checks`].
pub fn check_size_bound(len: &BigUint, size: u64) -> bool {
    SIZE_BOUND_CHECKS.fetch_add(1, Ordering::Relaxed);
    let ok = size_bound_holds(len, size);
    if !ok {
        SIZE_BOUND_VIOLATIONS.fetch_add(1, Ordering::Relaxed);
    }
    ok
}

fn size_bound_holds(len: &BigUint, size: u64) -> bool {
    if len.is_zero() {
        return true;
    }
    // log2(3)/3 = 0.5283; compare with a safety gap before doing exact work.
    let bits = len.bits() as f64;
    let budget = size as f64 * 0.528_320_833_573_718_6;
    if bits <= budget - 2.0 {
        return true;
    }
    if bits - 1.0 > budget + 2.0 {
        return false;
    }
    let lhs = len * len * len;
    let rhs = BigUint::from(3u32).pow(size as u32);
    lhs <= rhs
}

/// A straight-line program over a shared alphabet.
#[derive(Clone, Debug)]
pub struct Slp {
    alphabet: Arc<Alphabet>,
    rules: Vec<Vec<Symbol>>,
    start: VarId,
}

impl PartialEq for Slp {
    fn eq(&self, other: &Self) -> bool {
        self.start == other.start
            && self.rules == other.rules
            && (Arc::ptr_eq(&self.alphabet, &other.alphabet) || self.alphabet == other.alphabet)
    }
}

impl Eq for Slp {}

impl Slp {
    /// Builds a program from rules in any order. Validates references and
    /// acyclicity, then renumbers variables into topological order.
    pub fn from_rules(
        alphabet: Arc<Alphabet>,
        rules: Vec<Vec<Symbol>>,
        start: VarId,
    ) -> Result<Self, SlpError> {
        Self::from_rules_with_map(alphabet, rules, start).map(|(p, _)| p)
    }

    /// As [`Slp::from_rules`], also returning the new index of every input
    /// variable.
    pub fn from_rules_with_map(
        alphabet: Arc<Alphabet>,
        rules: Vec<Vec<Symbol>>,
        start: VarId,
    ) -> Result<(Self, Vec<VarId>), SlpError> {
        let n = rules.len();
        if n == 0 {
            return Err(SlpError::Empty);
        }
        if start.index() >= n {
            return Err(SlpError::UnknownVariable(start.to_string()));
        }
        for rhs in &rules {
            for sym in rhs {
                match *sym {
                    Symbol::Var(v) if v.index() >= n => {
                        return Err(SlpError::UnknownVariable(v.to_string()))
                    }
                    Symbol::Letter(l) if l.index() >= alphabet.len() => {
                        return Err(SlpError::LetterOutOfRange(l))
                    }
                    _ => {}
                }
            }
        }
        let order = topological_order(&rules)?;
        let mut map = vec![VarId(0); n];
        for (new, &old) in order.iter().enumerate() {
            map[old] = VarId(new as u32);
        }
        let mut sorted = Vec::with_capacity(n);
        for &old in &order {
            sorted.push(
                rules[old]
                    .iter()
                    .map(|s| match *s {
                        Symbol::Var(v) => Symbol::Var(map[v.index()]),
                        l => l,
                    })
                    .collect(),
            );
        }
        let slp = Slp {
            alphabet,
            rules: sorted,
            start: map[start.index()],
        };
        slp.debug_check_bound();
        Ok((slp, map))
    }

    /// Internal constructor for rules already in topological order.
    pub(crate) fn from_sorted(alphabet: Arc<Alphabet>, rules: Vec<Vec<Symbol>>, start: VarId) -> Self {
        debug_assert!(rules.iter().enumerate().all(|(i, rhs)| rhs
            .iter()
            .all(|s| !matches!(s, Symbol::Var(v) if v.index() >= i))));
        let slp = Slp {
            alphabet,
            rules,
            start,
        };
        slp.debug_check_bound();
        slp
    }

    fn debug_check_bound(&self) {
        if cfg!(debug_assertions) {
            let len = self.value_length();
            assert!(
                check_size_bound(&len, self.size() as u64),
                "value length {} violates the size bound for size {}",
                len,
                self.size()
            );
        }
    }

    /// The program deriving the empty word.
    pub fn empty(alphabet: Arc<Alphabet>) -> Self {
        Self::from_sorted(alphabet, vec![vec![]], VarId(0))
    }

    /// A single-variable program deriving `word` literally.
    pub fn from_word(alphabet: Arc<Alphabet>, word: &[LetterId]) -> Self {
        let rhs = word.iter().map(|&l| Symbol::Letter(l)).collect();
        Self::from_sorted(alphabet, vec![rhs], VarId(0))
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn rules(&self) -> &[Vec<Symbol>] {
        &self.rules
    }

    pub fn rule(&self, v: VarId) -> &[Symbol] {
        &self.rules[v.index()]
    }

    pub fn start(&self) -> VarId {
        self.start
    }

    pub fn num_vars(&self) -> usize {
        self.rules.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> {
        (0..self.rules.len() as u32).map(VarId)
    }

    /// Total number of symbol occurrences in right-hand sides.
    pub fn size(&self) -> usize {
        self.rules.iter().map(Vec::len).sum()
    }

    pub fn same_alphabet(&self, other: &Slp) -> bool {
        Arc::ptr_eq(&self.alphabet, &other.alphabet) || self.alphabet == other.alphabet
    }

    pub(crate) fn check_var(&self, v: VarId) -> Result<(), SlpError> {
        if v.index() < self.rules.len() {
            Ok(())
        } else {
            Err(SlpError::UnknownVariable(v.to_string()))
        }
    }

    /// Length of the value of every variable.
    pub fn lengths(&self) -> Vec<BigLength> {
        let mut lens: Vec<BigLength> = Vec::with_capacity(self.rules.len());
        for rhs in &self.rules {
            let mut total = BigLength::zero();
            for sym in rhs {
                match *sym {
                    Symbol::Letter(_) => total += 1u32,
                    Symbol::Var(v) => total += &lens[v.index()],
                }
            }
            lens.push(total);
        }
        lens
    }

    /// Length of the value of the start variable.
    pub fn value_length(&self) -> BigLength {
        self.lengths().swap_remove(self.start.index())
    }

    /// Heights of all variables; a rule without variables has height 1.
    pub fn heights(&self) -> Vec<u32> {
        let mut hs: Vec<u32> = Vec::with_capacity(self.rules.len());
        for rhs in &self.rules {
            let h = rhs
                .iter()
                .filter_map(|s| match *s {
                    Symbol::Var(v) => Some(hs[v.index()]),
                    Symbol::Letter(_) => None,
                })
                .max()
                .unwrap_or(0)
                + 1;
            hs.push(h);
        }
        hs
    }

    /// Height of one variable: the least `r` with `rho^r(A)` terminal.
    pub fn height(&self, v: VarId) -> Result<u32, SlpError> {
        self.check_var(v)?;
        Ok(self.heights()[v.index()])
    }

    /// Variables reachable from `root`, as a membership mask.
    pub fn reachable_from(&self, root: VarId) -> Vec<bool> {
        let mut seen = vec![false; self.rules.len()];
        seen[root.index()] = true;
        for i in (0..self.rules.len()).rev() {
            if !seen[i] {
                continue;
            }
            for sym in &self.rules[i] {
                if let Symbol::Var(v) = *sym {
                    seen[v.index()] = true;
                }
            }
        }
        seen
    }

    /// The explicit value, refusing values longer than `max_len`.
    pub fn decompress(&self, max_len: u64) -> Result<Vec<LetterId>, SlpError> {
        self.decompress_var(self.start, max_len)
    }

    /// The explicit value of one variable, refusing long values.
    pub fn decompress_var(&self, v: VarId, max_len: u64) -> Result<Vec<LetterId>, SlpError> {
        self.check_var(v)?;
        let len = self.lengths().swap_remove(v.index());
        if len > BigUint::from(max_len) {
            return Err(SlpError::TooLong {
                len,
                max: max_len.into(),
            });
        }
        let mut out = Vec::with_capacity(len.try_into().unwrap_or(0usize));
        let mut stack = vec![Symbol::Var(v)];
        while let Some(sym) = stack.pop() {
            match sym {
                Symbol::Letter(l) => out.push(l),
                Symbol::Var(x) => stack.extend(self.rules[x.index()].iter().rev().copied()),
            }
        }
        Ok(out)
    }

    /// The program with every letter replaced by `f(letter)` and every
    /// right-hand side optionally reversed.
    pub fn map_letters(&self, reverse: bool, f: impl Fn(LetterId) -> LetterId) -> Slp {
        let rules = self
            .rules
            .iter()
            .map(|rhs| {
                let mut out: Vec<Symbol> = rhs
                    .iter()
                    .map(|s| match *s {
                        Symbol::Letter(l) => Symbol::Letter(f(l)),
                        v => v,
                    })
                    .collect();
                if reverse {
                    out.reverse();
                }
                out
            })
            .collect();
        Slp::from_sorted(self.alphabet.clone(), rules, self.start)
    }

    /// Renders the program in the text format.
    pub fn to_text(&self) -> String {
        crate::text::write_slp(self)
    }

    /// Parses a program in the text format; letters are interned into a
    /// fresh alphabet in order of first appearance.
    pub fn parse(text: &str) -> Result<Slp, crate::text::ParseError> {
        crate::text::parse_slp(text, None)
    }

    /// Parses a program whose letters must belong to `alphabet`.
    pub fn parse_with(text: &str, alphabet: Arc<Alphabet>) -> Result<Slp, crate::text::ParseError> {
        crate::text::parse_slp(text, Some(alphabet))
    }
}

fn topological_order(rules: &[Vec<Symbol>]) -> Result<Vec<usize>, SlpError> {
    topo_sort(rules.len(), |v, out| {
        out.extend(rules[v].iter().filter_map(|s| match *s {
            Symbol::Var(c) => Some(c.index()),
            Symbol::Letter(_) => None,
        }))
    })
    .map_err(|v| SlpError::Cycle(VarId(v as u32).to_string()))
}

/// Depth-first topological sort of `0..n`; children come before parents.
/// On a cycle, returns a variable lying on it.
pub(crate) fn topo_sort(
    n: usize,
    children: impl Fn(usize, &mut Vec<usize>),
) -> Result<Vec<usize>, usize> {
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    let mut order = Vec::with_capacity(n);
    let mut buf = Vec::new();
    for root in 0..n {
        if state[root] != 0 {
            continue;
        }
        buf.clear();
        children(root, &mut buf);
        let mut stack: Vec<(usize, Vec<usize>, usize)> = vec![(root, buf.clone(), 0)];
        state[root] = 1;
        while let Some((v, kids, pos)) = stack.last_mut() {
            let mut pushed = None;
            while *pos < kids.len() {
                let c = kids[*pos];
                *pos += 1;
                match state[c] {
                    0 => {
                        pushed = Some(c);
                        break;
                    }
                    1 => return Err(c),
                    _ => {}
                }
            }
            match pushed {
                Some(c) => {
                    state[c] = 1;
                    buf.clear();
                    children(c, &mut buf);
                    stack.push((c, buf.clone(), 0));
                }
                None => {
                    state[*v] = 2;
                    order.push(*v);
                    stack.pop();
                }
            }
        }
    }
    Ok(order)
}

/// Incremental builder producing programs in topological order.
#[derive(Debug)]
pub struct SlpBuilder {
    alphabet: Arc<Alphabet>,
    rules: Vec<Vec<Symbol>>,
    letter_vars: HashMap<LetterId, VarId>,
}

impl SlpBuilder {
    pub fn new(alphabet: Arc<Alphabet>) -> Self {
        SlpBuilder {
            alphabet,
            rules: Vec::new(),
            letter_vars: HashMap::new(),
        }
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    /// Adds a rule whose variables must already exist.
    pub fn push(&mut self, rhs: Vec<Symbol>) -> VarId {
        debug_assert!(rhs
            .iter()
            .all(|s| !matches!(s, Symbol::Var(v) if v.index() >= self.rules.len())));
        self.rules.push(rhs);
        VarId(self.rules.len() as u32 - 1)
    }

    /// A shared variable deriving a single letter.
    pub fn letter(&mut self, l: LetterId) -> VarId {
        if let Some(&v) = self.letter_vars.get(&l) {
            return v;
        }
        let v = self.push(vec![Symbol::Letter(l)]);
        self.letter_vars.insert(l, v);
        v
    }

    pub fn pair(&mut self, a: VarId, b: VarId) -> VarId {
        self.push(vec![Symbol::Var(a), Symbol::Var(b)])
    }

    pub fn rule(&self, v: VarId) -> &[Symbol] {
        &self.rules[v.index()]
    }

    pub fn num_vars(&self) -> usize {
        self.rules.len()
    }

    /// Copies all rules of `p`, returning the new index of each of its
    /// variables.
    pub fn import(&mut self, p: &Slp) -> Vec<VarId> {
        let offset = self.rules.len() as u32;
        for rhs in &p.rules {
            self.rules.push(
                rhs.iter()
                    .map(|s| match *s {
                        Symbol::Var(v) => Symbol::Var(VarId(v.0 + offset)),
                        l => l,
                    })
                    .collect(),
            );
        }
        (0..p.rules.len() as u32).map(|i| VarId(i + offset)).collect()
    }

    /// Finishes with `start`, dropping unreachable variables.
    pub fn finish(self, start: VarId) -> Slp {
        Slp::from_sorted(self.alphabet, self.rules, start).trim()
    }

    /// Finishes with `start` keeping every variable.
    pub fn finish_untrimmed(self, start: VarId) -> Slp {
        Slp::from_sorted(self.alphabet, self.rules, start)
    }
}

/// Power of two helper used by tests and generators.
pub fn pow2(k: u32) -> BigLength {
    BigLength::one() << k
}

#[cfg(test)]
mod tests;
