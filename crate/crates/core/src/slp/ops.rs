//! Polynomial-time operations on programs: trimming, normal form,
//! extraction, concatenation, automaton membership, compactness.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{BigLength, Slp, SlpBuilder, SlpError, Symbol, VarId};
use crate::alphabet::{Alphabet, LetterId};

/// One operand of [`Slp::concat`].
#[derive(Clone, Copy, Debug)]
pub enum Part<'a> {
    Program(&'a Slp),
    Word(&'a [LetterId]),
}

/// A complete deterministic automaton over letter indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    pub start: usize,
    pub accepting: Vec<bool>,
    /// `delta[state][letter]` is the successor state.
    pub delta: Vec<Vec<usize>>,
}

impl Dfa {
    pub fn num_states(&self) -> usize {
        self.accepting.len()
    }

    /// Runs the automaton on an explicit word.
    pub fn accepts(&self, word: &[LetterId]) -> bool {
        let end = word
            .iter()
            .fold(self.start, |q, l| self.delta[q][l.index()]);
        self.accepting[end]
    }
}

impl Slp {
    /// Drops variables not reachable from the start and renumbers.
    pub fn trim(&self) -> Slp {
        self.restrict_unchecked(self.start)
    }

    /// The program rooted at `v`, keeping only what `v` reaches.
    pub fn restriction(&self, v: VarId) -> Result<Slp, SlpError> {
        self.check_var(v)?;
        Ok(self.restrict_unchecked(v))
    }

    fn restrict_unchecked(&self, root: VarId) -> Slp {
        let keep = self.reachable_from(root);
        let mut map = vec![u32::MAX; self.rules.len()];
        let mut rules = Vec::new();
        for (i, rhs) in self.rules.iter().enumerate() {
            if !keep[i] {
                continue;
            }
            map[i] = rules.len() as u32;
            rules.push(
                rhs.iter()
                    .map(|s| match *s {
                        Symbol::Var(v) => Symbol::Var(VarId(map[v.index()])),
                        l => l,
                    })
                    .collect(),
            );
        }
        Slp::from_sorted(self.alphabet.clone(), rules, VarId(map[root.index()]))
    }

    /// True when every rule is a single letter or a pair of variables, or
    /// the program is the one-rule empty program.
    pub fn is_cnf(&self) -> bool {
        if self.rules.len() == 1 && self.rules[0].is_empty() {
            return true;
        }
        self.rules.iter().all(|rhs| {
            matches!(rhs.as_slice(), [Symbol::Letter(_)])
                || matches!(rhs.as_slice(), [Symbol::Var(_), Symbol::Var(_)])
        })
    }

    /// Chomsky normal form with left-associative splitting of long rules.
    /// The empty value gives the one-rule empty program.
    pub fn to_cnf(&self) -> Slp {
        let p = self.trim();
        let mut b = SlpBuilder::new(p.alphabet.clone());
        // image of each input variable: None when its value is empty
        let mut image: Vec<Option<VarId>> = Vec::with_capacity(p.rules.len());
        for rhs in &p.rules {
            let mut acc: Option<VarId> = None;
            for sym in rhs {
                let next = match *sym {
                    Symbol::Letter(l) => Some(b.letter(l)),
                    Symbol::Var(v) => image[v.index()],
                };
                if let Some(n) = next {
                    acc = Some(match acc {
                        None => n,
                        Some(a) => b.pair(a, n),
                    });
                }
            }
            image.push(acc);
        }
        match image[p.start.index()] {
            None => Slp::empty(p.alphabet.clone()),
            Some(s) => b.finish(s),
        }
    }

    /// A program for `val[i:j)`, built by descending the derivation.
    pub fn extract(&self, i: &BigLength, j: &BigLength) -> Result<Slp, SlpError> {
        let lens = self.lengths();
        let total = &lens[self.start.index()];
        if i > j || j > total {
            return Err(SlpError::IndexOutOfRange {
                start: i.clone(),
                end: j.clone(),
                len: total.clone(),
            });
        }
        if i == j {
            return Ok(Slp::empty(self.alphabet.clone()));
        }
        let mut b = SlpBuilder::new(self.alphabet.clone());
        b.import(self);
        let mut cutter = Cutter::with_lengths(lens);
        let root = cutter.range(&mut b, self.start, i.clone(), j.clone());
        Ok(b.finish(root))
    }

    /// Concatenation of programs and literal words, left to right.
    pub fn concat(alphabet: Arc<Alphabet>, parts: &[Part<'_>]) -> Result<Slp, SlpError> {
        let mut b = SlpBuilder::new(alphabet.clone());
        let mut top = Vec::new();
        for part in parts {
            match part {
                Part::Program(p) => {
                    if !(Arc::ptr_eq(p.alphabet(), &alphabet) || **p.alphabet() == *alphabet) {
                        return Err(SlpError::AlphabetMismatch);
                    }
                    let map = b.import(p);
                    top.push(Symbol::Var(map[p.start.index()]));
                }
                Part::Word(w) => {
                    if let Some(&l) = w.iter().find(|l| l.index() >= alphabet.len()) {
                        return Err(SlpError::LetterOutOfRange(l));
                    }
                    top.extend(w.iter().map(|&l| Symbol::Letter(l)));
                }
            }
        }
        let start = b.push(top);
        Ok(b.finish(start))
    }

    /// Membership of the value in the language of `dfa`, by composing
    /// per-variable transition maps bottom-up.
    pub fn fsa_membership(&self, dfa: &Dfa) -> bool {
        let n = dfa.num_states();
        let mut maps: Vec<Vec<usize>> = Vec::with_capacity(self.rules.len());
        for rhs in &self.rules {
            let mut m: Vec<usize> = (0..n).collect();
            for sym in rhs {
                match *sym {
                    Symbol::Letter(l) => {
                        for q in m.iter_mut() {
                            *q = dfa.delta[*q][l.index()];
                        }
                    }
                    Symbol::Var(v) => {
                        let child = &maps[v.index()];
                        for q in m.iter_mut() {
                            *q = child[*q];
                        }
                    }
                }
            }
            maps.push(m);
        }
        dfa.accepting[maps[self.start.index()][dfa.start]]
    }

    /// Whether `size <= max(C * log2 |val|, 1)`, decided exactly.
    pub fn is_compact(&self, c: &BigRational) -> bool {
        let size = self.size() as u64;
        if size <= 1 {
            return true;
        }
        let len = self.value_length();
        if len <= BigUint::one() || !c.is_positive() {
            return false;
        }
        // size <= (num/den) log2 N  <=>  2^(size*den) <= N^num
        let num = c.numer().to_u32().expect("compactness constant numerator fits in u32");
        let den = c.denom().to_u64().expect("compactness constant denominator fits in u64");
        let lhs_bits = size * den;
        // cheap bracket on log2 N^num before the exact power
        let nbits = len.bits();
        if (nbits - 1) * num as u64 >= lhs_bits {
            return true;
        }
        if nbits * (num as u64) <= lhs_bits {
            return false;
        }
        let rhs = len.pow(num);
        (BigUint::one() << lhs_bits) <= rhs
    }
}

/// Memoized prefix and suffix extraction over an [`SlpBuilder`].
pub(crate) struct Cutter {
    lens: Vec<BigLength>,
    prefixes: HashMap<(VarId, BigLength), VarId>,
    suffixes: HashMap<(VarId, BigLength), VarId>,
}

impl Cutter {
    pub(crate) fn new() -> Self {
        Self::with_lengths(Vec::new())
    }

    fn with_lengths(lens: Vec<BigLength>) -> Self {
        Cutter {
            lens,
            prefixes: HashMap::new(),
            suffixes: HashMap::new(),
        }
    }

    /// Computes lengths for rules added to `b` since the last call.
    pub(crate) fn sync(&mut self, b: &SlpBuilder) {
        for i in self.lens.len()..b.num_vars() {
            let mut total = BigLength::zero();
            for sym in b.rule(VarId(i as u32)) {
                match *sym {
                    Symbol::Letter(_) => total += 1u32,
                    Symbol::Var(v) => total += &self.lens[v.index()],
                }
            }
            self.lens.push(total);
        }
    }

    pub(crate) fn len(&self, v: VarId) -> &BigLength {
        &self.lens[v.index()]
    }

    fn push(&mut self, b: &mut SlpBuilder, rhs: Vec<Symbol>) -> VarId {
        let v = b.push(rhs);
        self.sync(b);
        v
    }

    fn len_of(&self, s: Symbol) -> BigLength {
        match s {
            Symbol::Letter(_) => BigLength::one(),
            Symbol::Var(v) => self.lens[v.index()].clone(),
        }
    }

    /// Variable for `val(v)[i:j)` with `i < j`.
    pub(crate) fn range(&mut self, b: &mut SlpBuilder, mut v: VarId, mut i: BigLength, mut j: BigLength) -> VarId {
        loop {
            if i.is_zero() {
                return self.prefix(b, v, j);
            }
            if j == self.lens[v.index()] {
                return self.suffix(b, v, i);
            }
            let rhs: Vec<Symbol> = b.rule(v).to_vec();
            let mut off = BigLength::zero();
            let mut descend = None;
            let mut out = Vec::new();
            for sym in rhs {
                let l = self.len_of(sym);
                let end = &off + &l;
                if end <= i || off >= j {
                    off = end;
                    continue;
                }
                if off <= i && j <= end {
                    if let Symbol::Var(c) = sym {
                        descend = Some((c, &i - &off, &j - &off));
                    } else {
                        out.push(sym);
                    }
                    break;
                }
                if off >= i && end <= j {
                    out.push(sym);
                } else if off < i {
                    let Symbol::Var(c) = sym else { unreachable!() };
                    out.push(Symbol::Var(self.suffix(b, c, &i - &off)));
                } else {
                    let Symbol::Var(c) = sym else { unreachable!() };
                    out.push(Symbol::Var(self.prefix(b, c, &j - &off)));
                }
                off = end;
            }
            match descend {
                Some((c, ni, nj)) => {
                    v = c;
                    i = ni;
                    j = nj;
                }
                None => return self.push(b, out),
            }
        }
    }

    /// Variable for `val(v)[:k)` with `k > 0`.
    fn prefix(&mut self, b: &mut SlpBuilder, v: VarId, k: BigLength) -> VarId {
        // walk down, then build the spine bottom-up
        let mut spine: Vec<(VarId, BigLength, Vec<Symbol>)> = Vec::new();
        let mut cur = v;
        let mut k = k;
        let base = loop {
            if k == self.lens[cur.index()] {
                break cur;
            }
            if let Some(&hit) = self.prefixes.get(&(cur, k.clone())) {
                break hit;
            }
            let rhs: Vec<Symbol> = b.rule(cur).to_vec();
            let mut off = BigLength::zero();
            let mut kept = Vec::new();
            let mut next = None;
            for sym in rhs {
                let end = &off + self.len_of(sym);
                if end <= k {
                    kept.push(sym);
                    if end == k {
                        break;
                    }
                } else {
                    let Symbol::Var(c) = sym else { unreachable!() };
                    next = Some((c, &k - &off));
                    break;
                }
                off = end;
            }
            match next {
                None => {
                    let id = self.push(b, kept);
                    self.prefixes.insert((cur, k.clone()), id);
                    break id;
                }
                Some((c, nk)) => {
                    spine.push((cur, k.clone(), kept));
                    cur = c;
                    k = nk;
                }
            }
        };
        let mut acc = base;
        while let Some((var, kk, mut kept)) = spine.pop() {
            kept.push(Symbol::Var(acc));
            acc = self.push(b, kept);
            self.prefixes.insert((var, kk), acc);
        }
        acc
    }

    /// Variable for `val(v)[k:)` with `k < |val(v)|`.
    fn suffix(&mut self, b: &mut SlpBuilder, v: VarId, k: BigLength) -> VarId {
        let mut spine: Vec<(VarId, BigLength, Vec<Symbol>)> = Vec::new();
        let mut cur = v;
        let mut k = k;
        let base = loop {
            if k.is_zero() {
                break cur;
            }
            if let Some(&hit) = self.suffixes.get(&(cur, k.clone())) {
                break hit;
            }
            let rhs: Vec<Symbol> = b.rule(cur).to_vec();
            let mut off = BigLength::zero();
            let mut idx = 0;
            let mut next = None;
            while idx < rhs.len() {
                let sym = rhs[idx];
                let end = &off + self.len_of(sym);
                if end <= k {
                    off = end;
                    idx += 1;
                    if off == k {
                        break;
                    }
                    continue;
                }
                let Symbol::Var(c) = sym else { unreachable!() };
                next = Some((c, &k - &off));
                idx += 1;
                break;
            }
            let rest = rhs[idx..].to_vec();
            match next {
                None => {
                    let id = self.push(b, rest);
                    self.suffixes.insert((cur, k.clone()), id);
                    break id;
                }
                Some((c, nk)) => {
                    spine.push((cur, k.clone(), rest));
                    cur = c;
                    k = nk;
                }
            }
        };
        let mut acc = base;
        while let Some((var, kk, rest)) = spine.pop() {
            let mut rhs = vec![Symbol::Var(acc)];
            rhs.extend(rest);
            acc = self.push(b, rhs);
            self.suffixes.insert((var, kk), acc);
        }
        acc
    }
}
