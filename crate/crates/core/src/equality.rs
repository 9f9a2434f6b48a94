//! Deterministic equality of compressed words by recompression.
//!
//! Both words are compressed in lock step: every phase replaces maximal
//! blocks `a^l` by fresh letters, then replaces the pairs `ab` with `a` in
//! a left class and `b` in a right class. Letters that would cross a
//! variable boundary are first popped out of the variable into its
//! parents. Each step is an injective rewriting applied uniformly, so two
//! values are equal exactly when their fully compressed forms coincide.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::slp::{BigLength, Slp, SlpBuilder, SlpError, Symbol};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Item {
    Letter(u32),
    Run(u32, BigUint),
    Var(u32),
}

/// A set of rules in topological order and explicit top-level sequences
/// over them; recompression rewrites both until no variable remains.
pub(crate) struct Recompressor {
    rules: Vec<Vec<Item>>,
    alive: Vec<bool>,
    tops: Vec<Vec<Item>>,
    next_letter: u32,
    blocks: HashMap<(u32, BigUint), u32>,
    pairs: HashMap<(u32, u32), u32>,
}

impl Recompressor {
    /// `rules` must be topologically sorted; letters are `u32` ids below
    /// `num_letters`.
    pub(crate) fn new(rules: &[Vec<Symbol>], tops: Vec<Vec<Symbol>>, num_letters: u32) -> Self {
        let conv = |s: &Symbol| match *s {
            Symbol::Letter(l) => Item::Letter(l.0),
            Symbol::Var(v) => Item::Var(v.0),
        };
        let rules: Vec<Vec<Item>> = rules.iter().map(|r| r.iter().map(conv).collect()).collect();
        let tops = tops.iter().map(|t| t.iter().map(conv).collect()).collect();
        let mut r = Recompressor {
            alive: vec![true; rules.len()],
            rules,
            tops,
            next_letter: num_letters,
            blocks: HashMap::new(),
            pairs: HashMap::new(),
        };
        r.prune();
        r
    }

    /// Marks variables unreachable from the tops as dead and drops empty
    /// variables from right-hand sides.
    fn prune(&mut self) {
        let n = self.rules.len();
        let mut reach = vec![false; n];
        for t in &self.tops {
            for it in t {
                if let Item::Var(v) = it {
                    reach[*v as usize] = true;
                }
            }
        }
        for i in (0..n).rev() {
            if !reach[i] || !self.alive[i] {
                reach[i] = false;
                continue;
            }
            for it in &self.rules[i] {
                if let Item::Var(v) = it {
                    reach[*v as usize] = true;
                }
            }
        }
        for (i, &r) in reach.iter().enumerate() {
            if !r {
                self.alive[i] = false;
                self.rules[i] = Vec::new();
            }
        }
    }

    fn any_alive(&self) -> bool {
        self.alive.iter().any(|&a| a)
    }

    fn fresh_block(&mut self, a: u32, l: BigUint) -> u32 {
        if l.is_one() {
            return a;
        }
        let next = &mut self.next_letter;
        *self.blocks.entry((a, l)).or_insert_with(|| {
            *next += 1;
            *next - 1
        })
    }

    fn fresh_pair(&mut self, a: u32, b: u32) -> u32 {
        let next = &mut self.next_letter;
        *self.pairs.entry((a, b)).or_insert_with(|| {
            *next += 1;
            *next - 1
        })
    }

    /// Runs to completion and returns the final explicit top sequences.
    pub(crate) fn run(mut self) -> Vec<Vec<u32>> {
        while self.any_alive() {
            self.block_phase();
            if !self.any_alive() {
                break;
            }
            self.pair_phase();
        }
        self.tops
            .iter()
            .map(|t| {
                t.iter()
                    .map(|it| match it {
                        Item::Letter(a) => *a,
                        _ => unreachable!("variables remain after recompression"),
                    })
                    .collect()
            })
            .collect()
    }

    /// Copies `seq`, splicing popped runs around variable occurrences and
    /// merging adjacent runs of one letter.
    fn expand_with_pops(seq: &[Item], pre: &[Option<(u32, BigUint)>], suf: &[Option<(u32, BigUint)>], alive: &[bool]) -> Vec<Item> {
        let mut out: Vec<Item> = Vec::with_capacity(seq.len() + 4);
        let push_run = |out: &mut Vec<Item>, a: u32, l: BigUint| {
            if let Some(Item::Run(b, m)) = out.last_mut() {
                if *b == a {
                    *m += l;
                    return;
                }
            }
            out.push(Item::Run(a, l));
        };
        for it in seq {
            match it {
                Item::Letter(a) => push_run(&mut out, *a, BigUint::one()),
                Item::Run(a, l) => push_run(&mut out, *a, l.clone()),
                Item::Var(v) => {
                    let v = *v as usize;
                    if let Some((a, l)) = &pre[v] {
                        push_run(&mut out, *a, l.clone());
                    }
                    if alive[v] {
                        out.push(Item::Var(v as u32));
                    }
                    if let Some((a, l)) = &suf[v] {
                        push_run(&mut out, *a, l.clone());
                    }
                }
            }
        }
        out
    }

    fn block_phase(&mut self) {
        let n = self.rules.len();
        let mut pre: Vec<Option<(u32, BigUint)>> = vec![None; n];
        let mut suf: Vec<Option<(u32, BigUint)>> = vec![None; n];
        for i in 0..n {
            if !self.alive[i] {
                continue;
            }
            let mut rhs = Self::expand_with_pops(&self.rules[i], &pre, &suf, &self.alive);
            if let Some(Item::Run(..)) = rhs.first() {
                let Item::Run(a, l) = rhs.remove(0) else { unreachable!() };
                pre[i] = Some((a, l));
            }
            if let Some(Item::Run(..)) = rhs.last() {
                let Some(Item::Run(a, l)) = rhs.pop() else { unreachable!() };
                suf[i] = Some((a, l));
            }
            if rhs.is_empty() {
                self.alive[i] = false;
            }
            self.rules[i] = rhs;
        }
        for t in 0..self.tops.len() {
            self.tops[t] = Self::expand_with_pops(&self.tops[t], &pre, &suf, &self.alive);
        }
        // replace runs by block letters
        let mut rules = std::mem::take(&mut self.rules);
        for rhs in rules.iter_mut() {
            self.replace_runs(rhs);
        }
        self.rules = rules;
        let mut tops = std::mem::take(&mut self.tops);
        for t in tops.iter_mut() {
            self.replace_runs(t);
        }
        self.tops = tops;
        self.prune();
    }

    fn replace_runs(&mut self, seq: &mut [Item]) {
        for it in seq.iter_mut() {
            if let Item::Run(a, l) = it {
                let l = std::mem::take(l);
                *it = Item::Letter(self.fresh_block(*a, l));
            }
        }
    }

    fn pair_phase(&mut self) {
        let n = self.rules.len();
        // first and last letters of live variables
        let mut first = vec![u32::MAX; n];
        let mut last = vec![u32::MAX; n];
        for i in 0..n {
            if !self.alive[i] {
                continue;
            }
            let edge = |it: &Item, first_side: bool| match it {
                Item::Letter(a) => *a,
                Item::Var(v) => {
                    if first_side {
                        first[*v as usize]
                    } else {
                        last[*v as usize]
                    }
                }
                Item::Run(..) => unreachable!(),
            };
            let f = edge(&self.rules[i][0], true);
            let l = edge(self.rules[i].last().unwrap(), false);
            first[i] = f;
            last[i] = l;
        }
        // occurrence counts of variables in the derivation
        let mut count: Vec<BigUint> = vec![BigUint::zero(); n];
        for t in &self.tops {
            for it in t {
                if let Item::Var(v) = it {
                    count[*v as usize] += 1u32;
                }
            }
        }
        for i in (0..n).rev() {
            if !self.alive[i] || count[i].is_zero() {
                continue;
            }
            let c = count[i].clone();
            for it in &self.rules[i] {
                if let Item::Var(v) = it {
                    count[*v as usize] += &c;
                }
            }
        }
        // weighted pair occurrences
        let mut weight: HashMap<(u32, u32), BigUint> = HashMap::new();
        let one = BigUint::one();
        let mut scan = |seq: &[Item], w: &BigUint| {
            for win in seq.windows(2) {
                let a = match &win[0] {
                    Item::Letter(a) => *a,
                    Item::Var(v) => last[*v as usize],
                    Item::Run(..) => unreachable!(),
                };
                let b = match &win[1] {
                    Item::Letter(b) => *b,
                    Item::Var(v) => first[*v as usize],
                    Item::Run(..) => unreachable!(),
                };
                if a != b {
                    *weight.entry((a, b)).or_default() += w;
                }
            }
        };
        for (i, c) in count.iter().enumerate() {
            if self.alive[i] && !c.is_zero() {
                scan(&self.rules[i], c);
            }
        }
        for t in &self.tops {
            scan(t, &one);
        }
        let left = choose_partition(&weight);
        self.pop_and_replace(&left);
    }

    /// Pops crossing letters and replaces left-right pairs. `side[a]` is
    /// true for left letters and false for right ones.
    fn pop_and_replace(&mut self, side: &HashMap<u32, bool>) {
        let is_left = |a: u32| side.get(&a).copied() == Some(true);
        let is_right = |a: u32| side.get(&a).copied() == Some(false);
        let n = self.rules.len();
        let mut popl: Vec<Option<u32>> = vec![None; n];
        let mut popr: Vec<Option<u32>> = vec![None; n];
        let expand = |seq: &[Item], popl: &[Option<u32>], popr: &[Option<u32>], alive: &[bool]| {
            let mut out = Vec::with_capacity(seq.len() + 2);
            for it in seq {
                match it {
                    Item::Var(v) => {
                        let v = *v as usize;
                        if let Some(a) = popl[v] {
                            out.push(Item::Letter(a));
                        }
                        if alive[v] {
                            out.push(Item::Var(v as u32));
                        }
                        if let Some(b) = popr[v] {
                            out.push(Item::Letter(b));
                        }
                    }
                    other => out.push(other.clone()),
                }
            }
            out
        };
        for i in 0..n {
            if !self.alive[i] {
                continue;
            }
            let mut rhs = expand(&self.rules[i], &popl, &popr, &self.alive);
            if let Some(&Item::Letter(a)) = rhs.first() {
                if is_right(a) {
                    popl[i] = Some(a);
                    rhs.remove(0);
                }
            }
            if let Some(&Item::Letter(b)) = rhs.last() {
                if is_left(b) {
                    popr[i] = Some(b);
                    rhs.pop();
                }
            }
            if rhs.is_empty() {
                self.alive[i] = false;
            }
            self.rules[i] = rhs;
        }
        for t in 0..self.tops.len() {
            self.tops[t] = expand(&self.tops[t], &popl, &popr, &self.alive);
        }
        let mut rules = std::mem::take(&mut self.rules);
        for rhs in rules.iter_mut() {
            self.replace_pairs(rhs, &is_left, &is_right);
        }
        self.rules = rules;
        let mut tops = std::mem::take(&mut self.tops);
        for t in tops.iter_mut() {
            self.replace_pairs(t, &is_left, &is_right);
        }
        self.tops = tops;
        self.prune();
    }

    fn replace_pairs(&mut self, seq: &mut Vec<Item>, is_left: &dyn Fn(u32) -> bool, is_right: &dyn Fn(u32) -> bool) {
        let mut out = Vec::with_capacity(seq.len());
        let mut i = 0;
        while i < seq.len() {
            if let (Item::Letter(a), Some(Item::Letter(b))) = (&seq[i], seq.get(i + 1)) {
                if is_left(*a) && is_right(*b) {
                    out.push(Item::Letter(self.fresh_pair(*a, *b)));
                    i += 2;
                    continue;
                }
            }
            out.push(seq[i].clone());
            i += 1;
        }
        *seq = out;
    }
}

/// Greedy split of letters into left and right classes, keeping at least
/// a quarter of the total pair weight compressible.
fn choose_partition(weight: &HashMap<(u32, u32), BigUint>) -> HashMap<u32, bool> {
    let mut letters: Vec<u32> = weight.keys().flat_map(|&(a, b)| [a, b]).collect();
    letters.sort_unstable();
    letters.dedup();
    let mut out_edges: HashMap<u32, Vec<(u32, &BigUint)>> = HashMap::new();
    let mut in_edges: HashMap<u32, Vec<(u32, &BigUint)>> = HashMap::new();
    let mut sorted: Vec<(&(u32, u32), &BigUint)> = weight.iter().collect();
    sorted.sort_unstable_by_key(|(k, _)| **k);
    for (&(a, b), w) in sorted {
        out_edges.entry(a).or_default().push((b, w));
        in_edges.entry(b).or_default().push((a, w));
    }
    let mut side: HashMap<u32, bool> = HashMap::new();
    for &a in &letters {
        // gain if left: pairs (a, b) with b already right;
        // gain if right: pairs (b, a) with b already left
        let mut gain_left = BigUint::zero();
        let mut gain_right = BigUint::zero();
        for (b, w) in out_edges.get(&a).into_iter().flatten() {
            if side.get(b) == Some(&false) {
                gain_left += *w;
            }
        }
        for (b, w) in in_edges.get(&a).into_iter().flatten() {
            if side.get(b) == Some(&true) {
                gain_right += *w;
            }
        }
        side.insert(a, gain_left >= gain_right);
    }
    // the flipped assignment compresses the reversed pairs; keep the better
    let mut forward = BigUint::zero();
    let mut backward = BigUint::zero();
    for (&(a, b), w) in weight {
        match (side[&a], side[&b]) {
            (true, false) => forward += w,
            (false, true) => backward += w,
            _ => {}
        }
    }
    if backward > forward {
        for v in side.values_mut() {
            *v = !*v;
        }
    }
    side
}

/// Polynomial fingerprints modulo the Mersenne prime `2^61 - 1`. Equal
/// words have equal fingerprints; the converse is only probable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    pub hash: u64,
    /// `BASE^len`
    pub scale: u64,
}

pub const FP_MOD: u64 = (1 << 61) - 1;
const FP_BASE: u64 = 0x1f3a_5c7e_9b2d_4f61 % FP_MOD;

pub fn fp_mul(a: u64, b: u64) -> u64 {
    let p = (a as u128) * (b as u128);
    let lo = (p as u64) & FP_MOD;
    let hi = (p >> 61) as u64;
    let s = lo + hi;
    if s >= FP_MOD {
        s - FP_MOD
    } else {
        s
    }
}

fn fp_add(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= FP_MOD {
        s - FP_MOD
    } else {
        s
    }
}

impl Fingerprint {
    pub const EMPTY: Fingerprint = Fingerprint { hash: 0, scale: 1 };

    pub fn letter(id: u32) -> Fingerprint {
        // splitmix-style scramble of the id, kept nonzero
        let mut z = (id as u64).wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
        Fingerprint {
            hash: z % (FP_MOD - 1) + 1,
            scale: FP_BASE,
        }
    }

    pub fn concat(self, other: Fingerprint) -> Fingerprint {
        Fingerprint {
            hash: fp_add(fp_mul(self.hash, other.scale), other.hash),
            scale: fp_mul(self.scale, other.scale),
        }
    }
}

/// Fingerprints of all variables.
pub fn fingerprints(p: &Slp) -> Vec<Fingerprint> {
    let mut out: Vec<Fingerprint> = Vec::with_capacity(p.num_vars());
    for rhs in p.rules() {
        let mut f = Fingerprint::EMPTY;
        for s in rhs {
            f = f.concat(match *s {
                Symbol::Letter(l) => Fingerprint::letter(l.0),
                Symbol::Var(v) => out[v.index()],
            });
        }
        out.push(f);
    }
    out
}

fn first_last(p: &Slp) -> Vec<Option<(u32, u32)>> {
    let mut out: Vec<Option<(u32, u32)>> = Vec::with_capacity(p.num_vars());
    for rhs in p.rules() {
        let mut first = None;
        let mut last = None;
        for s in rhs {
            let fl = match *s {
                Symbol::Letter(l) => Some((l.0, l.0)),
                Symbol::Var(v) => out[v.index()],
            };
            if let Some((f, l)) = fl {
                first.get_or_insert(f);
                last = Some(l);
            }
        }
        out.push(first.zip(last));
    }
    out
}

/// Equality of the values of two programs over the same alphabet.
pub fn slp_equal(g: &Slp, h: &Slp) -> Result<bool, SlpError> {
    if !g.same_alphabet(h) {
        return Err(SlpError::AlphabetMismatch);
    }
    let lg = g.value_length();
    if lg != h.value_length() {
        return Ok(false);
    }
    if lg.is_zero() {
        return Ok(true);
    }
    if first_last(g)[g.start().index()] != first_last(h)[h.start().index()] {
        return Ok(false);
    }
    if fingerprints(g)[g.start().index()] != fingerprints(h)[h.start().index()] {
        return Ok(false);
    }
    Ok(recompression_equal(g, h))
}

/// Equality decided by recompression alone, without pre-filters.
pub fn recompression_equal(g: &Slp, h: &Slp) -> bool {
    let mut b = SlpBuilder::new(g.alphabet().clone());
    let mg = b.import(g);
    let mh = b.import(h);
    let p = b.finish_untrimmed(mg[g.start().index()]);
    let tops = vec![
        vec![Symbol::Var(mg[g.start().index()])],
        vec![Symbol::Var(mh[h.start().index()])],
    ];
    let out = Recompressor::new(p.rules(), tops, g.alphabet().len() as u32).run();
    out[0] == out[1]
}

/// Length of the longest common prefix of the two values, by binary
/// search over prefix equalities.
pub fn slp_compare_prefix(g: &Slp, h: &Slp) -> Result<BigLength, SlpError> {
    if !g.same_alphabet(h) {
        return Err(SlpError::AlphabetMismatch);
    }
    let max = g.value_length().min(h.value_length());
    let prefix_eq = |k: &BigLength| -> Result<bool, SlpError> {
        let a = g.extract(&BigLength::zero(), k)?;
        let b = h.extract(&BigLength::zero(), k)?;
        slp_equal(&a, &b)
    };
    if prefix_eq(&max)? {
        return Ok(max);
    }
    // invariant: prefix of length lo agrees, of length hi does not
    let mut lo = BigLength::zero();
    let mut hi = max;
    while &hi - &lo > BigLength::one() {
        let mid = (&lo + &hi) >> 1u32;
        if prefix_eq(&mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
