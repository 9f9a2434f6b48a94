//! Brute-force ground truth: normal forms of explicit words computed by a
//! separate route, vector-level syllable reduction, reproducible random
//! programs and empirical calibration of the group constants.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::abelian::LetterKind;
use crate::alphabet::LetterId;
use crate::extensions::{CutKind, Rhs, Tcslp, TetherSemantics};
use crate::group::{ConstantsBundle, GroupContext, LinearFn, Syllable};
use crate::slp::{Slp, Symbol, VarId};

/// Default bound on the words the oracle handles.
pub const ORACLE_LIMIT: usize = 100_000;

/// Bound on the value length of generated programs.
pub const RANDOM_MAX_LEN: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("word of length {len} exceeds the oracle limit {limit}")]
    TooLong { len: usize, limit: usize },
}

/// Letter data of one factor in machine integers.
struct FactorTable {
    m: i64,
    /// Global letter and vector, in `Y` order.
    letters: Vec<(LetterId, Vec<i64>)>,
    /// Vectors of the positive extra generators.
    extras: Vec<Vec<i64>>,
}

impl FactorTable {
    fn new(ctx: &GroupContext, f: usize) -> Self {
        let factor = ctx.factor(f);
        let letters = factor
            .spec
            .letters()
            .iter()
            .enumerate()
            .map(|(y, l)| (LetterId(factor.base + y as u32), l.vector.clone()))
            .collect();
        let extras = factor
            .spec
            .letters()
            .iter()
            .filter(|l| matches!(l.kind, LetterKind::Extra { positive: true, .. }))
            .map(|l| l.vector.clone())
            .collect();
        FactorTable {
            m: factor.spec.m() as i64,
            letters,
            extras,
        }
    }

    /// Cheapest way to write `r` with `z^(+-M)` and `z^(+-1)`.
    fn coord_cost(&self, r: i64) -> i64 {
        let q = r.div_euclid(self.m);
        (q - 1..=q + 2)
            .map(|a| a.abs() + (r - a * self.m).abs())
            .min()
            .unwrap()
    }

    /// Word length of `v` over `Y`. An optimal word uses each extra
    /// generator fewer than `M` times, since `M` copies are shorter in the
    /// big basis letters.
    fn length(&self, v: &[i64]) -> i64 {
        let bound = self.m - 1;
        let mut best = i64::MAX;
        let mut counts = vec![-bound; self.extras.len()];
        loop {
            let mut r = v.to_vec();
            let mut cost = 0;
            for (x, &c) in self.extras.iter().zip(&counts) {
                cost += c.abs();
                for (ri, xi) in r.iter_mut().zip(x) {
                    *ri -= c * xi;
                }
            }
            cost += r.iter().map(|&ri| self.coord_cost(ri)).sum::<i64>();
            best = best.min(cost);
            // next combination
            let mut i = 0;
            loop {
                if i == counts.len() {
                    return best;
                }
                if counts[i] < bound {
                    counts[i] += 1;
                    break;
                }
                counts[i] = -bound;
                i += 1;
            }
        }
    }

    /// Shortlex word of `v`: repeatedly the least letter that keeps the
    /// rest geodesic.
    fn shortlex(&self, v: &[i64], out: &mut Vec<LetterId>) {
        let mut v = v.to_vec();
        let mut d = self.length(&v);
        while d > 0 {
            let step = self.letters.iter().find_map(|(l, x)| {
                let rest: Vec<i64> = v.iter().zip(x).map(|(a, b)| a - b).collect();
                (self.length(&rest) == d - 1).then_some((*l, rest))
            });
            let (l, rest) = step.expect("some letter shortens a nonzero vector");
            out.push(l);
            v = rest;
            d -= 1;
        }
    }
}

/// The normal form of an explicit word: stack-based free cancellation of
/// syllables, then a greedy shortlex search per syllable.
pub fn naive_nf(ctx: &GroupContext, w: &[LetterId]) -> Result<Vec<LetterId>, OracleError> {
    if w.len() > ORACLE_LIMIT {
        return Err(OracleError::TooLong {
            len: w.len(),
            limit: ORACLE_LIMIT,
        });
    }
    let tables: Vec<FactorTable> = (0..ctx.factors().len()).map(|f| FactorTable::new(ctx, f)).collect();
    let mut stack: Vec<(usize, Vec<i64>)> = Vec::new();
    for &l in w {
        let f = ctx.factor_of(l);
        let x = &tables[f].letters[ctx.local_index(l)].1;
        match stack.last_mut() {
            Some((top, v)) if *top == f => {
                for (a, b) in v.iter_mut().zip(x) {
                    *a += b;
                }
                if v.iter().all(|&a| a == 0) {
                    stack.pop();
                }
            }
            _ => stack.push((f, x.clone())),
        }
    }
    let mut out = Vec::new();
    for (f, v) in &stack {
        tables[*f].shortlex(v, &mut out);
    }
    Ok(out)
}

/// Free-product reduction of syllables with exact vectors.
pub fn syllable_nf(syllables: &[Syllable]) -> Vec<Syllable> {
    let mut out: Vec<Syllable> = Vec::new();
    for s in syllables {
        let zero = |v: &[BigInt]| v.iter().all(Zero::is_zero);
        if zero(&s.vector) {
            continue;
        }
        if let Some(top) = out.last_mut().filter(|t| t.factor == s.factor) {
            top.vector = top.vector.iter().zip(&s.vector).map(|(a, b)| a + b).collect();
            if zero(&top.vector) {
                out.pop();
            }
        } else {
            out.push(s.clone());
        }
    }
    out
}

/// Whether `val(g)` is trivial, by decompression.
pub fn oracle_is_trivial(ctx: &GroupContext, g: &Slp) -> Result<bool, OracleError> {
    Ok(naive_nf(ctx, &decompress(g)?)?.is_empty())
}

/// `val(g)` within the oracle limit.
pub fn decompress(g: &Slp) -> Result<Vec<LetterId>, OracleError> {
    g.decompress(ORACLE_LIMIT as u64).map_err(|_| OracleError::TooLong {
        len: usize::MAX,
        limit: ORACLE_LIMIT,
    })
}

/// Tether semantics backed by [`naive_nf`].
pub struct NaiveSemantics<'c>(pub &'c GroupContext);

impl TetherSemantics for NaiveSemantics<'_> {
    fn normal_form(&self, word: &[LetterId]) -> Vec<LetterId> {
        naive_nf(self.0, word).expect("oracle evaluation within the limit")
    }

    fn factor_of(&self, letter: LetterId) -> usize {
        self.0.factor_of(letter)
    }

    fn inverse(&self, letter: LetterId) -> LetterId {
        self.0.inverse(letter)
    }
}

/// Shape of generated programs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Profile {
    /// Short leaves joined in a balanced tree.
    Balanced,
    /// Long runs of single letters built by doubling.
    UnaryHeavy,
    /// Leaves start and end in the same factor, so joins merge
    /// components.
    ComponentSplitting,
    /// `P x P^-1` with `x` trivial or a single letter.
    NearTrivial,
}

impl Profile {
    pub const ALL: [Profile; 4] = [
        Profile::Balanced,
        Profile::UnaryHeavy,
        Profile::ComponentSplitting,
        Profile::NearTrivial,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Profile::Balanced => "balanced",
            Profile::UnaryHeavy => "unary-heavy",
            Profile::ComponentSplitting => "component-splitting",
            Profile::NearTrivial => "near-trivial",
        }
    }

    pub fn parse(s: &str) -> Option<Profile> {
        Profile::ALL.into_iter().find(|p| p.name() == s)
    }
}

/// Rules under construction with their value lengths.
struct Grammar {
    rules: Vec<Vec<Symbol>>,
    lens: Vec<usize>,
    cap: usize,
}

impl Grammar {
    fn new() -> Self {
        Grammar {
            rules: Vec::new(),
            lens: Vec::new(),
            cap: RANDOM_MAX_LEN,
        }
    }

    fn push(&mut self, rhs: Vec<Symbol>) -> VarId {
        let len = rhs
            .iter()
            .map(|s| match *s {
                Symbol::Letter(_) => 1,
                Symbol::Var(v) => self.lens[v.index()],
            })
            .sum();
        self.rules.push(rhs);
        self.lens.push(len);
        VarId(self.rules.len() as u32 - 1)
    }

    fn leaf(&mut self, w: &[LetterId]) -> VarId {
        self.push(w.iter().map(|&l| Symbol::Letter(l)).collect())
    }

    fn len(&self, v: VarId) -> usize {
        self.lens[v.index()]
    }

    /// `a b`, or `a` alone when the join would exceed the length bound.
    fn join(&mut self, a: VarId, b: VarId) -> VarId {
        if self.len(a) + self.len(b) > self.cap {
            a
        } else {
            self.push(vec![Symbol::Var(a), Symbol::Var(b)])
        }
    }

    /// A balanced tree over `vars`, occasionally reusing earlier ones.
    fn balanced(&mut self, rng: &mut ChaCha8Rng, mut vars: Vec<VarId>) -> VarId {
        while vars.len() > 1 {
            let mut next = Vec::with_capacity(vars.len() / 2 + 1);
            for pair in vars.chunks(2) {
                next.push(match *pair {
                    [a, b] => {
                        let b = if rng.gen_bool(0.15) {
                            VarId(rng.gen_range(0..self.rules.len() as u32))
                        } else {
                            b
                        };
                        self.join(a, b)
                    }
                    [a] => a,
                    _ => unreachable!(),
                });
            }
            vars = next;
        }
        vars[0]
    }

    /// Rules mirroring `0..=top` with reversed, inverted values.
    fn mirror(&mut self, ctx: &GroupContext, top: VarId) -> VarId {
        let n = top.index() + 1;
        let offset = self.rules.len() as u32;
        for i in 0..n {
            let rhs = self.rules[i]
                .iter()
                .rev()
                .map(|s| match *s {
                    Symbol::Letter(l) => Symbol::Letter(ctx.inverse(l)),
                    Symbol::Var(v) => Symbol::Var(VarId(v.0 + offset)),
                })
                .collect();
            self.push(rhs);
        }
        VarId(top.0 + offset)
    }

    fn finish(self, ctx: &GroupContext, start: VarId) -> Slp {
        Slp::from_rules(ctx.alphabet().clone(), self.rules, start)
            .expect("generated rules are well formed")
            .trim()
    }
}

fn random_letter(ctx: &GroupContext, rng: &mut ChaCha8Rng) -> LetterId {
    LetterId(rng.gen_range(0..ctx.num_letters() as u32))
}

fn random_factor_letter(ctx: &GroupContext, rng: &mut ChaCha8Rng, f: usize) -> LetterId {
    let factor = ctx.factor(f);
    LetterId(factor.base + rng.gen_range(0..factor.spec.num_letters() as u32))
}

/// A reproducible pseudo-random program with about `size` rules and value
/// length at most [`RANDOM_MAX_LEN`].
pub fn random_slp(ctx: &GroupContext, seed: u64, size: usize, profile: Profile) -> Slp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = size.max(2);
    let mut g = Grammar::new();
    let start = match profile {
        Profile::Balanced => {
            let leaves: Vec<VarId> = (0..size / 2)
                .map(|_| {
                    let n = rng.gen_range(1..=3);
                    let w: Vec<LetterId> = (0..n).map(|_| random_letter(ctx, &mut rng)).collect();
                    g.leaf(&w)
                })
                .collect();
            g.balanced(&mut rng, leaves)
        }
        Profile::UnaryHeavy => {
            let mut parts = Vec::new();
            while g.rules.len() < size {
                let l = random_letter(ctx, &mut rng);
                let mut v = g.leaf(&[l]);
                for _ in 0..rng.gen_range(1..10) {
                    v = g.join(v, v);
                }
                if rng.gen_bool(0.5) {
                    let tail = g.leaf(&[l]);
                    v = g.join(v, tail);
                }
                parts.push(v);
            }
            parts.shuffle(&mut rng);
            g.balanced(&mut rng, parts)
        }
        Profile::ComponentSplitting => {
            let k = ctx.factors().len();
            let leaves: Vec<VarId> = (0..size / 2)
                .map(|_| {
                    let f = rng.gen_range(0..k);
                    let mut w = vec![random_factor_letter(ctx, &mut rng, f)];
                    if k > 1 && rng.gen_bool(0.7) {
                        let other = (f + rng.gen_range(1..k)) % k;
                        w.push(random_factor_letter(ctx, &mut rng, other));
                    }
                    w.push(random_factor_letter(ctx, &mut rng, f));
                    g.leaf(&w)
                })
                .collect();
            g.balanced(&mut rng, leaves)
        }
        Profile::NearTrivial => {
            let leaves: Vec<VarId> = (0..(size / 4).max(1))
                .map(|_| {
                    let n = rng.gen_range(1..=3);
                    let w: Vec<LetterId> = (0..n).map(|_| random_letter(ctx, &mut rng)).collect();
                    g.leaf(&w)
                })
                .collect();
            g.cap = RANDOM_MAX_LEN / 2 - 1;
            let p = g.balanced(&mut rng, leaves);
            g.cap = RANDOM_MAX_LEN;
            let q = g.mirror(ctx, p);
            let x = random_letter(ctx, &mut rng);
            let middle = if rng.gen_bool(0.5) {
                g.leaf(&[x, ctx.inverse(x)])
            } else {
                g.leaf(&[x])
            };
            let left = g.join(p, middle);
            g.join(left, q)
        }
    };
    g.finish(ctx, start)
}

/// A reproducible program with cuts and tethers whose variables all have
/// nf-reduced values; tether words have length at most `L`. Returns the
/// program and the expected value.
pub fn random_tcslp(ctx: &GroupContext, seed: u64, size: usize) -> (Tcslp, Vec<LetterId>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = ctx.constants().map_or(1, |c| c.l);
    let nf = |w: &[LetterId]| naive_nf(ctx, w).expect("short word");
    let mut rules: Vec<Rhs> = Vec::new();
    let mut values: Vec<Vec<LetterId>> = Vec::new();
    let leaves = (size / 3).max(1);
    for _ in 0..leaves {
        let n = rng.gen_range(1..=6);
        let w: Vec<LetterId> = (0..n).map(|_| random_letter(ctx, &mut rng)).collect();
        let w = nf(&w);
        rules.push(Rhs::Seq(w.iter().map(|&x| Symbol::Letter(x)).collect()));
        values.push(w);
    }
    while rules.len() < size.max(leaves + 1) {
        let n = rules.len();
        let b = rng.gen_range(0..n);
        let (rhs, value) = match rng.gen_range(0..3) {
            0 => {
                // a join of two values whose concatenation stays reduced
                let c = rng.gen_range(0..n);
                let mut w = values[b].clone();
                w.extend(&values[c]);
                if w.len() > RANDOM_MAX_LEN || nf(&w) != w {
                    continue;
                }
                (Rhs::Seq(vec![Symbol::Var(VarId(b as u32)), Symbol::Var(VarId(c as u32))]), w)
            }
            1 => {
                let bounds = crate::extensions::component_boundaries(&values[b], |x| ctx.factor_of(x));
                let hat = bounds.len() - 1;
                let i = rng.gen_range(0..=hat);
                let j = rng.gen_range(i..=hat);
                let w = values[b][bounds[i]..bounds[j]].to_vec();
                (
                    Rhs::Cut {
                        var: VarId(b as u32),
                        start: i.into(),
                        end: j.into(),
                        kind: CutKind::Compressed,
                    },
                    w,
                )
            }
            _ => {
                let alpha: Vec<LetterId> = (0..rng.gen_range(0..=l)).map(|_| random_letter(ctx, &mut rng)).collect();
                let beta: Vec<LetterId> = (0..rng.gen_range(0..=l)).map(|_| random_letter(ctx, &mut rng)).collect();
                let mut w = alpha.clone();
                w.extend(&values[b]);
                w.extend(ctx.inverse_word(&beta));
                let w = nf(&w);
                if w.len() > RANDOM_MAX_LEN {
                    continue;
                }
                (
                    Rhs::Tether {
                        var: VarId(b as u32),
                        left: alpha,
                        right: beta,
                    },
                    w,
                )
            }
        };
        rules.push(rhs);
        values.push(value);
    }
    let start = VarId(rules.len() as u32 - 1);
    let expect = values.pop().unwrap();
    let t = Tcslp::from_rules(ctx.alphabet().clone(), rules, start, l).expect("generated rules are well formed");
    (t, expect)
}

/// Measured fellow-travelling data behind a calibrated bundle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Calibration {
    pub bundle: ConstantsBundle,
    /// Largest distance from a vertex of `u` to the nearest vertex of `v`.
    pub max_distance: usize,
    /// Largest number of components from an end of `u` whose vertices are
    /// farther than the interior maximum.
    pub end_margin: usize,
    pub samples: usize,
}

/// Constants from sampled quadrilaterals `w1 u = v w2`. `u` is a random
/// normal form of length at most `max_word_len`, `|w1|, |w2| <= 2` and
/// `v = nf(w1 u w2^-1)`. Distances are normal-form lengths, which are
/// geodesic. Measured values are doubled and floored.
pub fn calibrate(ctx: &GroupContext, max_word_len: usize, seed: u64) -> Calibration {
    const SIDE: usize = 2;
    const SAMPLES: usize = 400;
    const SAFETY: usize = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nf = |w: &[LetterId]| naive_nf(ctx, w).expect("short word");
    let mut max_distance = 0;
    let mut end_margin = 0;
    for _ in 0..SAMPLES {
        let len = rng.gen_range(0..=max_word_len);
        let u: Vec<LetterId> = nf(&(0..len).map(|_| random_letter(ctx, &mut rng)).collect::<Vec<_>>());
        let w1: Vec<LetterId> = (0..rng.gen_range(0..=SIDE)).map(|_| random_letter(ctx, &mut rng)).collect();
        let w2: Vec<LetterId> = (0..rng.gen_range(0..=SIDE)).map(|_| random_letter(ctx, &mut rng)).collect();
        let mut e = w1.clone();
        e.extend(&u);
        e.extend(ctx.inverse_word(&w2));
        let v = nf(&e);
        let bu = crate::extensions::component_boundaries(&u, |x| ctx.factor_of(x));
        let bv = crate::extensions::component_boundaries(&v, |x| ctx.factor_of(x));
        let dists: Vec<usize> = bu
            .iter()
            .map(|&i| {
                let mut base = ctx.inverse_word(&u[..i]);
                base.extend(ctx.inverse_word(&w1));
                bv.iter()
                    .map(|&j| {
                        let mut d = base.clone();
                        d.extend(&v[..j]);
                        nf(&d).len()
                    })
                    .min()
                    .unwrap()
            })
            .collect();
        let interior = SIDE;
        max_distance = max_distance.max(*dists.iter().max().unwrap());
        let n = dists.len();
        for (k, &d) in dists.iter().enumerate() {
            if d > interior {
                end_margin = end_margin.max(k.min(n - 1 - k) + 1);
            }
        }
    }
    let l = (SAFETY * max_distance).max(4);
    let k = (SAFETY * end_margin).max(3) as u64;
    let bundle = ConstantsBundle {
        delta: 0,
        k,
        l,
        e_prime: l as u64,
        e1: l as u64,
        e2: l as u64,
        ff: LinearFn {
            slope: 1,
            intercept: 2 * l as u64,
        },
        lambda: 1,
        c: 2,
    };
    Calibration {
        bundle,
        max_distance,
        end_margin,
        samples: SAMPLES,
    }
}

/// Exact normal-form vectors of an explicit word, for checks at the
/// syllable level.
pub fn word_syllables(ctx: &GroupContext, w: &[LetterId]) -> Vec<Syllable> {
    let mut out: Vec<Syllable> = Vec::new();
    for &l in w {
        let f = ctx.factor_of(l);
        let x = &ctx.factor(f).spec.letters()[ctx.local_index(l)].vector;
        let s = Syllable {
            factor: f,
            vector: x.iter().map(|&a| BigInt::from(a)).collect(),
        };
        out.push(s);
    }
    syllable_nf(&out)
}

/// Geodesic length of a reduced syllable sequence, by the oracle's own
/// length function when the vectors fit machine integers.
pub fn syllables_length(ctx: &GroupContext, syllables: &[Syllable]) -> Option<BigUint> {
    let mut tables: HashMap<usize, FactorTable> = HashMap::new();
    let mut total = BigUint::zero();
    for s in syllables {
        let t = tables.entry(s.factor).or_insert_with(|| FactorTable::new(ctx, s.factor));
        let v: Option<Vec<i64>> = s
            .vector
            .iter()
            .map(|x| (x.abs() < BigInt::from(1i64 << 40)).then(|| i64::try_from(x).unwrap()))
            .collect();
        total += t.length(&v?) as u64;
    }
    Some(total)
}
