//! Free abelian factors: exponent vectors of compressed words, compact
//! power programs, the extended generating set and its shortlex forms.
//!
//! A factor of rank `r` with extra generators `X` uses the ordered set
//! `Y = {z_i^(+-M)} ++ {z_i^(+-1)} ++ X^(+-1)`, inverse letters adjacent
//! and positive first, where `M` exceeds the l1-norm of every generator.

use std::sync::Arc;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::alphabet::{Alphabet, LetterId};
use crate::slp::{Slp, SlpBuilder, Symbol, VarId};

/// Exponent vector over the basis of one factor.
pub type ExpVector = Vec<BigInt>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AbelianError {
    #[error("factor rank must be positive")]
    ZeroRank,
    #[error("extra generator `{0}` is the zero vector")]
    ZeroExtraGenerator(String),
    #[error("extra generator `{name}` has {found} coordinates, expected {rank}")]
    WrongDimension { name: String, found: usize, rank: usize },
    #[error("extra generator `{0}` repeats a basis element or another generator")]
    DuplicateGenerator(String),
    #[error("letter {0} does not belong to this factor")]
    ForeignLetter(LetterId),
}

/// Role of a letter of `Y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LetterKind {
    /// `z_i^(sign * M)`
    BigBasis { coord: usize, positive: bool },
    /// `z_i^(sign)`
    Basis { coord: usize, positive: bool },
    /// An extra generator or its inverse.
    Extra { index: usize, positive: bool },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct YLetter {
    pub name: String,
    pub kind: LetterKind,
    pub vector: Vec<i64>,
    /// Index of the inverse letter in `Y`.
    pub inverse: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtraGen {
    pub name: String,
    pub vector: Vec<i64>,
}

/// A free abelian factor with its extended generating set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorSpec {
    rank: usize,
    extras: Vec<ExtraGen>,
    m: u64,
    letters: Vec<YLetter>,
}

impl FactorSpec {
    /// Builds `Y` for a factor whose basis letters are numbered from
    /// `first_basis` (`z{first_basis}`, `z{first_basis+1}`, ...).
    pub fn new(rank: usize, extras: Vec<ExtraGen>, first_basis: usize) -> Result<Self, AbelianError> {
        if rank == 0 {
            return Err(AbelianError::ZeroRank);
        }
        let mut seen: Vec<Vec<i64>> = (0..rank)
            .flat_map(|i| {
                let mut e = vec![0; rank];
                e[i] = 1;
                let neg: Vec<i64> = e.iter().map(|x| -x).collect();
                [e, neg]
            })
            .collect();
        for x in &extras {
            if x.vector.len() != rank {
                return Err(AbelianError::WrongDimension {
                    name: x.name.clone(),
                    found: x.vector.len(),
                    rank,
                });
            }
            if x.vector.iter().all(|&c| c == 0) {
                return Err(AbelianError::ZeroExtraGenerator(x.name.clone()));
            }
            let neg: Vec<i64> = x.vector.iter().map(|c| -c).collect();
            if seen.contains(&x.vector) || seen.contains(&neg) {
                return Err(AbelianError::DuplicateGenerator(x.name.clone()));
            }
            seen.push(x.vector.clone());
            seen.push(neg);
        }
        let norm = extras
            .iter()
            .map(|x| x.vector.iter().map(|c| c.unsigned_abs()).sum::<u64>())
            .max()
            .unwrap_or(1)
            .max(1);
        let m = norm + 1;
        let mut letters = Vec::new();
        let unit = |coord: usize, s: i64| {
            let mut v = vec![0i64; rank];
            v[coord] = s;
            v
        };
        for coord in 0..rank {
            let z = format!("z{}", first_basis + coord);
            for positive in [true, false] {
                let s = if positive { 1 } else { -1 };
                letters.push(YLetter {
                    name: format!("{z}^{}", s * m as i64),
                    kind: LetterKind::BigBasis { coord, positive },
                    vector: unit(coord, s * m as i64),
                    inverse: letters.len() ^ 1,
                });
            }
        }
        for coord in 0..rank {
            let z = format!("z{}", first_basis + coord);
            for positive in [true, false] {
                letters.push(YLetter {
                    name: if positive { z.clone() } else { format!("{z}^-1") },
                    kind: LetterKind::Basis { coord, positive },
                    vector: unit(coord, if positive { 1 } else { -1 }),
                    inverse: letters.len() ^ 1,
                });
            }
        }
        for (index, x) in extras.iter().enumerate() {
            for positive in [true, false] {
                letters.push(YLetter {
                    name: if positive {
                        x.name.clone()
                    } else {
                        format!("{}^-1", x.name)
                    },
                    kind: LetterKind::Extra { index, positive },
                    vector: if positive {
                        x.vector.clone()
                    } else {
                        x.vector.iter().map(|c| -c).collect()
                    },
                    inverse: letters.len() ^ 1,
                });
            }
        }
        Ok(FactorSpec {
            rank,
            extras,
            m,
            letters,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn extras(&self) -> &[ExtraGen] {
        &self.extras
    }

    /// The power `M` of the first block of `Y`.
    pub fn m(&self) -> u64 {
        self.m
    }

    /// The ordered letters of `Y`.
    pub fn letters(&self) -> &[YLetter] {
        &self.letters
    }

    pub fn num_letters(&self) -> usize {
        self.letters.len()
    }

    /// An alphabet holding exactly `Y`, in order.
    pub fn alphabet(&self) -> Arc<Alphabet> {
        Arc::new(
            Alphabet::from_names(self.letters.iter().map(|l| l.name.clone()))
                .expect("Y letter names are distinct"),
        )
    }

    pub fn zero(&self) -> ExpVector {
        vec![BigInt::zero(); self.rank]
    }

    /// Adds `count` copies of letter `y` to `v`.
    pub fn add_letter(&self, v: &mut ExpVector, y: usize, count: &BigInt) {
        for (c, &n) in v.iter_mut().zip(&self.letters[y].vector) {
            if n != 0 {
                *c += count * n;
            }
        }
    }

    /// The vector of a word over `Y`, given as local letter indices.
    pub fn word_vector(&self, word: &[usize]) -> ExpVector {
        let mut v = self.zero();
        let one = BigInt::from(1);
        for &y in word {
            self.add_letter(&mut v, y, &one);
        }
        v
    }

    /// Letter counts of the shortlex-least word over `Y` for `v`, indexed
    /// like [`FactorSpec::letters`]. At most one of each inverse pair is
    /// nonzero.
    pub fn slex_counts(&self, v: &ExpVector) -> Vec<BigUint> {
        let m = BigInt::from(self.m);
        let bound = self.m as i64 - 1;
        let k = self.extras.len();
        let mut xs = vec![-bound; k];
        let mut best: Option<(BigUint, Vec<BigUint>)> = None;
        loop {
            let mut counts = vec![BigUint::zero(); self.letters.len()];
            let mut residual = v.clone();
            for (i, &x) in xs.iter().enumerate() {
                if x != 0 {
                    for (c, &n) in residual.iter_mut().zip(&self.extras[i].vector) {
                        *c -= BigInt::from(x * n);
                    }
                    let slot = 4 * self.rank + 2 * i + usize::from(x < 0);
                    counts[slot] = BigUint::from(x.unsigned_abs());
                }
            }
            for (coord, n) in residual.iter().enumerate() {
                let (a, b) = best_split(n, &m);
                set_signed(&mut counts, 2 * coord, &a);
                set_signed(&mut counts, 2 * self.rank + 2 * coord, &b);
            }
            let len: BigUint = counts.iter().sum();
            let better = match &best {
                None => true,
                Some((bl, bc)) => len < *bl || (len == *bl && lex_more(&counts, bc)),
            };
            if better {
                best = Some((len, counts));
            }
            // next extra multiplicity vector
            let mut i = 0;
            while i < k {
                if xs[i] < bound {
                    xs[i] += 1;
                    break;
                }
                xs[i] = -bound;
                i += 1;
            }
            if i == k {
                break;
            }
        }
        best.expect("at least one candidate").1
    }

    /// Length of a geodesic word over `Y` for `v`.
    pub fn geodesic_length(&self, v: &ExpVector) -> BigUint {
        self.slex_counts(v).iter().sum()
    }

    /// The shortlex-least word over `Y` for `v`, as local letter indices.
    /// Intended for vectors with small entries.
    pub fn slex_word(&self, v: &ExpVector) -> Vec<usize> {
        counts_to_word(&self.slex_counts(v))
    }
}

/// Expands letter counts into the sorted word.
pub fn counts_to_word(counts: &[BigUint]) -> Vec<usize> {
    let mut w = Vec::new();
    for (y, c) in counts.iter().enumerate() {
        let c = usize::try_from(c).expect("letter count fits in memory");
        w.extend(std::iter::repeat_n(y, c));
    }
    w
}

/// Among the splits `n = M a + b` minimizing `|a| + |b|`, the one whose
/// sorted word is shortlex-least: more big letters first.
fn best_split(n: &BigInt, m: &BigInt) -> (BigInt, BigInt) {
    let (q, r) = n.div_mod_floor(m);
    let lo = (q.clone(), r.clone());
    let hi = (&q + 1, r - m);
    let cost = |(a, b): &(BigInt, BigInt)| a.abs() + b.abs();
    let (cl, ch) = (cost(&lo), cost(&hi));
    if cl < ch {
        lo
    } else if ch < cl {
        hi
    } else if lo.0.abs() >= hi.0.abs() {
        // equal cost: the larger big-letter count wins; with equal big
        // counts the positive direction comes first in Y
        if lo.0.abs() == hi.0.abs() && hi.0.is_positive() {
            hi
        } else {
            lo
        }
    } else {
        hi
    }
}

fn set_signed(counts: &mut [BigUint], pos_slot: usize, x: &BigInt) {
    match x.sign() {
        Sign::Plus => counts[pos_slot] = x.magnitude().clone(),
        Sign::Minus => counts[pos_slot + 1] = x.magnitude().clone(),
        Sign::NoSign => {}
    }
}

/// Whether the sorted word of `a` is lexicographically smaller than that
/// of `b`, for count vectors of equal total: at the first differing
/// letter, more copies means smaller.
fn lex_more(a: &[BigUint], b: &[BigUint]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x != y {
            return x > y;
        }
    }
    false
}

/// A program for `letter^n` by binary powering: one doubling variable per
/// bit below the top bit and a start rule listing the set bits.
pub fn power_slp(alphabet: Arc<Alphabet>, letter: LetterId, n: &BigUint) -> Slp {
    let mut b = SlpBuilder::new(alphabet.clone());
    match power_var(&mut b, letter, n) {
        Some(v) => b.finish(v),
        None => Slp::empty(alphabet),
    }
}

/// Adds the rules of [`power_slp`] to `b`; `None` for `n = 0`.
pub fn power_var(b: &mut SlpBuilder, letter: LetterId, n: &BigUint) -> Option<VarId> {
    if n.is_zero() {
        return None;
    }
    let top = n.bits() - 1;
    let x = Symbol::Letter(letter);
    if top == 0 {
        return Some(b.push(vec![x]));
    }
    // doubles[i] has value x^(2^(i+1))
    let mut doubles: Vec<VarId> = Vec::new();
    let needed = if n.count_ones() == 1 { top - 1 } else { top };
    for i in 0..needed {
        let v = if i == 0 {
            b.push(vec![x, x])
        } else {
            let p = doubles[i as usize - 1];
            b.push(vec![Symbol::Var(p), Symbol::Var(p)])
        };
        doubles.push(v);
    }
    if n.count_ones() == 1 {
        // x^(2^top) is the square of the last doubling, or xx itself
        return Some(match doubles.last() {
            None => b.push(vec![x, x]),
            Some(&p) => b.push(vec![Symbol::Var(p), Symbol::Var(p)]),
        });
    }
    let mut rhs = Vec::new();
    if n.bit(0) {
        rhs.push(x);
    }
    for i in 1..=top {
        if n.bit(i) {
            rhs.push(Symbol::Var(doubles[i as usize - 1]));
        }
    }
    Some(b.push(rhs))
}

/// Concatenation of `letter_y^count_y` over `Y` in order; the letters of
/// `Y` start at `base` in `alphabet`.
pub fn counts_slp(alphabet: Arc<Alphabet>, base: u32, counts: &[BigUint]) -> Slp {
    let mut b = SlpBuilder::new(alphabet.clone());
    let mut top = Vec::new();
    for (y, c) in counts.iter().enumerate() {
        if let Some(v) = power_var(&mut b, LetterId(base + y as u32), c) {
            top.push(Symbol::Var(v));
        }
    }
    if top.is_empty() {
        return Slp::empty(alphabet);
    }
    let s = if top.len() == 1 {
        match top[0] {
            Symbol::Var(v) => v,
            Symbol::Letter(_) => unreachable!(),
        }
    } else {
        b.push(top)
    };
    b.finish(s)
}

/// The exponent vector of the value of `p`, whose letters must be the
/// letters of `Y` placed at `base..base+|Y|`.
pub fn abelian_vector(f: &FactorSpec, base: u32, p: &Slp) -> Result<ExpVector, AbelianError> {
    let n = f.num_letters() as u32;
    let mut counts: Vec<Vec<BigInt>> = Vec::with_capacity(p.num_vars());
    for rhs in p.rules() {
        let mut acc = vec![BigInt::zero(); n as usize];
        for s in rhs {
            match *s {
                Symbol::Letter(l) => {
                    if l.0 < base || l.0 >= base + n {
                        return Err(AbelianError::ForeignLetter(l));
                    }
                    acc[(l.0 - base) as usize] += 1;
                }
                Symbol::Var(v) => {
                    for (a, c) in acc.iter_mut().zip(&counts[v.index()]) {
                        *a += c;
                    }
                }
            }
        }
        counts.push(acc);
    }
    let total = &counts[p.start().index()];
    let mut v = f.zero();
    for (y, c) in total.iter().enumerate() {
        if !c.is_zero() {
            f.add_letter(&mut v, y, c);
        }
    }
    Ok(v)
}

/// A compact program for `prod_i z_i^(v_i)` over the basis letters.
pub fn compact_vector_slp(f: &FactorSpec, alphabet: Arc<Alphabet>, base: u32, v: &ExpVector) -> Slp {
    let mut counts = vec![BigUint::zero(); f.num_letters()];
    for (coord, n) in v.iter().enumerate() {
        set_signed(&mut counts, 2 * f.rank() + 2 * coord, n);
    }
    // basis letters are listed z1, z1^-1, z2, ... which is the order of
    // the product
    counts_slp(alphabet, base, &counts)
}

/// A compact program for the shortlex normal form of `val(p)` over `Y`.
pub fn slex_slp(f: &FactorSpec, base: u32, p: &Slp) -> Result<Slp, AbelianError> {
    let v = abelian_vector(f, base, p)?;
    Ok(counts_slp(p.alphabet().clone(), base, &f.slex_counts(&v)))
}
