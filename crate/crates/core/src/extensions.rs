//! Programs with cut and tether right-hand sides.
//!
//! A cut `B[i:j)` takes a factor of `val(B)`, either by letter positions
//! (raw) or by positions in the derived word (compressed). A tether
//! `B<alpha, beta>` has value `nf(alpha val(B) beta^-1)`.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::alphabet::{Alphabet, LetterId};
use crate::slp::{check_size_bound, topo_sort, BigLength, Cutter, Slp, SlpBuilder, SlpError, Symbol, VarId};

/// How the indices of a cut are measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CutKind {
    /// Letter positions in the value.
    Raw,
    /// Component positions in the derived word of the value.
    Compressed,
}

/// Right-hand side of a variable in an extended program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rhs {
    Seq(Vec<Symbol>),
    Cut {
        var: VarId,
        start: BigLength,
        end: BigLength,
        kind: CutKind,
    },
    Tether {
        var: VarId,
        left: Vec<LetterId>,
        right: Vec<LetterId>,
    },
}

impl Rhs {
    /// Number of alphabet and variable symbols, the size used for
    /// extended programs.
    pub fn size(&self) -> usize {
        match self {
            Rhs::Seq(s) => s.len(),
            Rhs::Cut { .. } => 1,
            Rhs::Tether { left, right, .. } => 1 + left.len() + right.len(),
        }
    }

    pub fn children(&self, out: &mut Vec<VarId>) {
        match self {
            Rhs::Seq(s) => out.extend(s.iter().filter_map(|x| match *x {
                Symbol::Var(v) => Some(v),
                Symbol::Letter(_) => None,
            })),
            Rhs::Cut { var, .. } | Rhs::Tether { var, .. } => out.push(*var),
        }
    }

    fn remap(&self, map: &[VarId]) -> Rhs {
        let m = |v: &VarId| map[v.index()];
        match self {
            Rhs::Seq(s) => Rhs::Seq(
                s.iter()
                    .map(|x| match x {
                        Symbol::Var(v) => Symbol::Var(m(v)),
                        l => *l,
                    })
                    .collect(),
            ),
            Rhs::Cut {
                var,
                start,
                end,
                kind,
            } => Rhs::Cut {
                var: m(var),
                start: start.clone(),
                end: end.clone(),
                kind: *kind,
            },
            Rhs::Tether { var, left, right } => Rhs::Tether {
                var: m(var),
                left: left.clone(),
                right: right.clone(),
            },
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtError {
    #[error(transparent)]
    Slp(#[from] SlpError),
    #[error("cut [{start}:{end}) of {var} is out of range for length {len}")]
    CutOutOfRange {
        var: VarId,
        start: BigLength,
        end: BigLength,
        len: BigLength,
    },
    #[error("tether word of length {len} exceeds the bound {bound} at {var}")]
    TetherTooLong { var: VarId, len: usize, bound: usize },
    #[error("program contains tethers; a normal form is needed to evaluate it")]
    HasTethers,
    #[error("program contains cuts")]
    HasCuts,
    #[error("compressed cut at {0} needs a group context")]
    CompressedCutWithoutGroup(VarId),
    #[error("cut at {var} splits a component of the value of {target}")]
    SplittingCut { var: VarId, target: VarId },
    #[error("value of length {len} exceeds the evaluation limit {max}")]
    TooLong { len: BigLength, max: BigLength },
}

/// The group data needed to give tethers and compressed cuts a meaning.
pub trait TetherSemantics {
    /// The normal form of an explicit word.
    fn normal_form(&self, word: &[LetterId]) -> Vec<LetterId>;
    /// Identifier of the parabolic factor a letter belongs to.
    fn factor_of(&self, letter: LetterId) -> usize;
    /// The inverse letter.
    fn inverse(&self, letter: LetterId) -> LetterId;
}

/// Start offsets of the components of `word`, plus the final length.
pub fn component_boundaries(word: &[LetterId], factor_of: impl Fn(LetterId) -> usize) -> Vec<usize> {
    let mut out = Vec::new();
    for (i, &l) in word.iter().enumerate() {
        if i == 0 || factor_of(l) != factor_of(word[i - 1]) {
            out.push(i);
        }
    }
    out.push(word.len());
    out
}

/// A tethered cut program. Cut-only and tether-only programs are the same
/// type with the other kind of rule absent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tcslp {
    alphabet: Arc<Alphabet>,
    rules: Vec<Rhs>,
    start: VarId,
    tether_bound: usize,
}

impl Tcslp {
    /// Builds from rules in any order, validating references, acyclicity
    /// and the tether bound, and renumbering topologically.
    pub fn from_rules(
        alphabet: Arc<Alphabet>,
        rules: Vec<Rhs>,
        start: VarId,
        tether_bound: usize,
    ) -> Result<Self, ExtError> {
        let n = rules.len();
        if n == 0 {
            return Err(SlpError::Empty.into());
        }
        let mut kids = Vec::new();
        for rhs in &rules {
            kids.clear();
            rhs.children(&mut kids);
            if let Some(v) = kids.iter().find(|v| v.index() >= n) {
                return Err(SlpError::UnknownVariable(v.to_string()).into());
            }
            let letters: Vec<LetterId> = match rhs {
                Rhs::Seq(s) => s
                    .iter()
                    .filter_map(|x| match *x {
                        Symbol::Letter(l) => Some(l),
                        Symbol::Var(_) => None,
                    })
                    .collect(),
                Rhs::Tether { left, right, .. } => left.iter().chain(right).copied().collect(),
                Rhs::Cut { .. } => Vec::new(),
            };
            if let Some(&l) = letters.iter().find(|l| l.index() >= alphabet.len()) {
                return Err(SlpError::LetterOutOfRange(l).into());
            }
        }
        if start.index() >= n {
            return Err(SlpError::UnknownVariable(start.to_string()).into());
        }
        let order = topo_sort(n, |v, out| {
            let mut k = Vec::new();
            rules[v].children(&mut k);
            out.extend(k.into_iter().map(VarId::index));
        })
        .map_err(|v| SlpError::Cycle(VarId(v as u32).to_string()))?;
        let mut map = vec![VarId(0); n];
        for (new, &old) in order.iter().enumerate() {
            map[old] = VarId(new as u32);
        }
        let sorted: Vec<Rhs> = order.iter().map(|&old| rules[old].remap(&map)).collect();
        let t = Tcslp {
            alphabet,
            rules: sorted,
            start: map[start.index()],
            tether_bound,
        };
        t.check_tether_bound()?;
        Ok(t)
    }

    /// Internal constructor for topologically sorted rules.
    pub(crate) fn from_sorted(alphabet: Arc<Alphabet>, rules: Vec<Rhs>, start: VarId, tether_bound: usize) -> Self {
        let t = Tcslp {
            alphabet,
            rules,
            start,
            tether_bound,
        };
        debug_assert!(t.check_tether_bound().is_ok());
        t
    }

    fn check_tether_bound(&self) -> Result<(), ExtError> {
        for (i, rhs) in self.rules.iter().enumerate() {
            if let Rhs::Tether { left, right, .. } = rhs {
                let len = left.len().max(right.len());
                if len > self.tether_bound {
                    return Err(ExtError::TetherTooLong {
                        var: VarId(i as u32),
                        len,
                        bound: self.tether_bound,
                    });
                }
            }
        }
        Ok(())
    }

    /// An extended program with the same rules as `p`.
    pub fn from_slp(p: &Slp, tether_bound: usize) -> Self {
        Tcslp {
            alphabet: p.alphabet().clone(),
            rules: p.rules().iter().cloned().map(Rhs::Seq).collect(),
            start: p.start(),
            tether_bound,
        }
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn rules(&self) -> &[Rhs] {
        &self.rules
    }

    pub fn rule(&self, v: VarId) -> &Rhs {
        &self.rules[v.index()]
    }

    pub fn start(&self) -> VarId {
        self.start
    }

    pub fn num_vars(&self) -> usize {
        self.rules.len()
    }

    /// The bound `J` on tether word lengths.
    pub fn tether_bound(&self) -> usize {
        self.tether_bound
    }

    pub fn size(&self) -> usize {
        self.rules.iter().map(Rhs::size).sum()
    }

    pub fn has_tethers(&self) -> bool {
        self.rules.iter().any(|r| matches!(r, Rhs::Tether { .. }))
    }

    pub fn has_cuts(&self) -> bool {
        self.rules.iter().any(|r| matches!(r, Rhs::Cut { .. }))
    }

    /// Heights with the usual convention; cut and tether rules add one.
    pub fn heights(&self) -> Vec<u32> {
        let mut hs: Vec<u32> = Vec::with_capacity(self.rules.len());
        let mut kids = Vec::new();
        for rhs in &self.rules {
            kids.clear();
            rhs.children(&mut kids);
            let h = kids.iter().map(|v| hs[v.index()]).max().unwrap_or(0) + 1;
            hs.push(h);
        }
        hs
    }

    /// Renders in the text format.
    pub fn to_text(&self) -> String {
        crate::text::write_tcslp(self)
    }

    /// Parses the text format; `tether_bound` bounds tether words.
    pub fn parse(text: &str, alphabet: Option<Arc<Alphabet>>, tether_bound: usize) -> Result<Tcslp, crate::text::ParseError> {
        crate::text::parse_tcslp(text, alphabet, tether_bound)
    }

    /// Cut elimination for programs without tethers and compressed cuts.
    /// Cuts are pushed toward the leaves along the derivation.
    pub fn cslp_to_slp(&self) -> Result<Slp, ExtError> {
        let mut b = SlpBuilder::new(self.alphabet.clone());
        let mut cutter = Cutter::new();
        // image of each variable; None when its value is empty
        let mut image: Vec<Option<VarId>> = Vec::with_capacity(self.rules.len());
        for (i, rhs) in self.rules.iter().enumerate() {
            let img = match rhs {
                Rhs::Seq(s) => {
                    let syms: Vec<Symbol> = s
                        .iter()
                        .filter_map(|x| match *x {
                            Symbol::Var(v) => image[v.index()].map(Symbol::Var),
                            l => Some(l),
                        })
                        .collect();
                    if syms.is_empty() {
                        None
                    } else {
                        Some(b.push(syms))
                    }
                }
                Rhs::Tether { .. } => return Err(ExtError::HasTethers),
                Rhs::Cut { kind: CutKind::Compressed, .. } => {
                    return Err(ExtError::CompressedCutWithoutGroup(VarId(i as u32)))
                }
                Rhs::Cut { var, start, end, .. } => {
                    cutter.sync(&b);
                    let len = match image[var.index()] {
                        Some(v) => cutter.len(v).clone(),
                        None => BigLength::zero(),
                    };
                    if start > end || *end > len {
                        return Err(ExtError::CutOutOfRange {
                            var: *var,
                            start: start.clone(),
                            end: end.clone(),
                            len,
                        });
                    }
                    if start == end {
                        None
                    } else {
                        let src = image[var.index()].expect("nonempty cut source");
                        Some(cutter.range(&mut b, src, start.clone(), end.clone()))
                    }
                }
            };
            image.push(img);
        }
        match image[self.start.index()] {
            None => Ok(Slp::empty(self.alphabet.clone())),
            Some(s) => Ok(b.finish(s)),
        }
    }

    /// Explicit values of all variables under the tether semantics, by
    /// decompression and explicit normal forms. Refuses long values.
    pub fn evaluate_all(&self, sem: &dyn TetherSemantics, max_len: usize) -> Result<Vec<Vec<LetterId>>, ExtError> {
        let mut vals: Vec<Vec<LetterId>> = Vec::with_capacity(self.rules.len());
        for rhs in &self.rules {
            let v = match rhs {
                Rhs::Seq(s) => {
                    let mut w = Vec::new();
                    for x in s {
                        match *x {
                            Symbol::Letter(l) => w.push(l),
                            Symbol::Var(c) => w.extend_from_slice(&vals[c.index()]),
                        }
                        if w.len() > max_len {
                            return Err(ExtError::TooLong {
                                len: w.len().into(),
                                max: max_len.into(),
                            });
                        }
                    }
                    w
                }
                Rhs::Cut {
                    var,
                    start,
                    end,
                    kind,
                } => {
                    let src = &vals[var.index()];
                    let (i, j) = match kind {
                        CutKind::Raw => (start.to_usize(), end.to_usize()),
                        CutKind::Compressed => {
                            let bounds = component_boundaries(src, |l| sem.factor_of(l));
                            let n = bounds.len() - 1;
                            let i = start.to_usize().filter(|&i| i <= n).map(|i| bounds[i]);
                            let j = end.to_usize().filter(|&j| j <= n).map(|j| bounds[j]);
                            (i, j)
                        }
                    };
                    match (i, j) {
                        (Some(i), Some(j)) if i <= j && j <= src.len() => src[i..j].to_vec(),
                        _ => {
                            return Err(ExtError::CutOutOfRange {
                                var: *var,
                                start: start.clone(),
                                end: end.clone(),
                                len: src.len().into(),
                            })
                        }
                    }
                }
                Rhs::Tether { var, left, right } => {
                    let mut w = left.clone();
                    w.extend_from_slice(&vals[var.index()]);
                    w.extend(right.iter().rev().map(|&l| sem.inverse(l)));
                    sem.normal_form(&w)
                }
            };
            vals.push(v);
        }
        Ok(vals)
    }

    /// Explicit value of the start variable.
    pub fn evaluate(&self, sem: &dyn TetherSemantics, max_len: usize) -> Result<Vec<LetterId>, ExtError> {
        Ok(self.evaluate_all(sem, max_len)?.swap_remove(self.start.index()))
    }

    /// Checks the size bound `|val|^3 <= 3^size` on an evaluated value.
    pub fn check_size_bound(&self, value_len: usize) -> bool {
        check_size_bound(&BigUint::from(value_len), self.size() as u64)
    }
}

/// A cut-only program, as accepted by plain cut elimination.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cslp(Tcslp);

impl TryFrom<Tcslp> for Cslp {
    type Error = ExtError;

    fn try_from(t: Tcslp) -> Result<Self, ExtError> {
        if t.has_tethers() {
            Err(ExtError::HasTethers)
        } else {
            Ok(Cslp(t))
        }
    }
}

impl Cslp {
    pub fn inner(&self) -> &Tcslp {
        &self.0
    }

    pub fn to_slp(&self) -> Result<Slp, ExtError> {
        self.0.cslp_to_slp()
    }
}

/// A cut-free program with tethers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tslp(Tcslp);

impl TryFrom<Tcslp> for Tslp {
    type Error = ExtError;

    fn try_from(t: Tcslp) -> Result<Self, ExtError> {
        if t.has_cuts() {
            Err(ExtError::HasCuts)
        } else {
            Ok(Tslp(t))
        }
    }
}

impl Tslp {
    pub fn inner(&self) -> &Tcslp {
        &self.0
    }

    pub fn into_inner(self) -> Tcslp {
        self.0
    }
}
