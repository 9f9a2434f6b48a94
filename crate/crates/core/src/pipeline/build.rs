//! The normal-form program builder and the compressed word problem solver.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

use crate::abelian::power_var;
use crate::alphabet::LetterId;
use crate::extensions::{CutKind, Rhs, Tcslp};
use crate::group::{GroupContext, Syllable};
use crate::slp::{Slp, SlpBuilder, Symbol, VarId};

use super::convert::convert;
use super::store::{NodeId, NodeKind, Store};
use super::PipelineError;

fn check_alphabet(p: &Slp, ctx: &GroupContext) -> Result<(), PipelineError> {
    if p.alphabet() == ctx.alphabet() {
        Ok(())
    } else {
        Err(PipelineError::AlphabetMismatch)
    }
}

/// Output rules of the builder. Store nodes emitted as plain rules are
/// shared.
struct Emitter {
    rules: Vec<Rhs>,
    emitted: HashMap<NodeId, VarId>,
}

impl Emitter {
    fn push(&mut self, rhs: Rhs) -> VarId {
        self.rules.push(rhs);
        VarId(self.rules.len() as u32 - 1)
    }

    fn node(&mut self, store: &Store, n: NodeId) -> VarId {
        if let Some(&v) = self.emitted.get(&n) {
            return v;
        }
        for x in store.reachable(&[n]) {
            if self.emitted.contains_key(&x) {
                continue;
            }
            let rhs = match store.kind(x) {
                NodeKind::Empty => Vec::new(),
                NodeKind::Letter(l) => vec![Symbol::Letter(l)],
                NodeKind::Pair(a, b) => vec![Symbol::Var(self.emitted[&a]), Symbol::Var(self.emitted[&b])],
            };
            let v = self.push(Rhs::Seq(rhs));
            self.emitted.insert(x, v);
        }
        self.emitted[&n]
    }

    /// `target[[start:end))` of a value with `hat` components, as a
    /// symbol; `None` when empty.
    fn cut(&mut self, target: VarId, start: &BigUint, end: &BigUint, hat: &BigUint) -> Option<Symbol> {
        if start >= end {
            None
        } else if start.is_zero() && end == hat {
            Some(Symbol::Var(target))
        } else {
            Some(Symbol::Var(self.push(Rhs::Cut {
                var: target,
                start: start.clone(),
                end: end.clone(),
                kind: CutKind::Compressed,
            })))
        }
    }
}

/// The engine shared by both builders: variables in height order, each
/// pair rule `A -> BC` rewritten as `T_B[[:k)) . S . T_C[[l:))` where `S`
/// is the merged syllable at the junction, if any.
fn build(g: &Slp, ctx: &GroupContext) -> Result<Tcslp, PipelineError> {
    check_alphabet(g, ctx)?;
    let l = ctx.require_constants()?.l;
    let p = g.trim().to_cnf();
    let mut store = Store::new(ctx);
    let mut out = Emitter {
        rules: Vec::new(),
        emitted: HashMap::new(),
    };
    let mut nodes: Vec<NodeId> = Vec::with_capacity(p.num_vars());
    let mut tvars: Vec<VarId> = Vec::with_capacity(p.num_vars());
    for (i, rhs) in p.rules().iter().enumerate() {
        let (node, t) = match rhs.as_slice() {
            [] => (NodeId::EMPTY, out.push(Rhs::Seq(Vec::new()))),
            &[Symbol::Letter(a)] => (store.letter(a), out.push(Rhs::Seq(vec![Symbol::Letter(a)]))),
            &[Symbol::Var(b), Symbol::Var(c)] => {
                let (nb, nc) = (nodes[b.index()], nodes[c.index()]);
                let (tb, tc) = (tvars[b.index()], tvars[c.index()]);
                let j = store.nf_concat(nb, nc);
                if !store.is_nf(j.node) {
                    return Err(PipelineError::NoWitness {
                        var: VarId(i as u32),
                        radius: l,
                        detail: "junction is not nf-reduced".into(),
                    });
                }
                let hb = store.hat(nb).clone();
                let hc = store.hat(nc).clone();
                let mut parts = Vec::with_capacity(3);
                parts.extend(out.cut(tb, &BigUint::zero(), &j.keep, &hb));
                if let Some(s) = &j.merged {
                    let m = store.slex_node(s);
                    parts.push(Symbol::Var(out.node(&store, m)));
                }
                parts.extend(out.cut(tc, &j.resume, &hc, &hc));
                (j.node, out.push(Rhs::Seq(parts)))
            }
            _ => unreachable!("input is in Chomsky normal form"),
        };
        nodes.push(node);
        tvars.push(t);
    }
    let start = tvars[p.start().index()];
    Ok(Tcslp::from_sorted(ctx.alphabet().clone(), out.rules, start, l))
}

/// A geodesic nf-reduced program with cuts and tethers whose value is
/// `nf(val(g))`. Corresponding vertices of the triangle at each junction
/// coincide in a free product, so every tether word is empty and the
/// junction reduces to compressed cuts around one merged syllable.
pub fn build_nf_tcslp(g: &Slp, ctx: &GroupContext) -> Result<Tcslp, PipelineError> {
    build(g, ctx)
}

/// [`build_nf_tcslp`] for inputs whose derived word has no zero
/// syllables.
pub fn build_nf_tcslp_geodesic(g: &Slp, ctx: &GroupContext) -> Result<Tcslp, PipelineError> {
    check_alphabet(g, ctx)?;
    let mut store = Store::new(ctx);
    let n = store.import(g)?;
    let reduced = store.normalize_components(n)?;
    if store.hat(reduced) != store.hat(n) {
        return Err(PipelineError::Precondition("derived word is not geodesic".into()));
    }
    build(g, ctx)
}

/// `nf(val(g))` as a plain program.
pub fn nf_slp(g: &Slp, ctx: &GroupContext) -> Result<Slp, PipelineError> {
    convert(&build_nf_tcslp(g, ctx)?, ctx)
}

/// Outcome of [`solve_cwp`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CwpReport {
    /// `val(g)` represents the identity.
    pub trivial: bool,
    /// Decided by the abelianization filter without building a normal form.
    pub prefiltered: bool,
    pub input_size: usize,
    pub tcslp_size: usize,
    pub nf_size: usize,
}

/// Per-factor exponent sums of `val(g)`; all zero when `val(g)` is
/// trivial.
pub fn abelian_image(g: &Slp, ctx: &GroupContext) -> Vec<Vec<BigInt>> {
    let p = g.trim();
    let mut counts: Vec<Vec<BigUint>> = Vec::with_capacity(p.num_vars());
    for rhs in p.rules() {
        let mut c = vec![BigUint::zero(); ctx.num_letters()];
        for s in rhs {
            match *s {
                Symbol::Letter(l) => c[l.index()] += 1u32,
                Symbol::Var(v) => {
                    for (x, y) in c.iter_mut().zip(&counts[v.index()]) {
                        *x += y;
                    }
                }
            }
        }
        counts.push(c);
    }
    let total = &counts[p.start().index()];
    let mut out: Vec<Vec<BigInt>> = ctx.factors().iter().map(|f| f.spec.zero()).collect();
    for l in ctx.letters() {
        let n = BigInt::from(total[l.index()].clone());
        if n.is_zero() {
            continue;
        }
        let f = ctx.factor_of(l);
        ctx.factor(f).spec.add_letter(&mut out[f], ctx.local_index(l), &n);
    }
    out
}

/// Decides whether `val(g)` represents the identity.
pub fn solve_cwp(g: &Slp, ctx: &GroupContext) -> Result<CwpReport, PipelineError> {
    solve_cwp_with(g, ctx, true)
}

/// [`solve_cwp`] with the abelianization filter optional.
pub fn solve_cwp_with(g: &Slp, ctx: &GroupContext, prefilter: bool) -> Result<CwpReport, PipelineError> {
    check_alphabet(g, ctx)?;
    ctx.require_constants()?;
    let input_size = g.size();
    if prefilter && abelian_image(g, ctx).iter().flatten().any(|x| !x.is_zero()) {
        return Ok(CwpReport {
            trivial: false,
            prefiltered: true,
            input_size,
            tcslp_size: 0,
            nf_size: 0,
        });
    }
    let t = build_nf_tcslp(g, ctx)?;
    let s = convert(&t, ctx)?;
    Ok(CwpReport {
        trivial: s.value_length().is_zero(),
        prefiltered: false,
        input_size,
        tcslp_size: t.size(),
        nf_size: s.size(),
    })
}

/// `nf(val(p))` for `p` whose components are slex and whose derived word
/// is a `(lambda, c)`-quasigeodesic. Only zero syllables can remain after
/// normalizing components, and those are removed by reduction.
pub fn nf_from_quasigeodesic(p: &Slp, ctx: &GroupContext, lambda: u64, c: u64) -> Result<Slp, PipelineError> {
    check_alphabet(p, ctx)?;
    if lambda == 0 {
        return Err(PipelineError::Precondition(format!("lambda = {lambda}, c = {c}")));
    }
    let mut store = Store::new(ctx);
    let n = store.import(p)?;
    let m = match store.normalize_components(n) {
        Ok(m) if store.is_nf(m) => m,
        _ => store.nf(n),
    };
    Ok(store.export(m))
}

/// The constant `C` of the size bound `C |w^| log2(max(|w|, 2))` met by
/// [`nf_short_hat`]: a syllable uses at most `2 r + |X|` letters, each a
/// power of size at most `3 log2 n + 1`, plus one start symbol.
pub fn short_hat_constant(ctx: &GroupContext) -> u64 {
    let width = ctx
        .factors()
        .iter()
        .map(|f| 2 * f.spec.rank() + f.spec.extras().len())
        .max()
        .unwrap_or(1) as u64;
    5 * width + 2
}

/// `nf(val(p))` for `p` with a short derived word: the syllables are
/// reduced explicitly and each is written as compact powers of its slex
/// letters.
pub fn nf_short_hat(p: &Slp, ctx: &GroupContext) -> Result<Slp, PipelineError> {
    check_alphabet(p, ctx)?;
    let mut store = Store::new(ctx);
    let n = store.import(p)?;
    let syllables = ctx.reduce_syllables(store.syllables(n));
    Ok(syllables_slp(ctx, &syllables))
}

/// A program whose value is the slex word of each syllable in turn.
pub fn syllables_slp(ctx: &GroupContext, syllables: &[Syllable]) -> Slp {
    let mut b = SlpBuilder::new(ctx.alphabet().clone());
    let mut top = Vec::new();
    for s in syllables {
        let spec = &ctx.factor(s.factor).spec;
        for (y, count) in spec.slex_counts(&s.vector).iter().enumerate() {
            if let Some(v) = power_var(&mut b, ctx.global_letter(s.factor, y), count) {
                top.push(Symbol::Var(v));
            }
        }
    }
    let start = b.push(top);
    b.finish(start)
}

/// A word `eta` with `|eta| <= L` and `val(u)[[:k)) eta = val(v)[[:l))` in
/// the group, for nf-reduced `u`, `v`. In a free product the shortlex
/// least such word is the normal form of the difference, so the search
/// reduces to one compressed normal form.
pub fn bounded_difference_search(
    ctx: &GroupContext,
    u: &Slp,
    k: &BigUint,
    v: &Slp,
    l: &BigUint,
) -> Result<Option<Vec<LetterId>>, PipelineError> {
    check_alphabet(u, ctx)?;
    check_alphabet(v, ctx)?;
    let radius = ctx.require_constants()?.l;
    let mut store = Store::new(ctx);
    let (nu, nv) = (store.import(u)?, store.import(v)?);
    for (n, end) in [(nu, k), (nv, l)] {
        if end > store.hat(n) {
            return Err(PipelineError::ComponentRange {
                start: BigUint::zero(),
                end: end.clone(),
                hat: store.hat(n).clone(),
            });
        }
    }
    let a = store.extract_components(nu, &BigUint::zero(), k);
    let a = store.nf(a);
    let b = store.extract_components(nv, &BigUint::zero(), l);
    let b = store.nf(b);
    let ai = store.inverse_nf(a);
    let d = store.nf_concat(ai, b).node;
    Ok(store.decompress(d, radius))
}

#[cfg(test)]
mod tests;
