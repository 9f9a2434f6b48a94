//! Conversions of programs with cuts and tethers into plain programs.

use std::collections::HashMap;

use crate::alphabet::LetterId;
use crate::extensions::{CutKind, ExtError, Rhs, Tcslp, Tslp};
use crate::group::GroupContext;
use crate::slp::{Slp, Symbol, VarId};

use super::store::{NodeId, NodeKind, Store};
use super::PipelineError;

/// Value of one variable given its children's nodes.
fn eval_rule(store: &mut Store, rhs: &Rhs, var: VarId, nodes: &[NodeId]) -> Result<NodeId, PipelineError> {
    Ok(match rhs {
        Rhs::Seq(s) => {
            let parts: Vec<NodeId> = s
                .iter()
                .map(|x| match *x {
                    Symbol::Letter(l) => store.letter(l),
                    Symbol::Var(c) => nodes[c.index()],
                })
                .collect();
            store.concat(&parts)
        }
        Rhs::Cut {
            var: target,
            start,
            end,
            kind,
        } => {
            let n = nodes[target.index()];
            let out_of_range = || ExtError::CutOutOfRange {
                var,
                start: start.clone(),
                end: end.clone(),
                len: store.len(n).clone(),
            };
            match kind {
                CutKind::Raw => {
                    if start > end || end > store.len(n) {
                        return Err(out_of_range().into());
                    }
                    store.extract(n, start, end)
                }
                CutKind::Compressed => {
                    if start > end || end > store.hat(n) {
                        return Err(out_of_range().into());
                    }
                    store.extract_components(n, start, end)
                }
            }
        }
        Rhs::Tether { var: target, left, right } => store.tether(nodes[target.index()], left, right),
    })
}

/// Nodes for the variables in `wanted` and everything below them.
fn evaluate(store: &mut Store, t: &Tcslp, wanted: &[bool]) -> Result<Vec<NodeId>, PipelineError> {
    let mut nodes = vec![NodeId::EMPTY; t.num_vars()];
    for (i, rhs) in t.rules().iter().enumerate() {
        if wanted[i] {
            nodes[i] = eval_rule(store, rhs, VarId(i as u32), &nodes)?;
        }
    }
    Ok(nodes)
}

/// Variables reachable from `roots`.
fn below(t: &Tcslp, roots: &[VarId]) -> Vec<bool> {
    let mut mark = vec![false; t.num_vars()];
    let mut stack: Vec<VarId> = roots.to_vec();
    let mut kids = Vec::new();
    while let Some(v) = stack.pop() {
        if !mark[v.index()] {
            mark[v.index()] = true;
            kids.clear();
            t.rule(v).children(&mut kids);
            stack.extend(kids.iter().copied());
        }
    }
    mark
}

fn check_tethers(t: &Tcslp, ctx: &GroupContext) -> Result<(), PipelineError> {
    let l = ctx.require_constants()?.l;
    for (i, rhs) in t.rules().iter().enumerate() {
        if let Rhs::Tether { left, right, .. } = rhs {
            let len = left.len().max(right.len());
            if len > l {
                return Err(ExtError::TetherTooLong {
                    var: VarId(i as u32),
                    len,
                    bound: l,
                }
                .into());
            }
        }
    }
    Ok(())
}

/// Appends the rules of `n` to `rules`, sharing nodes already emitted.
fn emit(store: &Store, n: NodeId, rules: &mut Vec<Rhs>, emitted: &mut HashMap<NodeId, VarId>) -> VarId {
    if let Some(&v) = emitted.get(&n) {
        return v;
    }
    for x in store.reachable(&[n]) {
        if emitted.contains_key(&x) {
            continue;
        }
        let rhs = match store.kind(x) {
            NodeKind::Empty => Vec::new(),
            NodeKind::Letter(l) => vec![Symbol::Letter(l)],
            NodeKind::Pair(a, b) => vec![Symbol::Var(emitted[&a]), Symbol::Var(emitted[&b])],
        };
        emitted.insert(x, VarId(rules.len() as u32));
        rules.push(Rhs::Seq(rhs));
    }
    emitted[&n]
}

/// Eliminates cut operators. Each cut is resolved on the exact value of
/// its target, which is a plain program after the tethers below the cut
/// are evaluated; tethers outside cut targets stay in place. The tether
/// bound is kept.
pub fn tcslp_to_tslp(t: &Tcslp, ctx: &GroupContext) -> Result<Tslp, PipelineError> {
    check_tethers(t, ctx)?;
    let targets: Vec<VarId> = t
        .rules()
        .iter()
        .filter_map(|r| match r {
            Rhs::Cut { var, .. } => Some(*var),
            _ => None,
        })
        .collect();
    let mut wanted = below(t, &targets);
    for (i, r) in t.rules().iter().enumerate() {
        if matches!(r, Rhs::Cut { .. }) {
            wanted[i] = true;
        }
    }
    let mut store = Store::new(ctx);
    let nodes = evaluate(&mut store, t, &wanted)?;
    let mut rules: Vec<Rhs> = Vec::new();
    let mut emitted: HashMap<NodeId, VarId> = HashMap::new();
    let mut map: Vec<VarId> = Vec::with_capacity(t.num_vars());
    let remap = |v: &VarId, map: &[VarId]| map[v.index()];
    for (i, rhs) in t.rules().iter().enumerate() {
        let new = match rhs {
            Rhs::Cut { .. } => emit(&store, nodes[i], &mut rules, &mut emitted),
            Rhs::Seq(s) => {
                let s = s
                    .iter()
                    .map(|x| match x {
                        Symbol::Var(v) => Symbol::Var(remap(v, &map)),
                        l => *l,
                    })
                    .collect();
                rules.push(Rhs::Seq(s));
                VarId(rules.len() as u32 - 1)
            }
            Rhs::Tether { var, left, right } => {
                rules.push(Rhs::Tether {
                    var: remap(var, &map),
                    left: left.clone(),
                    right: right.clone(),
                });
                VarId(rules.len() as u32 - 1)
            }
        };
        map.push(new);
    }
    let start = map[t.start().index()];
    let out = Tcslp::from_sorted(t.alphabet().clone(), rules, start, t.tether_bound());
    Ok(Tslp::try_from(out)?)
}

/// Evaluates the tethers of a cut-free program.
pub fn tslp_to_slp(u: &Tslp, ctx: &GroupContext) -> Result<Slp, PipelineError> {
    let t = u.inner();
    check_tethers(t, ctx)?;
    let mut store = Store::new(ctx);
    let wanted = below(t, &[t.start()]);
    let nodes = evaluate(&mut store, t, &wanted)?;
    Ok(store.export(nodes[t.start().index()]))
}

/// A plain program with the value of a program with cuts and tethers.
pub fn convert(t: &Tcslp, ctx: &GroupContext) -> Result<Slp, PipelineError> {
    tslp_to_slp(&tcslp_to_tslp(t, ctx)?, ctx)
}

/// `nf(val(p) v)` for nf-reduced `p` and `|v| <= L`, through the tether
/// `S<eps, v^-1>`.
pub fn append_bounded_suffix(p: &Slp, v: &[LetterId], ctx: &GroupContext) -> Result<Slp, PipelineError> {
    let l = ctx.require_constants()?.l;
    if v.len() > l {
        return Err(PipelineError::Precondition(format!(
            "suffix of length {} exceeds L = {l}",
            v.len()
        )));
    }
    let mut t = Tcslp::from_slp(p, l);
    let rules = {
        let mut r: Vec<Rhs> = t.rules().to_vec();
        r.push(Rhs::Tether {
            var: t.start(),
            left: Vec::new(),
            right: ctx.inverse_word(v),
        });
        r
    };
    let start = VarId(rules.len() as u32 - 1);
    t = Tcslp::from_rules(p.alphabet().clone(), rules, start, l)?;
    tslp_to_slp(&Tslp::try_from(t)?, ctx)
}

/// Rewrites raw cuts as compressed cuts; each raw cut must be a union of
/// complete components of its target's value.
pub fn compressed_cut_normalize(t: &Tcslp, ctx: &GroupContext) -> Result<Tcslp, PipelineError> {
    let targets: Vec<VarId> = t
        .rules()
        .iter()
        .filter_map(|r| match r {
            Rhs::Cut {
                var,
                kind: CutKind::Raw,
                ..
            } => Some(*var),
            _ => None,
        })
        .collect();
    if targets.is_empty() {
        return Ok(t.clone());
    }
    let wanted = below(t, &targets);
    let mut store = Store::new(ctx);
    let nodes = evaluate(&mut store, t, &wanted)?;
    let mut rules = Vec::with_capacity(t.num_vars());
    for (i, rhs) in t.rules().iter().enumerate() {
        rules.push(match rhs {
            Rhs::Cut {
                var,
                start,
                end,
                kind: CutKind::Raw,
            } => {
                let n = nodes[var.index()];
                let splitting = || ExtError::SplittingCut {
                    var: VarId(i as u32),
                    target: *var,
                };
                if start > end || end > store.len(n) {
                    return Err(ExtError::CutOutOfRange {
                        var: VarId(i as u32),
                        start: start.clone(),
                        end: end.clone(),
                        len: store.len(n).clone(),
                    }
                    .into());
                }
                let k = store.compressed_index(n, start).ok_or_else(splitting)?;
                let l = store.compressed_index(n, end).ok_or_else(splitting)?;
                Rhs::Cut {
                    var: *var,
                    start: k,
                    end: l,
                    kind: CutKind::Compressed,
                }
            }
            other => other.clone(),
        });
    }
    Ok(Tcslp::from_rules(t.alphabet().clone(), rules, t.start(), t.tether_bound())?)
}

#[cfg(test)]
mod tests;
