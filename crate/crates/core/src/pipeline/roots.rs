//! Component roots, the splitting test and conversion between letter and
//! component positions.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::group::GroupContext;
use crate::slp::{BigLength, Slp, Symbol, VarId};

use super::store::{NodeId, NodeKind, Store};
use super::PipelineError;

/// For a program where every component of every variable's value has a
/// root: the single factor of one-component variables and the roots of
/// the first and last components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootIndex {
    /// `Some(i)` when the value is one nonempty component of factor `i`.
    pub factor: Vec<Option<usize>>,
    pub first_root: Vec<Option<VarId>>,
    pub last_root: Vec<Option<VarId>>,
}

impl RootIndex {
    /// Variables whose value lies in one factor, grouped by factor.
    pub fn per_factor(&self, num_factors: usize) -> Vec<Vec<VarId>> {
        let mut out = vec![Vec::new(); num_factors];
        for (v, f) in self.factor.iter().enumerate() {
            if let Some(f) = f {
                out[*f].push(VarId(v as u32));
            }
        }
        out
    }
}

struct Rooter<'s, 'c> {
    store: &'s mut Store<'c>,
    rooted: HashMap<NodeId, NodeId>,
    strip_first: HashMap<NodeId, NodeId>,
    strip_last: HashMap<NodeId, NodeId>,
}

impl Rooter<'_, '_> {
    fn single(&self, n: NodeId) -> bool {
        self.store.hat(n).is_one()
    }

    /// Root of the last component of a rooted node.
    fn last_root(&self, mut n: NodeId) -> NodeId {
        loop {
            if self.single(n) {
                return n;
            }
            match self.store.kind(n) {
                NodeKind::Pair(_, b) => n = b,
                _ => unreachable!(),
            }
        }
    }

    fn first_root(&self, mut n: NodeId) -> NodeId {
        loop {
            if self.single(n) {
                return n;
            }
            match self.store.kind(n) {
                NodeKind::Pair(a, _) => n = a,
                _ => unreachable!(),
            }
        }
    }

    /// A rooted node for the value without its last component.
    fn strip_last(&mut self, n: NodeId) -> NodeId {
        if self.single(n) {
            return NodeId::EMPTY;
        }
        if let Some(&r) = self.strip_last.get(&n) {
            return r;
        }
        // iterate down the right spine, then rebuild
        let mut spine = Vec::new();
        let mut cur = n;
        while !self.single(cur) {
            let NodeKind::Pair(a, b) = self.store.kind(cur) else { unreachable!() };
            spine.push((cur, a));
            cur = b;
        }
        let mut acc = NodeId::EMPTY;
        while let Some((node, a)) = spine.pop() {
            acc = self.store.pair(a, acc);
            self.strip_last.insert(node, acc);
        }
        acc
    }

    fn strip_first(&mut self, n: NodeId) -> NodeId {
        if self.single(n) {
            return NodeId::EMPTY;
        }
        if let Some(&r) = self.strip_first.get(&n) {
            return r;
        }
        let mut spine = Vec::new();
        let mut cur = n;
        while !self.single(cur) {
            let NodeKind::Pair(a, b) = self.store.kind(cur) else { unreachable!() };
            spine.push((cur, b));
            cur = a;
        }
        let mut acc = NodeId::EMPTY;
        while let Some((node, b)) = spine.pop() {
            acc = self.store.pair(acc, b);
            self.strip_first.insert(node, acc);
        }
        acc
    }

    /// Rebuilds `n` so that a node joining two components always derives
    /// exactly one component.
    fn root(&mut self, n: NodeId) -> NodeId {
        let order = self.store.reachable(&[n]);
        for x in order {
            if self.rooted.contains_key(&x) {
                continue;
            }
            let r = match self.store.kind(x) {
                NodeKind::Empty | NodeKind::Letter(_) => x,
                NodeKind::Pair(a, b) => {
                    let (ra, rb) = (self.rooted[&a], self.rooted[&b]);
                    let merged = self.store.last_edge(ra).unwrap().factor == self.store.first_edge(rb).unwrap().factor;
                    if !merged || (self.single(ra) && self.single(rb)) {
                        self.store.pair(ra, rb)
                    } else {
                        let lr = self.last_root(ra);
                        let fr = self.first_root(rb);
                        let d = self.store.pair(lr, fr);
                        let sa = self.strip_last(ra);
                        let sb = self.strip_first(rb);
                        let left = self.store.pair(sa, d);
                        self.store.pair(left, sb)
                    }
                }
            };
            self.rooted.insert(x, r);
        }
        self.rooted[&n]
    }
}

/// Rewrites a program in Chomsky normal form so that every component of
/// every variable's value has a root, preserving the value.
pub fn ensure_component_roots(p: &Slp, ctx: &GroupContext) -> Result<(Slp, RootIndex), PipelineError> {
    let mut store = Store::new(ctx);
    let root = store.import(&p.to_cnf())?;
    let mut rooter = Rooter {
        store: &mut store,
        rooted: HashMap::new(),
        strip_first: HashMap::new(),
        strip_last: HashMap::new(),
    };
    let out = rooter.root(root);
    let slp = store.export(out);
    let index = root_index(&slp, ctx)?;
    Ok((slp, index))
}

/// Root data of a program whose joining variables derive single
/// components.
fn root_index(p: &Slp, ctx: &GroupContext) -> Result<RootIndex, PipelineError> {
    let mut store = Store::new(ctx);
    let nodes = store.import_vars(p)?;
    let n = p.num_vars();
    let mut index = RootIndex {
        factor: vec![None; n],
        first_root: vec![None; n],
        last_root: vec![None; n],
    };
    for (i, rhs) in p.rules().iter().enumerate() {
        let node = nodes[i];
        if store.hat(node).is_zero() {
            continue;
        }
        if store.hat(node).is_one() {
            index.factor[i] = Some(store.first_edge(node).unwrap().factor);
            index.first_root[i] = Some(VarId(i as u32));
            index.last_root[i] = Some(VarId(i as u32));
            continue;
        }
        let kids: Vec<VarId> = rhs
            .iter()
            .filter_map(|s| match *s {
                Symbol::Var(v) => Some(v),
                Symbol::Letter(_) => None,
            })
            .collect();
        if kids.len() != rhs.len() || kids.is_empty() {
            return Err(PipelineError::Precondition("program is not in Chomsky normal form".into()));
        }
        let first = kids.iter().find(|v| !store.hat(nodes[v.index()]).is_zero());
        let last = kids.iter().rev().find(|v| !store.hat(nodes[v.index()]).is_zero());
        index.first_root[i] = first.and_then(|v| index.first_root[v.index()]);
        index.last_root[i] = last.and_then(|v| index.last_root[v.index()]);
    }
    Ok(index)
}

/// How a subword occurrence relates to the components of the word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitClass {
    /// A union of complete components.
    NonSplitting,
    /// Starts or ends strictly inside a component without lying in one.
    Splitting,
    /// A proper part of a single component; not allowed as a cut.
    InsideComponent,
}

/// Classifies the occurrence `val(p)[i:j)`.
pub fn split_check(p: &Slp, ctx: &GroupContext, i: &BigLength, j: &BigLength) -> Result<SplitClass, PipelineError> {
    let mut store = Store::new(ctx);
    let n = store.import(p)?;
    let len = store.len(n).clone();
    if i > j || *j > len {
        return Err(crate::slp::SlpError::IndexOutOfRange {
            start: i.clone(),
            end: j.clone(),
            len,
        }
        .into());
    }
    let bi = store.compressed_index(n, i).is_some();
    let bj = store.compressed_index(n, j).is_some();
    if bi && bj {
        return Ok(SplitClass::NonSplitting);
    }
    let sub = store.extract(n, i, j);
    Ok(if store.hat(sub) <= &BigUint::one() {
        SplitClass::InsideComponent
    } else {
        SplitClass::Splitting
    })
}

/// Letter positions `(i, j)` of the component range `[[k:l))`.
pub fn compressed_index_convert(
    p: &Slp,
    ctx: &GroupContext,
    k: &BigUint,
    l: &BigUint,
) -> Result<(BigLength, BigLength), PipelineError> {
    let mut store = Store::new(ctx);
    let n = store.import(p)?;
    let hat = store.hat(n).clone();
    if k > l || *l > hat {
        return Err(PipelineError::ComponentRange {
            start: k.clone(),
            end: l.clone(),
            hat,
        });
    }
    Ok((store.component_start(n, k), store.component_start(n, l)))
}

/// Component range `[[k:l))` of letter positions `[i:j)` that are
/// component boundaries.
pub fn raw_index_convert(
    p: &Slp,
    ctx: &GroupContext,
    i: &BigLength,
    j: &BigLength,
) -> Result<(BigUint, BigUint), PipelineError> {
    let mut store = Store::new(ctx);
    let n = store.import(p)?;
    let k = store
        .compressed_index(n, i)
        .ok_or_else(|| PipelineError::NotComponentAligned(i.clone()))?;
    let l = store
        .compressed_index(n, j)
        .ok_or_else(|| PipelineError::NotComponentAligned(j.clone()))?;
    if k > l {
        return Err(PipelineError::ComponentRange {
            start: k,
            end: l,
            hat: store.hat(n).clone(),
        });
    }
    Ok((k, l))
}
