//! Hash-consed binary programs over the group alphabet. Every node keeps
//! exact summaries of its value: length, fingerprint, the number of
//! components and the letter counts of its first and last component.
//! These make component positions, nf-reducedness and syllable vectors
//! available without decompression.

use std::cell::OnceCell;
use std::collections::HashMap;
use std::rc::Rc;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::alphabet::LetterId;
use crate::equality::{Fingerprint, Recompressor};
use crate::group::{GroupContext, Syllable};
use crate::slp::{BigLength, Slp, Symbol, VarId};

use super::PipelineError;

/// A node of a [`Store`]. Children always have smaller ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    /// The node deriving the empty word.
    pub const EMPTY: NodeId = NodeId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Summary of a first or last component (possibly only part of a
/// component of a longer word).
#[derive(Debug)]
pub struct Edge {
    pub factor: usize,
    /// Multiplicity of each letter of the factor's `Y`.
    pub counts: Vec<BigUint>,
    /// Letters appear in `Y` order.
    pub sorted: bool,
    pub first: usize,
    pub last: usize,
    slex: OnceCell<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Empty,
    Letter(LetterId),
    Pair(NodeId, NodeId),
}

#[derive(Debug)]
struct Node {
    kind: NodeKind,
    len: BigLength,
    height: u32,
    fp: Fingerprint,
    hat: BigUint,
    first: Option<Rc<Edge>>,
    last: Option<Rc<Edge>>,
    /// Every component other than the first and the last is slex.
    inner_ok: bool,
}

/// Where the normal form of a concatenation `uv` of normal forms joins
/// its two halves: `u[[:keep)) . merged . v[[resume:))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Junction {
    pub node: NodeId,
    pub keep: BigUint,
    pub merged: Option<Syllable>,
    pub resume: BigUint,
}

/// The split of a long nf-reduced value used to evaluate a tether: only
/// `left` and `right` change, `middle` is copied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ladder {
    pub left: NodeId,
    pub middle: NodeId,
    pub right: NodeId,
}

/// Counters for reporting.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StoreStats {
    pub exact_equalities: u64,
    pub fingerprint_collisions: u64,
    pub binary_search_probes: u64,
}

pub struct Store<'c> {
    ctx: &'c GroupContext,
    nodes: Vec<Node>,
    pairs: HashMap<(NodeId, NodeId), NodeId>,
    letters: Vec<Option<NodeId>>,
    powers: HashMap<(LetterId, u64), NodeId>,
    rev: HashMap<NodeId, NodeId>,
    core: HashMap<NodeId, NodeId>,
    nf: HashMap<NodeId, NodeId>,
    inv: HashMap<NodeId, NodeId>,
    slex_nodes: HashMap<Syllable, NodeId>,
    pub stats: StoreStats,
}

fn two() -> BigUint {
    BigUint::from(2u32)
}

impl<'c> Store<'c> {
    pub fn new(ctx: &'c GroupContext) -> Self {
        let empty = Node {
            kind: NodeKind::Empty,
            len: BigUint::zero(),
            height: 0,
            fp: Fingerprint::EMPTY,
            hat: BigUint::zero(),
            first: None,
            last: None,
            inner_ok: true,
        };
        Store {
            ctx,
            nodes: vec![empty],
            pairs: HashMap::new(),
            letters: vec![None; ctx.num_letters()],
            powers: HashMap::new(),
            rev: HashMap::new(),
            core: HashMap::new(),
            nf: HashMap::new(),
            inv: HashMap::new(),
            slex_nodes: HashMap::new(),
            stats: StoreStats::default(),
        }
    }

    pub fn ctx(&self) -> &'c GroupContext {
        self.ctx
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    fn node(&self, n: NodeId) -> &Node {
        &self.nodes[n.index()]
    }

    pub fn kind(&self, n: NodeId) -> NodeKind {
        self.node(n).kind
    }

    pub fn len(&self, n: NodeId) -> &BigLength {
        &self.node(n).len
    }

    pub fn is_empty(&self, n: NodeId) -> bool {
        n == NodeId::EMPTY
    }

    /// Number of components, the length of the derived word.
    pub fn hat(&self, n: NodeId) -> &BigUint {
        &self.node(n).hat
    }

    pub fn height(&self, n: NodeId) -> u32 {
        self.node(n).height
    }

    pub fn fingerprint(&self, n: NodeId) -> Fingerprint {
        self.node(n).fp
    }

    pub fn first_edge(&self, n: NodeId) -> Option<&Rc<Edge>> {
        self.node(n).first.as_ref()
    }

    pub fn last_edge(&self, n: NodeId) -> Option<&Rc<Edge>> {
        self.node(n).last.as_ref()
    }

    // ---- edges ----

    fn letter_edge(&self, l: LetterId) -> Edge {
        let f = self.ctx.factor_of(l);
        let y = self.ctx.local_index(l);
        let mut counts = vec![BigUint::zero(); self.ctx.factor(f).spec.num_letters()];
        counts[y] = BigUint::one();
        Edge {
            factor: f,
            counts,
            sorted: true,
            first: y,
            last: y,
            slex: OnceCell::new(),
        }
    }

    fn merge_edges(a: &Edge, b: &Edge) -> Edge {
        debug_assert_eq!(a.factor, b.factor);
        Edge {
            factor: a.factor,
            counts: a.counts.iter().zip(&b.counts).map(|(x, y)| x + y).collect(),
            sorted: a.sorted && b.sorted && a.last <= b.first,
            first: a.first,
            last: b.last,
            slex: OnceCell::new(),
        }
    }

    /// The syllable of an edge.
    pub fn edge_syllable(&self, e: &Edge) -> Syllable {
        let spec = &self.ctx.factor(e.factor).spec;
        let mut v = spec.zero();
        for (y, c) in e.counts.iter().enumerate() {
            if !c.is_zero() {
                spec.add_letter(&mut v, y, &BigInt::from(c.clone()));
            }
        }
        Syllable {
            factor: e.factor,
            vector: v,
        }
    }

    /// Whether the edge, as a whole component, is the slex word of its
    /// vector.
    pub fn edge_is_slex(&self, e: &Edge) -> bool {
        *e.slex.get_or_init(|| {
            e.sorted && {
                let s = self.edge_syllable(e);
                self.ctx.factor(e.factor).spec.slex_counts(&s.vector) == e.counts
            }
        })
    }

    fn merged(&self, a: NodeId, b: NodeId) -> bool {
        match (self.last_edge(a), self.first_edge(b)) {
            (Some(x), Some(y)) => x.factor == y.factor,
            _ => false,
        }
    }

    // ---- construction ----

    pub fn letter(&mut self, l: LetterId) -> NodeId {
        if let Some(n) = self.letters[l.index()] {
            return n;
        }
        let e = Rc::new(self.letter_edge(l));
        let id = self.push(Node {
            kind: NodeKind::Letter(l),
            len: BigUint::one(),
            height: 1,
            fp: Fingerprint::letter(l.0),
            hat: BigUint::one(),
            first: Some(e.clone()),
            last: Some(e),
            inner_ok: true,
        });
        self.letters[l.index()] = Some(id);
        id
    }

    fn push(&mut self, node: Node) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(node);
        id
    }

    /// The node for `val(a) val(b)`.
    pub fn pair(&mut self, a: NodeId, b: NodeId) -> NodeId {
        if a == NodeId::EMPTY {
            return b;
        }
        if b == NodeId::EMPTY {
            return a;
        }
        if let Some(&n) = self.pairs.get(&(a, b)) {
            return n;
        }
        let (na, nb) = (self.node(a), self.node(b));
        let m = self.merged(a, b);
        let one = BigUint::one();
        let (lf, ll) = (na.first.clone().unwrap(), na.last.clone().unwrap());
        let (rf, rl) = (nb.first.clone().unwrap(), nb.last.clone().unwrap());
        let (first, last, inner_ok);
        if m {
            let j = Rc::new(Self::merge_edges(&ll, &rf));
            first = if na.hat == one { j.clone() } else { lf };
            last = if nb.hat == one { j.clone() } else { rl };
            let interior = na.hat >= two() && nb.hat >= two();
            inner_ok = na.inner_ok && nb.inner_ok && (!interior || self.edge_is_slex(&j));
        } else {
            let ok_l = na.hat < two() || self.edge_is_slex(&ll);
            let ok_r = nb.hat < two() || self.edge_is_slex(&rf);
            first = lf;
            last = rl;
            inner_ok = na.inner_ok && nb.inner_ok && ok_l && ok_r;
        }
        let node = Node {
            kind: NodeKind::Pair(a, b),
            len: &na.len + &nb.len,
            height: na.height.max(nb.height) + 1,
            fp: na.fp.concat(nb.fp),
            hat: &na.hat + &nb.hat - if m { 1u32 } else { 0 },
            first: Some(first),
            last: Some(last),
            inner_ok,
        };
        let id = self.push(node);
        self.pairs.insert((a, b), id);
        id
    }

    /// Balanced concatenation of several nodes.
    pub fn concat(&mut self, parts: &[NodeId]) -> NodeId {
        let parts: Vec<NodeId> = parts.iter().copied().filter(|&p| p != NodeId::EMPTY).collect();
        self.concat_rec(&parts)
    }

    fn concat_rec(&mut self, parts: &[NodeId]) -> NodeId {
        match parts.len() {
            0 => NodeId::EMPTY,
            1 => parts[0],
            n => {
                let (a, b) = parts.split_at(n / 2);
                let x = self.concat_rec(a);
                let y = self.concat_rec(b);
                self.pair(x, y)
            }
        }
    }

    pub fn word(&mut self, w: &[LetterId]) -> NodeId {
        let parts: Vec<NodeId> = w.iter().map(|&l| self.letter(l)).collect();
        self.concat(&parts)
    }

    /// `l^count` by repeated squaring.
    pub fn power(&mut self, l: LetterId, count: &BigUint) -> NodeId {
        let mut parts = Vec::new();
        for k in 0..count.bits() {
            if count.bit(k) {
                parts.push(self.power2(l, k));
            }
        }
        self.concat(&parts)
    }

    fn power2(&mut self, l: LetterId, k: u64) -> NodeId {
        if k == 0 {
            return self.letter(l);
        }
        if let Some(&n) = self.powers.get(&(l, k)) {
            return n;
        }
        let h = self.power2(l, k - 1);
        let n = self.pair(h, h);
        self.powers.insert((l, k), n);
        n
    }

    /// The sorted word with the given letter counts over factor `f`.
    pub fn counts_node(&mut self, f: usize, counts: &[BigUint]) -> NodeId {
        let mut parts = Vec::new();
        for (y, c) in counts.iter().enumerate() {
            if !c.is_zero() {
                let l = self.ctx.global_letter(f, y);
                parts.push(self.power(l, c));
            }
        }
        self.concat(&parts)
    }

    /// The slex word of a syllable; empty for the zero vector.
    pub fn slex_node(&mut self, s: &Syllable) -> NodeId {
        if let Some(&n) = self.slex_nodes.get(s) {
            return n;
        }
        let counts = self.ctx.factor(s.factor).spec.slex_counts(&s.vector);
        let n = self.counts_node(s.factor, &counts);
        self.slex_nodes.insert(s.clone(), n);
        n
    }

    /// Normal form of an alternating sequence of nonzero syllables.
    pub fn syllables_node(&mut self, syllables: &[Syllable]) -> NodeId {
        let parts: Vec<NodeId> = syllables.iter().map(|s| self.slex_node(s)).collect();
        self.concat(&parts)
    }

    // ---- programs ----

    /// Imports all variables of a program over the context's alphabet.
    pub fn import_vars(&mut self, p: &Slp) -> Result<Vec<NodeId>, PipelineError> {
        if !(std::sync::Arc::ptr_eq(p.alphabet(), self.ctx.alphabet()) || **p.alphabet() == **self.ctx.alphabet()) {
            return Err(PipelineError::AlphabetMismatch);
        }
        let mut out: Vec<NodeId> = Vec::with_capacity(p.num_vars());
        for rhs in p.rules() {
            let parts: Vec<NodeId> = rhs
                .iter()
                .map(|s| match *s {
                    Symbol::Letter(l) => self.letter(l),
                    Symbol::Var(v) => out[v.index()],
                })
                .collect();
            let n = self.concat(&parts);
            out.push(n);
        }
        Ok(out)
    }

    pub fn import(&mut self, p: &Slp) -> Result<NodeId, PipelineError> {
        Ok(self.import_vars(p)?[p.start().index()])
    }

    /// Nodes reachable from `roots`, children before parents.
    pub fn reachable(&self, roots: &[NodeId]) -> Vec<NodeId> {
        self.pending(roots, |_, _| false)
    }

    /// Nodes reachable from `roots` without passing through a node for
    /// which `done` holds, children before parents.
    fn pending(&self, roots: &[NodeId], done: impl Fn(&Self, NodeId) -> bool) -> Vec<NodeId> {
        let mut seen = std::collections::HashSet::new();
        let mut stack: Vec<NodeId> = roots.to_vec();
        while let Some(n) = stack.pop() {
            if !done(self, n) && seen.insert(n) {
                if let NodeKind::Pair(a, b) = self.kind(n) {
                    stack.push(a);
                    stack.push(b);
                }
            }
        }
        let mut out: Vec<NodeId> = seen.into_iter().collect();
        out.sort_unstable();
        out
    }

    /// Rules for the nodes reachable from `roots` and the variable of
    /// every root.
    fn rules_for(&self, roots: &[NodeId]) -> (Vec<Vec<Symbol>>, Vec<Option<VarId>>) {
        let order: Vec<NodeId> = self.reachable(roots).into_iter().filter(|&n| n != NodeId::EMPTY).collect();
        let mut var: HashMap<NodeId, VarId> = HashMap::with_capacity(order.len());
        let mut rules = Vec::with_capacity(order.len());
        for (i, &n) in order.iter().enumerate() {
            var.insert(n, VarId(i as u32));
            rules.push(match self.kind(n) {
                NodeKind::Letter(l) => vec![Symbol::Letter(l)],
                NodeKind::Pair(a, b) => vec![Symbol::Var(var[&a]), Symbol::Var(var[&b])],
                NodeKind::Empty => unreachable!(),
            });
        }
        let tops = roots.iter().map(|r| var.get(r).copied()).collect();
        (rules, tops)
    }

    /// A program in Chomsky normal form for the node.
    pub fn export(&self, n: NodeId) -> Slp {
        let alphabet = self.ctx.alphabet().clone();
        if n == NodeId::EMPTY {
            return Slp::empty(alphabet);
        }
        let (rules, tops) = self.rules_for(&[n]);
        Slp::from_sorted(alphabet, rules, tops[0].unwrap())
    }

    /// Letters of the value, refusing values longer than `max_len`.
    pub fn decompress(&self, n: NodeId, max_len: usize) -> Option<Vec<LetterId>> {
        if *self.len(n) > BigUint::from(max_len) {
            return None;
        }
        let mut out = Vec::new();
        let mut stack = vec![n];
        while let Some(x) = stack.pop() {
            match self.kind(x) {
                NodeKind::Empty => {}
                NodeKind::Letter(l) => out.push(l),
                NodeKind::Pair(a, b) => {
                    stack.push(b);
                    stack.push(a);
                }
            }
        }
        Some(out)
    }

    // ---- equality ----

    /// Exact equality of values: length and fingerprint filters, then
    /// recompression of the shared sub-DAG.
    pub fn equal(&mut self, a: NodeId, b: NodeId) -> bool {
        if a == b {
            return true;
        }
        if self.len(a) != self.len(b) || self.fingerprint(a) != self.fingerprint(b) {
            return false;
        }
        if self.len(a).is_zero() {
            return true;
        }
        self.stats.exact_equalities += 1;
        let (rules, tops) = self.rules_for(&[a, b]);
        let tops = tops.iter().map(|t| vec![Symbol::Var(t.unwrap())]).collect();
        let out = Recompressor::new(&rules, tops, self.ctx.num_letters() as u32).run();
        let eq = out[0] == out[1];
        if !eq {
            self.stats.fingerprint_collisions += 1;
        }
        eq
    }

    /// Equality by length and fingerprint only; `false` is exact.
    fn probably_equal(&self, a: NodeId, b: NodeId) -> bool {
        self.len(a) == self.len(b) && self.fingerprint(a) == self.fingerprint(b)
    }

    // ---- positions ----

    pub fn letter_at(&self, n: NodeId, i: &BigLength) -> LetterId {
        assert!(i < self.len(n), "position out of range");
        let mut cur = n;
        let mut i = i.clone();
        loop {
            match self.kind(cur) {
                NodeKind::Letter(l) => return l,
                NodeKind::Pair(a, b) => {
                    if i < *self.len(a) {
                        cur = a;
                    } else {
                        i -= self.len(a);
                        cur = b;
                    }
                }
                NodeKind::Empty => unreachable!(),
            }
        }
    }

    /// Letter position where component `k` starts; `hat` maps to the
    /// length.
    pub fn component_start(&self, n: NodeId, k: &BigUint) -> BigLength {
        assert!(k <= self.hat(n), "component index out of range");
        let mut pos = BigUint::zero();
        let mut cur = n;
        let mut k = k.clone();
        loop {
            if k.is_zero() {
                return pos;
            }
            if k == *self.hat(cur) {
                return pos + self.len(cur);
            }
            match self.kind(cur) {
                NodeKind::Pair(a, b) => {
                    if k < *self.hat(a) {
                        cur = a;
                    } else {
                        k = k - self.hat(a) + if self.merged(a, b) { 1u32 } else { 0 };
                        pos += self.len(a);
                        cur = b;
                    }
                }
                _ => unreachable!("leaves have at most one component"),
            }
        }
    }

    /// The component index of letter position `i`, if `i` is a component
    /// boundary.
    pub fn compressed_index(&self, n: NodeId, i: &BigLength) -> Option<BigUint> {
        if i > self.len(n) {
            return None;
        }
        let mut acc = BigUint::zero();
        let mut cur = n;
        let mut i = i.clone();
        loop {
            if i.is_zero() {
                return Some(acc);
            }
            if i == *self.len(cur) {
                return Some(acc + self.hat(cur));
            }
            match self.kind(cur) {
                NodeKind::Pair(a, b) => {
                    let la = self.len(a);
                    if i < *la {
                        cur = a;
                    } else if i == *la {
                        return (!self.merged(a, b)).then(|| acc + self.hat(a));
                    } else {
                        acc += self.hat(a);
                        if self.merged(a, b) {
                            acc -= 1u32;
                        }
                        i -= la;
                        cur = b;
                    }
                }
                _ => unreachable!("leaves have length one"),
            }
        }
    }

    // ---- extraction ----

    /// The node for `val(n)[0:i)`.
    pub fn prefix(&mut self, n: NodeId, i: &BigLength) -> NodeId {
        if i.is_zero() {
            return NodeId::EMPTY;
        }
        if i >= self.len(n) {
            return n;
        }
        let mut pieces = Vec::new();
        let mut cur = n;
        let mut i = i.clone();
        while !i.is_zero() {
            if i == *self.len(cur) {
                pieces.push(cur);
                break;
            }
            match self.kind(cur) {
                NodeKind::Pair(a, b) => {
                    if i <= *self.len(a) {
                        cur = a;
                    } else {
                        pieces.push(a);
                        i -= self.len(a);
                        cur = b;
                    }
                }
                _ => unreachable!(),
            }
        }
        let mut acc = pieces.pop().unwrap();
        while let Some(p) = pieces.pop() {
            acc = self.pair(p, acc);
        }
        acc
    }

    /// The node for `val(n)[i:)`.
    pub fn suffix(&mut self, n: NodeId, i: &BigLength) -> NodeId {
        if i.is_zero() {
            return n;
        }
        if i >= self.len(n) {
            return NodeId::EMPTY;
        }
        // keep the last `rest` letters
        let mut rest = self.len(n) - i;
        let mut pieces = Vec::new();
        let mut cur = n;
        while !rest.is_zero() {
            if rest == *self.len(cur) {
                pieces.push(cur);
                break;
            }
            match self.kind(cur) {
                NodeKind::Pair(a, b) => {
                    if rest <= *self.len(b) {
                        cur = b;
                    } else {
                        pieces.push(b);
                        rest -= self.len(b);
                        cur = a;
                    }
                }
                _ => unreachable!(),
            }
        }
        let mut acc = pieces.pop().unwrap();
        while let Some(p) = pieces.pop() {
            acc = self.pair(acc, p);
        }
        acc
    }

    /// The node for `val(n)[i:j)`.
    pub fn extract(&mut self, n: NodeId, i: &BigLength, j: &BigLength) -> NodeId {
        assert!(i <= j && j <= self.len(n), "extraction out of range");
        let mut cur = n;
        let mut i = i.clone();
        let mut j = j.clone();
        loop {
            if i == j {
                return NodeId::EMPTY;
            }
            if i.is_zero() && j == *self.len(cur) {
                return cur;
            }
            match self.kind(cur) {
                NodeKind::Pair(a, b) => {
                    let la = self.len(a).clone();
                    if j <= la {
                        cur = a;
                    } else if i >= la {
                        i -= &la;
                        j -= &la;
                        cur = b;
                    } else {
                        let x = self.suffix(a, &i);
                        let y = self.prefix(b, &(j - &la));
                        return self.pair(x, y);
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    /// The node for `val(n)[[k:l))`, components `k..l`.
    pub fn extract_components(&mut self, n: NodeId, k: &BigUint, l: &BigUint) -> NodeId {
        let i = self.component_start(n, k);
        let j = self.component_start(n, l);
        self.extract(n, &i, &j)
    }

    /// Syllable `k` of the derived word.
    pub fn syllable(&mut self, n: NodeId, k: &BigUint) -> Syllable {
        let c = self.extract_components(n, k, &(k + 1u32));
        let e = self.first_edge(c).unwrap().clone();
        self.edge_syllable(&e)
    }

    /// The whole derived word. Intended for values with few components.
    pub fn syllables(&self, n: NodeId) -> Vec<Syllable> {
        let mut out: Vec<Syllable> = Vec::new();
        let emit = |s: Syllable, out: &mut Vec<Syllable>| match out.last_mut() {
            Some(t) if t.factor == s.factor => {
                for (a, b) in t.vector.iter_mut().zip(&s.vector) {
                    *a += b;
                }
            }
            _ => out.push(s),
        };
        let mut stack = vec![n];
        let two = two();
        while let Some(x) = stack.pop() {
            let h = self.hat(x);
            if h.is_zero() {
                continue;
            }
            if *h <= two {
                let f = self.first_edge(x).unwrap();
                emit(self.edge_syllable(f), &mut out);
                if *h == two {
                    let l = self.last_edge(x).unwrap();
                    emit(self.edge_syllable(l), &mut out);
                }
                continue;
            }
            if let NodeKind::Pair(a, b) = self.kind(x) {
                stack.push(b);
                stack.push(a);
            }
        }
        out
    }

    // ---- normal forms ----

    /// Whether the value is nf-reduced: every component is the slex word
    /// of its (necessarily nonzero) vector.
    pub fn is_nf(&self, n: NodeId) -> bool {
        let node = self.node(n);
        match (&node.first, &node.last) {
            (Some(f), Some(l)) => node.inner_ok && self.edge_is_slex(f) && self.edge_is_slex(l),
            _ => true,
        }
    }

    /// The reversed word with every letter inverted.
    pub fn reverse_inverse(&mut self, n: NodeId) -> NodeId {
        for x in self.pending(&[n], |s, x| s.rev.contains_key(&x)) {
            let r = match self.kind(x) {
                NodeKind::Empty => NodeId::EMPTY,
                NodeKind::Letter(l) => {
                    let inv = self.ctx.inverse(l);
                    self.letter(inv)
                }
                NodeKind::Pair(a, b) => {
                    let (ra, rb) = (self.rev[&a], self.rev[&b]);
                    self.pair(rb, ra)
                }
            };
            self.rev.insert(x, r);
        }
        self.rev[&n]
    }

    fn slex_edge(&mut self, e: &Edge) -> Result<NodeId, PipelineError> {
        let s = self.edge_syllable(e);
        if s.vector.iter().all(Zero::is_zero) {
            return Err(PipelineError::NotFreelyReduced);
        }
        Ok(self.slex_node(&s))
    }

    /// Interior components (all but the first and last) rewritten as
    /// slex words.
    fn core(&mut self, n: NodeId) -> Result<NodeId, PipelineError> {
        for x in self.pending(&[n], |s, x| s.core.contains_key(&x)) {
            let c = match self.kind(x) {
                NodeKind::Empty | NodeKind::Letter(_) => NodeId::EMPTY,
                NodeKind::Pair(a, b) => {
                    let (ca, cb) = (self.core[&a], self.core[&b]);
                    let one = BigUint::one();
                    let (ha, hb) = (self.hat(a).clone(), self.hat(b).clone());
                    let ll = self.last_edge(a).unwrap().clone();
                    let rf = self.first_edge(b).unwrap().clone();
                    let m = ll.factor == rf.factor;
                    match (ha == one, hb == one) {
                        (true, true) => NodeId::EMPTY,
                        (true, false) => {
                            if m {
                                cb
                            } else {
                                let s = self.slex_edge(&rf)?;
                                self.pair(s, cb)
                            }
                        }
                        (false, true) => {
                            if m {
                                ca
                            } else {
                                let s = self.slex_edge(&ll)?;
                                self.pair(ca, s)
                            }
                        }
                        (false, false) => {
                            if m {
                                let j = Self::merge_edges(&ll, &rf);
                                let s = self.slex_edge(&j)?;
                                self.concat(&[ca, s, cb])
                            } else {
                                let s1 = self.slex_edge(&ll)?;
                                let s2 = self.slex_edge(&rf)?;
                                self.concat(&[ca, s1, s2, cb])
                            }
                        }
                    }
                }
            };
            self.core.insert(x, c);
        }
        Ok(self.core[&n])
    }

    /// Rewrites every component as the slex word of its vector. This is
    /// the normal form whenever no component has a zero vector; otherwise
    /// the value is not freely reduced and an error is returned.
    pub fn normalize_components(&mut self, n: NodeId) -> Result<NodeId, PipelineError> {
        if n == NodeId::EMPTY {
            return Ok(n);
        }
        let core = self.core(n)?;
        let f = self.first_edge(n).unwrap().clone();
        let first = self.slex_edge(&f)?;
        if *self.hat(n) == BigUint::one() {
            return Ok(first);
        }
        let l = self.last_edge(n).unwrap().clone();
        let last = self.slex_edge(&l)?;
        Ok(self.concat(&[first, core, last]))
    }

    /// `nf(val(n)^-1)` for nf-reduced `n`.
    pub fn inverse_nf(&mut self, n: NodeId) -> NodeId {
        debug_assert!(self.is_nf(n));
        if let Some(&r) = self.inv.get(&n) {
            return r;
        }
        let r = self.reverse_inverse(n);
        let out = self
            .normalize_components(r)
            .expect("inverse of a normal form has no zero components");
        self.inv.insert(n, out);
        out
    }

    /// The normal form of the value of any node.
    pub fn nf(&mut self, n: NodeId) -> NodeId {
        if self.is_nf(n) {
            return n;
        }
        for x in self.pending(&[n], |s, x| s.is_nf(x) || s.nf.contains_key(&x)) {
            if let NodeKind::Pair(a, b) = self.kind(x) {
                let (na, nb) = (self.nf_known(a), self.nf_known(b));
                let r = self.nf_concat(na, nb).node;
                self.nf.insert(x, r);
            }
        }
        self.nf_known(n)
    }

    fn nf_known(&self, n: NodeId) -> NodeId {
        if self.is_nf(n) {
            n
        } else {
            self.nf[&n]
        }
    }

    /// Whether the last `k` components of `u` cancel the first `k` of `v`,
    /// decided by fingerprints; a negative answer is exact.
    fn cancels_probably(&mut self, u: NodeId, v: NodeId, k: &BigUint) -> (bool, NodeId, NodeId) {
        self.stats.binary_search_probes += 1;
        let hu = self.hat(u).clone();
        let tail = self.extract_components(u, &(&hu - k), &hu);
        let head = self.extract_components(v, &BigUint::zero(), k);
        let inv = self.inverse_nf(head);
        (self.probably_equal(tail, inv), tail, inv)
    }

    /// The largest `k` such that the last `k` components of `u` and the
    /// first `k` of `v` cancel, for nf-reduced `u`, `v`.
    pub fn cancellation_depth(&mut self, u: NodeId, v: NodeId) -> BigUint {
        let zero = BigUint::zero();
        let (Some(ul), Some(vf)) = (self.last_edge(u).cloned(), self.first_edge(v).cloned()) else {
            return zero;
        };
        // depth one is decided exactly by the edge vectors
        if ul.factor != vf.factor {
            return zero;
        }
        let (a, b) = (self.edge_syllable(&ul), self.edge_syllable(&vf));
        if a.vector.iter().zip(&b.vector).any(|(x, y)| x + y != BigInt::zero()) {
            return zero;
        }
        let max = self.hat(u).clone().min(self.hat(v).clone());
        for exact in [false, true] {
            // invariant: depth lo cancels, depth hi does not (hi = max + 1
            // stands for "beyond the end")
            let mut lo = BigUint::one();
            let mut hi = &max + 1u32;
            while &hi - &lo > BigUint::one() {
                let mid: BigUint = (&lo + &hi) >> 1u32;
                let ok = if exact {
                    let (_, t, i) = self.cancels_probably(u, v, &mid);
                    self.equal(t, i)
                } else {
                    self.cancels_probably(u, v, &mid).0
                };
                if ok {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            // certify the answer: `lo` must cancel exactly; `lo + 1` was
            // refuted by a fingerprint mismatch, which is exact
            if lo == BigUint::one() || exact {
                return lo;
            }
            let (_, t, i) = self.cancels_probably(u, v, &lo);
            if self.equal(t, i) {
                return lo;
            }
        }
        unreachable!("the exact pass always returns")
    }

    /// `nf(val(u) val(v))` for nf-reduced `u`, `v`.
    pub fn nf_concat(&mut self, u: NodeId, v: NodeId) -> Junction {
        let k = self.cancellation_depth(u, v);
        let hu = self.hat(u).clone();
        let hv = self.hat(v).clone();
        let keep = &hu - &k;
        if keep.is_zero() || k == hv {
            let a = self.extract_components(u, &BigUint::zero(), &keep);
            let b = self.extract_components(v, &k, &hv);
            let node = self.pair(a, b);
            return Junction {
                node,
                keep,
                merged: None,
                resume: k,
            };
        }
        let su = self.syllable(u, &(&keep - 1u32));
        let sv = self.syllable(v, &k);
        if su.factor != sv.factor {
            let a = self.extract_components(u, &BigUint::zero(), &keep);
            let b = self.extract_components(v, &k, &hv);
            let node = self.pair(a, b);
            return Junction {
                node,
                keep,
                merged: None,
                resume: k,
            };
        }
        let vector: Vec<BigInt> = su.vector.iter().zip(&sv.vector).map(|(x, y)| x + y).collect();
        let merged = Syllable {
            factor: su.factor,
            vector,
        };
        debug_assert!(merged.vector.iter().any(|x| !x.is_zero()));
        let keep = keep - 1u32;
        let resume = k + 1u32;
        let a = self.extract_components(u, &BigUint::zero(), &keep);
        let m = self.slex_node(&merged);
        let b = self.extract_components(v, &resume, &hv);
        let node = self.concat(&[a, m, b]);
        Junction {
            node,
            keep,
            merged: Some(merged),
            resume,
        }
    }

    /// Splits an nf-reduced node for a tether with words of lengths
    /// `left_len` and `right_len`, if it has enough components.
    pub fn ladder(&mut self, n: NodeId, left_len: usize, right_len: usize) -> Option<Ladder> {
        let pl = BigUint::from(left_len + 2);
        let pr = BigUint::from(right_len + 2);
        let h = self.hat(n).clone();
        if h < &pl + &pr {
            return None;
        }
        let left = self.extract_components(n, &BigUint::zero(), &pl);
        let middle = self.extract_components(n, &pl, &(&h - &pr));
        let right = self.extract_components(n, &(&h - &pr), &h);
        Some(Ladder { left, middle, right })
    }

    /// `nf(alpha val(n) beta^-1)`.
    pub fn tether(&mut self, n: NodeId, alpha: &[LetterId], beta: &[LetterId]) -> NodeId {
        let n = self.nf(n);
        let ctx = self.ctx;
        let letters = |w: &[LetterId]| -> Vec<Syllable> { w.iter().map(|&l| ctx.letter_syllable(l, 1)).collect() };
        let beta_inv = ctx.inverse_word(beta);
        match self.ladder(n, alpha.len(), beta.len()) {
            None => {
                let mut s = letters(alpha);
                s.extend(self.syllables(n));
                s.extend(letters(&beta_inv));
                let red = ctx.reduce_syllables(s);
                self.syllables_node(&red)
            }
            Some(Ladder { left, middle, right }) => {
                let mut s = letters(alpha);
                s.extend(self.syllables(left));
                let red = ctx.reduce_syllables(s);
                let l = self.syllables_node(&red);
                let mut s = self.syllables(right);
                s.extend(letters(&beta_inv));
                let red = ctx.reduce_syllables(s);
                let r = self.syllables_node(&red);
                self.concat(&[l, middle, r])
            }
        }
    }
}

#[cfg(test)]
mod tests;
