use super::*;
use crate::group::GroupContext;
use proptest::prelude::*;

fn g_star() -> GroupContext {
    GroupContext::from_ranks(&[2, 1], None).unwrap()
}

fn word(ctx: &GroupContext, names: &str) -> Vec<LetterId> {
    ctx.alphabet().parse_word(names).unwrap()
}

/// A node for `w` built with a random-looking bracketing.
fn build(store: &mut Store, w: &[LetterId], salt: usize) -> NodeId {
    if w.len() <= 1 {
        return store.word(w);
    }
    let cut = 1 + (salt * 7 + w.len() * 3) % (w.len() - 1);
    let a = build(store, &w[..cut], salt + 1);
    let b = build(store, &w[cut..], salt + 2);
    store.pair(a, b)
}

fn arb_word(n: usize) -> impl Strategy<Value = Vec<LetterId>> {
    prop::collection::vec((0u32..12).prop_map(LetterId), 0..n)
}

#[test]
fn summaries_of_a_small_word() {
    let g = g_star();
    let mut s = Store::new(&g);
    let w = word(&g, "z3 z1 z1 z3");
    let n = build(&mut s, &w, 0);
    assert_eq!(s.len(n), &BigUint::from(4u32));
    assert_eq!(s.hat(n), &BigUint::from(3u32));
    assert!(!s.is_nf(n));
    let starts: Vec<_> = (0..=3u32).map(|k| s.component_start(n, &k.into())).collect();
    assert_eq!(starts, [0u32, 1, 3, 4].map(BigUint::from));
    assert_eq!(s.compressed_index(n, &2u32.into()), None);
    assert_eq!(s.compressed_index(n, &3u32.into()), Some(2u32.into()));
    let nf = s.nf(n);
    assert_eq!(s.decompress(nf, 10).unwrap(), g.nf_word(&w).unwrap());
}

#[test]
fn long_powers_are_cheap() {
    let g = g_star();
    let mut s = Store::new(&g);
    let z1 = word(&g, "z1")[0];
    let z3 = word(&g, "z3")[0];
    let a = s.letter(z1);
    let b = s.letter(z3);
    let mut p = s.pair(a, b);
    for _ in 0..60 {
        p = s.pair(p, p);
    }
    assert!(s.is_nf(p));
    assert_eq!(s.hat(p), &(BigUint::one() << 61u32));
    let inv = s.inverse_nf(p);
    let j = s.nf_concat(p, inv);
    assert_eq!(j.node, NodeId::EMPTY);
    // a conjugate of z1 is not trivial
    let mid = s.pair(p, a);
    let w = s.pair(mid, inv);
    let n = s.nf(w);
    assert_eq!(s.len(n), &((BigUint::one() << 62u32) + 1u32));
    let z1sq = s.pair(a, a);
    assert!(!s.is_nf(z1sq));
    assert_eq!(s.nf(z1sq), s.letter(word(&g, "z1^2")[0]));
}

#[test]
fn tethers_short_and_long() {
    let g = g_star();
    let mut s = Store::new(&g);
    let w = word(&g, "z1 z3 z2 z3^-1 z1 z3");
    let n = s.word(&w);
    let n = s.nf(n);
    let alpha = word(&g, "z1^-1 z3^-1");
    let beta = word(&g, "z3");
    let t = s.tether(n, &alpha, &beta);
    let mut expect = alpha.clone();
    expect.extend(&w);
    expect.extend(g.inverse_word(&beta));
    assert_eq!(s.decompress(t, 100).unwrap(), g.nf_word(&expect).unwrap());
    // long enough for the ladder split
    let long: Vec<LetterId> = w.iter().cycle().take(60).copied().collect();
    let n = s.word(&long);
    let n = s.nf(n);
    assert!(s.ladder(n, 2, 1).is_some());
    let t = s.tether(n, &alpha, &beta);
    let mut expect = alpha.clone();
    expect.extend(&long);
    expect.extend(g.inverse_word(&beta));
    assert_eq!(s.decompress(t, 1000).unwrap(), g.nf_word(&expect).unwrap());
}

proptest! {
    #[test]
    fn nf_matches_explicit(w in arb_word(60), salt in 0usize..100) {
        let g = g_star();
        let mut s = Store::new(&g);
        let n = build(&mut s, &w, salt);
        prop_assert_eq!(s.decompress(n, 1000).unwrap(), w.clone());
        let expect = g.nf_word(&w).unwrap();
        prop_assert_eq!(s.is_nf(n), expect == w);
        let f = s.nf(n);
        prop_assert_eq!(s.decompress(f, 1000).unwrap(), expect.clone());
        prop_assert!(s.is_nf(f));
        let i = s.inverse_nf(f);
        prop_assert_eq!(s.decompress(i, 1000).unwrap(), g.nf_word(&g.inverse_word(&w)).unwrap());
        let syl = s.syllables(n);
        prop_assert_eq!(syl, g.derived_word(&w));
    }

    #[test]
    fn positions_match_components(w in arb_word(40), salt in 0usize..100, a in 0usize..41, b in 0usize..41) {
        let g = g_star();
        let mut s = Store::new(&g);
        let n = build(&mut s, &w, salt);
        let comps = g.components(&w);
        prop_assert_eq!(s.hat(n), &BigUint::from(comps.len()));
        for (k, c) in comps.iter().enumerate() {
            prop_assert_eq!(s.component_start(n, &k.into()), BigUint::from(c.start));
            prop_assert_eq!(s.compressed_index(n, &c.start.into()), Some(BigUint::from(k)));
        }
        for i in 0..=w.len() {
            let boundary = i == 0 || i == w.len() || g.factor_of(w[i - 1]) != g.factor_of(w[i]);
            prop_assert_eq!(s.compressed_index(n, &i.into()).is_some(), boundary);
        }
        let (i, j) = (a.min(b).min(w.len()), a.max(b).min(w.len()));
        let e = s.extract(n, &i.into(), &j.into());
        prop_assert_eq!(s.decompress(e, 1000).unwrap(), w[i..j].to_vec());
    }

    #[test]
    fn concat_and_tether_match_explicit(u in arb_word(30), v in arb_word(30), alpha in arb_word(4), beta in arb_word(4)) {
        let g = g_star();
        let mut s = Store::new(&g);
        let un = s.word(&u);
        let un = s.nf(un);
        let vn = s.word(&v);
        let vn = s.nf(vn);
        let j = s.nf_concat(un, vn);
        let mut uv = u.clone();
        uv.extend(&v);
        prop_assert_eq!(s.decompress(j.node, 1000).unwrap(), g.nf_word(&uv).unwrap());
        let t = s.tether(vn, &alpha, &beta);
        let mut e = alpha.clone();
        e.extend(&v);
        e.extend(g.inverse_word(&beta));
        prop_assert_eq!(s.decompress(t, 1000).unwrap(), g.nf_word(&e).unwrap());
    }

    #[test]
    fn exact_equality(u in arb_word(20), v in arb_word(20), salt in 0usize..50) {
        let g = g_star();
        let mut s = Store::new(&g);
        let a = build(&mut s, &u, salt);
        let b = build(&mut s, &u, salt + 13);
        prop_assert!(s.equal(a, b));
        let c = s.word(&v);
        prop_assert_eq!(s.equal(a, c), u == v);
    }
}

