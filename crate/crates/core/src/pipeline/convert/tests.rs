use super::*;
use crate::pipeline::testutil::{g_star, parse, value, word};
use num_bigint::BigUint;
use num_traits::Zero;
use proptest::prelude::*;

fn tcslp(ctx: &GroupContext, text: &str) -> Tcslp {
    Tcslp::parse(text, Some(ctx.alphabet().clone()), 4).unwrap()
}

#[test]
fn single_tether() {
    let g = g_star();
    let t = tcslp(&g, "start A\nA = tether B | z2 | z3\nB = 'z1'\n");
    let s = convert(&t, &g).unwrap();
    assert_eq!(value(&s), word(&g, "z1 z2 z3^-1"));
    let t = tcslp(&g, "start A\nA = tether B | z1^-1 |\nB = 'z1'\n");
    assert_eq!(value(&convert(&t, &g).unwrap()), Vec::<LetterId>::new());
}

#[test]
fn no_tethers_keeps_value() {
    let g = g_star();
    let t = tcslp(&g, "start S\nS = A A\nA = 'z1' 'z3'\n");
    let u = tcslp_to_tslp(&t, &g).unwrap();
    assert_eq!(value(&tslp_to_slp(&u, &g).unwrap()), word(&g, "z1 z3 z1 z3"));
}

#[test]
fn cuts_are_eliminated() {
    let g = g_star();
    let t = tcslp(&g, "start S\nS = C 'z2'\nC = cut B 1 2\nB = 'z3' 'z1' 'z1' 'z3'\n");
    let u = tcslp_to_tslp(&t, &g).unwrap();
    assert!(!u.inner().has_cuts());
    assert_eq!(value(&tslp_to_slp(&u, &g).unwrap()), word(&g, "z1 z1 z2"));
    let full = tcslp(&g, "start C\nC = cut B 0 3\nB = 'z3' 'z1' 'z1' 'z3'\n");
    assert_eq!(value(&convert(&full, &g).unwrap()), word(&g, "z3 z1 z1 z3"));
    let bad = tcslp(&g, "start C\nC = cut B 0 4\nB = 'z3' 'z1' 'z1' 'z3'\n");
    assert!(matches!(convert(&bad, &g), Err(PipelineError::Ext(ExtError::CutOutOfRange { .. }))));
}

#[test]
fn tether_below_a_cut() {
    let g = g_star();
    let t = tcslp(&g, "start S\nS = cut T 1 3\nT = tether B | z3 | z3\nB = 'z1' 'z3' 'z2'\n");
    // nf(z3 z1 z3 z2 z3^-1) = z3 | z1 | z3 | z2 | z3^-1
    assert_eq!(value(&convert(&t, &g).unwrap()), word(&g, "z1 z3"));
}

#[test]
fn bounded_suffix() {
    let g = g_star();
    let p = parse(&g, "start S\nS = 'z1'\n");
    let s = append_bounded_suffix(&p, &word(&g, "z1^-1"), &g).unwrap();
    assert_eq!(s.value_length(), BigUint::zero());
    let p = parse(&g, "start S\nS = 'z1' 'z3'\n");
    let s = append_bounded_suffix(&p, &word(&g, "z3"), &g).unwrap();
    assert_eq!(value(&s), word(&g, "z1 z3^2"));
    assert!(append_bounded_suffix(&p, &word(&g, "z3 z3 z3 z3 z3"), &g).is_err());
}

#[test]
fn raw_cuts_become_compressed() {
    let g = g_star();
    let t = tcslp(&g, "start C\nC = rawcut B 1 3\nB = 'z3' 'z1' 'z1' 'z3'\n");
    let u = compressed_cut_normalize(&t, &g).unwrap();
    let Rhs::Cut { start, end, kind, .. } = u.rule(u.start()) else { panic!() };
    assert_eq!((start, end, *kind), (&BigUint::from(1u32), &BigUint::from(2u32), CutKind::Compressed));
    let t = tcslp(&g, "start C\nC = rawcut B 0 4\nB = 'z3' 'z1' 'z1' 'z3'\n");
    let u = compressed_cut_normalize(&t, &g).unwrap();
    let Rhs::Cut { start, end, .. } = u.rule(u.start()) else { panic!() };
    assert_eq!((start, end), (&BigUint::from(0u32), &BigUint::from(3u32)));
    let t = tcslp(&g, "start C\nC = rawcut B 1 2\nB = 'z3' 'z1' 'z1' 'z3'\n");
    assert!(matches!(
        compressed_cut_normalize(&t, &g),
        Err(PipelineError::Ext(ExtError::SplittingCut { .. }))
    ));
}

fn arb_letters(n: usize) -> impl Strategy<Value = Vec<LetterId>> {
    prop::collection::vec((0u32..12).prop_map(LetterId), 0..n)
}

proptest! {
    #[test]
    fn suffix_matches_explicit(w in arb_letters(40), v in arb_letters(5)) {
        let g = g_star();
        let nf = g.nf_word(&w).unwrap();
        let p = Slp::from_word(g.alphabet().clone(), &nf);
        let s = append_bounded_suffix(&p, &v, &g).unwrap();
        let mut e = nf.clone();
        e.extend(&v);
        prop_assert_eq!(value(&s), g.nf_word(&e).unwrap());
    }
}
