use super::*;
use proptest::prelude::*;

pub(crate) fn g_star() -> GroupContext {
    GroupContext::from_ranks(&[2, 1], None).unwrap()
}

fn word(ctx: &GroupContext, names: &str) -> Vec<LetterId> {
    ctx.alphabet().parse_word(names).unwrap()
}

fn spell(ctx: &GroupContext, w: &[LetterId]) -> String {
    ctx.alphabet().spell(w)
}

#[test]
fn alphabet_layout() {
    let g = g_star();
    let names: Vec<_> = g.letters().map(|l| g.alphabet().name(l).to_string()).collect();
    assert_eq!(
        names,
        ["z1^2", "z1^-2", "z2^2", "z2^-2", "z1", "z1^-1", "z2", "z2^-1", "z3^2", "z3^-2", "z3", "z3^-1"]
    );
    for l in g.letters() {
        assert_eq!(g.inverse(g.inverse(l)), l);
        assert_ne!(g.inverse(l), l);
        assert_eq!(g.factor_of(g.inverse(l)), g.factor_of(l));
    }
}

#[test]
fn derived_words_and_components() {
    let g = g_star();
    let w = word(&g, "z3 z1 z1 z3");
    let d = g.derived_word(&w);
    let v = |xs: &[i64]| xs.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
    assert_eq!(
        d,
        vec![
            Syllable { factor: 1, vector: v(&[1]) },
            Syllable { factor: 0, vector: v(&[2, 0]) },
            Syllable { factor: 1, vector: v(&[1]) },
        ]
    );
    let spans: Vec<_> = g.components(&w).iter().map(|c| (c.start, c.end)).collect();
    assert_eq!(spans, [(0, 1), (1, 3), (3, 4)]);
    assert!(g.derived_word(&[]).is_empty());
    assert_eq!(g.derived_word(&word(&g, "z1 z2")).len(), 1);
}

#[test]
fn normal_forms() {
    let g = g_star();
    assert_eq!(spell(&g, &g.nf_word(&word(&g, "z1 z3 z3^-1 z1")).unwrap()), "z1^2");
    let w = word(&g, "z1 z3 z1 z3^-1");
    assert_eq!(g.nf_word(&w).unwrap(), w);
    assert!(g.nf_word(&word(&g, "z1 z1^-1")).unwrap().is_empty());
    let mut small = g.clone();
    small.set_word_limit(3);
    assert!(matches!(small.nf_word(&w), Err(GroupError::WordTooLong { .. })));
}

#[test]
fn group_file_round_trip() {
    let text = "# two factors\nfactor A rank 2\nfactor B rank 1\nextragen A x = 1 1\n\
                constants delta=0 K=3 L=4 e1=4 e2=4 eprime=4 ff=1,6\n";
    let g = GroupContext::parse(text).unwrap();
    assert_eq!(g.factor(0).spec.m(), 3);
    assert_eq!(g.num_letters(), 10 + 4);
    let c = g.constants().unwrap();
    assert_eq!((c.l, c.lambda, c.c, c.ff.intercept), (4, 1, 2, 6));
    assert_eq!(GroupContext::parse(&g.to_text()).unwrap(), g);
    assert!(g.alphabet().lookup("x^-1").is_ok());
}

#[test]
fn group_file_errors() {
    let e = GroupContext::parse("factor A rank 1\nfactr B rank 1\n").unwrap_err();
    assert!(matches!(e, GroupError::Syntax { line: 2, .. }));
    assert!(matches!(
        GroupContext::parse("factor A rank 1\nextragen B x = 1\n"),
        Err(GroupError::UnknownFactor(_))
    ));
    assert!(matches!(
        GroupContext::parse("factor A rank 1\nextragen A x = 0\n"),
        Err(GroupError::Factor { .. })
    ));
    assert!(matches!(GroupContext::parse(""), Err(GroupError::NoFactors)));
    assert!(matches!(
        GroupContext::parse("factor A rank 1\nconstants delta=0 K=1 L=1 e1=1 e2=1 eprime=1 ff=0,1\n"),
        Err(GroupError::Syntax { line: 2, .. })
    ));
    assert!(matches!(
        GroupContext::parse("factor A rank 1\nconstants delta=0 K=1\n"),
        Err(GroupError::Syntax { .. })
    ));
}

fn arb_word(n: usize) -> impl Strategy<Value = Vec<LetterId>> {
    prop::collection::vec((0u32..12).prop_map(LetterId), 0..n)
}

proptest! {
    #[test]
    fn nf_idempotent_and_alternating(w in arb_word(40)) {
        let g = g_star();
        let n = g.nf_word(&w).unwrap();
        prop_assert_eq!(g.nf_word(&n).unwrap(), n.clone());
        let d = g.derived_word(&n);
        prop_assert!(d.windows(2).all(|p| p[0].factor != p[1].factor));
        prop_assert!(d.iter().all(|s| s.vector.iter().any(|x| !x.is_zero())));
        // same element: the reduced syllables agree
        prop_assert_eq!(g.reduce_syllables(g.derived_word(&w)), d);
    }

    #[test]
    fn nf_unique_under_rewriting(w in arb_word(30), at in 0usize..31, l in 0u32..12, swap in 0usize..30) {
        let g = g_star();
        let mut v = w.clone();
        let at = at.min(v.len());
        let l = LetterId(l);
        v.splice(at..at, [l, g.inverse(l)]);
        // commute two neighbours from the same factor
        if swap + 1 < v.len() && g.factor_of(v[swap]) == g.factor_of(v[swap + 1]) {
            v.swap(swap, swap + 1);
        }
        prop_assert_eq!(g.nf_word(&v).unwrap(), g.nf_word(&w).unwrap());
        let inv = g.inverse_word(&w);
        let mut both = w.clone();
        both.extend(inv);
        prop_assert!(g.nf_word(&both).unwrap().is_empty());
    }
}

#[test]
fn compressed_nf_check() {
    let g = g_star();
    let p = |t: &str| crate::slp::Slp::parse_with(t, g.alphabet().clone()).unwrap();
    assert!(g.is_nf_reduced_slp(&p("start S\nS = 'z1' 'z3' 'z1'\n")));
    assert!(!g.is_nf_reduced_slp(&p("start S\nS = 'z1' 'z1'\n")));
    assert!(g.is_nf_reduced_slp(&crate::slp::Slp::empty(g.alphabet().clone())));
}
