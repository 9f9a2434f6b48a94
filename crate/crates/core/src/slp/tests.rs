use super::*;
use proptest::prelude::*;

fn ab() -> Arc<Alphabet> {
    Arc::new(Alphabet::from_names(["a", "b", "c"]).unwrap())
}

/// `(ab)^(2^n)` by repeated squaring.
pub(crate) fn ab_power(alphabet: Arc<Alphabet>, n: u32) -> Slp {
    let a = LetterId(0);
    let b = LetterId(1);
    let mut rules = vec![vec![Symbol::Letter(a), Symbol::Letter(b)]];
    for i in 0..n {
        rules.push(vec![Symbol::Var(VarId(i)), Symbol::Var(VarId(i))]);
    }
    Slp::from_rules(alphabet, rules, VarId(n)).unwrap()
}

fn word(p: &Slp) -> String {
    p.alphabet().spell(&p.decompress(1 << 20).unwrap()).replace(' ', "")
}

/// Random programs: each rule mixes letters and earlier variables.
fn arb_slp() -> impl Strategy<Value = Slp> {
    (1usize..12)
        .prop_flat_map(|n| {
            let rules = (0..n)
                .map(|i| {
                    prop::collection::vec(
                        prop_oneof![
                            (0u32..3).prop_map(|l| Symbol::Letter(LetterId(l))),
                            (0..i.max(1) as u32).prop_map(move |v| {
                                if i == 0 {
                                    Symbol::Letter(LetterId(v % 3))
                                } else {
                                    Symbol::Var(VarId(v))
                                }
                            }),
                        ],
                        0..4,
                    )
                    .boxed()
                })
                .collect::<Vec<_>>();
            (rules, 0..n)
        })
        .prop_map(|(rules, start)| Slp::from_rules(ab(), rules, VarId(start as u32)).unwrap())
        .prop_filter("short value", |p| p.value_length() <= BigUint::from(4000u32))
}

#[test]
fn trim_removes_dead_rules() {
    let p = Slp::parse("start S\nS = A B\nA = 'a'\nB = 'b'\nZ = 'a' 'a'\n").unwrap();
    let t = p.trim();
    assert_eq!(t.num_vars(), 3);
    assert_eq!(word(&t), "ab");
    assert_eq!(t.trim(), t);
    let hs = t.heights();
    assert!(t.vars().all(|v| v == t.start() || hs[v.index()] < hs[t.start().index()]));
}

#[test]
fn cnf_examples() {
    let p = Slp::parse("start S\nS = 'a' 'b' 'c'\n").unwrap();
    let c = p.to_cnf();
    assert!(c.is_cnf());
    assert_eq!(word(&c), "abc");
    // left-associative: S -> (ab) c
    let s = c.rule(c.start());
    let Symbol::Var(left) = s[0] else { panic!() };
    assert_eq!(c.value_length(), BigUint::from(3u32));
    assert_eq!(c.decompress_var(left, 10).unwrap().len(), 2);

    let chain = Slp::parse("start S\nS = A\nA = 'a'\n").unwrap().to_cnf();
    assert_eq!(chain.num_vars(), 1);
    assert_eq!(word(&chain), "a");

    let eps = Slp::parse("start S\nS = A A\nA =\n").unwrap().to_cnf();
    assert_eq!(eps.num_vars(), 1);
    assert_eq!(eps.value_length(), BigUint::zero());
}

#[test]
fn lengths_and_heights() {
    let p = ab_power(ab(), 10);
    assert_eq!(p.value_length(), BigUint::from(2048u32));
    assert_eq!(p.height(p.start()).unwrap(), 11);
    assert_eq!(Slp::empty(ab()).value_length(), BigUint::zero());
    let q = Slp::parse("start S\nS = A A\nA = 'a'\n").unwrap();
    assert_eq!(q.height(q.start()).unwrap(), 2);
    assert!(q.height(VarId(7)).is_err());
}

#[test]
fn extraction() {
    let p = Slp::parse("start S\nS = A A\nA = 'a' 'b'\n").unwrap();
    assert_eq!(word(&p.extract(&1u32.into(), &3u32.into()).unwrap()), "ba");
    assert_eq!(p.extract(&2u32.into(), &2u32.into()).unwrap().value_length(), BigUint::zero());
    assert!(matches!(
        p.extract(&3u32.into(), &5u32.into()),
        Err(SlpError::IndexOutOfRange { .. })
    ));
    let big = ab_power(ab(), 20);
    let mid = pow2(20);
    let e = big.extract(&(&mid - 1u32), &(&mid + 1u32)).unwrap();
    assert_eq!(word(&e), "ba");
}

#[test]
fn concatenation_and_restriction() {
    let a = ab();
    let p = Slp::from_word(a.clone(), &[LetterId(0), LetterId(1)]);
    let d = Slp::from_word(a.clone(), &[LetterId(0)]);
    let c = [LetterId(2)];
    let q = Slp::concat(a.clone(), &[Part::Program(&p), Part::Word(&c), Part::Program(&d)]).unwrap();
    assert_eq!(word(&q), "abca");
    assert_eq!(Slp::concat(a.clone(), &[]).unwrap().value_length(), BigUint::zero());
    let other = Arc::new(Alphabet::from_names(["q"]).unwrap());
    let r = Slp::from_word(other, &[LetterId(0)]);
    assert_eq!(
        Slp::concat(a, &[Part::Program(&r)]).unwrap_err(),
        SlpError::AlphabetMismatch
    );

    let s = Slp::parse("start S\nS = A B\nA = 'a' 'b'\nB = 'c'\n").unwrap();
    let a_var = s.vars().find(|&v| s.rule(v).len() == 2 && matches!(s.rule(v)[0], Symbol::Letter(_))).unwrap();
    assert_eq!(word(&s.restriction(a_var).unwrap()), "ab");
    assert_eq!(s.restriction(s.start()).unwrap(), s.trim());
}

#[test]
fn automaton_membership() {
    let p = ab_power(ab(), 5);
    let even = Dfa {
        start: 0,
        accepting: vec![true, false],
        delta: vec![vec![1, 1, 1], vec![0, 0, 0]],
    };
    assert!(p.fsa_membership(&even));
    let has_c = Dfa {
        start: 0,
        accepting: vec![false, true],
        delta: vec![vec![0, 0, 1], vec![1, 1, 1]],
    };
    assert!(!p.fsa_membership(&has_c));
}

#[test]
fn decompression_limits() {
    let p = ab_power(ab(), 3);
    assert_eq!(word(&p), "abababababababab");
    assert!(Slp::empty(ab()).decompress(0).unwrap().is_empty());
    let huge = ab_power(ab(), 80);
    assert!(matches!(huge.decompress(1_000_000), Err(SlpError::TooLong { .. })));
}

#[test]
fn compactness() {
    let four = BigRational::from_integer(4.into());
    // x^(2^k) by squaring
    let mut rules = vec![vec![Symbol::Letter(LetterId(0))]];
    for i in 0..30 {
        rules.push(vec![Symbol::Var(VarId(i)), Symbol::Var(VarId(i))]);
    }
    let pow = Slp::from_rules(ab(), rules, VarId(30)).unwrap();
    assert!(pow.is_compact(&four));
    let unary = Slp::from_word(ab(), &vec![LetterId(0); 10_000]);
    assert!(!unary.is_compact(&four));
    let two = Slp::from_word(ab(), &[LetterId(0), LetterId(1)]);
    assert!(two.is_compact(&BigRational::from_integer(2.into())));
}

#[test]
fn size_bound_helper() {
    assert!(check_size_bound(&BigUint::from(3u32), 3));
    assert!(!check_size_bound(&BigUint::from(4u32), 3));
    assert!(check_size_bound(&pow2(100), 190));
    assert!(!check_size_bound(&pow2(100), 150));
}

#[test]
fn rejects_cycles_and_dangling_refs() {
    let r = Slp::from_rules(ab(), vec![vec![Symbol::Var(VarId(1))], vec![Symbol::Var(VarId(0))]], VarId(0));
    assert!(matches!(r, Err(SlpError::Cycle(_))));
    let r = Slp::from_rules(ab(), vec![vec![Symbol::Var(VarId(5))]], VarId(0));
    assert!(matches!(r, Err(SlpError::UnknownVariable(_))));
}

use num_rational::BigRational;

proptest! {
    #[test]
    fn trim_and_cnf_preserve_value(p in arb_slp()) {
        let w = p.decompress(10_000).unwrap();
        prop_assert_eq!(&p.trim().decompress(10_000).unwrap(), &w);
        let c = p.to_cnf();
        prop_assert!(c.is_cnf());
        prop_assert_eq!(&c.decompress(10_000).unwrap(), &w);
        prop_assert!(c.size() <= 2 * p.size() + 3);
    }

    #[test]
    fn extraction_matches_slicing(p in arb_slp(), a in 0usize..5000, b in 0usize..5000) {
        let w = p.decompress(10_000).unwrap();
        let (i, j) = (a.min(b) % (w.len() + 1), a.max(b) % (w.len() + 1));
        let (i, j) = (i.min(j), i.max(j));
        let e = p.extract(&i.into(), &j.into()).unwrap();
        prop_assert_eq!(e.value_length(), BigUint::from(j - i));
        prop_assert_eq!(e.decompress(10_000).unwrap(), w[i..j].to_vec());
    }

    #[test]
    fn lengths_match_decompression(p in arb_slp()) {
        let lens = p.lengths();
        for v in p.vars() {
            prop_assert_eq!(BigUint::from(p.decompress_var(v, 10_000).unwrap().len()), lens[v.index()].clone());
        }
        let hs = p.heights();
        for v in p.vars() {
            for s in p.rule(v) {
                if let Symbol::Var(c) = s {
                    prop_assert!(hs[c.index()] < hs[v.index()]);
                }
            }
        }
    }

    #[test]
    fn membership_matches_simulation(p in arb_slp(), seed in prop::collection::vec(0usize..8, 24), states in 1usize..8) {
        let delta: Vec<Vec<usize>> = (0..states).map(|q| (0..3).map(|l| seed[(q * 3 + l) % seed.len()] % states).collect()).collect();
        let accepting = (0..states).map(|q| seed[q] % 2 == 0).collect();
        let dfa = Dfa { start: 0, accepting, delta };
        let w = p.decompress(10_000).unwrap();
        prop_assert_eq!(p.fsa_membership(&dfa), dfa.accepts(&w));
    }

    #[test]
    fn concat_matches(p in arb_slp(), q in arb_slp()) {
        let c = Slp::concat(ab(), &[Part::Program(&p), Part::Program(&q)]).unwrap();
        let mut w = p.decompress(10_000).unwrap();
        w.extend(q.decompress(10_000).unwrap());
        prop_assert_eq!(c.decompress(20_000).unwrap(), w);
    }
}
