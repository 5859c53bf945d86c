mod common;

use std::cmp::Ordering;

use alpred::alp::{deserialize, serialize};
use alpred::analyzer::{objective_limit, objective_value};
use alpred::instance::{generate_planted, generate_random, parse_system};
use alpred::kfield::{Poly, RatFn};
use alpred::normalizer::{alphabet_is_unit, normalize};
use alpred::reducer::{count_profile, extend_assignment, reduce};
use common::q;
use num_rational::BigRational;
use proptest::prelude::*;

fn arb_poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec((-9i64..=9, 1i64..=5), 0..=7)
        .prop_map(|cs| Poly::new(cs.into_iter().map(|(n, d)| q(n, d)).collect()))
}

fn arb_ratfn() -> impl Strategy<Value = RatFn> {
    (arb_poly(), arb_poly().prop_filter("nonzero", |p| !p.is_zero())).prop_map(|(n, d)| RatFn::new(n, d).unwrap())
}

fn arb_unit() -> impl Strategy<Value = BigRational> {
    (0i64..=12).prop_map(|n| q(n, 12))
}

proptest! {
    #[test]
    fn field_axioms(f in arb_ratfn(), g in arb_ratfn(), h in arb_ratfn()) {
        prop_assert_eq!(&(&f + &g) * &h, &(&f * &h) + &(&g * &h));
        prop_assert_eq!(&(&f - &g) + &g, f.clone());
        if !g.is_zero() {
            prop_assert_eq!(&(&f / &g) * &g, f.clone());
        }
    }

    #[test]
    fn order_is_total_and_translation_invariant(f in arb_ratfn(), g in arb_ratfn(), h in arb_ratfn()) {
        let fg = f.compare_asymptotic(&g);
        prop_assert_eq!(fg, g.compare_asymptotic(&f).reverse());
        prop_assert_eq!(fg == Ordering::Equal, f == g);
        prop_assert_eq!((&f + &h).compare_asymptotic(&(&g + &h)), fg);
        if fg != Ordering::Equal {
            let d = &f - &g;
            let k = d.sign_threshold().unwrap() + q(1, 1);
            prop_assert_eq!(d.eval_at(&k).unwrap().cmp(&q(0, 1)), fg);
        }
    }

    #[test]
    fn canonical_form_is_unique(f in arb_ratfn(), c in arb_poly().prop_filter("nonzero", |p| !p.is_zero())) {
        let scaled = RatFn::new(f.numerator() * &c, f.denominator() * &c).unwrap();
        prop_assert_eq!(&scaled, &f);
        prop_assert!(f.denominator().leading_coeff().is_some_and(|a| *a == q(1, 1)));
    }

    #[test]
    fn system_text_round_trips(n in 1usize..8, m in 1usize..6, seed in any::<u64>()) {
        let sys = generate_random(n, m, seed).unwrap();
        prop_assert_eq!(parse_system(&sys.render()).unwrap(), sys);
    }

    #[test]
    fn reduced_json_round_trips(n in 1usize..6, m in 1usize..4, seed in any::<u64>()) {
        let inst = reduce(&generate_random(n, m, seed).unwrap());
        prop_assert_eq!(deserialize(&serialize(&inst)).unwrap(), inst);
    }

    #[test]
    fn reducer_invariants(n in 1usize..8, m in 1usize..5, seed in any::<u64>()) {
        let (sys, b) = generate_planted(n, m, seed).unwrap();
        prop_assert!(sys.check_assignment(&b).unwrap());
        let inst = reduce(&sys);
        let p = inst.profile();
        let c = count_profile(&sys);
        prop_assert_eq!((p.vars, p.constraints, p.objective_terms, p.relations), (c.vars, c.constraints, c.objective_terms, c.relations));
        let x: Vec<BigRational> = b.values().iter().map(|&v| q(v.into(), 1)).collect();
        let values = extend_assignment(&x);
        prop_assert!(inst.constraints.iter().all(|c| c.holds_symbolically(&values) == Some(true)));
        prop_assert!(inst.objective_value(&values).unwrap().unwrap().is_zero());
    }

    #[test]
    fn limit_paths_agree(a in prop::collection::vec(arb_unit(), 1..6)) {
        let direct: BigRational = a.iter().map(|x| x * (q(1, 1) - x)).sum();
        prop_assert_eq!(objective_limit(a.len(), &a).unwrap(), direct.clone());
        let sign = objective_value(a.len(), &a).unwrap().compare_asymptotic(&RatFn::zero());
        prop_assert_eq!(sign, direct.cmp(&q(0, 1)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn normalized_alphabet_is_unit(n in 1usize..4, m in 1usize..3, seed in any::<u64>()) {
        let inst = reduce(&generate_random(n, m, seed).unwrap());
        prop_assert!(alphabet_is_unit(&normalize(&inst).unwrap().instance));
    }
}
