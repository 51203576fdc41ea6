mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{base_sig, random_type, widen, BASE};
use nestsub::bpa::{
    accepted_up_to, bounded_inclusion, bounded_inclusion_expr, bpa_step, gen_pair, gen_random, translate, BpaExpr,
    Inclusion,
};
use nestsub::driver::{run_check, Options};
use nestsub::rename::{alternates, apply_param_subst, rename_signature, unfold, wrap_type};
use nestsub::simoracle::{bounded_sim, bounded_sim_between, SimResult};
use nestsub::subtype::{Checker, Goal};
use nestsub::syntax::{parse_type, ParamSubst, Type};
use nestsub::variance::{infer_variances, Signature, Variance};

const CAP: usize = 50_000;

fn variance() -> impl Strategy<Value = Variance> {
    prop::sample::select(Variance::ALL.to_vec())
}

/// Wraps two types into one renamed signature and checks the goal between them.
fn algorithm(sig: &Signature, a: &Type, b: &Type) -> (Signature, Type, Type, &'static str) {
    let renamed = rename_signature(sig).unwrap();
    let (wa, s1) = wrap_type(&renamed, a).unwrap();
    let (wb, s2) = wrap_type(&s1, b).unwrap();
    let v = Checker::new(&s2, &[]).check(&Goal::new(wa.clone(), wb.clone())).verdict.label();
    (s2, wa, wb, v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn join_is_least_upper_bound(a in variance(), b in variance(), c in variance()) {
        let j = a.join(b);
        prop_assert!(a.leq(j) && b.leq(j));
        prop_assert_eq!(j, b.join(a));
        if a.leq(c) && b.leq(c) {
            prop_assert!(j.leq(c));
        }
        prop_assert_eq!(a.neg().neg(), a);
    }

    #[test]
    fn printing_round_trips(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_type(&mut rng, 4);
        let text = t.to_string();
        let back = parse_type(&text, &mut base_sig().scope()).unwrap();
        prop_assert_eq!(back, t, "{}", text);
    }

    #[test]
    fn renaming_is_idempotent_and_alternating(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let body = Type::plus([("k", random_type(&mut rng, 4)), ("j", random_type(&mut rng, 3))]);
        let mut sig = base_sig();
        sig.insert("T", &[], body);
        let sig = infer_variances(&sig);
        let once = rename_signature(&sig).unwrap();
        let twice = rename_signature(&once).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert!(alternates(&once));
        let r = bounded_sim_between(&sig, &Type::named("T"), &once, &Type::named("T"), 6, CAP).unwrap();
        prop_assert!(!r.is_refuted(), "{:?}", r);
    }

    #[test]
    fn substitution_agrees_with_unfolding(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sig = base_sig();
        let arg = random_type(&mut rng, 3);
        let theta: ParamSubst = [("a".to_string(), arg.clone())].into_iter().collect();
        let app = Type::app("List", vec![("a".into(), arg.clone())]);
        prop_assert_eq!(unfold(&sig, &app).unwrap(), apply_param_subst(&sig.defs["List"].body, &theta));
        // Closed types are fixed by every substitution, and the empty one fixes everything.
        prop_assert_eq!(apply_param_subst(&arg, &theta), arg.clone());
        let body = &sig.defs["Seg"].body;
        prop_assert_eq!(&apply_param_subst(body, &ParamSubst::new()), body);
    }

    #[test]
    fn reflexive_and_deterministic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_type(&mut rng, 4);
        let (sig, a, b, v) = algorithm(&base_sig(), &t, &t);
        prop_assert_eq!(v, "subtype", "{}", t);
        let again = Checker::new(&sig, &[]).check(&Goal::new(a, b));
        prop_assert_eq!(again.verdict.label(), v);
    }

    #[test]
    fn subtype_verdicts_survive_the_oracle(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_type(&mut rng, 3);
        let up = rng.gen_bool(0.7);
        let b = if rng.gen_bool(0.7) { widen(&mut rng, &a, up) } else { random_type(&mut rng, 3) };
        let (_, _, _, v) = algorithm(&base_sig(), &a, &b);
        let oracle = bounded_sim(&base_sig(), &a, &b, 8, CAP).unwrap();
        if v == "subtype" {
            prop_assert!(!oracle.is_refuted(), "{} <= {}: {:?}", a, b, oracle);
        }
    }

    #[test]
    fn widening_gives_supertypes(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_type(&mut rng, 3);
        let b = widen(&mut rng, &a, true);
        let oracle = bounded_sim(&base_sig(), &a, &b, 8, CAP).unwrap();
        prop_assert!(!oracle.is_refuted(), "{} <= {}: {:?}", a, b, oracle);
        let (_, _, _, v) = algorithm(&base_sig(), &a, &b);
        prop_assert_eq!(v, "subtype", "{} <= {}", a, b);
    }

    #[test]
    fn oracle_is_monotone_in_depth(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sig = base_sig();
        let a = random_type(&mut rng, 3);
        let b = if rng.gen_bool(0.5) { widen(&mut rng, &a, false) } else { random_type(&mut rng, 3) };
        let deep = bounded_sim(&sig, &a, &b, 8, CAP).unwrap();
        for k in 0..8 {
            let shallow = bounded_sim(&sig, &a, &b, k, CAP).unwrap();
            match (&deep, &shallow) {
                (SimResult::HoldsUpTo(_), s) => prop_assert_eq!(s, &SimResult::HoldsUpTo(k)),
                (SimResult::RefutedAt { depth, .. }, s) if *depth <= k => prop_assert_eq!(s, &deep),
                (SimResult::RefutedAt { .. }, s) => prop_assert_eq!(s, &SimResult::HoldsUpTo(k)),
                (SimResult::ResourceExceeded(_), _) => {}
            }
        }
    }

    #[test]
    fn oracle_is_reflexive_and_transitive(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sig = base_sig();
        let a = random_type(&mut rng, 3);
        let b = widen(&mut rng, &a, true);
        let c = if rng.gen_bool(0.8) { widen(&mut rng, &b, true) } else { random_type(&mut rng, 3) };
        let k = 6;
        prop_assert_eq!(bounded_sim(&sig, &a, &a, k, CAP).unwrap(), SimResult::HoldsUpTo(k));
        let ab = bounded_sim(&sig, &a, &b, k, CAP).unwrap();
        let bc = bounded_sim(&sig, &b, &c, k, CAP).unwrap();
        if ab.holds() && bc.holds() {
            let ac = bounded_sim(&sig, &a, &c, k, CAP).unwrap();
            prop_assert!(ac.holds(), "{} <= {} <= {}: {:?}", a, b, c, ac);
        }
    }

    #[test]
    fn bpa_generation_is_deterministic(seed in any::<u64>(), vars in 1usize..6, branches in 1usize..4, len in 1usize..4) {
        prop_assert_eq!(gen_random(seed, vars, branches, len), gen_random(seed, vars, branches, len));
        let s = gen_random(seed, vars, branches, len);
        prop_assert!(s.validate().is_ok());
        prop_assert!(translate(&s).is_ok());
    }

    #[test]
    fn reachable_expressions_are_deterministic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = gen_random(seed, rng.gen_range(1..=5), rng.gen_range(1..=3), rng.gen_range(1..=3));
        let mut p = BpaExpr::var(sys.root.clone());
        for _ in 0..10 {
            let steps: Vec<_> = bpa_step(&sys, &p).unwrap().into_iter().collect();
            let mut labels: Vec<&String> = steps.iter().map(|(a, _)| a).collect();
            labels.dedup();
            prop_assert_eq!(labels.len(), steps.len(), "{}", p);
            if steps.is_empty() {
                break;
            }
            p = steps[rng.gen_range(0..steps.len())].1.clone();
        }
    }

    #[test]
    fn inclusion_is_preserved_by_common_transitions(seed in any::<u64>()) {
        let (sys, l, r) = gen_pair(seed, 3, 3, 2);
        let k = 6;
        if bounded_inclusion(&sys, &l, &r, k).unwrap().is_included() {
            let ls = bpa_step(&sys, &BpaExpr::var(l.clone())).unwrap();
            let rs: std::collections::BTreeMap<_, _> = bpa_step(&sys, &BpaExpr::var(r.clone())).unwrap().into_iter().collect();
            for (a, l2) in ls {
                if let Some(r2) = rs.get(&a) {
                    prop_assert!(bounded_inclusion_expr(&sys, &l2, r2, k - 1).is_included(), "{} after {}", l2, a);
                }
            }
        }
    }

    #[test]
    fn inclusion_matches_accepted_sets(seed in any::<u64>()) {
        let (sys, l, r) = gen_pair(seed, 3, 2, 2);
        let k = 6;
        let left = accepted_up_to(&sys, &BpaExpr::var(l.clone()), k);
        let right = accepted_up_to(&sys, &BpaExpr::var(r.clone()), k);
        let shortest = left.difference(&right).min_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b))).cloned();
        let expected = match shortest {
            Some(w) => Inclusion::Witness(w),
            None => Inclusion::Included,
        };
        prop_assert_eq!(bounded_inclusion(&sys, &l, &r, k).unwrap(), expected);
    }

    #[test]
    fn refutation_depth_is_bounded_by_witness_length(seed in any::<u64>()) {
        let (sys, l, r) = gen_pair(seed, 3, 3, 2);
        let tr = translate(&sys).unwrap();
        if let Inclusion::Witness(w) = bounded_inclusion(&sys, &l, &r, 6).unwrap() {
            let sim = bounded_sim(&tr.sig, &tr.var_type(&l), &tr.var_type(&r), w.len() + 1, CAP).unwrap();
            match sim {
                SimResult::RefutedAt { depth, .. } => prop_assert!(depth <= w.len() + 1),
                SimResult::ResourceExceeded(_) => {}
                other => prop_assert!(false, "witness {:?} but {:?}", w, other),
            }
        }
    }
}

#[test]
fn refutation_depth_on_example_system() {
    let sys = nestsub::bpa::parse_bpa("proc X0 = a . X0 . c + b . X1 ;\nproc X1 = a ;\nroot X0").unwrap();
    let tr = translate(&sys).unwrap();
    let Inclusion::Witness(w) = bounded_inclusion(&sys, "X1", "X0", 4).unwrap() else { panic!() };
    match bounded_sim(&tr.sig, &tr.var_type("X1"), &tr.var_type("X0"), 12, CAP).unwrap() {
        SimResult::RefutedAt { depth, path, .. } => {
            assert_eq!(depth, w.len() + 1);
            assert_eq!(path, w);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn corpus_reports_are_byte_identical() {
    for name in common::CORPUS {
        let src = common::corpus(name);
        assert_eq!(run_check(&src, &Options::default()).to_json(), run_check(&src, &Options::default()).to_json());
    }
    assert!(BASE.contains("type nat"));
}
