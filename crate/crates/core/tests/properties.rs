use proptest::prelude::*;

use specdiff::harness::trial_seed;
use specdiff::report::{emit_campaign, parse_report, ParsedLine};
use specdiff::suite::{find_suite, get_implementation, list_suites};
use specdiff::{
    depth, gen_expr, interp, num_seq, outcome_equal, parse_signature, size_of, size_schedule, type_of,
    validate_signature, Arg, Campaign, CampaignOptions, Expr, FnAst, GenConfig, Literal, OpDecl, Rng, Signature, Ty,
};

fn value_ty() -> impl Strategy<Value = Ty> {
    let leaf =
        prop_oneof![Just(Ty::Int), Just(Ty::Bool), Just(Ty::Char), Just(Ty::Str), Just(Ty::Unit), Just(Ty::Abstract)];
    leaf.prop_recursive(2, 6, 1, |inner| prop_oneof![inner.clone().prop_map(Ty::list), inner.prop_map(Ty::option)])
}

fn arg_ty() -> impl Strategy<Value = Ty> {
    prop_oneof![4 => value_ty(), 1 => Just(Ty::int_fun())]
}

fn signature() -> impl Strategy<Value = Signature> {
    let op = ("[a-z]{1,5}", prop::collection::vec(arg_ty(), 0..4), value_ty());
    ("[a-z]{1,8}", any::<bool>(), prop::collection::vec(op, 1..8)).prop_map(|(name, mutable, ops)| Signature {
        name: format!("{name}_sig"),
        mutable,
        ops: ops
            .into_iter()
            .enumerate()
            .map(|(i, (n, args, ret))| OpDecl::new(format!("{n}_{i}"), args, ret))
            .collect(),
    })
}

fn literals(e: &Expr, out: &mut Vec<Literal>) {
    match e {
        Expr::Seq { first, second } => {
            literals(first, out);
            literals(second, out);
        }
        Expr::Call { args, .. } => {
            for a in args {
                match a {
                    Arg::Lit(l) => out.push(l.clone()),
                    Arg::Sub(s) => literals(s, out),
                    Arg::Fn(_) => {}
                }
            }
        }
    }
}

fn fns(e: &Expr, out: &mut Vec<FnAst>) {
    for a in match e {
        Expr::Call { args, .. } => args.iter().collect::<Vec<_>>(),
        Expr::Seq { .. } => vec![],
    } {
        if let Arg::Fn(f) = a {
            out.push(f.clone());
        }
    }
    for c in e.children() {
        fns(c, out);
    }
}

/// A bundled signature plus one of its generatable types.
fn suite_target() -> impl Strategy<Value = (Signature, Ty)> {
    (0..list_suites().len(), any::<prop::sample::Index>()).prop_map(|(i, pick)| {
        let sig = list_suites()[i].signature();
        let mut types = validate_signature(&sig).unwrap().observable;
        if sig.ops.iter().any(|o| o.ret.is_abstract()) {
            types.push(Ty::Abstract);
        }
        let ty = types[pick.index(types.len())].clone();
        (sig, ty)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn signature_pretty_print_round_trips(sig in signature()) {
        let text = sig.to_source();
        prop_assert_eq!(parse_signature(&text).unwrap(), sig);
    }

    #[test]
    fn generated_expressions_are_well_typed((sig, ty) in suite_target(), seed in any::<u64>(), size in 0u64..=30) {
        let cfg = GenConfig::with_seed(seed);
        let e = gen_expr(&ty, size, &sig, &cfg, &mut Rng::new(seed));
        prop_assert_eq!(type_of(&e, &sig).unwrap(), ty);
        prop_assert!(depth(&e) >= 1);
        prop_assert!(depth(&e) <= size_of(&e));
        if !sig.mutable {
            prop_assert_eq!(num_seq(&e), 0);
        }
    }

    #[test]
    fn generated_literals_respect_size((sig, ty) in suite_target(), seed in any::<u64>(), size in 0u64..=30) {
        let e = gen_expr(&ty, size, &sig, &GenConfig::with_seed(seed), &mut Rng::new(seed));
        let mut lits = Vec::new();
        literals(&e, &mut lits);
        for l in lits {
            if let Literal::Int(i) = l {
                prop_assert!((0..=size as i64).contains(&i));
            }
        }
        let mut fs = Vec::new();
        fns(&e, &mut fs);
        for f in fs {
            prop_assert!(f.depth() <= specdiff::symexpr::MAX_FN_DEPTH);
        }
    }

    #[test]
    fn text_round_trips((sig, ty) in suite_target(), seed in any::<u64>(), size in 0u64..=30) {
        let e = gen_expr(&ty, size, &sig, &GenConfig::with_seed(seed), &mut Rng::new(seed));
        let text = e.to_text();
        let back = Expr::from_text(&text, &sig).unwrap();
        prop_assert_eq!(back.to_text(), text);
        prop_assert_eq!(back, e);
    }

    #[test]
    fn generation_is_deterministic((sig, ty) in suite_target(), seed in any::<u64>(), size in 0u64..=30) {
        let cfg = GenConfig::with_seed(seed);
        let a = gen_expr(&ty, size, &sig, &cfg, &mut Rng::new(seed));
        let b = gen_expr(&ty, size, &sig, &cfg, &mut Rng::new(seed));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn schedule_cycles_through_sizes(i in any::<u64>(), max_size in 0u64..100) {
        let cfg = GenConfig { max_size, ..GenConfig::default() };
        prop_assert_eq!(size_schedule(i, &cfg), i % (max_size + 1));
    }

    #[test]
    fn trial_seed_is_order_independent(seed in any::<u64>(), i in 0u64..10_000) {
        let c = Campaign::new(find_suite("bst_map").unwrap().signature()).unwrap();
        let cfg = GenConfig::with_seed(seed);
        let direct = gen_expr(c.trial_type(i), size_schedule(i, &cfg), c.signature(), &cfg, &mut Rng::new(trial_seed(seed, i)));
        prop_assert_eq!(c.trial_expr(i, &cfg), direct);
    }

    #[test]
    fn outcome_equality_is_reflexive_and_symmetric((sig, ty) in suite_target(), s1 in any::<u64>(), s2 in any::<u64>()) {
        prop_assume!(!ty.is_abstract());
        let entry = find_suite(&sig.name).unwrap();
        let mut imp = get_implementation(entry.name, entry.reference()).unwrap();
        let cfg = GenConfig::default();
        let e1 = gen_expr(&ty, s1 % 31, &sig, &cfg, &mut Rng::new(s1));
        let e2 = gen_expr(&ty, s2 % 31, &sig, &cfg, &mut Rng::new(s2));
        imp.reset();
        let o1 = interp(&e1, &mut *imp, &sig).unwrap();
        imp.reset();
        let o2 = interp(&e2, &mut *imp, &sig).unwrap();
        prop_assert!(outcome_equal(&o1, &o1, &ty));
        prop_assert_eq!(outcome_equal(&o1, &o2, &ty), outcome_equal(&o2, &o1, &ty));
        prop_assert_eq!(outcome_equal(&o1, &o2, &ty), o1 == o2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn parallel_campaign_matches_sequential(seed in any::<u64>(), jobs in 2usize..5) {
        let c = Campaign::new(find_suite("bst_map").unwrap().signature()).unwrap();
        let cfg = GenConfig::with_seed(seed);
        let make_a = || get_implementation("bst_map", "correct").unwrap();
        let make_b = || get_implementation("bst_map", "b3").unwrap();
        let seq = c.run(&mut *make_a(), &mut *make_b(), 300, &cfg, &CampaignOptions::default());
        let par = c.run_parallel(&make_a, &make_b, 300, &cfg, &CampaignOptions { jobs, ..CampaignOptions::default() });
        prop_assert_eq!(seq, par);
    }

    #[test]
    fn report_counts_match_campaign(seed in any::<u64>()) {
        let c = Campaign::new(find_suite("finite_set").unwrap().signature()).unwrap();
        let mut a = get_implementation("finite_set", "listset").unwrap();
        let mut b = get_implementation("finite_set", "nodedup").unwrap();
        let opts = CampaignOptions { shrink: false, ..CampaignOptions::default() };
        let result = c.run(&mut *a, &mut *b, 200, &GenConfig::with_seed(seed), &opts);
        let mut buf = Vec::new();
        emit_campaign(&result, &mut buf).unwrap();
        let lines = parse_report(std::str::from_utf8(&buf).unwrap()).unwrap();
        prop_assert_eq!(lines.len(), 201);
        let failed = lines.iter().filter(|l| matches!(l, ParsedLine::Trial(t) if t.status == "failed")).count();
        prop_assert_eq!(failed, result.failures.len());
        let ParsedLine::Summary(s) = lines.last().unwrap() else { panic!("no summary line") };
        prop_assert_eq!(s.failures, failed as u64);
        let first = lines.iter().position(|l| matches!(l, ParsedLine::Trial(t) if t.status == "failed"));
        prop_assert_eq!(s.trials_to_first_failure, first.map(|i| i as u64 + 1));
    }
}
