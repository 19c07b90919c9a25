mod common;

use common::{random_net, RandomNet};
use pmuplace_core::optimizer::{
    branch_and_bound, exhaustive_constrained, exhaustive_search, greedy_select, lp_upper_bound,
    next_bus, optimize_over_reference_buses, BnbConfig, BranchAndBound, ConstraintSet,
    DEFAULT_ENUMERATION_CAP,
};
use pmuplace_core::separation::{build_theta, ThetaMatrix};
use pmuplace_core::signatures::compute_signature_set;
use proptest::prelude::*;

fn theta_for(rn: &RandomNet, r: usize, sigma: Option<&[f64]>) -> Option<ThetaMatrix> {
    let net = rn.build();
    let events = net.enumerate_single_line_outages().unwrap();
    if events.len() < 2 {
        return None;
    }
    let sigs = compute_signature_set(&net, &events, r).unwrap();
    Some(build_theta(&[sigs], 2.0, sigma).unwrap())
}

/// `a ≤ b` up to a relative rounding allowance.
fn le(a: f64, b: f64) -> bool {
    a <= b + 1e-12 * a.abs().max(b.abs())
}

fn instance() -> impl Strategy<Value = (RandomNet, usize, usize)> {
    random_net(4, 8, 5).prop_flat_map(|rn| {
        let n = rn.n;
        (Just(rn), 0..n, 2..=n)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn bnb_finds_the_exhaustive_optimum((rn, r, m) in instance()) {
        let Some(theta) = theta_for(&rn, r, None) else { return Ok(()) };
        let out = branch_and_bound(&theta, m, BnbConfig::default()).unwrap();
        let ex = exhaustive_search(&theta, m, r, DEFAULT_ENUMERATION_CAP).unwrap();
        prop_assert!(out.proven());
        prop_assert!((out.power - ex.power).abs() <= 1e-9 * ex.power.max(1e-300), "{} vs {}", out.power, ex.power);
        prop_assert!(le(ex.power, out.upper));
        prop_assert_eq!(out.power, theta.power_value(out.selection.buses()));
        prop_assert_eq!(out.selection.len(), m);
        prop_assert!(out.selection.contains(r));
    }

    #[test]
    fn trace_bounds_are_monotone_and_sandwiched((rn, r, m) in instance()) {
        let Some(theta) = theta_for(&rn, r, None) else { return Ok(()) };
        let out = branch_and_bound(&theta, m, BnbConfig::default()).unwrap();
        for w in out.trace.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            prop_assert!(a.lower <= b.lower);
            prop_assert!(b.lower <= b.upper);
            prop_assert!(b.upper <= a.upper, "{:?} -> {:?}", a, b);
            prop_assert_eq!(b.iteration, a.iteration + 1);
        }
        prop_assert!(out.root_lower <= out.lower);
        prop_assert!(out.root_upper >= out.upper);
        prop_assert!(out.i_achieve <= out.iterations);
    }

    #[test]
    fn leaves_partition_the_root_and_bound_their_optimum((rn, r, m) in instance()) {
        let Some(theta) = theta_for(&rn, r, None) else { return Ok(()) };
        let n = theta.n_buses();
        let mut bnb = BranchAndBound::new(&theta, m, BnbConfig::default()).unwrap();
        loop {
            for mask in 0u32..(1 << n) {
                if mask.count_ones() as usize != m || (mask >> r) & 1 == 0 {
                    continue;
                }
                let w: Vec<bool> = (0..n).map(|b| (mask >> b) & 1 == 1).collect();
                let holders = bnb.leaves().iter().filter(|l| l.constraints.admits(&w)).count();
                prop_assert_eq!(holders, 1, "mask {:b}", mask);
            }
            for leaf in bnb.leaves() {
                let opt = exhaustive_constrained(&theta, m, &leaf.constraints, DEFAULT_ENUMERATION_CAP).unwrap();
                prop_assert!(le(leaf.lower, opt.power));
                prop_assert!(le(opt.power, leaf.upper));
            }
            if !bnb.step().unwrap() {
                break;
            }
        }
    }

    #[test]
    fn runs_are_deterministic((rn, r, m) in instance()) {
        let Some(theta) = theta_for(&rn, r, None) else { return Ok(()) };
        let a = branch_and_bound(&theta, m, BnbConfig::default()).unwrap();
        let b = branch_and_bound(&theta, m, BnbConfig::default()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn lp_bounds_the_integer_optimum((rn, r, m) in instance()) {
        let Some(theta) = theta_for(&rn, r, None) else { return Ok(()) };
        let root = ConstraintSet::root(theta.n_buses(), r).unwrap();
        let relax = lp_upper_bound(&theta, m, &root).unwrap();
        let ex = exhaustive_search(&theta, m, r, DEFAULT_ENUMERATION_CAP).unwrap();
        prop_assert!(le(ex.power, relax.bound));
        let total: f64 = relax.weights.iter().sum();
        prop_assert!((total - m as f64).abs() <= 1e-8);
        prop_assert!(relax.weights.iter().all(|&w| (-1e-9..=1.0 + 1e-9).contains(&w)));
        prop_assert!((relax.weights[r] - 1.0).abs() <= 1e-12);
        let scale = (0..theta.n_buses()).flat_map(|b| theta.row(b).iter().copied()).fold(0.0, f64::max);
        prop_assert!(relax.bound - relax.primal_value <= (1e-7 * relax.bound).max(1e-11 * scale));
    }

    #[test]
    fn greedy_is_nested_and_led_by_next_bus((rn, r, _m) in instance()) {
        let Some(theta) = theta_for(&rn, r, None) else { return Ok(()) };
        let n = theta.n_buses();
        let root = ConstraintSet::root(n, r).unwrap();
        let full = greedy_select(&theta, n, &root).unwrap();
        for m in 2..=n {
            let g = greedy_select(&theta, m, &root).unwrap();
            prop_assert_eq!(&g.order[..], &full.order[..m - 1]);
            prop_assert_eq!(next_bus(&theta, m, &root).unwrap(), full.order[0]);
            let ex = exhaustive_search(&theta, m, r, DEFAULT_ENUMERATION_CAP).unwrap();
            prop_assert!(le(g.power, ex.power));
        }
    }

    #[test]
    fn sigma_scaling_keeps_the_argmax(
        (rn, r, m) in instance(),
        sigma in prop::collection::vec(0.5f64..2.0, 8),
        c in prop::sample::select(vec![0.25, 2.0, 16.0]),
    ) {
        let n = rn.n;
        let s1 = sigma[..n].to_vec();
        let s2: Vec<f64> = s1.iter().map(|s| s * c).collect();
        let Some(t1) = theta_for(&rn, r, Some(&s1)) else { return Ok(()) };
        let t2 = theta_for(&rn, r, Some(&s2)).unwrap();
        let a = branch_and_bound(&t1, m, BnbConfig::default()).unwrap();
        let b = branch_and_bound(&t2, m, BnbConfig::default()).unwrap();
        prop_assert_eq!(a.selection, b.selection);
        let d1 = t1.to_distance(a.power);
        let d2 = t2.to_distance(b.power);
        prop_assert!((d2 - d1 / c).abs() <= 1e-12 * d1.max(1e-300) / c);
    }

    #[test]
    fn reference_sweep_is_the_double_loop_optimum(rn in random_net(4, 7, 4), m_seed in any::<usize>()) {
        let n = rn.n;
        let m = 2 + m_seed % (n - 1);
        if theta_for(&rn, 0, None).is_none() {
            return Ok(());
        }
        let sweep = optimize_over_reference_buses(n, m, BnbConfig::default(), |r| {
            Ok(theta_for(&rn, r, None).unwrap())
        })
        .unwrap();
        let mut oracle = f64::NEG_INFINITY;
        for (r, run) in &sweep.runs {
            let out = run.as_ref().unwrap();
            prop_assert!(out.power <= sweep.best().power);
            let theta = theta_for(&rn, *r, None).unwrap();
            oracle = oracle.max(exhaustive_search(&theta, m, *r, DEFAULT_ENUMERATION_CAP).unwrap().power);
        }
        prop_assert!((sweep.best().power - oracle).abs() <= 1e-9 * oracle.max(1e-300));
        prop_assert!(sweep.all_proven());
    }
}
