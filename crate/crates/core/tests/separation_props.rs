mod common;

use common::{random_net, selection_from_bits};
use pmuplace_core::separation::{build_theta, d_min, pairwise_min_direct, Selection};
use pmuplace_core::signatures::compute_signature_set;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn theta_matches_direct(
        rn in random_net(3, 10, 6),
        r_seed in any::<usize>(),
        bits in any::<u64>(),
        p in prop::sample::select(vec![1.0, 1.5, 2.0, 3.0]),
    ) {
        let net = rn.build();
        let events = net.enumerate_single_line_outages().unwrap();
        prop_assume!(events.len() >= 2);
        let r = r_seed % net.n_buses();
        let sigs = compute_signature_set(&net, &events, r).unwrap();
        let theta = build_theta(std::slice::from_ref(&sigs), p, None).unwrap();
        prop_assert_eq!(theta.n_cols(), events.len() * (events.len() - 1) / 2);
        prop_assert!(theta.row(r).iter().all(|&v| v == 0.0));
        let sel = Selection::new(net.n_buses(), r, selection_from_bits(net.n_buses(), r, bits)).unwrap();
        let via_theta = d_min(&sel, &theta).unwrap().distance;
        let direct = pairwise_min_direct(std::slice::from_ref(&sigs), &sel, p, None).unwrap();
        prop_assert!((via_theta - direct).abs() <= 1e-12, "{} vs {}", via_theta, direct);
    }

    #[test]
    fn superset_never_decreases(rn in random_net(3, 10, 6), a in any::<u64>(), b in any::<u64>()) {
        let net = rn.build();
        let events = net.enumerate_single_line_outages().unwrap();
        prop_assume!(events.len() >= 2);
        let sigs = compute_signature_set(&net, &events, 0).unwrap();
        let theta = build_theta(&[sigs], 2.0, None).unwrap();
        let n = net.n_buses();
        let small = selection_from_bits(n, 0, a & b);
        let large = selection_from_bits(n, 0, a);
        prop_assert!(theta.power_value(&small) <= theta.power_value(&large));
    }

    #[test]
    fn reference_row_is_free(rn in random_net(3, 10, 6), bits in any::<u64>(), r_seed in any::<usize>()) {
        let net = rn.build();
        let events = net.enumerate_single_line_outages().unwrap();
        prop_assume!(events.len() >= 2);
        let r = r_seed % net.n_buses();
        let theta = build_theta(&[compute_signature_set(&net, &events, r).unwrap()], 2.0, None).unwrap();
        let with: Vec<f64> = (0..net.n_buses()).map(|b| if b == r || (bits >> b) & 1 == 1 { 1.0 } else { 0.0 }).collect();
        let mut without = with.clone();
        without[r] = 0.0;
        prop_assert_eq!(theta.weighted_sums(&with), theta.weighted_sums(&without));
    }

    #[test]
    fn sigma_scaling_divides_distance(
        rn in random_net(3, 10, 6),
        bits in any::<u64>(),
        c in prop::sample::select(vec![0.25, 0.5, 2.0, 8.0]),
        sigma in prop::collection::vec(0.5f64..2.0, 10),
    ) {
        let net = rn.build();
        let n = net.n_buses();
        let events = net.enumerate_single_line_outages().unwrap();
        prop_assume!(events.len() >= 2);
        let sigs = compute_signature_set(&net, &events, 0).unwrap();
        let s1: Vec<f64> = sigma[..n].to_vec();
        let s2: Vec<f64> = s1.iter().map(|s| s * c).collect();
        let t1 = build_theta(std::slice::from_ref(&sigs), 2.0, Some(&s1)).unwrap();
        let t2 = build_theta(std::slice::from_ref(&sigs), 2.0, Some(&s2)).unwrap();
        let sel = Selection::new(n, 0, selection_from_bits(n, 0, bits)).unwrap();
        let d1 = d_min(&sel, &t1).unwrap().distance;
        let d2 = d_min(&sel, &t2).unwrap().distance;
        prop_assert!((d2 - d1 / c).abs() <= 1e-12 * d1.max(1e-300) / c);
    }

    #[test]
    fn reactance_scaling_scales_signatures(rn in random_net(3, 9, 5), bits in any::<u64>()) {
        // angles are linear in reactance; near-zero distances are rounding noise
        let events = rn.build().enumerate_single_line_outages().unwrap();
        prop_assume!(events.len() >= 2);
        let n = rn.n;
        let sel = Selection::new(n, 0, selection_from_bits(n, 0, bits)).unwrap();
        let d = |scale: f64| {
            let net = rn.build_scaled(scale);
            let sigs = compute_signature_set(&net, &events, 0).unwrap();
            d_min(&sel, &build_theta(&[sigs], 2.0, None).unwrap()).unwrap().distance
        };
        let (d1, d3) = (d(1.0), d(3.0));
        prop_assert!((d3 - 3.0 * d1).abs() <= 1e-9 * d3 + 1e-11, "{} {}", d1, d3);
    }
}
