mod common;

use common::*;
use nmg_core::uncertainty::{aggregate_sigma, psi_exact, uniform_correlation, PeriodError};
use nmg_core::{
    audit_schedule, build_pwl_cdf, fleet_from_json, fleet_to_json, net_error_distribution, phi, solve_independent_set,
    solve_schedule, FleetSpec, Mode,
};
use proptest::prelude::*;

fn dist(mu: f64, sigma: f64) -> PeriodError {
    PeriodError { mu, sigma }
}

proptest! {
    #[test]
    fn psi_is_monotone_in_each_reserve(
        ru in 0.0..20.0f64, rd in 0.0..20.0f64, extra in 0.0..5.0f64,
        p in -10.0..10.0f64, mu in -3.0..3.0f64, sigma in 0.1..8.0f64,
    ) {
        let d = dist(mu, sigma);
        let base = psi_exact(ru, rd, p, d);
        prop_assert!((0.0..=1.0).contains(&base));
        prop_assert!(psi_exact(ru + extra, rd, p, d) >= base - 1e-15);
        prop_assert!(psi_exact(ru, rd + extra, p, d) >= base - 1e-15);
    }

    #[test]
    fn psi_is_translation_invariant(
        ru in 0.0..20.0f64, rd in 0.0..20.0f64, p in -10.0..10.0f64,
        shift in -5.0..5.0f64, sigma in 0.1..8.0f64,
    ) {
        // moving the PCC flow and the error mean together leaves PSI unchanged
        let a = psi_exact(ru, rd, p, dist(0.0, sigma));
        let b = psi_exact(ru, rd, p - shift, dist(shift, sigma));
        prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
    }

    #[test]
    fn pwl_is_monotone_and_within_bound(half in 1usize..32, z_max in 2.0..6.0f64, z in -8.0..8.0f64, dz in 0.0..1.0f64) {
        let pwl = build_pwl_cdf(2 * half, z_max).unwrap();
        prop_assert!(pwl.eval(z + dz) >= pwl.eval(z));
        prop_assert!((pwl.eval(z) - phi(z)).abs() <= pwl.error_bound() + 1e-12);
        prop_assert!((0.0..=1.0).contains(&pwl.eval(z)));
    }

    #[test]
    fn aggregate_sigma_norm_identities(sig in prop::collection::vec(0.0..10.0f64, 1..6), rho in 0.0..1.0f64) {
        let n = sig.len();
        let indep = aggregate_sigma(&sig, &uniform_correlation(n, 0.0)).unwrap();
        let full = aggregate_sigma(&sig, &uniform_correlation(n, 1.0)).unwrap();
        let mid = aggregate_sigma(&sig, &uniform_correlation(n, rho)).unwrap();
        let l2 = sig.iter().map(|s| s * s).sum::<f64>().sqrt();
        let l1 = sig.iter().sum::<f64>();
        prop_assert!((indep - l2).abs() <= 1e-9 * l1.max(1.0));
        prop_assert!((full - l1).abs() <= 1e-9 * l1.max(1.0));
        prop_assert!(mid >= indep - 1e-9 && mid <= full + 1e-9);
    }

    #[test]
    fn full_correlation_scales_linearly(n in 1usize..6, w in 0.0..5.0f64, pv in 0.0..5.0f64, d in 0.0..5.0f64) {
        let mgs = (0..n).map(|k| microgrid(&format!("m{k}"), vec![10.0])).collect();
        let mut f = fleet(mgs, vec![0.1], 0.0, Mode::Networked);
        for e in &mut f.uncertainty.microgrids {
            e.wind_sigma = absolute(vec![w]);
            e.pv_sigma = absolute(vec![pv]);
            e.demand_sigma = absolute(vec![d]);
        }
        f.uncertainty.set_uniform_correlation(1.0);
        let f = finish(f);
        let one = net_error_distribution(&f, Mode::Independent, Some("m0")).unwrap().at(0).sigma;
        let all = net_error_distribution(&f, Mode::Networked, None).unwrap().at(0).sigma;
        prop_assert!((all - n as f64 * one).abs() <= 1e-9 * all.max(1.0));
    }

    #[test]
    fn fleet_json_round_trip(soc in 5.0..45.0f64, psi in 0.0..0.999f64, price in 0.01..1.0f64, rho in 0.0..1.0f64) {
        let mut f = replication();
        f.microgrids[0].batteries[0].soc_initial = soc;
        f.psi_req = psi;
        f.prices[3] = price;
        f.uncertainty.set_uniform_correlation(rho);
        let back = fleet_from_json(&fleet_to_json(&f), "prop").unwrap();
        prop_assert_eq!(back, f);
    }
}

/// Two-microgrid fleet over three periods built from sampled parameters.
fn random_fleet(demand: [f64; 2], p_max: f64, sigma: f64, price: f64, psi_req: f64, mode: Mode) -> FleetSpec {
    let mgs = demand
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            let mut mg = microgrid(&format!("m{k}"), vec![d, d * 1.2, d * 0.8]);
            let mut dg = unit("dg", 1.0, p_max, &[(p_max - 1.0, 0.12)]);
            dg.reserve_up_cost = 0.01;
            dg.reserve_dn_cost = 0.01;
            mg.units.push(dg);
            mg.batteries.push(battery("b"));
            mg
        })
        .collect();
    let mut f = fleet(mgs, vec![price, price * 1.5, price], psi_req, mode);
    for e in &mut f.uncertainty.microgrids {
        e.demand_sigma = absolute(vec![sigma; 3]);
    }
    finish(f)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn small_fleets_schedule_consistently(
        d0 in 3.0..8.0f64, d1 in 3.0..8.0f64, p_max in 10.0..15.0f64,
        sigma in 0.2..1.5f64, price in 0.05..0.3f64,
    ) {
        let gap = 1e-5;
        let mut costs = Vec::new();
        for psi in [0.5, 0.8, 0.95] {
            let net = random_fleet([d0, d1], p_max, sigma, price, psi, Mode::Networked);
            let s = solve_schedule(&net, gap, None).unwrap();
            let a = audit_schedule(&s, &net);
            prop_assert!(a.is_clean(1e-6), "{:?}", a);
            let ind = solve_independent_set(&net, gap, None).unwrap();
            let slack = gap * (s.cost.total.abs() + ind.total_cost.abs()) + 1e-9;
            prop_assert!(s.cost.total <= ind.total_cost + slack, "{} > {}", s.cost.total, ind.total_cost);
            costs.push(s.cost.total);
        }
        for w in costs.windows(2) {
            prop_assert!(w[0] <= w[1] + gap * (w[0].abs() + w[1].abs()) + 1e-9, "{:?}", costs);
        }
    }
}
