mod common;

use common::*;
use nmg_core::uncertainty::{psi_exact, PeriodError};
use nmg_core::{audit_schedule, estimate_psi, solve_schedule, FleetSpec, Mode, Schedule};

/// One islanded microgrid, one unit, one battery, unit-sigma demand error.
fn case(n_t: usize, sigma: f64) -> (FleetSpec, Schedule) {
    let mut mg = microgrid("m", vec![5.0; n_t]);
    let mut dg = unit("dg", 1.0, 10.0, &[(4.0, 0.1), (5.0, 0.2)]);
    dg.min_up = 2;
    dg.reserve_up_cost = 0.01;
    dg.reserve_dn_cost = 0.01;
    mg.units.push(dg);
    mg.batteries.push(battery("b"));
    let mut f = fleet(vec![mg], vec![0.1; n_t], 0.9, Mode::Independent);
    f.uncertainty.microgrids[0].demand_sigma = absolute(vec![sigma; n_t]);
    let f = finish(f);
    let s = solve_schedule(&f, 1e-4, None).unwrap();
    (f, s)
}

/// Replaces the islanding window of every period by `[-dn - pcc, up - pcc]`.
fn set_window(s: &mut Schedule, up: f64, dn: f64, pcc: f64) {
    let mg = &mut s.microgrids[0];
    mg.pcc.iter_mut().for_each(|p| *p = pcc);
    for u in &mut mg.units {
        u.reserve_up.iter_mut().for_each(|r| *r = up);
        u.reserve_dn.iter_mut().for_each(|r| *r = dn);
    }
    for b in &mut mg.batteries {
        b.reserve_up.iter_mut().for_each(|r| *r = 0.0);
        b.reserve_dn.iter_mut().for_each(|r| *r = 0.0);
    }
}

#[test]
fn symmetric_quantile_window_covers_ninety_five_percent() {
    let (f, mut s) = case(2, 1.0);
    set_window(&mut s, 1.959964, 1.959964, 0.0);
    let reports = estimate_psi(&s, &f, 1_000_000, 7).unwrap();
    assert_eq!(reports.len(), 1);
    for p in &reports[0].periods {
        assert!((p.empirical_psi - 0.95).abs() <= 0.001, "{}", p.empirical_psi);
        assert!((p.exact_psi - 0.95).abs() < 1e-6);
        let direct = psi_exact(1.959964, 1.959964, 0.0, PeriodError { mu: 0.0, sigma: 1.0 });
        assert!((p.exact_psi - direct).abs() <= 1e-12);
        assert!(p.pass);
        assert!((p.ci_halfwidth - 2.5758 * (0.95f64 * 0.05 / 1e6).sqrt()).abs() < 1e-6);
    }
    assert!(reports[0].passed());
}

#[test]
fn shifted_window_uses_pcc() {
    let (f, mut s) = case(1, 1.0);
    // window [-1 - 1, 3 - 1] = [-2, 2]
    set_window(&mut s, 3.0, 1.0, 1.0);
    let r = &estimate_psi(&s, &f, 200_000, 1).unwrap()[0].periods[0];
    assert_eq!((r.lower, r.upper), (-2.0, 2.0));
    assert!((r.exact_psi - 0.954_499_736).abs() < 1e-8);
    assert!((r.empirical_psi - r.exact_psi).abs() < 3.0 * r.ci_halfwidth);
}

#[test]
fn zero_reserves_give_zero_and_no_error_gives_one() {
    let (f, mut s) = case(2, 1.0);
    set_window(&mut s, 0.0, 0.0, 0.0);
    let r = &estimate_psi(&s, &f, 100_000, 3).unwrap()[0];
    assert!(r.min_empirical() <= 1e-4);
    assert_eq!(r.min_exact(), 0.0);
    assert!(!r.passed());

    let (f, mut s) = case(2, 0.0);
    set_window(&mut s, 0.0, 0.0, 0.0);
    let r = &estimate_psi(&s, &f, 1000, 3).unwrap()[0];
    assert!(r.periods.iter().all(|p| p.empirical_psi == 1.0 && p.exact_psi == 1.0));
}

#[test]
fn solved_schedule_meets_requirement() {
    let (f, s) = case(4, 1.0);
    let r = &estimate_psi(&s, &f, 200_000, 42).unwrap()[0];
    assert!(r.passed(), "{r:?}");
    assert!(r.min_model() >= 0.9 - 1e-6);
    assert!(r.max_model_error() <= 2.0 * nmg_core::build_pwl_cdf(32, 4.0).unwrap().error_bound());
    let mut buf = Vec::new();
    r.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("t,model_psi,exact_psi,empirical_psi,ci_halfwidth,pass\n1,"), "{text}");
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn estimates_depend_only_on_seed() {
    let (f, s) = case(3, 1.0);
    let a = estimate_psi(&s, &f, 20_000, 5).unwrap();
    let b = estimate_psi(&s, &f, 20_000, 5).unwrap();
    let c = estimate_psi(&s, &f, 20_000, 6).unwrap();
    assert_eq!(a, b);
    assert_ne!(
        a[0].periods.iter().map(|p| p.empirical_psi).collect::<Vec<_>>(),
        c[0].periods.iter().map(|p| p.empirical_psi).collect::<Vec<_>>()
    );
}

#[test]
fn audit_of_solved_schedule_is_clean() {
    let (f, s) = case(4, 1.0);
    let a = audit_schedule(&s, &f);
    assert!(a.is_clean(1e-6), "{a:?}");
    assert!(!a.families.contains_key("ramp"));

    let f = with_mode(&replication(), Mode::Networked, 0.95);
    let s = solve_schedule(&f, 1e-3, None).unwrap();
    let a = audit_schedule(&s, &f);
    assert!(a.is_clean(1e-6), "{a:?}");
    assert_eq!(a.families.len(), 16);
}

#[test]
fn audit_flags_injected_faults() {
    let (f, s) = case(4, 1.0);

    let mut bad = s.clone();
    bad.microgrids[0].batteries[0].soc[1] += 1.0;
    let a = audit_schedule(&bad, &f);
    assert!(a.flagged(1e-6).contains(&"soc_recursion"), "{a:?}");

    let mut bad = s.clone();
    let u = &mut bad.microgrids[0].units[0];
    let t = u.commitment.iter().position(|&c| c > 0.5).unwrap();
    u.commitment[t] = 0.0;
    let a = audit_schedule(&bad, &f);
    assert!(a.flagged(1e-6).contains(&"commit_window"), "{a:?}");

    let mut bad = s.clone();
    bad.microgrids[0].pcc[0] += 0.5;
    let a = audit_schedule(&bad, &f);
    assert_eq!(a.flagged(1e-6), vec!["energy_balance"]);

    let mut bad = s;
    bad.microgrids[0].batteries[0].charging[2] = 0.4;
    assert!((audit_schedule(&bad, &f).integrality - 0.4).abs() < 1e-12);
}

#[test]
fn audit_detects_min_time_breaches() {
    let (f, mut s) = case(4, 1.0);
    // min_up = 2 and initially off: a single on period is a breach
    let u = &mut s.microgrids[0].units[0];
    u.commitment = vec![0.0, 1.0, 0.0, 0.0];
    let a = audit_schedule(&s, &f);
    assert_eq!(a.min_time.len(), 1, "{:?}", a.min_time);
    assert_eq!((a.min_time[0].period, a.min_time[0].rule), (1, "min_up"));
    assert!(!a.is_clean(1.0));
}
