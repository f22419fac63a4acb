mod common;

use common::*;
use nmg_core::milp::{HighsBackend, RowSense};
use nmg_core::scheduler::{fleet_pwl, PsiEncoding};
use nmg_core::{build_milp, solve_independent_set, solve_schedule, FleetSpec, Mode, ScheduleError};

const GAP: f64 = 1e-4;

/// One microgrid with a single unit and one battery over `n_t` periods.
fn small(n_t: usize, psi_req: f64, mode: Mode, n_mg: usize) -> FleetSpec {
    let mgs = (0..n_mg)
        .map(|k| {
            let mut mg = microgrid(&format!("m{k}"), vec![6.0; n_t]);
            mg.units.push(unit("dg", 1.0, 10.0, &[(4.0, 0.1), (5.0, 0.2)]));
            mg.batteries.push(battery("b"));
            mg
        })
        .collect();
    let mut f = fleet(mgs, vec![0.15; n_t], psi_req, mode);
    for e in &mut f.uncertainty.microgrids {
        e.demand_sigma = absolute(vec![1.0; n_t]);
    }
    finish(f)
}

#[test]
fn variable_and_row_census() {
    for (n_t, n_mg, mode, psi_req) in [
        (24, 1, Mode::Independent, 0.9),
        (4, 2, Mode::Independent, 0.9),
        (4, 3, Mode::Networked, 0.9),
        (4, 3, Mode::Networked, 0.0),
    ] {
        let f = small(n_t, psi_req, mode, n_mg);
        let pwl = fleet_pwl(&f).unwrap();
        let built = build_milp(&f, &pwl).unwrap();
        let m = &built.model;

        let islands = if mode == Mode::Networked { 1 } else { n_mg };
        let k = f.pwl.segments + 2;
        let blocks = 2;
        let linearized = if psi_req > 0.0 { islands * n_t } else { 0 };

        let vars = n_mg * n_t * ((5 + blocks) + 8 + 1) + linearized * (5 + 4 * k);
        let rows = n_mg * n_t * (8 + 9) + islands * n_t + linearized * (4 + 2 * (2 * k + 3));
        let bins = n_mg * n_t * (1 + 2) + linearized * 2 * k;
        assert_eq!(m.variables().len(), vars, "{n_mg} {mode:?} {psi_req}");
        assert_eq!(m.constraints().len(), rows, "{n_mg} {mode:?} {psi_req}");
        assert_eq!(m.num_binaries(), bins, "{n_mg} {mode:?} {psi_req}");

        let pcc = m.variables().iter().filter(|v| v.name.starts_with("pcc_")).count();
        let bal = m.constraints().iter().filter(|c| c.name.starts_with("bal_")).count();
        assert_eq!(pcc, n_mg * n_t);
        assert_eq!(bal, islands * n_t);
        assert!(m.constraints().iter().filter(|c| c.name.starts_with("bal_")).all(|c| c.sense == RowSense::Eq));
        for island in &built.map.islands {
            assert!(island.psi.iter().all(|p| match p {
                PsiEncoding::Dropped => psi_req == 0.0,
                PsiEncoding::Linearized(v) => v.sel_up.len() == k && v.sel_lo.len() == k,
                PsiEncoding::Deterministic => false,
            }));
        }
    }
}

#[test]
fn zero_requirement_has_no_selection_binaries() {
    let f = small(3, 0.0, Mode::Networked, 2);
    let built = build_milp(&f, &fleet_pwl(&f).unwrap()).unwrap();
    assert!(!built.model.variables().iter().any(|v| v.name.starts_with("bu_") || v.name.starts_with("bl_")));
    assert!(!built.model.constraints().iter().any(|c| c.name.starts_with("psir_")));
}

#[test]
fn min_time_rows_follow_history() {
    let mut f = small(6, 0.0, Mode::Independent, 1);
    let u = &mut f.microgrids[0].units[0];
    u.min_up = 3;
    u.min_down = 2;
    u.initial_on_periods = 1;
    u.initial_off_periods = 0;
    u.initial_power = 5.0;
    let built = build_milp(&f, &fleet_pwl(&f).unwrap()).unwrap();
    let m = &built.model;
    // two more periods on before the unit may stop
    let upi = m.constraint_by_name("upi_m0_dg").unwrap();
    assert_eq!((upi.terms.len(), upi.rhs), (2, 2.0));
    assert!(m.constraint_by_name("dni_m0_dg").is_none());
    assert_eq!(m.constraints().iter().filter(|c| c.name.starts_with("up_m0_dg_")).count(), 4);
    assert_eq!(m.constraints().iter().filter(|c| c.name.starts_with("dn_m0_dg_")).count(), 6);
}

fn price_case(price: f64) -> FleetSpec {
    let mut mg = microgrid("m", vec![4.0]);
    let mut dg = unit("dg", 0.0, 10.0, &[(10.0, 10.0)]);
    dg.no_load_cost = 0.5;
    mg.units.push(dg);
    // no export, otherwise a dear grid makes selling DG output profitable
    mg.pcc_export_max = Some(0.0);
    fleet(vec![mg], vec![price], 0.0, Mode::Independent)
}

#[test]
fn cheap_grid_imports_dear_grid_self_supplies() {
    let s = solve_schedule(&price_case(5.0), GAP, None).unwrap();
    assert!((s.microgrids[0].pcc[0] - 4.0).abs() < 1e-6);
    assert!((s.cost.total - 20.0).abs() < 1e-6, "{:?}", s.cost);

    let s = solve_schedule(&price_case(20.0), GAP, None).unwrap();
    assert!(s.microgrids[0].pcc[0].abs() < 1e-6);
    assert!((s.microgrids[0].units[0].power[0] - 4.0).abs() < 1e-6);
    assert!((s.cost.total - 40.5).abs() < 1e-6, "{:?}", s.cost);
}

#[test]
fn islanded_reserve_matches_normal_quantile() {
    let mut mg = microgrid("m", vec![4.0]);
    let mut dg = unit("dg", 0.0, 10.0, &[(10.0, 0.1)]);
    dg.reserve_up_cost = 0.01;
    dg.reserve_dn_cost = 0.01;
    mg.units.push(dg);
    mg.pcc_import_max = Some(0.0);
    mg.pcc_export_max = Some(0.0);
    let mut f = fleet(vec![mg], vec![0.1], 0.95, Mode::Independent);
    f.uncertainty.microgrids[0].demand_sigma = absolute(vec![1.0]);
    let f = finish(f);
    let s = solve_schedule(&f, GAP, None).unwrap();
    let u = &s.microgrids[0].units[0];
    assert!((u.reserve_up[0] - 1.96).abs() <= 0.05, "R_up {}", u.reserve_up[0]);
    assert!((u.reserve_dn[0] - 1.96).abs() <= 0.05, "R_dn {}", u.reserve_dn[0]);
    assert!(s.islands[0].model_psi[0] >= 0.95 - 1e-6);
}

#[test]
fn single_microgrid_independent_set_matches_direct_solve() {
    let f = replication().single(0);
    let direct = solve_schedule(&f, GAP, None).unwrap();
    let set = solve_independent_set(&f, GAP, None).unwrap();
    assert_eq!(set.schedules.len(), 1);
    assert!((set.total_cost - direct.cost.total).abs() <= 1e-6 * direct.cost.total.abs().max(1.0));
}

#[test]
fn identical_microgrids_have_identical_costs() {
    let f = replication();
    let set = solve_independent_set(&f, 1e-3, None).unwrap();
    let c0 = set.schedules[0].cost.total;
    for s in &set.schedules[1..] {
        assert!((s.cost.total - c0).abs() <= 2e-3 * c0.abs(), "{} vs {c0}", s.cost.total);
    }
    let net = solve_schedule(&with_mode(&f, Mode::Networked, f.psi_req), 1e-3, None).unwrap();
    assert!(net.cost.total <= set.total_cost + 1e-3 * (net.cost.total + set.total_cost));
}

#[test]
fn psi_limited_problem_is_infeasible_with_hint() {
    let mut f = small(3, 0.95, Mode::Independent, 1);
    f.microgrids[0].pcc_import_max = Some(0.0);
    f.microgrids[0].pcc_export_max = Some(0.0);
    f.uncertainty.microgrids[0].demand_sigma = absolute(vec![50.0; 3]);
    let err = solve_schedule(&finish(f), GAP, None).unwrap_err();
    assert!(err.is_infeasible(), "{err}");
    let msg = err.to_string();
    assert!(msg.contains("period 1") && msg.contains("sigma_t"), "{msg}");
}

#[test]
fn requirement_at_cap_is_unreachable() {
    let mut f = small(2, 0.5, Mode::Independent, 1);
    f.psi_req = 0.99995;
    let pwl = fleet_pwl(&f).unwrap();
    assert!(matches!(build_milp(&f, &pwl), Err(ScheduleError::PsiUnreachable { .. })));
    assert!(matches!(solve_schedule(&f, GAP, None), Err(ScheduleError::InvalidFleet(_))));
    f.microgrids.clear();
    assert!(matches!(build_milp(&f, &pwl), Err(ScheduleError::EmptyFleet)));
}

#[test]
fn replication_schedule_identities() {
    let f = with_mode(&replication(), Mode::Networked, 0.95);
    let s = solve_schedule(&f, 1e-3, None).unwrap();
    let n_t = f.periods();
    for (spec, mg) in f.microgrids.iter().zip(&s.microgrids) {
        for (b, bs) in spec.batteries.iter().zip(&mg.batteries) {
            let flow: f64 = (0..n_t).map(|t| (b.eta_c * bs.p_charge[t] - bs.p_discharge[t] / b.eta_d) * f.dt).sum();
            let drift = bs.soc[n_t - 1] - b.soc_initial - flow;
            assert!(drift.abs() <= 1e-9 * n_t as f64 * b.soc_max, "SOC drift {drift}");
            assert!(bs.soc[n_t - 1] >= b.soc_terminal_min.unwrap() - 1e-9);
        }
    }
    for t in 0..n_t {
        let supply: f64 = s
            .microgrids
            .iter()
            .map(|mg| {
                mg.pcc[t] + mg.units.iter().map(|u| u.power[t]).sum::<f64>()
                    + mg.batteries.iter().map(|b| b.power[t]).sum::<f64>()
            })
            .sum();
        let net: f64 = f
            .microgrids
            .iter()
            .map(|m| m.demand_forecast[t] - m.wind_forecast[t] - m.pv_forecast[t])
            .sum();
        assert!((supply - net).abs() <= 1e-6 * net.abs().max(1.0), "t={t}: {supply} vs {net}");
        assert!(s.islands[0].model_psi[t] >= f.psi_req - 1e-6);
    }
    let sum: f64 = s.cost.categories().iter().map(|(_, v)| v).sum();
    assert!((sum - s.cost.total).abs() < 1e-9);
    assert!((s.cost.total - s.objective).abs() <= 1e-6 * s.objective.abs());
}

#[test]
fn schedule_csv_layout() {
    let s = solve_schedule(&price_case(5.0), GAP, None).unwrap();
    let mut buf = Vec::new();
    s.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,mg,var_kind,id,value"));
    assert!(text.contains("1,m,p_pcc,m,4.000000"), "{text}");
    let mut buf = Vec::new();
    s.write_cost_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("category,dollars\n"));
    assert!(text.contains("total,20.000000"), "{text}");
}

#[test]
fn backend_choice_does_not_change_the_optimum() {
    let f = small(4, 0.9, Mode::Networked, 2);
    let opts = nmg_core::SolveOptions { rel_gap: 1e-6, time_limit: None };
    let a = nmg_core::scheduler::solve_schedule_with(&f, &HighsBackend, &opts).unwrap();
    let b = nmg_core::scheduler::solve_schedule_with(&f, &nmg_core::milp::HighsMpsBackend, &opts).unwrap();
    assert!((a.cost.total - b.cost.total).abs() <= 1e-5 * a.cost.total.abs().max(1.0));
}
