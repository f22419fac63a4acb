mod common;

use nmg_core::milp::{
    backend_by_name, check_solution, write_mps, HighsBackend, HighsMpsBackend, MilpBackend, MilpError, MilpModel,
    RowSense, SolveOptions, SolveStatus, VarKind,
};
use nmg_core::scheduler::fleet_pwl;
use nmg_core::{build_milp, Mode};

fn backends() -> [Box<dyn MilpBackend>; 2] {
    [Box::new(HighsBackend), Box::new(HighsMpsBackend)]
}

#[test]
fn builder_basics() {
    let mut m = MilpModel::new();
    let b = m.add_binary("b").unwrap();
    assert_eq!(m.variables().len(), 1);
    assert_eq!((m.variable(b).lb, m.variable(b).ub, m.variable(b).kind), (0.0, 1.0, VarKind::Binary));
    assert!(matches!(m.add_binary("b"), Err(MilpError::DuplicateVariable(_))));
    assert!(matches!(m.add_variable("c", 0.0, 2.0, VarKind::Binary), Err(MilpError::BadBounds { .. })));

    let mut other = MilpModel::new();
    other.add_binary("x").unwrap();
    let stranger = other.add_binary("y").unwrap();
    assert!(matches!(
        m.add_constraint("r", vec![(stranger, 1.0)], RowSense::Le, 1.0),
        Err(MilpError::UnknownVariable { .. })
    ));
    assert!(matches!(m.add_constraint("r", vec![(b, f64::NAN)], RowSense::Le, 1.0), Err(MilpError::NonFinite(_))));
    m.add_constraint("r", vec![(b, 1.0), (b, 2.0)], RowSense::Le, 1.0).unwrap();
    assert_eq!(m.constraints()[0].terms, vec![(b, 3.0)]);
    assert!(matches!(m.add_constraint("r", vec![], RowSense::Le, 1.0), Err(MilpError::DuplicateConstraint(_))));
}

#[test]
fn single_bound_lp() {
    for backend in backends() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, 10.0).unwrap();
        m.add_constraint("lo", vec![(x, 1.0)], RowSense::Ge, 2.0).unwrap();
        m.set_objective(vec![(x, 1.0)]).unwrap();
        let sol = backend.solve(&m, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal, "{}", backend.name());
        assert!((sol.objective - 2.0).abs() < 1e-9);
        assert!((sol.value(x).unwrap() - 2.0).abs() < 1e-9);
    }
}

#[test]
fn infeasible_is_reported() {
    for backend in backends() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", f64::NEG_INFINITY, f64::INFINITY).unwrap();
        m.add_constraint("a", vec![(x, 1.0)], RowSense::Ge, 1.0).unwrap();
        m.add_constraint("b", vec![(x, 1.0)], RowSense::Le, 0.0).unwrap();
        let sol = backend.solve(&m, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible, "{}", backend.name());
        assert!(sol.values.is_none());
    }
}

#[test]
fn knapsack() {
    for backend in backends() {
        let mut m = MilpModel::new();
        let a = m.add_binary("a").unwrap();
        let b = m.add_binary("b").unwrap();
        m.add_constraint("cap", vec![(a, 1.0), (b, 1.0)], RowSense::Le, 1.0).unwrap();
        m.set_objective(vec![(a, -3.0), (b, -2.0)]).unwrap();
        let sol = backend.solve(&m, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective + 3.0).abs() < 1e-9);
        assert_eq!(sol.value(a).unwrap().round(), 1.0);
        assert_eq!(sol.value(b).unwrap().round(), 0.0);
    }
}

#[test]
fn fixed_variable() {
    let mut m = MilpModel::new();
    let x = m.add_continuous("fixed_long_name", 3.0, 3.0).unwrap();
    let y = m.add_continuous("y", 0.0, 5.0).unwrap();
    m.add_constraint("sum", vec![(x, 1.0), (y, 1.0)], RowSense::Ge, 4.5).unwrap();
    m.set_objective(vec![(y, 1.0)]).unwrap();
    for backend in backends() {
        let sol = backend.solve(&m, &SolveOptions::default()).unwrap();
        assert_eq!(sol.value(x).unwrap(), 3.0);
        assert_eq!(sol.value_by_name(&m, "y").map(|v| (v * 1e6).round() / 1e6), Some(1.5));
    }
}

#[test]
fn unknown_backend() {
    assert!(matches!(backend_by_name("cplex"), Err(MilpError::Unavailable(_))));
    assert!(HighsBackend.solve(&MilpModel::new(), &SolveOptions { rel_gap: -1.0, time_limit: None }).is_err());
}

#[test]
fn mps_file_has_markers_and_sidecar() {
    let mut m = MilpModel::new();
    let a = m.add_binary("a_binary_with_a_long_name").unwrap();
    let x = m.add_continuous("x", 0.0, f64::INFINITY).unwrap();
    m.add_constraint("link", vec![(x, 1.0), (a, -4.0)], RowSense::Le, 0.0).unwrap();
    m.set_objective(vec![(x, -1.0), (a, 0.5)]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.mps");
    let names = write_mps(&m, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    for section in ["NAME", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA", "'INTORG'", "'INTEND'"] {
        assert!(text.contains(section), "missing {section}:\n{text}");
    }
    assert!(names.columns[0].len() <= 8);
    let sidecar = std::fs::read_to_string(dir.path().join("m.mps.names.csv")).unwrap();
    assert!(sidecar.contains("a_binary_with_a_long_name"));
}

#[test]
fn unwritable_mps_path() {
    let m = MilpModel::new();
    assert!(matches!(write_mps(&m, "/nonexistent/dir/m.mps"), Err(MilpError::Io { .. })));
}

#[test]
fn replication_instance_cross_solve() {
    let fleet = common::with_mode(&common::replication(), Mode::Networked, 0.95);
    let built = build_milp(&fleet, &fleet_pwl(&fleet).unwrap()).unwrap();
    let opts = SolveOptions { rel_gap: 1e-3, time_limit: None };
    let direct = HighsBackend.solve(&built.model, &opts).unwrap();
    let via_mps = HighsMpsBackend.solve(&built.model, &opts).unwrap();
    assert!(direct.status.has_solution() && via_mps.status.has_solution());
    let slack = 1e-6 * direct.objective.abs().max(1.0) + opts.rel_gap * direct.objective.abs().max(via_mps.objective.abs());
    assert!(
        (direct.objective - via_mps.objective).abs() <= slack,
        "{} vs {}",
        direct.objective,
        via_mps.objective
    );
    for sol in [&direct, &via_mps] {
        let res = check_solution(&built.model, sol.values.as_ref().unwrap());
        assert!(res.within(1e-6), "{res:?}");
        assert!(sol.gap <= opts.rel_gap + 1e-12);
    }
}
