//! Day-ahead scheduling of single and networked microgrids under a
//! probability-of-successful-islanding (PSI) requirement.
//!
//! A [`FleetSpec`] describes the microgrids, their forecasts and the Gaussian
//! forecast-error model. [`solve_schedule`] builds and solves the
//! chance-constrained MILP and returns a [`Schedule`];
//! [`validation::estimate_psi`] checks the scheduled reserve windows against
//! Monte Carlo draws of the net demand error.
//!
//! ```no_run
//! use nmg_core::{load_fleet, solve_schedule, validation};
//!
//! let fleet = load_fleet("fixtures/replication_3mg.json").unwrap();
//! let schedule = solve_schedule(&fleet, 1e-3, None).unwrap();
//! let reports = validation::estimate_psi(&schedule, &fleet, 10_000, 7).unwrap();
//! println!("cost {:.2}, min PSI {:.4}", schedule.cost.total, reports[0].min_empirical());
//! ```

pub mod milp;
pub mod model;
pub mod scheduler;
pub mod uncertainty;
pub mod validation;

pub use milp::{MilpModel, MilpSolution, SolveOptions, SolveStatus};
pub use model::{
    fleet_from_json, fleet_to_json, load_fleet, save_fleet, validate_fleet, BatterySpec, ConfigError,
    DispatchableUnit, FleetSpec, MicrogridSpec, Mode, OfferBlock, PwlSettings, Violation,
};
pub use scheduler::{
    build_milp, solve_independent_set, solve_schedule, CostBreakdown, IndependentSet, Schedule, ScheduleError,
};
pub use uncertainty::{
    aggregate_sigma, build_pwl_cdf, net_error_distribution, phi, psi_exact, NetErrorDistribution, PwlCdf,
    SigmaSpec, UncertaintyModel,
};
pub use validation::{audit_schedule, estimate_psi, AuditReport, ValidationReport};
