//! Chance-constrained day-ahead scheduling.
//!
//! [`build_milp`] turns a fleet into a MILP whose objective is the total
//! operating cost (block energy, no-load, start-up, grid exchange, battery
//! degradation and reserve capacity) and whose islanding requirement
//! `PSI_t ≥ psi_req` is embedded through a piecewise-linear normal CDF.
//! [`solve_schedule`] solves and decodes it into a [`Schedule`];
//! [`solve_independent_set`] solves every microgrid on its own.

mod build;
mod schedule;

pub use build::{
    build_milp, islands_of, BatteryVars, BuiltModel, DecodeMap, IslandVars, MicrogridVars,
    PsiEncoding, PsiVars, UnitVars, SIGMA_FLOOR,
};
pub use schedule::{
    BatterySchedule, CostBreakdown, IslandSchedule, MicrogridSchedule, Schedule, UnitSchedule,
};

use thiserror::Error;

use crate::milp::{backend_from_env, MilpBackend, MilpError, SolveOptions, SolveStatus};
use crate::model::{validate_fleet, FleetSpec, Violation};
use crate::uncertainty::{build_pwl_cdf, psi_exact, PwlCdf, UncertaintyError};

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("fleet has no microgrids")]
    EmptyFleet,
    #[error("invalid fleet: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidFleet(Vec<Violation>),
    #[error("psi_req = {psi_req} is not below the representable cap {cap:.6}")]
    PsiUnreachable { psi_req: f64, cap: f64 },
    #[error("scheduling problem is infeasible: {hint}")]
    Infeasible { hint: String },
    #[error("scheduling problem is unbounded")]
    Unbounded,
    #[error("solver finished with status `{0}`")]
    SolverStatus(SolveStatus),
    #[error("reconstructed cost {reconstructed} disagrees with solver objective {objective}")]
    CostMismatch { reconstructed: f64, objective: f64 },
    #[error("microgrid `{id}`: {source}")]
    Microgrid {
        id: String,
        #[source]
        source: Box<ScheduleError>,
    },
    #[error(transparent)]
    Milp(#[from] MilpError),
    #[error(transparent)]
    Uncertainty(#[from] UncertaintyError),
}

impl ScheduleError {
    pub fn is_infeasible(&self) -> bool {
        match self {
            ScheduleError::Infeasible { .. } => true,
            ScheduleError::Microgrid { source, .. } => source.is_infeasible(),
            _ => false,
        }
    }
}

/// The PWL approximation configured for `fleet`.
pub fn fleet_pwl(fleet: &FleetSpec) -> Result<PwlCdf, ScheduleError> {
    Ok(build_pwl_cdf(fleet.pwl.segments, fleet.pwl.z_max)?)
}

/// Explains an infeasible solve: the first period whose PSI cannot reach the
/// requirement even with every reserve at its cap and the PCC exchange at its
/// most favorable value.
fn infeasibility_hint(fleet: &FleetSpec, built: &BuiltModel) -> String {
    let tau = fleet.tau;
    for island in &built.map.islands {
        let (mut ru, mut rd, mut imp, mut exp) = (0.0, 0.0, 0.0, 0.0);
        for &n in &island.members {
            let mg = &fleet.microgrids[n];
            ru += mg.units.iter().map(|u| u.reserve_up_cap(tau)).sum::<f64>()
                + mg.batteries.iter().map(|b| b.reserve_up_cap(tau)).sum::<f64>();
            rd += mg.units.iter().map(|u| u.reserve_dn_cap(tau)).sum::<f64>()
                + mg.batteries.iter().map(|b| b.reserve_dn_cap(tau)).sum::<f64>();
            imp += mg.import_max();
            exp += mg.export_max();
        }
        for (t, period) in island.dist.periods.iter().enumerate() {
            // centre the reserve window on the mean error
            let p = ((ru - rd) / 2.0 - period.mu).clamp(-exp, imp);
            let best = psi_exact(ru, rd, p, *period);
            if best < fleet.psi_req {
                return format!(
                    "island `{}` period {}: PSI constraint binds at sigma_t = {:.4} kW; with all reserves maxed \
                     (up {ru:.3} kW, down {rd:.3} kW) PSI reaches only {best:.6} < {}",
                    island.label,
                    t + 1,
                    period.sigma,
                    fleet.psi_req
                );
            }
        }
    }
    "no single period is PSI-limited; energy, SOC or commitment constraints conflict".to_string()
}

/// Builds, solves and decodes the fleet with an explicit backend.
pub fn solve_schedule_with(
    fleet: &FleetSpec,
    backend: &dyn MilpBackend,
    opts: &SolveOptions,
) -> Result<Schedule, ScheduleError> {
    let violations = validate_fleet(fleet);
    if !violations.is_empty() {
        return Err(ScheduleError::InvalidFleet(violations));
    }
    let pwl = fleet_pwl(fleet)?;
    let built = build_milp(fleet, &pwl)?;
    let sol = backend.solve(&built.model, opts)?;
    match sol.status {
        SolveStatus::Optimal | SolveStatus::FeasibleGap => {}
        SolveStatus::Infeasible => {
            return Err(ScheduleError::Infeasible {
                hint: infeasibility_hint(fleet, &built),
            })
        }
        SolveStatus::Unbounded => return Err(ScheduleError::Unbounded),
        SolveStatus::Error => return Err(ScheduleError::SolverStatus(sol.status)),
    }
    let schedule = Schedule::decode(fleet, &built, &sol, &pwl);
    let slack = 1e-6 * schedule.objective.abs().max(1.0) + sol.gap.max(opts.rel_gap) * schedule.objective.abs();
    if (schedule.cost.total - schedule.objective).abs() > slack {
        return Err(ScheduleError::CostMismatch {
            reconstructed: schedule.cost.total,
            objective: schedule.objective,
        });
    }
    Ok(schedule)
}

/// Solves the fleet in its configured mode with the environment-selected
/// backend.
pub fn solve_schedule(fleet: &FleetSpec, gap: f64, time_limit: Option<f64>) -> Result<Schedule, ScheduleError> {
    let backend = backend_from_env()?;
    solve_schedule_with(fleet, backend.as_ref(), &SolveOptions { rel_gap: gap, time_limit })
}

/// Schedules of every microgrid solved in isolation.
#[derive(Debug, Clone)]
pub struct IndependentSet {
    pub schedules: Vec<Schedule>,
    pub total_cost: f64,
}

pub fn solve_independent_set_with(
    fleet: &FleetSpec,
    backend: &dyn MilpBackend,
    opts: &SolveOptions,
) -> Result<IndependentSet, ScheduleError> {
    if fleet.microgrids.is_empty() {
        return Err(ScheduleError::EmptyFleet);
    }
    let mut schedules = Vec::with_capacity(fleet.microgrids.len());
    for n in 0..fleet.microgrids.len() {
        let single = fleet.single(n);
        let schedule = solve_schedule_with(&single, backend, opts).map_err(|e| ScheduleError::Microgrid {
            id: fleet.microgrids[n].id.clone(),
            source: Box::new(e),
        })?;
        schedules.push(schedule);
    }
    let total_cost = schedules.iter().map(|s| s.cost.total).sum();
    Ok(IndependentSet { schedules, total_cost })
}

/// Solves every microgrid on its own with its own PSI constraint; the fleet
/// mode is ignored.
pub fn solve_independent_set(
    fleet: &FleetSpec,
    gap: f64,
    time_limit: Option<f64>,
) -> Result<IndependentSet, ScheduleError> {
    let backend = backend_from_env()?;
    solve_independent_set_with(fleet, backend.as_ref(), &SolveOptions { rel_gap: gap, time_limit })
}
