//! Monte Carlo check of the islanding probability and an independent
//! re-evaluation of every scheduling constraint.

mod audit;
mod sampler;

pub use audit::{audit_schedule, AuditReport, MinTimeViolation};
pub use sampler::{sample_net_errors, NetErrorSamples};

use std::io::{self, Write};

use rayon::prelude::*;

use crate::model::FleetSpec;
use crate::scheduler::Schedule;
use crate::uncertainty::{interval_probability, island_distribution, UncertaintyError};

use sampler::PeriodSampler;

/// Samples per period used by acceptance runs.
pub const DEFAULT_SAMPLES: usize = 1_000_000;
/// Samples per period for quick checks.
pub const QUICK_SAMPLES: usize = 10_000;
/// Shortfall of the empirical PSI below `psi_req` tolerated by the pass flag.
pub const PSI_TOLERANCE: f64 = 0.01;

/// 99 % two-sided normal quantile.
const Z99: f64 = 2.5758293035489;

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodCheck {
    /// Lower and upper edges of the reserve window, kW.
    pub lower: f64,
    pub upper: f64,
    pub mu: f64,
    pub sigma: f64,
    pub model_psi: f64,
    pub exact_psi: f64,
    pub empirical_psi: f64,
    /// Binomial 99 % half-width at the exact PSI.
    pub ci_halfwidth: f64,
    pub pass: bool,
}

/// Monte Carlo PSI of one island of a schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub island: String,
    pub psi_req: f64,
    pub samples: usize,
    pub seed: u64,
    pub periods: Vec<PeriodCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.periods.iter().all(|p| p.pass)
    }

    pub fn min_empirical(&self) -> f64 {
        self.periods.iter().map(|p| p.empirical_psi).fold(f64::INFINITY, f64::min)
    }

    pub fn min_exact(&self) -> f64 {
        self.periods.iter().map(|p| p.exact_psi).fold(f64::INFINITY, f64::min)
    }

    pub fn min_model(&self) -> f64 {
        self.periods.iter().map(|p| p.model_psi).fold(f64::INFINITY, f64::min)
    }

    /// Largest `|model − exact|` over the horizon.
    pub fn max_model_error(&self) -> f64 {
        self.periods
            .iter()
            .map(|p| (p.model_psi - p.exact_psi).abs())
            .fold(0.0, f64::max)
    }

    /// Writes `t,model_psi,exact_psi,empirical_psi,ci_halfwidth,pass`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,model_psi,exact_psi,empirical_psi,ci_halfwidth,pass")?;
        for (t, p) in self.periods.iter().enumerate() {
            writeln!(
                w,
                "{},{:.6},{:.6},{:.6},{:.6},{}",
                t + 1,
                p.model_psi,
                p.exact_psi,
                p.empirical_psi,
                p.ci_halfwidth,
                p.pass
            )?;
        }
        Ok(())
    }
}

/// Reserve window `(lower, upper)` of `members` in period `t`, read from the
/// device schedules.
fn window(schedule: &Schedule, members: &[usize], t: usize) -> (f64, f64) {
    let mut up = 0.0;
    let mut dn = 0.0;
    let mut pcc = 0.0;
    for &n in members {
        let mg = &schedule.microgrids[n];
        pcc += mg.pcc[t];
        up += mg.units.iter().map(|u| u.reserve_up[t]).sum::<f64>();
        up += mg.batteries.iter().map(|b| b.reserve_up[t]).sum::<f64>();
        dn += mg.units.iter().map(|u| u.reserve_dn[t]).sum::<f64>();
        dn += mg.batteries.iter().map(|b| b.reserve_dn[t]).sum::<f64>();
    }
    (-dn - pcc, up - pcc)
}

/// Estimates the per-period PSI of every island of `schedule` from `n`
/// correlated draws per period.
///
/// `fleet` must be the fleet the schedule was solved for. The result is a
/// function of `seed` alone; periods are sampled in parallel.
pub fn estimate_psi(
    schedule: &Schedule,
    fleet: &FleetSpec,
    n: usize,
    seed: u64,
) -> Result<Vec<ValidationReport>, UncertaintyError> {
    let n = n.max(1);
    schedule
        .islands
        .iter()
        .map(|island| {
            let dist = island_distribution(fleet, &island.members)?;
            let periods = (0..schedule.periods())
                .into_par_iter()
                .map(|t| {
                    let (lower, upper) = window(schedule, &island.members, t);
                    let e = dist.at(t);
                    let mut sampler = PeriodSampler::new(fleet, &island.members, t, seed)?;
                    let mut row = vec![0.0; island.members.len()];
                    let mut hits = 0usize;
                    for _ in 0..n {
                        let x = sampler.draw(&mut row);
                        if lower <= x && x <= upper {
                            hits += 1;
                        }
                    }
                    let empirical = hits as f64 / n as f64;
                    let exact = interval_probability(lower, upper, e.mu, e.sigma);
                    Ok(PeriodCheck {
                        lower,
                        upper,
                        mu: e.mu,
                        sigma: e.sigma,
                        model_psi: island.model_psi[t],
                        exact_psi: exact,
                        empirical_psi: empirical,
                        ci_halfwidth: Z99 * (exact * (1.0 - exact) / n as f64).sqrt(),
                        pass: empirical >= schedule.psi_req - PSI_TOLERANCE,
                    })
                })
                .collect::<Result<Vec<_>, UncertaintyError>>()?;
            Ok(ValidationReport {
                island: island.label.clone(),
                psi_req: schedule.psi_req,
                samples: n,
                seed,
                periods,
            })
        })
        .collect()
}
