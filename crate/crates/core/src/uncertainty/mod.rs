//! Gaussian forecast-error model for wind, PV and demand, and the
//! probability of successful islanding (PSI) built on top of it.
//!
//! The net demand error of an island is `ΔN = ΔD − ΔW − ΔPV`. Within one
//! microgrid the three sources are independent; across microgrids each source
//! carries its own correlation matrix. The PSI of a period is the probability
//! that `ΔN` falls inside the window the scheduled reserves can absorb after
//! the PCC exchange is lost:
//!
//! ```text
//! L = −ΣR_down − P_pcc  ≤  ΔN  ≤  ΣR_up − P_pcc = U
//! ```

mod correlation;
mod normal;
mod pwl;

pub use correlation::{
    aggregate_sigma, check_correlation, restrict, semidefinite_cholesky, uniform_correlation,
};
pub use normal::{density, interval_probability, phi};
pub use pwl::{build_pwl_cdf, PwlCdf, PwlInterval};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{FleetSpec, MicrogridSpec, Mode};

#[derive(Debug, Error, PartialEq)]
pub enum UncertaintyError {
    #[error("{what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("correlation entry ({row}, {col}) = {value} is outside [-1, 1]")]
    OutOfRange { row: usize, col: usize, value: f64 },
    #[error("correlation matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("correlation diagonal entry {index} is {value}, expected 1")]
    BadDiagonal { index: usize, value: f64 },
    #[error("correlation matrix is not positive semidefinite (pivot {pivot} = {value:.3e})")]
    NotPsd { pivot: usize, value: f64 },
    #[error("standard deviation must be finite and nonnegative, got {0}")]
    NegativeSigma(f64),
    #[error("independent mode needs a microgrid id")]
    MissingMicrogrid,
    #[error("unknown microgrid `{0}`")]
    UnknownMicrogrid(String),
    #[error("invalid piecewise-linear CDF: {0}")]
    BadPwl(String),
}

/// Forecast error sources entering the net demand error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    Wind,
    Pv,
    Demand,
}

impl Source {
    pub const ALL: [Source; 3] = [Source::Wind, Source::Pv, Source::Demand];

    /// Sign with which the source error enters `ΔN`.
    pub fn sign(self) -> f64 {
        match self {
            Source::Demand => 1.0,
            Source::Wind | Source::Pv => -1.0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Source::Wind => 0,
            Source::Pv => 1,
            Source::Demand => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Source::Wind => "wind",
            Source::Pv => "pv",
            Source::Demand => "demand",
        }
    }

    fn forecast(self, mg: &MicrogridSpec) -> &[f64] {
        match self {
            Source::Wind => &mg.wind_forecast,
            Source::Pv => &mg.pv_forecast,
            Source::Demand => &mg.demand_forecast,
        }
    }
}

/// Standard deviation of one error source, either relative to its forecast or
/// as an absolute kW series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaSpec {
    Fraction(f64),
    Absolute(Vec<f64>),
}

impl Default for SigmaSpec {
    fn default() -> Self {
        SigmaSpec::Fraction(0.0)
    }
}

impl SigmaSpec {
    pub fn at(&self, forecast: &[f64], t: usize) -> f64 {
        match self {
            SigmaSpec::Fraction(f) => f * forecast.get(t).copied().unwrap_or(0.0),
            SigmaSpec::Absolute(series) => series.get(t).copied().unwrap_or(0.0),
        }
    }
}

/// Error parameters of one microgrid.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MicrogridErrors {
    #[serde(default)]
    pub wind_sigma: SigmaSpec,
    #[serde(default)]
    pub pv_sigma: SigmaSpec,
    #[serde(default)]
    pub demand_sigma: SigmaSpec,
    /// Mean error series, kW; zero when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wind_mean: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pv_mean: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demand_mean: Option<Vec<f64>>,
}

impl MicrogridErrors {
    pub fn sigma_spec(&self, source: Source) -> &SigmaSpec {
        match source {
            Source::Wind => &self.wind_sigma,
            Source::Pv => &self.pv_sigma,
            Source::Demand => &self.demand_sigma,
        }
    }

    pub fn mean_series(&self, source: Source) -> Option<&[f64]> {
        match source {
            Source::Wind => self.wind_mean.as_deref(),
            Source::Pv => self.pv_mean.as_deref(),
            Source::Demand => self.demand_mean.as_deref(),
        }
    }

    pub fn mean(&self, source: Source, t: usize) -> f64 {
        self.mean_series(source)
            .and_then(|m| m.get(t).copied())
            .unwrap_or(0.0)
    }
}

/// Forecast-error description of a whole fleet.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyModel {
    /// One entry per microgrid, in fleet order.
    pub microgrids: Vec<MicrogridErrors>,
    /// Identity when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corr_wind: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corr_pv: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corr_demand: Option<Vec<Vec<f64>>>,
}

impl UncertaintyModel {
    pub fn correlation(&self, source: Source) -> Option<&Vec<Vec<f64>>> {
        match source {
            Source::Wind => self.corr_wind.as_ref(),
            Source::Pv => self.corr_pv.as_ref(),
            Source::Demand => self.corr_demand.as_ref(),
        }
    }

    /// Correlation matrix of `source`, identity when not configured.
    pub fn correlation_or_identity(&self, source: Source) -> Vec<Vec<f64>> {
        self.correlation(source)
            .cloned()
            .unwrap_or_else(|| uniform_correlation(self.microgrids.len(), 0.0))
    }

    pub(crate) fn fill_identity_correlations(&mut self, n: usize) {
        for slot in [&mut self.corr_wind, &mut self.corr_pv, &mut self.corr_demand] {
            slot.get_or_insert_with(|| uniform_correlation(n, 0.0));
        }
    }

    /// Sets every off-diagonal entry of all three matrices to `rho`.
    pub fn set_uniform_correlation(&mut self, rho: f64) {
        let n = self.microgrids.len();
        self.corr_wind = Some(uniform_correlation(n, rho));
        self.corr_pv = Some(uniform_correlation(n, rho));
        self.corr_demand = Some(uniform_correlation(n, rho));
    }

    /// The model seen by the microgrids in `members` only.
    pub fn restrict(&self, members: &[usize]) -> UncertaintyModel {
        let sub = |m: &Option<Vec<Vec<f64>>>| m.as_ref().map(|c| restrict(c, members));
        UncertaintyModel {
            microgrids: members.iter().map(|&i| self.microgrids[i].clone()).collect(),
            corr_wind: sub(&self.corr_wind),
            corr_pv: sub(&self.corr_pv),
            corr_demand: sub(&self.corr_demand),
        }
    }

    /// Sigma of `source` for microgrid `n` in period `t`, kW.
    pub fn sigma(&self, fleet: &FleetSpec, n: usize, source: Source, t: usize) -> f64 {
        self.microgrids[n]
            .sigma_spec(source)
            .at(source.forecast(&fleet.microgrids[n]), t)
    }
}

/// Mean and standard deviation of `ΔN` in one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodError {
    pub mu: f64,
    pub sigma: f64,
}

/// Per-period distribution of the net demand forecast error of one island.
#[derive(Debug, Clone, PartialEq)]
pub struct NetErrorDistribution {
    pub periods: Vec<PeriodError>,
}

impl NetErrorDistribution {
    pub fn at(&self, t: usize) -> PeriodError {
        self.periods[t]
    }
}

/// Net error distribution of the island formed by `members`.
///
/// Per source, sigmas are aggregated across members with that source's
/// correlation matrix; the three sources are then combined in quadrature.
pub fn island_distribution(
    fleet: &FleetSpec,
    members: &[usize],
) -> Result<NetErrorDistribution, UncertaintyError> {
    let model = &fleet.uncertainty;
    let n_mg = fleet.microgrids.len();
    if model.microgrids.len() != n_mg {
        return Err(UncertaintyError::DimensionMismatch {
            what: "uncertainty microgrid entries",
            expected: n_mg,
            found: model.microgrids.len(),
        });
    }
    let corrs: Vec<Vec<Vec<f64>>> = Source::ALL
        .iter()
        .map(|&s| restrict(&model.correlation_or_identity(s), members))
        .collect();
    let periods = (0..fleet.periods())
        .map(|t| {
            let mut var = 0.0;
            let mut mu = 0.0;
            for &source in &Source::ALL {
                let sigmas: Vec<f64> = members
                    .iter()
                    .map(|&n| model.sigma(fleet, n, source, t))
                    .collect();
                let s = aggregate_sigma(&sigmas, &corrs[source.index()])?;
                var += s * s;
                mu += source.sign()
                    * members
                        .iter()
                        .map(|&n| model.microgrids[n].mean(source, t))
                        .sum::<f64>();
            }
            Ok(PeriodError {
                mu,
                sigma: var.sqrt(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(NetErrorDistribution { periods })
}

/// Net error distribution for one microgrid (independent mode) or for the
/// whole fleet (networked mode).
pub fn net_error_distribution(
    fleet: &FleetSpec,
    mode: Mode,
    microgrid: Option<&str>,
) -> Result<NetErrorDistribution, UncertaintyError> {
    match mode {
        Mode::Independent => {
            let id = microgrid.ok_or(UncertaintyError::MissingMicrogrid)?;
            let n = fleet
                .microgrid_index(id)
                .ok_or_else(|| UncertaintyError::UnknownMicrogrid(id.to_string()))?;
            island_distribution(fleet, &[n])
        }
        Mode::Networked => {
            let all: Vec<usize> = (0..fleet.microgrids.len()).collect();
            island_distribution(fleet, &all)
        }
    }
}

/// Exact probability of successful islanding for one period.
///
/// `ru_total` and `rd_total` are the island's total up and down reserves and
/// `p_pcc` its total import (negative for export).
pub fn psi_exact(ru_total: f64, rd_total: f64, p_pcc: f64, dist: PeriodError) -> f64 {
    let upper = ru_total - p_pcc;
    let lower = -rd_total - p_pcc;
    interval_probability(lower, upper, dist.mu, dist.sigma)
}
