//! Domain types describing a fleet of microgrids and its day-ahead inputs.
//!
//! A [`FleetSpec`] is loaded from a JSON document (see [`load_fleet`]) and is
//! immutable afterwards. Every invariant is checked by [`validate_fleet`];
//! loading refuses any document that produces a violation.

mod io;
mod validate;

pub use io::{fleet_from_json, fleet_to_json, load_fleet, save_fleet, ConfigError};
pub use validate::{validate_fleet, Violation};

use serde::{Deserialize, Serialize};

use crate::uncertainty::UncertaintyModel;

/// One step of a generator's block energy offer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfferBlock {
    /// Block width in kW.
    pub width: f64,
    /// Marginal cost in $/kWh.
    pub marginal_cost: f64,
}

/// A dispatchable distributed generator (diesel, microturbine, fuel cell).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchableUnit {
    pub id: String,
    /// Minimum output when committed, kW.
    pub p_min: f64,
    /// Maximum output, kW.
    pub p_max: f64,
    /// Convex block offer covering `p_max - p_min`.
    pub offer_blocks: Vec<OfferBlock>,
    /// Operating cost at `p_min`, $/h.
    #[serde(default)]
    pub no_load_cost: f64,
    /// Cost per start, $.
    #[serde(default)]
    pub startup_cost: f64,
    /// kW/h.
    pub ramp_up_rate: f64,
    /// kW/h.
    pub ramp_down_rate: f64,
    pub min_up: u32,
    pub min_down: u32,
    /// Periods the unit has already been on before the horizon starts.
    #[serde(default)]
    pub initial_on_periods: u32,
    /// Periods the unit has already been off before the horizon starts.
    #[serde(default)]
    pub initial_off_periods: u32,
    /// Output in the period preceding the horizon, kW.
    #[serde(default)]
    pub initial_power: f64,
    /// Up-spinning reserve price, $/kWh.
    #[serde(default)]
    pub reserve_up_cost: f64,
    /// Down-spinning reserve price, $/kWh.
    #[serde(default)]
    pub reserve_dn_cost: f64,
}

impl DispatchableUnit {
    pub fn initially_on(&self) -> bool {
        self.initial_on_periods > 0
    }

    /// Up-reserve the unit can deliver within `tau` hours when committed.
    pub fn reserve_up_cap(&self, tau: f64) -> f64 {
        (self.p_max - self.p_min).min(self.ramp_up_rate * tau)
    }

    pub fn reserve_dn_cap(&self, tau: f64) -> f64 {
        (self.p_max - self.p_min).min(self.ramp_down_rate * tau)
    }
}

/// A battery energy storage system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatterySpec {
    pub id: String,
    pub p_charge_max: f64,
    pub p_discharge_max: f64,
    /// kWh.
    pub soc_min: f64,
    /// kWh.
    pub soc_max: f64,
    /// kWh.
    pub soc_initial: f64,
    pub eta_c: f64,
    pub eta_d: f64,
    /// $/kWh of throughput (charge plus discharge).
    #[serde(default)]
    pub degradation_cost: f64,
    #[serde(default)]
    pub reserve_up_cost: f64,
    #[serde(default)]
    pub reserve_dn_cost: f64,
    /// Lower bound on the state of charge at the end of the horizon, kWh.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub soc_terminal_min: Option<f64>,
}

impl BatterySpec {
    pub fn reserve_up_cap(&self, tau: f64) -> f64 {
        (self.p_discharge_max + self.p_charge_max)
            .min(self.eta_d * (self.soc_max - self.soc_min) / tau)
    }

    pub fn reserve_dn_cap(&self, tau: f64) -> f64 {
        (self.p_charge_max + self.p_discharge_max)
            .min((self.soc_max - self.soc_min) / (self.eta_c * tau))
    }
}

/// One microgrid behind its point of common coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicrogridSpec {
    pub id: String,
    #[serde(default)]
    pub units: Vec<DispatchableUnit>,
    #[serde(default)]
    pub batteries: Vec<BatterySpec>,
    /// kW per period.
    pub wind_forecast: Vec<f64>,
    /// kW per period.
    pub pv_forecast: Vec<f64>,
    /// Total demand forecast, kW per period.
    pub demand_forecast: Vec<f64>,
    /// Import limit at the PCC, kW. Filled in at load time when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pcc_import_max: Option<f64>,
    /// Export limit at the PCC, kW. Filled in at load time when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pcc_export_max: Option<f64>,
}

impl MicrogridSpec {
    pub fn import_max(&self) -> f64 {
        self.pcc_import_max.unwrap_or(0.0)
    }

    pub fn export_max(&self) -> f64 {
        self.pcc_export_max.unwrap_or(0.0)
    }

    pub fn periods(&self) -> usize {
        self.demand_forecast.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Each microgrid keeps its own balance and its own islanding boundary.
    Independent,
    /// All microgrids share one balance and form a single island.
    Networked,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Independent => "independent",
            Mode::Networked => "networked",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "independent" => Ok(Mode::Independent),
            "networked" => Ok(Mode::Networked),
            other => Err(format!("unknown mode `{other}` (expected independent|networked)")),
        }
    }
}

/// Settings of the piecewise-linear normal CDF embedded in the MILP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PwlSettings {
    pub segments: usize,
    pub z_max: f64,
}

impl Default for PwlSettings {
    fn default() -> Self {
        Self {
            segments: 32,
            z_max: 4.0,
        }
    }
}

fn default_dt() -> f64 {
    1.0
}

fn default_tau() -> f64 {
    0.25
}

/// Complete scheduling input for one or more microgrids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetSpec {
    pub microgrids: Vec<MicrogridSpec>,
    /// Grid energy price per period, $/kWh. Exports earn the same price.
    pub prices: Vec<f64>,
    /// Period length, h.
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Reserve delivery time, h.
    #[serde(default = "default_tau")]
    pub tau: f64,
    /// Required probability of successful islanding per period.
    pub psi_req: f64,
    pub uncertainty: UncertaintyModel,
    pub mode: Mode,
    #[serde(default)]
    pub pwl: PwlSettings,
    /// Enforce inter-period ramp limits on dispatch.
    #[serde(default)]
    pub ramp_limits: bool,
}

impl FleetSpec {
    pub fn periods(&self) -> usize {
        self.prices.len()
    }

    pub fn microgrid_index(&self, id: &str) -> Option<usize> {
        self.microgrids.iter().position(|mg| mg.id == id)
    }

    /// Peak over periods of the demand summed across all microgrids.
    pub fn peak_total_demand(&self) -> f64 {
        (0..self.periods())
            .map(|t| {
                self.microgrids
                    .iter()
                    .map(|mg| mg.demand_forecast.get(t).copied().unwrap_or(0.0))
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Fills in defaults that depend on other fields.
    pub(crate) fn apply_defaults(&mut self) {
        let peak = self.peak_total_demand();
        for mg in &mut self.microgrids {
            mg.pcc_import_max.get_or_insert(peak);
            mg.pcc_export_max.get_or_insert(peak);
        }
        let n = self.microgrids.len();
        self.uncertainty.fill_identity_correlations(n);
    }

    /// A one-microgrid fleet containing only microgrid `index`, in independent mode.
    pub fn single(&self, index: usize) -> FleetSpec {
        let mut sub = self.clone();
        sub.microgrids = vec![self.microgrids[index].clone()];
        sub.uncertainty = self.uncertainty.restrict(&[index]);
        sub.mode = Mode::Independent;
        sub
    }
}
