#![allow(dead_code)]

use nmg_core::uncertainty::MicrogridErrors;
use nmg_core::{
    fleet_from_json, fleet_to_json, load_fleet, BatterySpec, DispatchableUnit, FleetSpec, MicrogridSpec, Mode,
    OfferBlock, PwlSettings, SigmaSpec, UncertaintyModel,
};

pub const REPLICATION: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/replication_3mg.json");

pub fn replication() -> FleetSpec {
    load_fleet(REPLICATION).expect("replication fixture loads")
}

pub fn unit(id: &str, p_min: f64, p_max: f64, blocks: &[(f64, f64)]) -> DispatchableUnit {
    DispatchableUnit {
        id: id.into(),
        p_min,
        p_max,
        offer_blocks: blocks
            .iter()
            .map(|&(width, marginal_cost)| OfferBlock { width, marginal_cost })
            .collect(),
        no_load_cost: 0.0,
        startup_cost: 0.0,
        ramp_up_rate: 1000.0,
        ramp_down_rate: 1000.0,
        min_up: 1,
        min_down: 1,
        initial_on_periods: 0,
        initial_off_periods: 1,
        initial_power: 0.0,
        reserve_up_cost: 0.0,
        reserve_dn_cost: 0.0,
    }
}

pub fn battery(id: &str) -> BatterySpec {
    BatterySpec {
        id: id.into(),
        p_charge_max: 5.0,
        p_discharge_max: 5.0,
        soc_min: 2.0,
        soc_max: 20.0,
        soc_initial: 10.0,
        eta_c: 0.95,
        eta_d: 0.95,
        degradation_cost: 0.0,
        reserve_up_cost: 0.0,
        reserve_dn_cost: 0.0,
        soc_terminal_min: None,
    }
}

pub fn microgrid(id: &str, demand: Vec<f64>) -> MicrogridSpec {
    let n = demand.len();
    MicrogridSpec {
        id: id.into(),
        units: Vec::new(),
        batteries: Vec::new(),
        wind_forecast: vec![0.0; n],
        pv_forecast: vec![0.0; n],
        demand_forecast: demand,
        pcc_import_max: None,
        pcc_export_max: None,
    }
}

/// Zero-sigma error model for `n` microgrids.
pub fn errors(n: usize) -> UncertaintyModel {
    UncertaintyModel {
        microgrids: vec![MicrogridErrors::default(); n],
        corr_wind: None,
        corr_pv: None,
        corr_demand: None,
    }
}

pub fn absolute(series: Vec<f64>) -> SigmaSpec {
    SigmaSpec::Absolute(series)
}

/// Assembles a fleet and passes it through the loader so defaults are
/// applied and invariants checked.
pub fn fleet(microgrids: Vec<MicrogridSpec>, prices: Vec<f64>, psi_req: f64, mode: Mode) -> FleetSpec {
    let n = microgrids.len();
    finish(FleetSpec {
        microgrids,
        prices,
        dt: 1.0,
        tau: 0.25,
        psi_req,
        uncertainty: errors(n),
        mode,
        pwl: PwlSettings::default(),
        ramp_limits: false,
    })
}

pub fn finish(spec: FleetSpec) -> FleetSpec {
    fleet_from_json(&fleet_to_json(&spec), "test").unwrap_or_else(|e| panic!("test fleet invalid: {e}"))
}

pub fn with_mode(fleet: &FleetSpec, mode: Mode, psi_req: f64) -> FleetSpec {
    let mut f = fleet.clone();
    f.mode = mode;
    f.psi_req = psi_req;
    f
}
