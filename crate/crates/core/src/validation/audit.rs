use std::collections::BTreeMap;
use std::io::{self, Write};

use crate::model::{BatterySpec, DispatchableUnit, FleetSpec};
use crate::scheduler::{BatterySchedule, Schedule, UnitSchedule};

/// Constraint families checked by [`audit_schedule`].
pub const FAMILIES: [&str; 17] = [
    "block_sum",
    "block_bounds",
    "commit_window",
    "unit_reserve_up",
    "unit_reserve_dn",
    "startup",
    "ramp",
    "battery_power",
    "battery_mode",
    "soc_recursion",
    "soc_window",
    "soc_terminal",
    "battery_net",
    "battery_reserve_up",
    "battery_reserve_dn",
    "energy_balance",
    "pcc_bounds",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinTimeViolation {
    pub microgrid: String,
    pub unit: String,
    /// Period (0-based) at which the offending switch happens.
    pub period: usize,
    pub rule: &'static str,
}

/// Worst scaled residual per constraint family.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub families: BTreeMap<&'static str, f64>,
    /// Largest distance of a commitment or battery-mode value from {0, 1}.
    pub integrality: f64,
    pub min_time: Vec<MinTimeViolation>,
}

impl AuditReport {
    pub fn max_residual(&self) -> f64 {
        self.families.values().copied().fold(0.0, f64::max)
    }

    /// Families whose residual exceeds `tol`.
    pub fn flagged(&self, tol: f64) -> Vec<&'static str> {
        self.families
            .iter()
            .filter(|(_, &v)| v > tol)
            .map(|(&k, _)| k)
            .collect()
    }

    pub fn is_clean(&self, tol: f64) -> bool {
        self.max_residual() <= tol && self.integrality <= tol && self.min_time.is_empty()
    }

    /// Writes `family,max_residual` rows followed by integrality and the
    /// number of min up/down violations.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "family,max_residual")?;
        for (k, v) in &self.families {
            writeln!(w, "{k},{v:.3e}")?;
        }
        writeln!(w, "integrality,{:.3e}", self.integrality)?;
        writeln!(w, "min_up_down,{}", self.min_time.len())
    }
}

struct Audit {
    families: BTreeMap<&'static str, f64>,
}

impl Audit {
    /// Records `lhs ≤ rhs`, scaled by `max(1, |rhs|)`.
    fn le(&mut self, family: &'static str, lhs: f64, rhs: f64) {
        let v = (lhs - rhs).max(0.0) / rhs.abs().max(1.0);
        let slot = self.families.get_mut(family).expect("known family");
        *slot = slot.max(v);
    }

    fn ge(&mut self, family: &'static str, lhs: f64, rhs: f64) {
        let v = (rhs - lhs).max(0.0) / rhs.abs().max(1.0);
        let slot = self.families.get_mut(family).expect("known family");
        *slot = slot.max(v);
    }

    fn eq(&mut self, family: &'static str, lhs: f64, rhs: f64, scale: f64) {
        let v = (lhs - rhs).abs() / scale.max(1.0);
        let slot = self.families.get_mut(family).expect("known family");
        *slot = slot.max(v);
    }

    fn unit(&mut self, fleet: &FleetSpec, u: &DispatchableUnit, s: &UnitSchedule) {
        let tau = fleet.tau;
        let on0 = if u.initially_on() { 1.0 } else { 0.0 };
        for t in 0..s.power.len() {
            let (c, p) = (s.commitment[t], s.power[t]);
            let blocks: f64 = s.blocks[t].iter().sum();
            self.eq("block_sum", p, c * u.p_min + blocks, u.p_max);
            for (b, &x) in u.offer_blocks.iter().zip(&s.blocks[t]) {
                self.ge("block_bounds", x, 0.0);
                self.le("block_bounds", x, b.width);
            }
            self.ge("commit_window", p, c * u.p_min);
            self.le("commit_window", p, c * u.p_max);
            self.ge("unit_reserve_up", s.reserve_up[t], 0.0);
            self.le("unit_reserve_up", s.reserve_up[t], c * u.p_max - p);
            self.le("unit_reserve_up", s.reserve_up[t], u.ramp_up_rate * tau * c);
            self.ge("unit_reserve_dn", s.reserve_dn[t], 0.0);
            self.le("unit_reserve_dn", s.reserve_dn[t], p - c * u.p_min);
            self.le("unit_reserve_dn", s.reserve_dn[t], u.ramp_down_rate * tau * c);
            let prev = if t == 0 { on0 } else { s.commitment[t - 1] };
            self.ge("startup", s.startup_cost[t], 0.0);
            self.ge("startup", s.startup_cost[t], u.startup_cost * (c - prev));
            if fleet.ramp_limits {
                let (p_prev, c_prev) = if t == 0 {
                    (u.initial_power, on0)
                } else {
                    (s.power[t - 1], s.commitment[t - 1])
                };
                self.le("ramp", p - p_prev, u.ramp_up_rate * fleet.dt + u.p_max * (1.0 - c_prev));
                self.le("ramp", p_prev - p, u.ramp_down_rate * fleet.dt + u.p_max * (1.0 - c));
            }
        }
    }

    fn battery(&mut self, fleet: &FleetSpec, b: &BatterySpec, s: &BatterySchedule) {
        let (dt, tau) = (fleet.dt, fleet.tau);
        let n_t = s.soc.len();
        for t in 0..n_t {
            let (pc, pd, soc) = (s.p_charge[t], s.p_discharge[t], s.soc[t]);
            self.ge("battery_power", pc, 0.0);
            self.ge("battery_power", pd, 0.0);
            self.le("battery_power", pc, s.charging[t] * b.p_charge_max);
            self.le("battery_power", pd, s.discharging[t] * b.p_discharge_max);
            self.le("battery_mode", s.charging[t] + s.discharging[t], 1.0);
            let prev = if t == 0 { b.soc_initial } else { s.soc[t - 1] };
            self.eq("soc_recursion", soc, prev + (b.eta_c * pc - pd / b.eta_d) * dt, b.soc_max);
            self.ge("soc_window", soc, b.soc_min);
            self.le("soc_window", soc, b.soc_max);
            self.eq("battery_net", s.power[t], pd - pc, b.p_discharge_max.max(b.p_charge_max));
            let (ru, rd) = (s.reserve_up[t], s.reserve_dn[t]);
            self.ge("battery_reserve_up", ru, 0.0);
            self.le("battery_reserve_up", ru, b.p_discharge_max - s.power[t]);
            self.le("battery_reserve_up", ru, b.eta_d * (soc - b.soc_min) / tau);
            self.ge("battery_reserve_dn", rd, 0.0);
            self.le("battery_reserve_dn", rd, b.p_charge_max + s.power[t]);
            self.le("battery_reserve_dn", rd, (b.soc_max - soc) / (b.eta_c * tau));
        }
        if let (Some(term), Some(&last)) = (b.soc_terminal_min, s.soc.last()) {
            self.ge("soc_terminal", last, term);
        }
    }
}

fn min_time(mg: &str, u: &DispatchableUnit, s: &UnitSchedule, out: &mut Vec<MinTimeViolation>) {
    let on: Vec<bool> = s.commitment.iter().map(|&c| c > 0.5).collect();
    let n_t = on.len();
    let mut flag = |period: usize, rule: &'static str| {
        out.push(MinTimeViolation {
            microgrid: mg.to_string(),
            unit: u.id.clone(),
            period,
            rule,
        })
    };
    // obligations carried over from before the horizon
    if u.initially_on() {
        let keep = (u.min_up as usize).saturating_sub(u.initial_on_periods as usize).min(n_t);
        if let Some(t) = (0..keep).find(|&t| !on[t]) {
            flag(t, "min_up");
        }
    } else {
        let keep = (u.min_down as usize).saturating_sub(u.initial_off_periods as usize).min(n_t);
        if let Some(t) = (0..keep).find(|&t| on[t]) {
            flag(t, "min_down");
        }
    }
    let was_on = |t: usize| if t == 0 { u.initially_on() } else { on[t - 1] };
    for t in 0..n_t {
        if on[t] && !was_on(t) {
            let end = (t + u.min_up as usize).min(n_t);
            if (t..end).any(|k| !on[k]) {
                flag(t, "min_up");
            }
        } else if !on[t] && was_on(t) {
            let end = (t + u.min_down as usize).min(n_t);
            if (t..end).any(|k| on[k]) {
                flag(t, "min_down");
            }
        }
    }
}

/// Re-evaluates every scheduling constraint on the decoded values of
/// `schedule`.
///
/// Inequalities are scaled by `max(1, |rhs|)`; the energy balance of each
/// island by `max(1, total demand)`. Commitments are rounded at 0.5 for the
/// min up/down check.
pub fn audit_schedule(schedule: &Schedule, fleet: &FleetSpec) -> AuditReport {
    let mut a = Audit {
        families: FAMILIES.iter().map(|&f| (f, 0.0)).collect(),
    };
    if !fleet.ramp_limits {
        a.families.remove("ramp");
    }
    let mut integrality: f64 = 0.0;
    let mut min_up_down = Vec::new();
    let frac = |x: f64| (x - x.round()).abs();
    for (spec, mg) in fleet.microgrids.iter().zip(&schedule.microgrids) {
        for &p in &mg.pcc {
            a.le("pcc_bounds", p, spec.import_max());
            a.ge("pcc_bounds", p, -spec.export_max());
        }
        for (u, s) in spec.units.iter().zip(&mg.units) {
            a.unit(fleet, u, s);
            integrality = s.commitment.iter().map(|&c| frac(c)).fold(integrality, f64::max);
            min_time(&mg.id, u, s, &mut min_up_down);
        }
        for (b, s) in spec.batteries.iter().zip(&mg.batteries) {
            a.battery(fleet, b, s);
            integrality = s
                .charging
                .iter()
                .chain(&s.discharging)
                .map(|&c| frac(c))
                .fold(integrality, f64::max);
        }
    }
    for island in &schedule.islands {
        for t in 0..schedule.periods() {
            let mut supply = 0.0;
            let mut net_load = 0.0;
            let mut demand = 0.0;
            for &n in &island.members {
                let spec = &fleet.microgrids[n];
                let mg = &schedule.microgrids[n];
                supply += mg.pcc[t];
                supply += mg.units.iter().map(|u| u.power[t]).sum::<f64>();
                supply += mg.batteries.iter().map(|b| b.p_discharge[t] - b.p_charge[t]).sum::<f64>();
                net_load += spec.demand_forecast[t] - spec.wind_forecast[t] - spec.pv_forecast[t];
                demand += spec.demand_forecast[t];
            }
            a.eq("energy_balance", supply, net_load, demand);
        }
    }
    AuditReport {
        families: a.families,
        integrality,
        min_time: min_up_down,
    }
}
