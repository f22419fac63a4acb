use std::io::{self, Write};

use crate::milp::{MilpSolution, SolveStatus, VarId};
use crate::model::{FleetSpec, Mode};
use crate::uncertainty::{PeriodError, PwlCdf};

use super::build::{BuiltModel, PsiEncoding};

#[derive(Debug, Clone, PartialEq)]
pub struct UnitSchedule {
    pub id: String,
    /// Raw commitment values as returned by the solver.
    pub commitment: Vec<f64>,
    pub power: Vec<f64>,
    /// `blocks[t][m]`, kW.
    pub blocks: Vec<Vec<f64>>,
    /// $ per period.
    pub startup_cost: Vec<f64>,
    pub reserve_up: Vec<f64>,
    pub reserve_dn: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatterySchedule {
    pub id: String,
    pub charging: Vec<f64>,
    pub discharging: Vec<f64>,
    pub p_charge: Vec<f64>,
    pub p_discharge: Vec<f64>,
    /// Net output `P_discharge − P_charge`, kW.
    pub power: Vec<f64>,
    /// End-of-period state of charge, kWh.
    pub soc: Vec<f64>,
    pub reserve_up: Vec<f64>,
    pub reserve_dn: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MicrogridSchedule {
    pub id: String,
    /// Import at the PCC, kW (negative when exporting).
    pub pcc: Vec<f64>,
    pub units: Vec<UnitSchedule>,
    pub batteries: Vec<BatterySchedule>,
}

/// Islanding quantities of one island, per period.
#[derive(Debug, Clone, PartialEq)]
pub struct IslandSchedule {
    pub label: String,
    /// Indices of member microgrids in the fleet.
    pub members: Vec<usize>,
    pub errors: Vec<PeriodError>,
    /// PWL PSI of the scheduled window, i.e. the value the MILP sees.
    pub model_psi: Vec<f64>,
    /// Value of the materialized `PSI_t` variable, when the constraint is linearized.
    pub psi_variable: Vec<Option<f64>>,
}

/// Operating cost by category, $.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CostBreakdown {
    pub energy: f64,
    pub startup: f64,
    pub no_load: f64,
    pub grid_exchange: f64,
    pub degradation: f64,
    pub reserve: f64,
    pub total: f64,
}

impl CostBreakdown {
    pub fn categories(&self) -> [(&'static str, f64); 6] {
        [
            ("energy", self.energy),
            ("startup", self.startup),
            ("no_load", self.no_load),
            ("grid_exchange", self.grid_exchange),
            ("degradation", self.degradation),
            ("reserve", self.reserve),
        ]
    }

    /// Recomputes every category from decision values and fleet prices.
    pub fn from_decisions(fleet: &FleetSpec, microgrids: &[MicrogridSchedule]) -> Self {
        let dt = fleet.dt;
        let mut c = CostBreakdown::default();
        for (spec, mg) in fleet.microgrids.iter().zip(microgrids) {
            for (t, &p) in mg.pcc.iter().enumerate() {
                c.grid_exchange += fleet.prices[t] * p * dt;
            }
            for (u, s) in spec.units.iter().zip(&mg.units) {
                for t in 0..s.power.len() {
                    c.energy += u
                        .offer_blocks
                        .iter()
                        .zip(&s.blocks[t])
                        .map(|(b, &p)| b.marginal_cost * p * dt)
                        .sum::<f64>();
                    c.no_load += u.no_load_cost * s.commitment[t] * dt;
                    c.startup += s.startup_cost[t];
                    c.reserve += (u.reserve_up_cost * s.reserve_up[t] + u.reserve_dn_cost * s.reserve_dn[t]) * dt;
                }
            }
            for (b, s) in spec.batteries.iter().zip(&mg.batteries) {
                for t in 0..s.power.len() {
                    c.degradation += b.degradation_cost * (s.p_charge[t] + s.p_discharge[t]) * dt;
                    c.reserve += (b.reserve_up_cost * s.reserve_up[t] + b.reserve_dn_cost * s.reserve_dn[t]) * dt;
                }
            }
        }
        c.total = c.categories().iter().map(|(_, v)| v).sum();
        c
    }
}

/// A decoded day-ahead schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub mode: Mode,
    pub dt: f64,
    pub psi_req: f64,
    pub microgrids: Vec<MicrogridSchedule>,
    pub islands: Vec<IslandSchedule>,
    pub cost: CostBreakdown,
    pub status: SolveStatus,
    /// Objective reported by the solve, $.
    pub objective: f64,
    pub gap: f64,
    pub solve_time: f64,
}

/// `-0.000000` and friends print as zero.
fn cell(v: f64) -> String {
    let s = format!("{v:.6}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        "0.000000".to_string()
    } else {
        s
    }
}

impl Schedule {
    pub(super) fn decode(fleet: &FleetSpec, built: &BuiltModel, sol: &MilpSolution, pwl: &PwlCdf) -> Schedule {
        let values = sol.values.as_ref().expect("decode needs a solution");
        let get = |ids: &[VarId]| ids.iter().map(|v| values[v.index()]).collect::<Vec<f64>>();
        let microgrids: Vec<MicrogridSchedule> = fleet
            .microgrids
            .iter()
            .zip(&built.map.microgrids)
            .map(|(spec, vars)| MicrogridSchedule {
                id: spec.id.clone(),
                pcc: get(&vars.pcc),
                units: spec
                    .units
                    .iter()
                    .zip(&vars.units)
                    .map(|(u, v)| UnitSchedule {
                        id: u.id.clone(),
                        commitment: get(&v.commit),
                        power: get(&v.power),
                        blocks: v.blocks.iter().map(|b| get(b)).collect(),
                        startup_cost: get(&v.startup),
                        reserve_up: get(&v.reserve_up),
                        reserve_dn: get(&v.reserve_dn),
                    })
                    .collect(),
                batteries: spec
                    .batteries
                    .iter()
                    .zip(&vars.batteries)
                    .map(|(b, v)| BatterySchedule {
                        id: b.id.clone(),
                        charging: get(&v.charging),
                        discharging: get(&v.discharging),
                        p_charge: get(&v.p_charge),
                        p_discharge: get(&v.p_discharge),
                        power: get(&v.power),
                        soc: get(&v.soc),
                        reserve_up: get(&v.reserve_up),
                        reserve_dn: get(&v.reserve_dn),
                    })
                    .collect(),
            })
            .collect();

        let islands = built
            .map
            .islands
            .iter()
            .map(|island| {
                let n_t = fleet.periods();
                let mut model_psi = Vec::with_capacity(n_t);
                let mut psi_variable = Vec::with_capacity(n_t);
                for t in 0..n_t {
                    let (mut ru, mut rd, mut pcc) = (0.0, 0.0, 0.0);
                    for &n in &island.members {
                        let mg = &microgrids[n];
                        pcc += mg.pcc[t];
                        for u in &mg.units {
                            ru += u.reserve_up[t];
                            rd += u.reserve_dn[t];
                        }
                        for b in &mg.batteries {
                            ru += b.reserve_up[t];
                            rd += b.reserve_dn[t];
                        }
                    }
                    let e = island.dist.at(t);
                    let (upper, lower) = (ru - pcc, -rd - pcc);
                    let psi = if e.sigma < super::SIGMA_FLOOR {
                        if lower <= e.mu + 1e-9 && e.mu <= upper + 1e-9 {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        pwl.eval((upper - e.mu) / e.sigma) - pwl.eval((lower - e.mu) / e.sigma)
                    };
                    model_psi.push(psi);
                    psi_variable.push(match &island.psi[t] {
                        PsiEncoding::Linearized(v) => Some(values[v.psi.index()]),
                        _ => None,
                    });
                }
                IslandSchedule {
                    label: island.label.clone(),
                    members: island.members.clone(),
                    errors: island.dist.periods.clone(),
                    model_psi,
                    psi_variable,
                }
            })
            .collect();

        let cost = CostBreakdown::from_decisions(fleet, &microgrids);
        Schedule {
            mode: fleet.mode,
            dt: fleet.dt,
            psi_req: fleet.psi_req,
            microgrids,
            islands,
            cost,
            status: sol.status,
            objective: sol.objective,
            gap: sol.gap,
            solve_time: sol.wall_time,
        }
    }

    pub fn periods(&self) -> usize {
        self.microgrids.first().map_or(0, |mg| mg.pcc.len())
    }

    /// Total PCC import of the whole schedule per period, kW.
    pub fn total_pcc(&self, t: usize) -> f64 {
        self.microgrids.iter().map(|mg| mg.pcc[t]).sum()
    }

    /// Writes `t,mg,var_kind,id,value` rows; periods are numbered from 1.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,mg,var_kind,id,value")?;
        for t in 0..self.periods() {
            let tt = t + 1;
            for mg in &self.microgrids {
                writeln!(w, "{tt},{},p_pcc,{},{}", mg.id, mg.id, cell(mg.pcc[t]))?;
                for u in &mg.units {
                    let rows = [
                        ("u", u.commitment[t]),
                        ("p", u.power[t]),
                        ("su", u.startup_cost[t]),
                        ("r_up", u.reserve_up[t]),
                        ("r_dn", u.reserve_dn[t]),
                    ];
                    for (kind, v) in rows {
                        writeln!(w, "{tt},{},{kind},{},{}", mg.id, u.id, cell(v))?;
                    }
                    for (m, &v) in u.blocks[t].iter().enumerate() {
                        writeln!(w, "{tt},{},p_block_{},{},{}", mg.id, m + 1, u.id, cell(v))?;
                    }
                }
                for b in &mg.batteries {
                    let rows = [
                        ("u_c", b.charging[t]),
                        ("u_d", b.discharging[t]),
                        ("p_c", b.p_charge[t]),
                        ("p_d", b.p_discharge[t]),
                        ("p_b", b.power[t]),
                        ("soc", b.soc[t]),
                        ("r_up", b.reserve_up[t]),
                        ("r_dn", b.reserve_dn[t]),
                    ];
                    for (kind, v) in rows {
                        writeln!(w, "{tt},{},{kind},{},{}", mg.id, b.id, cell(v))?;
                    }
                }
            }
            for island in &self.islands {
                writeln!(w, "{tt},{},psi_model,{},{}", island.label, island.label, cell(island.model_psi[t]))?;
            }
        }
        Ok(())
    }

    /// Writes the `category,dollars` cost table, ending with the total.
    pub fn write_cost_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "category,dollars")?;
        for (name, v) in self.cost.categories() {
            writeln!(w, "{name},{}", cell(v))?;
        }
        writeln!(w, "total,{}", cell(self.cost.total))
    }
}
