//! Translation of a [`FleetSpec`] into a [`MilpModel`].

use crate::milp::{MilpError, MilpModel, RowSense, VarId};
use crate::model::{BatterySpec, DispatchableUnit, FleetSpec, Mode};
use crate::uncertainty::{island_distribution, NetErrorDistribution, PwlCdf};

use super::ScheduleError;

/// Below this standard deviation (kW) the chance constraint becomes the
/// deterministic pair `U ≥ μ`, `L ≤ μ`.
pub const SIGMA_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct UnitVars {
    pub commit: Vec<VarId>,
    pub power: Vec<VarId>,
    /// `blocks[t][m]`.
    pub blocks: Vec<Vec<VarId>>,
    pub startup: Vec<VarId>,
    pub reserve_up: Vec<VarId>,
    pub reserve_dn: Vec<VarId>,
}

#[derive(Debug, Clone)]
pub struct BatteryVars {
    pub charging: Vec<VarId>,
    pub discharging: Vec<VarId>,
    pub p_charge: Vec<VarId>,
    pub p_discharge: Vec<VarId>,
    pub power: Vec<VarId>,
    pub soc: Vec<VarId>,
    pub reserve_up: Vec<VarId>,
    pub reserve_dn: Vec<VarId>,
}

#[derive(Debug, Clone)]
pub struct MicrogridVars {
    pub pcc: Vec<VarId>,
    pub units: Vec<UnitVars>,
    pub batteries: Vec<BatteryVars>,
}

/// Linearized PSI of one island in one period.
#[derive(Debug, Clone)]
pub struct PsiVars {
    pub psi: VarId,
    pub z_up: VarId,
    pub z_lo: VarId,
    pub phi_up: VarId,
    pub phi_lo: VarId,
    pub sel_up: Vec<VarId>,
    pub sel_lo: Vec<VarId>,
    pub pos_up: Vec<VarId>,
    pub pos_lo: Vec<VarId>,
}

/// How the islanding requirement of one period was encoded.
#[derive(Debug, Clone)]
pub enum PsiEncoding {
    /// `psi_req = 0`: no constraint.
    Dropped,
    /// `σ_t` below [`SIGMA_FLOOR`]: window must contain `μ_t`.
    Deterministic,
    Linearized(PsiVars),
}

/// A set of microgrids that islands together.
#[derive(Debug, Clone)]
pub struct IslandVars {
    pub label: String,
    pub members: Vec<usize>,
    pub dist: NetErrorDistribution,
    pub psi: Vec<PsiEncoding>,
}

/// Variable handles needed to decode a solution.
#[derive(Debug, Clone)]
pub struct DecodeMap {
    pub microgrids: Vec<MicrogridVars>,
    pub islands: Vec<IslandVars>,
}

#[derive(Debug, Clone)]
pub struct BuiltModel {
    pub model: MilpModel,
    pub map: DecodeMap,
}

/// Islands implied by the fleet mode: one per microgrid, or one for all.
pub fn islands_of(fleet: &FleetSpec) -> Vec<(String, Vec<usize>)> {
    match fleet.mode {
        Mode::Independent => fleet
            .microgrids
            .iter()
            .enumerate()
            .map(|(n, mg)| (mg.id.clone(), vec![n]))
            .collect(),
        Mode::Networked => vec![("network".to_string(), (0..fleet.microgrids.len()).collect())],
    }
}

struct Builder<'a> {
    fleet: &'a FleetSpec,
    m: MilpModel,
    objective: Vec<(VarId, f64)>,
}

impl Builder<'_> {
    fn cont(&mut self, name: String, lb: f64, ub: f64) -> Result<VarId, MilpError> {
        self.m.add_continuous(name, lb, ub)
    }

    fn bin(&mut self, name: String) -> Result<VarId, MilpError> {
        self.m.add_binary(name)
    }

    fn row(&mut self, name: String, terms: Vec<(VarId, f64)>, sense: RowSense, rhs: f64) -> Result<(), MilpError> {
        self.m.add_constraint(name, terms, sense, rhs).map(|_| ())
    }

    fn cost(&mut self, v: VarId, c: f64) {
        if c != 0.0 {
            self.objective.push((v, c));
        }
    }

    fn unit(&mut self, mg: &str, u: &DispatchableUnit) -> Result<UnitVars, MilpError> {
        let f = self.fleet;
        let n_t = f.periods();
        let (dt, tau) = (f.dt, f.tau);
        let tag = format!("{mg}_{}", u.id);
        let mut vars = UnitVars {
            commit: Vec::with_capacity(n_t),
            power: Vec::with_capacity(n_t),
            blocks: Vec::with_capacity(n_t),
            startup: Vec::with_capacity(n_t),
            reserve_up: Vec::with_capacity(n_t),
            reserve_dn: Vec::with_capacity(n_t),
        };
        let init_on = if u.initially_on() { 1.0 } else { 0.0 };
        for t in 0..n_t {
            let commit = self.bin(format!("u_{tag}_{t}"))?;
            let power = self.cont(format!("p_{tag}_{t}"), 0.0, u.p_max)?;
            let blocks = u
                .offer_blocks
                .iter()
                .enumerate()
                .map(|(k, b)| self.cont(format!("pm_{tag}_{t}_{k}"), 0.0, b.width))
                .collect::<Result<Vec<_>, _>>()?;
            let startup = self.cont(format!("su_{tag}_{t}"), 0.0, u.startup_cost)?;
            let ru = self.cont(format!("ru_{tag}_{t}"), 0.0, u.reserve_up_cap(tau))?;
            let rd = self.cont(format!("rd_{tag}_{t}"), 0.0, u.reserve_dn_cap(tau))?;

            // block decomposition
            let mut terms = vec![(power, 1.0), (commit, -u.p_min)];
            terms.extend(blocks.iter().map(|&b| (b, -1.0)));
            self.row(format!("blk_{tag}_{t}"), terms, RowSense::Eq, 0.0)?;
            // commitment window
            self.row(format!("pmin_{tag}_{t}"), vec![(power, 1.0), (commit, -u.p_min)], RowSense::Ge, 0.0)?;
            self.row(format!("pmax_{tag}_{t}"), vec![(power, 1.0), (commit, -u.p_max)], RowSense::Le, 0.0)?;
            // reserve headroom and ramp caps
            self.row(format!("ruh_{tag}_{t}"), vec![(ru, 1.0), (power, 1.0), (commit, -u.p_max)], RowSense::Le, 0.0)?;
            self.row(format!("rur_{tag}_{t}"), vec![(ru, 1.0), (commit, -u.ramp_up_rate * tau)], RowSense::Le, 0.0)?;
            self.row(format!("rdh_{tag}_{t}"), vec![(rd, 1.0), (power, -1.0), (commit, u.p_min)], RowSense::Le, 0.0)?;
            self.row(format!("rdr_{tag}_{t}"), vec![(rd, 1.0), (commit, -u.ramp_down_rate * tau)], RowSense::Le, 0.0)?;
            // startup cost: su_t >= c (u_t - u_{t-1})
            let c = u.startup_cost;
            let mut terms = vec![(startup, 1.0), (commit, -c)];
            let rhs = if t == 0 {
                -c * init_on
            } else {
                terms.push((vars.commit[t - 1], c));
                0.0
            };
            self.row(format!("su_{tag}_{t}"), terms, RowSense::Ge, rhs)?;

            for (b, &v) in u.offer_blocks.iter().zip(&blocks) {
                self.cost(v, b.marginal_cost * dt);
            }
            self.cost(commit, u.no_load_cost * dt);
            self.cost(startup, 1.0);
            self.cost(ru, u.reserve_up_cost * dt);
            self.cost(rd, u.reserve_dn_cost * dt);

            vars.commit.push(commit);
            vars.power.push(power);
            vars.blocks.push(blocks);
            vars.startup.push(startup);
            vars.reserve_up.push(ru);
            vars.reserve_dn.push(rd);
        }
        self.min_up_down(&tag, u, &vars.commit)?;
        if f.ramp_limits {
            self.ramps(&tag, u, &vars)?;
        }
        Ok(vars)
    }

    /// Minimum up/down time in the three-window form, honoring the periods
    /// already spent on or off before the horizon.
    fn min_up_down(&mut self, tag: &str, u: &DispatchableUnit, commit: &[VarId]) -> Result<(), MilpError> {
        let n_t = commit.len();
        let v0 = if u.initially_on() { 1.0 } else { 0.0 };
        // previous commitment as (variable, constant)
        let prev = |t: usize| if t == 0 { None } else { Some(commit[t - 1]) };

        let ut = u.min_up as usize;
        if ut > 1 {
            let g = if u.initially_on() {
                ut.saturating_sub(u.initial_on_periods as usize).min(n_t)
            } else {
                0
            };
            if g > 0 {
                let terms = commit[..g].iter().map(|&v| (v, 1.0)).collect();
                self.row(format!("upi_{tag}"), terms, RowSense::Eq, g as f64)?;
            }
            for t in g..n_t {
                let span = ut.min(n_t - t) as f64;
                // Σ_{k=t}^{t+span-1} u_k − span·u_t + span·u_{t−1} ≥ 0
                let mut terms: Vec<(VarId, f64)> = commit[t..t + span as usize].iter().map(|&v| (v, 1.0)).collect();
                terms.push((commit[t], -span));
                let rhs = match prev(t) {
                    Some(p) => {
                        terms.push((p, span));
                        0.0
                    }
                    None => -span * v0,
                };
                self.row(format!("up_{tag}_{t}"), terms, RowSense::Ge, rhs)?;
            }
        }

        let dt_min = u.min_down as usize;
        if dt_min > 1 {
            let l = if u.initially_on() {
                0
            } else {
                dt_min.saturating_sub(u.initial_off_periods as usize).min(n_t)
            };
            if l > 0 {
                let terms = commit[..l].iter().map(|&v| (v, 1.0)).collect();
                self.row(format!("dni_{tag}"), terms, RowSense::Eq, 0.0)?;
            }
            for t in l..n_t {
                let span = dt_min.min(n_t - t) as f64;
                // span − Σ u_k − span·u_{t−1} + span·u_t ≥ 0
                let mut terms: Vec<(VarId, f64)> = commit[t..t + span as usize].iter().map(|&v| (v, -1.0)).collect();
                terms.push((commit[t], span));
                let rhs = match prev(t) {
                    Some(p) => {
                        terms.push((p, -span));
                        -span
                    }
                    None => -span + span * v0,
                };
                self.row(format!("dn_{tag}_{t}"), terms, RowSense::Ge, rhs)?;
            }
        }
        Ok(())
    }

    /// Inter-period ramp limits with start-up and shut-down exemptions.
    fn ramps(&mut self, tag: &str, u: &DispatchableUnit, vars: &UnitVars) -> Result<(), MilpError> {
        let dt = self.fleet.dt;
        let v0 = if u.initially_on() { 1.0 } else { 0.0 };
        for t in 0..vars.power.len() {
            let (p, c) = (vars.power[t], vars.commit[t]);
            // P_t − P_{t−1} ≤ ramp_up·dt + p_max (1 − u_{t−1})
            let mut up = vec![(p, 1.0)];
            // P_{t−1} − P_t ≤ ramp_dn·dt + p_max (1 − u_t)
            let mut dn = vec![(p, -1.0), (c, u.p_max)];
            let (rhs_up, rhs_dn) = if t == 0 {
                (
                    u.ramp_up_rate * dt + u.p_max * (1.0 - v0) + u.initial_power,
                    u.ramp_down_rate * dt + u.p_max - u.initial_power,
                )
            } else {
                up.push((vars.power[t - 1], -1.0));
                up.push((vars.commit[t - 1], u.p_max));
                dn.push((vars.power[t - 1], 1.0));
                (u.ramp_up_rate * dt + u.p_max, u.ramp_down_rate * dt + u.p_max)
            };
            self.row(format!("rpu_{tag}_{t}"), up, RowSense::Le, rhs_up)?;
            self.row(format!("rpd_{tag}_{t}"), dn, RowSense::Le, rhs_dn)?;
        }
        Ok(())
    }

    fn battery(&mut self, mg: &str, b: &BatterySpec) -> Result<BatteryVars, MilpError> {
        let f = self.fleet;
        let n_t = f.periods();
        let (dt, tau) = (f.dt, f.tau);
        let tag = format!("{mg}_{}", b.id);
        let mut vars = BatteryVars {
            charging: Vec::with_capacity(n_t),
            discharging: Vec::with_capacity(n_t),
            p_charge: Vec::with_capacity(n_t),
            p_discharge: Vec::with_capacity(n_t),
            power: Vec::with_capacity(n_t),
            soc: Vec::with_capacity(n_t),
            reserve_up: Vec::with_capacity(n_t),
            reserve_dn: Vec::with_capacity(n_t),
        };
        for t in 0..n_t {
            let uc = self.bin(format!("uc_{tag}_{t}"))?;
            let ud = self.bin(format!("ud_{tag}_{t}"))?;
            let pc = self.cont(format!("pc_{tag}_{t}"), 0.0, b.p_charge_max)?;
            let pd = self.cont(format!("pd_{tag}_{t}"), 0.0, b.p_discharge_max)?;
            let pb = self.cont(format!("pb_{tag}_{t}"), -b.p_charge_max, b.p_discharge_max)?;
            let soc_lb = match b.soc_terminal_min {
                Some(term) if t + 1 == n_t => term.max(b.soc_min),
                _ => b.soc_min,
            };
            let soc = self.cont(format!("soc_{tag}_{t}"), soc_lb, b.soc_max)?;
            let ru = self.cont(format!("rub_{tag}_{t}"), 0.0, b.reserve_up_cap(tau))?;
            let rd = self.cont(format!("rdb_{tag}_{t}"), 0.0, b.reserve_dn_cap(tau))?;

            self.row(format!("chg_{tag}_{t}"), vec![(pc, 1.0), (uc, -b.p_charge_max)], RowSense::Le, 0.0)?;
            self.row(format!("dis_{tag}_{t}"), vec![(pd, 1.0), (ud, -b.p_discharge_max)], RowSense::Le, 0.0)?;
            self.row(format!("mode_{tag}_{t}"), vec![(uc, 1.0), (ud, 1.0)], RowSense::Le, 1.0)?;
            // SOC_t − SOC_{t−1} − ηc·dt·Pc + dt/ηd·Pd = 0
            let mut terms = vec![(soc, 1.0), (pc, -b.eta_c * dt), (pd, dt / b.eta_d)];
            let rhs = if t == 0 {
                b.soc_initial
            } else {
                terms.push((vars.soc[t - 1], -1.0));
                0.0
            };
            self.row(format!("socr_{tag}_{t}"), terms, RowSense::Eq, rhs)?;
            self.row(format!("net_{tag}_{t}"), vec![(pb, 1.0), (pd, -1.0), (pc, 1.0)], RowSense::Eq, 0.0)?;
            self.row(format!("ruh_{tag}_{t}"), vec![(ru, 1.0), (pb, 1.0)], RowSense::Le, b.p_discharge_max)?;
            self.row(
                format!("rue_{tag}_{t}"),
                vec![(ru, 1.0), (soc, -b.eta_d / tau)],
                RowSense::Le,
                -b.eta_d * b.soc_min / tau,
            )?;
            self.row(format!("rdh_{tag}_{t}"), vec![(rd, 1.0), (pb, -1.0)], RowSense::Le, b.p_charge_max)?;
            let k = 1.0 / (b.eta_c * tau);
            self.row(format!("rde_{tag}_{t}"), vec![(rd, 1.0), (soc, k)], RowSense::Le, k * b.soc_max)?;

            self.cost(pc, b.degradation_cost * dt);
            self.cost(pd, b.degradation_cost * dt);
            self.cost(ru, b.reserve_up_cost * dt);
            self.cost(rd, b.reserve_dn_cost * dt);

            vars.charging.push(uc);
            vars.discharging.push(ud);
            vars.p_charge.push(pc);
            vars.p_discharge.push(pd);
            vars.power.push(pb);
            vars.soc.push(soc);
            vars.reserve_up.push(ru);
            vars.reserve_dn.push(rd);
        }
        Ok(vars)
    }

    fn balance(&mut self, label: &str, members: &[usize], mgs: &[MicrogridVars]) -> Result<(), MilpError> {
        for t in 0..self.fleet.periods() {
            let mut terms = Vec::new();
            let mut rhs = 0.0;
            for &n in members {
                let spec = &self.fleet.microgrids[n];
                let vars = &mgs[n];
                rhs += spec.demand_forecast[t] - spec.wind_forecast[t] - spec.pv_forecast[t];
                terms.push((vars.pcc[t], 1.0));
                terms.extend(vars.units.iter().map(|u| (u.power[t], 1.0)));
                for b in &vars.batteries {
                    terms.push((b.p_discharge[t], 1.0));
                    terms.push((b.p_charge[t], -1.0));
                }
            }
            self.row(format!("bal_{label}_{t}"), terms, RowSense::Eq, rhs)?;
        }
        Ok(())
    }

    fn island(
        &mut self,
        label: &str,
        members: &[usize],
        mgs: &[MicrogridVars],
        pwl: &PwlCdf,
    ) -> Result<IslandVars, ScheduleError> {
        let f = self.fleet;
        let dist = island_distribution(f, members)?;
        let tau = f.tau;
        let ru_max: f64 = members
            .iter()
            .map(|&n| {
                let mg = &f.microgrids[n];
                mg.units.iter().map(|u| u.reserve_up_cap(tau)).sum::<f64>()
                    + mg.batteries.iter().map(|b| b.reserve_up_cap(tau)).sum::<f64>()
            })
            .sum();
        let rd_max: f64 = members
            .iter()
            .map(|&n| {
                let mg = &f.microgrids[n];
                mg.units.iter().map(|u| u.reserve_dn_cap(tau)).sum::<f64>()
                    + mg.batteries.iter().map(|b| b.reserve_dn_cap(tau)).sum::<f64>()
            })
            .sum();
        let imp: f64 = members.iter().map(|&n| f.microgrids[n].import_max()).sum();
        let exp: f64 = members.iter().map(|&n| f.microgrids[n].export_max()).sum();

        let mut psi = Vec::with_capacity(f.periods());
        for t in 0..f.periods() {
            // ΣR_up, ΣR_down and ΣP_pcc as linear terms
            let mut ru_terms = Vec::new();
            let mut rd_terms = Vec::new();
            let mut pcc_terms = Vec::new();
            for &n in members {
                let v = &mgs[n];
                pcc_terms.push((v.pcc[t], 1.0));
                for u in &v.units {
                    ru_terms.push((u.reserve_up[t], 1.0));
                    rd_terms.push((u.reserve_dn[t], 1.0));
                }
                for b in &v.batteries {
                    ru_terms.push((b.reserve_up[t], 1.0));
                    rd_terms.push((b.reserve_dn[t], 1.0));
                }
            }
            let period = dist.at(t);
            if f.psi_req <= 0.0 {
                psi.push(PsiEncoding::Dropped);
                continue;
            }
            if period.sigma < SIGMA_FLOOR {
                // U ≥ μ and L ≤ μ
                let mut up = ru_terms.clone();
                up.extend(pcc_terms.iter().map(|&(v, c)| (v, -c)));
                self.row(format!("dup_{label}_{t}"), up, RowSense::Ge, period.mu)?;
                let mut lo = rd_terms.clone();
                lo.extend(pcc_terms.iter().copied());
                self.row(format!("dlo_{label}_{t}"), lo, RowSense::Ge, -period.mu)?;
                psi.push(PsiEncoding::Deterministic);
                continue;
            }
            let (mu, sigma) = (period.mu, period.sigma);
            let z_bounds = [
                (-imp - mu) / sigma,
                (ru_max + exp - mu) / sigma,
                (-rd_max - imp - mu) / sigma,
                (exp - mu) / sigma,
            ];
            let reach_lo = z_bounds.iter().copied().fold(-pwl.z_max(), f64::min) - 1.0;
            let reach_hi = z_bounds.iter().copied().fold(pwl.z_max(), f64::max) + 1.0;
            let intervals = pwl.intervals(reach_lo, reach_hi);

            let z_up = self.cont(format!("zu_{label}_{t}"), reach_lo, reach_hi)?;
            let z_lo = self.cont(format!("zl_{label}_{t}"), reach_lo, reach_hi)?;
            // σ·z_up = ΣR_up − ΣP_pcc − μ
            let mut terms = vec![(z_up, sigma)];
            terms.extend(ru_terms.iter().map(|&(v, c)| (v, -c)));
            terms.extend(pcc_terms.iter().copied());
            self.row(format!("zud_{label}_{t}"), terms, RowSense::Eq, -mu)?;
            // σ·z_lo = −ΣR_down − ΣP_pcc − μ
            let mut terms = vec![(z_lo, sigma)];
            terms.extend(rd_terms.iter().copied());
            terms.extend(pcc_terms.iter().copied());
            self.row(format!("zld_{label}_{t}"), terms, RowSense::Eq, -mu)?;

            let phi_up = self.cont(format!("fu_{label}_{t}"), 0.0, 1.0)?;
            let phi_lo = self.cont(format!("fl_{label}_{t}"), 0.0, 1.0)?;
            let (sel_up, pos_up) = self.pwl_side(&format!("u_{label}_{t}"), z_up, phi_up, &intervals)?;
            let (sel_lo, pos_lo) = self.pwl_side(&format!("l_{label}_{t}"), z_lo, phi_lo, &intervals)?;

            let psi_var = self.cont(format!("psi_{label}_{t}"), 0.0, 1.0)?;
            self.row(
                format!("psid_{label}_{t}"),
                vec![(psi_var, 1.0), (phi_up, -1.0), (phi_lo, 1.0)],
                RowSense::Eq,
                0.0,
            )?;
            self.row(format!("psir_{label}_{t}"), vec![(psi_var, 1.0)], RowSense::Ge, f.psi_req)?;
            psi.push(PsiEncoding::Linearized(PsiVars {
                psi: psi_var,
                z_up,
                z_lo,
                phi_up,
                phi_lo,
                sel_up,
                sel_lo,
                pos_up,
                pos_lo,
            }));
        }
        Ok(IslandVars {
            label: label.to_string(),
            members: members.to_vec(),
            dist,
            psi,
        })
    }

    /// `phi = Φ̂(z)` through interval selection binaries and per-interval
    /// position variables.
    fn pwl_side(
        &mut self,
        tag: &str,
        z: VarId,
        phi: VarId,
        intervals: &[crate::uncertainty::PwlInterval],
    ) -> Result<(Vec<VarId>, Vec<VarId>), MilpError> {
        let mut sel = Vec::with_capacity(intervals.len());
        let mut pos = Vec::with_capacity(intervals.len());
        for (l, iv) in intervals.iter().enumerate() {
            let b = self.bin(format!("b{tag}_{l}"))?;
            let zeta = self.cont(format!("x{tag}_{l}"), iv.lo.min(0.0), iv.hi.max(0.0))?;
            // lo·b ≤ ζ ≤ hi·b
            self.row(format!("xl{tag}_{l}"), vec![(zeta, 1.0), (b, -iv.lo)], RowSense::Ge, 0.0)?;
            self.row(format!("xh{tag}_{l}"), vec![(zeta, 1.0), (b, -iv.hi)], RowSense::Le, 0.0)?;
            sel.push(b);
            pos.push(zeta);
        }
        self.row(format!("bs{tag}"), sel.iter().map(|&b| (b, 1.0)).collect(), RowSense::Eq, 1.0)?;
        let mut terms: Vec<(VarId, f64)> = pos.iter().map(|&x| (x, 1.0)).collect();
        terms.push((z, -1.0));
        self.row(format!("zs{tag}"), terms, RowSense::Eq, 0.0)?;
        // phi = Σ_l [(base_l − s_l·lo_l)·b_l + s_l·ζ_l]
        let mut terms = vec![(phi, 1.0)];
        for (iv, (&b, &x)) in intervals.iter().zip(sel.iter().zip(&pos)) {
            terms.push((b, -(iv.base - iv.slope * iv.lo)));
            terms.push((x, -iv.slope));
        }
        self.row(format!("fd{tag}"), terms, RowSense::Eq, 0.0)?;
        Ok((sel, pos))
    }
}

/// Builds the chance-constrained scheduling MILP for `fleet`.
///
/// Independent mode keeps one balance and one islanding constraint per
/// microgrid; networked mode pools both across the fleet while each
/// microgrid keeps its own PCC limits.
pub fn build_milp(fleet: &FleetSpec, pwl: &PwlCdf) -> Result<BuiltModel, ScheduleError> {
    if fleet.microgrids.is_empty() {
        return Err(ScheduleError::EmptyFleet);
    }
    if fleet.psi_req >= pwl.psi_cap() {
        return Err(ScheduleError::PsiUnreachable {
            psi_req: fleet.psi_req,
            cap: pwl.psi_cap(),
        });
    }
    let mut b = Builder {
        fleet,
        m: MilpModel::new(),
        objective: Vec::new(),
    };
    let n_t = fleet.periods();
    let mut mgs = Vec::with_capacity(fleet.microgrids.len());
    for mg in &fleet.microgrids {
        let mut pcc = Vec::with_capacity(n_t);
        for t in 0..n_t {
            let v = b.cont(format!("pcc_{}_{t}", mg.id), -mg.export_max(), mg.import_max())?;
            b.cost(v, fleet.prices[t] * fleet.dt);
            pcc.push(v);
        }
        let units = mg
            .units
            .iter()
            .map(|u| b.unit(&mg.id, u))
            .collect::<Result<Vec<_>, _>>()?;
        let batteries = mg
            .batteries
            .iter()
            .map(|bat| b.battery(&mg.id, bat))
            .collect::<Result<Vec<_>, _>>()?;
        mgs.push(MicrogridVars { pcc, units, batteries });
    }
    let mut islands = Vec::new();
    for (label, members) in islands_of(fleet) {
        b.balance(&label, &members, &mgs)?;
        islands.push(b.island(&label, &members, &mgs, pwl)?);
    }
    let objective = std::mem::take(&mut b.objective);
    b.m.set_objective(objective)?;
    Ok(BuiltModel {
        model: b.m,
        map: DecodeMap {
            microgrids: mgs,
            islands,
        },
    })
}
