use std::collections::HashSet;
use std::fmt;

use super::{BatterySpec, DispatchableUnit, FleetSpec, MicrogridSpec};
use crate::uncertainty::{build_pwl_cdf, check_correlation, SigmaSpec, Source};

/// One broken invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Type that owns the field, e.g. `BatterySpec`.
    pub type_name: &'static str,
    /// Path of the offending item, e.g. `mg1/bess1`.
    pub item: String,
    pub field: String,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.item.is_empty() {
            write!(f, "{}.{}: {}", self.type_name, self.field, self.rule)
        } else {
            write!(
                f,
                "{} `{}`.{}: {}",
                self.type_name, self.item, self.field, self.rule
            )
        }
    }
}

struct Collector {
    out: Vec<Violation>,
}

impl Collector {
    fn push(&mut self, type_name: &'static str, item: &str, field: &str, rule: String) {
        self.out.push(Violation {
            type_name,
            item: item.to_string(),
            field: field.to_string(),
            rule,
        });
    }

    fn check(&mut self, ok: bool, type_name: &'static str, item: &str, field: &str, rule: impl FnOnce() -> String) {
        if !ok {
            self.push(type_name, item, field, rule());
        }
    }
}

fn finite_nonneg(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && !id.chars().any(|c| c.is_whitespace() || c == ',' || c == '"')
}

/// Checks every invariant of a fleet and returns the broken ones.
///
/// An empty result means the fleet can be handed to the scheduler.
pub fn validate_fleet(spec: &FleetSpec) -> Vec<Violation> {
    let mut c = Collector { out: Vec::new() };
    let n_t = spec.periods();
    const FLEET: &str = "FleetSpec";

    c.check(!spec.microgrids.is_empty(), FLEET, "", "microgrids", || {
        "at least one microgrid is required".into()
    });
    c.check(n_t >= 1, FLEET, "", "prices", || {
        "at least one period is required".into()
    });
    c.check(spec.prices.iter().all(|p| p.is_finite()), FLEET, "", "prices", || {
        "prices must be finite".into()
    });
    c.check(spec.dt.is_finite() && spec.dt > 0.0, FLEET, "", "dt", || {
        format!("dt must be positive, got {}", spec.dt)
    });
    c.check(
        spec.tau.is_finite() && spec.tau > 0.0 && spec.tau <= spec.dt,
        FLEET,
        "",
        "tau",
        || format!("tau must satisfy 0 < tau <= dt, got tau = {} with dt = {}", spec.tau, spec.dt),
    );
    match build_pwl_cdf(spec.pwl.segments, spec.pwl.z_max) {
        Ok(pwl) => {
            let cap = pwl.psi_cap();
            c.check(
                spec.psi_req.is_finite() && spec.psi_req >= 0.0 && spec.psi_req < cap,
                FLEET,
                "",
                "psi_req",
                || {
                    format!(
                        "psi_req must lie in [0, {cap:.6}) (the largest PSI representable with z_max = {}), got {}",
                        spec.pwl.z_max, spec.psi_req
                    )
                },
            );
        }
        Err(e) => c.push(FLEET, "", "pwl", e.to_string()),
    }

    let mut mg_ids = HashSet::new();
    for mg in &spec.microgrids {
        c.check(valid_id(&mg.id), "MicrogridSpec", &mg.id, "id", || {
            "ids must be nonempty without whitespace, commas or quotes".into()
        });
        c.check(mg_ids.insert(mg.id.as_str()), "MicrogridSpec", &mg.id, "id", || {
            "duplicate microgrid id".into()
        });
        check_microgrid(&mut c, mg, n_t);
    }
    check_uncertainty(&mut c, spec);
    c.out
}

fn check_microgrid(c: &mut Collector, mg: &MicrogridSpec, n_t: usize) {
    const MG: &str = "MicrogridSpec";
    for (field, series) in [
        ("wind_forecast", &mg.wind_forecast),
        ("pv_forecast", &mg.pv_forecast),
        ("demand_forecast", &mg.demand_forecast),
    ] {
        c.check(series.len() == n_t, MG, &mg.id, field, || {
            format!("series has {} entries, expected {n_t} (one per price period)", series.len())
        });
        c.check(series.iter().all(|&v| finite_nonneg(v)), MG, &mg.id, field, || {
            "forecasts must be finite and nonnegative".into()
        });
    }
    for (field, bound) in [("pcc_import_max", mg.pcc_import_max), ("pcc_export_max", mg.pcc_export_max)] {
        if let Some(b) = bound {
            c.check(finite_nonneg(b), MG, &mg.id, field, || {
                format!("PCC limit must be finite and nonnegative, got {b}")
            });
        }
    }
    let mut ids = HashSet::new();
    for unit in &mg.units {
        let item = format!("{}/{}", mg.id, unit.id);
        c.check(valid_id(&unit.id), "DispatchableUnit", &item, "id", || {
            "ids must be nonempty without whitespace, commas or quotes".into()
        });
        c.check(ids.insert(unit.id.as_str()), "DispatchableUnit", &item, "id", || {
            "duplicate device id within microgrid".into()
        });
        check_unit(c, unit, &item);
    }
    for bat in &mg.batteries {
        let item = format!("{}/{}", mg.id, bat.id);
        c.check(valid_id(&bat.id), "BatterySpec", &item, "id", || {
            "ids must be nonempty without whitespace, commas or quotes".into()
        });
        c.check(ids.insert(bat.id.as_str()), "BatterySpec", &item, "id", || {
            "duplicate device id within microgrid".into()
        });
        check_battery(c, bat, &item);
    }
}

fn check_unit(c: &mut Collector, u: &DispatchableUnit, item: &str) {
    const DG: &str = "DispatchableUnit";
    c.check(
        finite_nonneg(u.p_min) && u.p_max.is_finite() && u.p_min <= u.p_max,
        DG,
        item,
        "p_min",
        || format!("need 0 <= p_min <= p_max, got p_min = {}, p_max = {}", u.p_min, u.p_max),
    );
    let width: f64 = u.offer_blocks.iter().map(|b| b.width).sum();
    let span = u.p_max - u.p_min;
    c.check(
        (width - span).abs() <= 1e-9 * u.p_max.abs().max(1.0),
        DG,
        item,
        "offer_blocks",
        || format!("block widths sum to {width}, expected p_max - p_min = {span}"),
    );
    c.check(
        u.offer_blocks.iter().all(|b| finite_nonneg(b.width) && b.marginal_cost.is_finite()),
        DG,
        item,
        "offer_blocks",
        || "block widths must be nonnegative and costs finite".into(),
    );
    c.check(
        u.offer_blocks.windows(2).all(|w| w[0].marginal_cost <= w[1].marginal_cost),
        DG,
        item,
        "offer_blocks",
        || "block marginal costs must be nondecreasing (convex offer)".into(),
    );
    for (field, v) in [("ramp_up_rate", u.ramp_up_rate), ("ramp_down_rate", u.ramp_down_rate)] {
        c.check(v.is_finite() && v > 0.0, DG, item, field, || {
            format!("ramp rate must be positive, got {v}")
        });
    }
    c.check(u.min_up >= 1, DG, item, "min_up", || "min_up must be at least 1".into());
    c.check(u.min_down >= 1, DG, item, "min_down", || "min_down must be at least 1".into());
    c.check(
        (u.initial_on_periods > 0) != (u.initial_off_periods > 0),
        DG,
        item,
        "initial_on_periods",
        || "exactly one of initial_on_periods / initial_off_periods must be positive".into(),
    );
    if u.initially_on() {
        c.check(
            u.initial_power >= u.p_min && u.initial_power <= u.p_max,
            DG,
            item,
            "initial_power",
            || format!("an initially committed unit needs p_min <= initial_power <= p_max, got {}", u.initial_power),
        );
    } else {
        c.check(u.initial_power == 0.0, DG, item, "initial_power", || {
            "an initially offline unit must have initial_power = 0".into()
        });
    }
    for (field, v) in [
        ("no_load_cost", u.no_load_cost),
        ("startup_cost", u.startup_cost),
        ("reserve_up_cost", u.reserve_up_cost),
        ("reserve_dn_cost", u.reserve_dn_cost),
    ] {
        c.check(finite_nonneg(v), DG, item, field, || {
            format!("cost must be finite and nonnegative, got {v}")
        });
    }
}

fn check_battery(c: &mut Collector, b: &BatterySpec, item: &str) {
    const BAT: &str = "BatterySpec";
    c.check(
        finite_nonneg(b.soc_min) && b.soc_max.is_finite() && b.soc_min <= b.soc_max,
        BAT,
        item,
        "soc_max",
        || format!("need 0 <= soc_min <= soc_max, got {} and {}", b.soc_min, b.soc_max),
    );
    c.check(
        b.soc_initial >= b.soc_min && b.soc_initial <= b.soc_max,
        BAT,
        item,
        "soc_initial",
        || format!("need soc_min <= soc_initial <= soc_max, got {}", b.soc_initial),
    );
    for (field, v) in [("p_charge_max", b.p_charge_max), ("p_discharge_max", b.p_discharge_max)] {
        c.check(v.is_finite() && v > 0.0, BAT, item, field, || {
            format!("power limit must be positive, got {v}")
        });
    }
    for (field, v) in [("eta_c", b.eta_c), ("eta_d", b.eta_d)] {
        c.check(v > 0.0 && v <= 1.0, BAT, item, field, || {
            format!("efficiency must lie in (0, 1], got {v}")
        });
    }
    for (field, v) in [
        ("degradation_cost", b.degradation_cost),
        ("reserve_up_cost", b.reserve_up_cost),
        ("reserve_dn_cost", b.reserve_dn_cost),
    ] {
        c.check(finite_nonneg(v), BAT, item, field, || {
            format!("cost must be finite and nonnegative, got {v}")
        });
    }
    if let Some(term) = b.soc_terminal_min {
        c.check(term >= b.soc_min && term <= b.soc_max, BAT, item, "soc_terminal_min", || {
            format!("terminal SOC bound {term} must lie within [soc_min, soc_max]")
        });
    }
}

fn check_uncertainty(c: &mut Collector, spec: &FleetSpec) {
    const UM: &str = "UncertaintyModel";
    let model = &spec.uncertainty;
    let n_m = spec.microgrids.len();
    let n_t = spec.periods();
    if model.microgrids.len() != n_m {
        c.push(
            UM,
            "",
            "microgrids",
            format!("{} entries, expected one per microgrid ({n_m})", model.microgrids.len()),
        );
        return;
    }
    for (mg, errs) in spec.microgrids.iter().zip(&model.microgrids) {
        for source in Source::ALL {
            let field = format!("{}_sigma", source.name());
            match errs.sigma_spec(source) {
                SigmaSpec::Fraction(f) => c.check(finite_nonneg(*f), UM, &mg.id, &field, || {
                    format!("sigma fraction must be finite and nonnegative, got {f}")
                }),
                SigmaSpec::Absolute(series) => {
                    c.check(series.len() == n_t, UM, &mg.id, &field, || {
                        format!("series has {} entries, expected {n_t}", series.len())
                    });
                    c.check(series.iter().all(|&v| finite_nonneg(v)), UM, &mg.id, &field, || {
                        "sigmas must be finite and nonnegative".into()
                    });
                }
            }
            if let Some(mean) = errs.mean_series(source) {
                let field = format!("{}_mean", source.name());
                c.check(mean.len() == n_t, UM, &mg.id, &field, || {
                    format!("series has {} entries, expected {n_t}", mean.len())
                });
                c.check(mean.iter().all(|v| v.is_finite()), UM, &mg.id, &field, || {
                    "means must be finite".into()
                });
            }
        }
    }
    for source in Source::ALL {
        if let Some(corr) = model.correlation(source) {
            if let Err(e) = check_correlation(corr, n_m) {
                c.push(UM, "", &format!("corr_{}", source.name()), e.to_string());
            }
        }
    }
}
