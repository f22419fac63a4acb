use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use nmg_core::milp::write_mps;
use nmg_core::scheduler::fleet_pwl;
use nmg_core::{
    audit_schedule, build_milp, estimate_psi, net_error_distribution, solve_independent_set, solve_schedule,
    FleetSpec, Mode, Schedule,
};
use rayon::prelude::*;

use crate::output::{cell, create, text};

pub struct Settings {
    pub gap: f64,
    pub time_limit: Option<f64>,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub timestamp: bool,
}

impl Settings {
    fn file(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn prepare(&self) -> anyhow::Result<()> {
        fs::create_dir_all(&self.out_dir).with_context(|| format!("cannot create {}", self.out_dir.display()))
    }
}

const AUDIT_TOL: f64 = 1e-6;

pub fn solve(fleet: &FleetSpec, s: &Settings, samples: usize) -> anyhow::Result<()> {
    s.prepare()?;
    let schedule = solve_schedule(fleet, s.gap, s.time_limit)?;
    let mut w = create(&s.file("schedule.csv"), s.timestamp)?;
    schedule.write_csv(&mut w)?;
    w.flush()?;
    let mut w = create(&s.file("cost.csv"), s.timestamp)?;
    schedule.write_cost_csv(&mut w)?;
    w.flush()?;

    let reports = estimate_psi(&schedule, fleet, samples, s.seed)?;
    for r in &reports {
        let mut w = create(&s.file(&format!("validation_{}.csv", r.island)), s.timestamp)?;
        r.write_csv(&mut w)?;
        w.flush()?;
    }
    let audit = audit_schedule(&schedule, fleet);
    let mut w = create(&s.file("audit.csv"), s.timestamp)?;
    audit.write_csv(&mut w)?;
    w.flush()?;

    println!(
        "{} schedule: status {}, total cost ${:.4} (gap {:.2e}, {:.2} s)",
        fleet.mode, schedule.status, schedule.cost.total, schedule.gap, schedule.solve_time
    );
    for (name, v) in schedule.cost.categories() {
        println!("  {name:<14} {v:>12.4}");
    }
    for r in &reports {
        println!(
            "island {}: min PSI model {:.4}, exact {:.4}, empirical {:.4} ({} draws) -> {}",
            r.island,
            r.min_model(),
            r.min_exact(),
            r.min_empirical(),
            r.samples,
            if r.passed() { "pass" } else { "FAIL" }
        );
    }
    if audit.is_clean(AUDIT_TOL) {
        println!("audit: clean (max residual {:.2e})", audit.max_residual());
    } else {
        println!(
            "audit: flagged {:?}, integrality {:.2e}, {} min up/down violations",
            audit.flagged(AUDIT_TOL),
            audit.integrality,
            audit.min_time.len()
        );
    }
    println!("wrote {}", s.out_dir.display());
    Ok(())
}

/// Outcome of one mode at one sweep point.
struct ModeResult {
    cost: f64,
    min_model: f64,
    min_exact: f64,
    min_empirical: f64,
    seconds: f64,
}

fn validated(schedule: &Schedule, fleet: &FleetSpec, samples: usize, seed: u64) -> anyhow::Result<[f64; 3]> {
    let mut mins = [f64::INFINITY; 3];
    for r in estimate_psi(schedule, fleet, samples, seed)? {
        mins[0] = mins[0].min(r.min_model());
        mins[1] = mins[1].min(r.min_exact());
        mins[2] = mins[2].min(r.min_empirical());
    }
    Ok(mins)
}

fn networked(fleet: &FleetSpec, s: &Settings, samples: usize) -> anyhow::Result<ModeResult> {
    let mut f = fleet.clone();
    f.mode = Mode::Networked;
    let start = Instant::now();
    let schedule = solve_schedule(&f, s.gap, s.time_limit)?;
    let seconds = start.elapsed().as_secs_f64();
    let [min_model, min_exact, min_empirical] = validated(&schedule, &f, samples, s.seed)?;
    Ok(ModeResult {
        cost: schedule.cost.total,
        min_model,
        min_exact,
        min_empirical,
        seconds,
    })
}

fn independent(fleet: &FleetSpec, s: &Settings, samples: usize) -> anyhow::Result<ModeResult> {
    let start = Instant::now();
    let set = solve_independent_set(fleet, s.gap, s.time_limit)?;
    let seconds = start.elapsed().as_secs_f64();
    let mut mins = [f64::INFINITY; 3];
    for (n, schedule) in set.schedules.iter().enumerate() {
        let m = validated(schedule, &fleet.single(n), samples, s.seed)?;
        for k in 0..3 {
            mins[k] = mins[k].min(m[k]);
        }
    }
    Ok(ModeResult {
        cost: set.total_cost,
        min_model: mins[0],
        min_exact: mins[1],
        min_empirical: mins[2],
        seconds,
    })
}

struct Point {
    axis: f64,
    extra: Option<f64>,
    net: Result<ModeResult, String>,
    ind: Result<ModeResult, String>,
}

fn check_grid(name: &str, grid: &[f64], lo: f64, hi: f64, hi_inclusive: bool) -> anyhow::Result<()> {
    if grid.is_empty() {
        bail!("--{name} is empty");
    }
    for &x in grid {
        let above = if hi_inclusive { x > hi } else { x >= hi };
        if !x.is_finite() || x < lo || above {
            bail!("--{name} value {x} is outside [{lo}, {hi}{}", if hi_inclusive { "]" } else { ")" });
        }
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        bail!("--{name} must be strictly increasing");
    }
    Ok(())
}

fn evaluate(points: Vec<(f64, FleetSpec)>, s: &Settings, jobs: usize, samples: usize) -> anyhow::Result<Vec<Point>> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?;
    Ok(pool.install(|| {
        points
            .into_par_iter()
            .map(|(axis, fleet)| {
                let extra = net_error_distribution(&fleet, Mode::Networked, None)
                    .ok()
                    .map(|d| d.periods.iter().map(|p| p.sigma).fold(0.0, f64::max));
                let net = networked(&fleet, s, samples).map_err(|e| format!("{e:#}"));
                let ind = independent(&fleet, s, samples).map_err(|e| format!("{e:#}"));
                Point { axis, extra, net, ind }
            })
            .collect()
    }))
}

fn write_sweep(path: &Path, timing: &Path, axis: &str, extra: Option<&str>, points: &[Point], s: &Settings) -> anyhow::Result<()> {
    let mut w = create(path, s.timestamp)?;
    let mut header = vec![axis.to_string()];
    header.extend(extra.map(String::from));
    header.extend(
        [
            "networked_cost",
            "independent_cost",
            "cost_gap",
            "networked_min_model_psi",
            "networked_min_exact_psi",
            "networked_min_empirical_psi",
            "independent_min_model_psi",
            "independent_min_exact_psi",
            "independent_min_empirical_psi",
            "status",
        ]
        .map(String::from),
    );
    writeln!(w, "{}", header.join(","))?;
    for p in points {
        let net = p.net.as_ref().ok();
        let ind = p.ind.as_ref().ok();
        let mut row = vec![cell(Some(p.axis))];
        if extra.is_some() {
            row.push(cell(p.extra));
        }
        row.push(cell(net.map(|r| r.cost)));
        row.push(cell(ind.map(|r| r.cost)));
        row.push(cell(net.zip(ind).map(|(n, i)| i.cost - n.cost)));
        for r in [net, ind] {
            row.push(cell(r.map(|r| r.min_model)));
            row.push(cell(r.map(|r| r.min_exact)));
            row.push(cell(r.map(|r| r.min_empirical)));
        }
        let status = match (&p.net, &p.ind) {
            (Ok(_), Ok(_)) => "ok".to_string(),
            (Err(e), Ok(_)) => format!("networked failed: {}", text(e)),
            (Ok(_), Err(e)) => format!("independent failed: {}", text(e)),
            (Err(a), Err(b)) => format!("networked failed: {}; independent failed: {}", text(a), text(b)),
        };
        row.push(status);
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;

    // wall times vary run to run, so they stay out of the result table
    let mut w = create(timing, s.timestamp)?;
    writeln!(w, "{axis},networked_seconds,independent_seconds")?;
    for p in points {
        writeln!(
            w,
            "{},{},{}",
            cell(Some(p.axis)),
            cell(p.net.as_ref().ok().map(|r| r.seconds)),
            cell(p.ind.as_ref().ok().map(|r| r.seconds))
        )?;
    }
    w.flush()?;
    Ok(())
}

fn print_points(axis: &str, points: &[Point]) {
    println!("{axis:>8} {:>14} {:>14} {:>10}", "networked", "independent", "gap");
    for p in points {
        match (&p.net, &p.ind) {
            (Ok(n), Ok(i)) => println!("{:>8.3} {:>14.4} {:>14.4} {:>10.4}", p.axis, n.cost, i.cost, i.cost - n.cost),
            (n, i) => {
                println!("{:>8.3} failed", p.axis);
                for e in [n.as_ref().err(), i.as_ref().err()].into_iter().flatten() {
                    eprintln!("  {e}");
                }
            }
        }
    }
}

pub fn sweep_psi(fleet: &FleetSpec, s: &Settings, grid: &[f64], jobs: usize, samples: usize) -> anyhow::Result<()> {
    let cap = fleet_pwl(fleet)?.psi_cap();
    check_grid("psi-grid", grid, 0.0, cap, false)?;
    s.prepare()?;
    let points = grid
        .iter()
        .map(|&q| {
            let mut f = fleet.clone();
            f.psi_req = q;
            (q, f)
        })
        .collect();
    let points = evaluate(points, s, jobs, samples)?;
    write_sweep(&s.file("sweep_psi.csv"), &s.file("sweep_psi_timing.csv"), "psi_req", None, &points, s)?;
    print_points("psi_req", &points);
    println!("wrote {}", s.file("sweep_psi.csv").display());
    Ok(())
}

pub fn sweep_corr(fleet: &FleetSpec, s: &Settings, grid: &[f64], jobs: usize, samples: usize) -> anyhow::Result<()> {
    check_grid("rho-grid", grid, 0.0, 1.0, true)?;
    s.prepare()?;
    let points = grid
        .iter()
        .map(|&rho| {
            let mut f = fleet.clone();
            f.uncertainty.set_uniform_correlation(rho);
            (rho, f)
        })
        .collect();
    let points = evaluate(points, s, jobs, samples)?;
    write_sweep(
        &s.file("sweep_corr.csv"),
        &s.file("sweep_corr_timing.csv"),
        "rho",
        Some("networked_sigma_peak"),
        &points,
        s,
    )?;
    print_points("rho", &points);
    let ind: Vec<f64> = points.iter().filter_map(|p| p.ind.as_ref().ok().map(|r| r.cost)).collect();
    if let (Some(lo), Some(hi)) = (
        ind.iter().copied().reduce(f64::min),
        ind.iter().copied().reduce(f64::max),
    ) {
        if hi - lo > 2.0 * s.gap * hi.abs() + 1e-6 {
            eprintln!("warning: independent cost varies with rho ({lo:.6} .. {hi:.6}) beyond the gap slack");
        }
    }
    println!("wrote {}", s.file("sweep_corr.csv").display());
    Ok(())
}

pub fn export_mps(fleet: &FleetSpec, out: &Path) -> anyhow::Result<()> {
    let pwl = fleet_pwl(fleet)?;
    let built = build_milp(fleet, &pwl)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    write_mps(&built.model, out)?;
    println!(
        "wrote {} ({} columns, {} rows, {} binaries) and its .names.csv name map",
        out.display(),
        built.model.variables().len(),
        built.model.constraints().len(),
        built.model.num_binaries()
    );
    Ok(())
}
