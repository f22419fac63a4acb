//! Solver backends. Both are HiGHS: one passes the model through the C API,
//! the other writes fixed MPS and lets HiGHS's own reader parse it.

use std::collections::HashMap;
use std::ffi::{c_void, CStr, CString};
use std::os::raw::c_char;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use highs::{HighsModelStatus, RowProblem, Sense};

use super::{write_mps, MilpError, MilpModel, MilpSolution, RowSense, SolveStatus, VarKind};

/// Environment variable naming the backend (`highs` or `highs-mps`).
pub const BACKEND_ENV: &str = "NMG_MILP_BACKEND";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Relative MIP gap at which the search stops.
    pub rel_gap: f64,
    /// Seconds; `None` for no limit.
    pub time_limit: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            rel_gap: 1e-3,
            time_limit: None,
        }
    }
}

pub trait MilpBackend: Send + Sync {
    fn name(&self) -> &'static str;

    fn solve(&self, model: &MilpModel, opts: &SolveOptions) -> Result<MilpSolution, MilpError>;
}

/// HiGHS through its C API.
#[derive(Debug, Clone, Copy, Default)]
pub struct HighsBackend;

/// HiGHS reading the model back from an MPS file written by [`write_mps`].
#[derive(Debug, Clone, Copy, Default)]
pub struct HighsMpsBackend;

pub fn backend_by_name(name: &str) -> Result<Box<dyn MilpBackend>, MilpError> {
    match name {
        "highs" => Ok(Box::new(HighsBackend)),
        "highs-mps" => Ok(Box::new(HighsMpsBackend)),
        other => Err(MilpError::Unavailable(other.to_string())),
    }
}

/// Backend selected by [`BACKEND_ENV`], defaulting to `highs`.
pub fn backend_from_env() -> Result<Box<dyn MilpBackend>, MilpError> {
    match std::env::var(BACKEND_ENV) {
        Ok(name) if !name.is_empty() => backend_by_name(&name),
        _ => Ok(Box::new(HighsBackend)),
    }
}

/// Solves with the environment-selected backend.
pub fn solve(model: &MilpModel, rel_gap: f64, time_limit: Option<f64>) -> Result<MilpSolution, MilpError> {
    backend_from_env()?.solve(model, &SolveOptions { rel_gap, time_limit })
}

fn check_options(opts: &SolveOptions) -> Result<(), MilpError> {
    if !(opts.rel_gap >= 0.0) {
        return Err(MilpError::Backend(format!("relative gap must be >= 0, got {}", opts.rel_gap)));
    }
    if let Some(t) = opts.time_limit {
        if !(t > 0.0) {
            return Err(MilpError::Backend(format!("time limit must be positive, got {t}")));
        }
    }
    Ok(())
}

fn classify(
    status: HighsModelStatus,
    has_primal: bool,
) -> Result<SolveStatus, MilpError> {
    use HighsModelStatus as H;
    Ok(match status {
        H::Optimal => SolveStatus::Optimal,
        H::ModelEmpty => SolveStatus::Optimal,
        H::Infeasible => SolveStatus::Infeasible,
        H::Unbounded => SolveStatus::Unbounded,
        H::ReachedTimeLimit if has_primal => SolveStatus::FeasibleGap,
        H::ReachedTimeLimit => return Err(MilpError::TimeLimitNoIncumbent),
        H::ReachedIterationLimit | H::ReachedSolutionLimit | H::ReachedInterrupt if has_primal => {
            SolveStatus::FeasibleGap
        }
        H::UnboundedOrInfeasible => SolveStatus::Error,
        _ => SolveStatus::Error,
    })
}

fn achieved_gap(model: &MilpModel, reported: f64) -> f64 {
    if model.num_binaries() == 0 || !reported.is_finite() {
        0.0
    } else {
        reported.max(0.0)
    }
}

impl HighsBackend {
    fn run(&self, model: &MilpModel, opts: &SolveOptions, presolve: bool) -> Result<MilpSolution, MilpError> {
        let start = Instant::now();
        let mut pb = RowProblem::default();
        let mut cost = vec![0.0; model.variables().len()];
        for &(v, c) in model.objective() {
            cost[v.index()] = c;
        }
        let cols: Vec<highs::Col> = model
            .variables()
            .iter()
            .zip(&cost)
            .map(|(v, &c)| match v.kind {
                VarKind::Continuous => pb.add_column(c, v.lb..=v.ub),
                VarKind::Binary => pb.add_integer_column(c, v.lb..=v.ub),
            })
            .collect();
        for row in model.constraints() {
            let terms: Vec<(highs::Col, f64)> = row.terms.iter().map(|&(v, c)| (cols[v.index()], c)).collect();
            match row.sense {
                RowSense::Le => pb.add_row(..=row.rhs, &terms),
                RowSense::Ge => pb.add_row(row.rhs.., &terms),
                RowSense::Eq => pb.add_row(row.rhs..=row.rhs, &terms),
            }
        }
        let mut hm = pb.optimise(Sense::Minimise);
        hm.make_quiet();
        hm.set_option("mip_rel_gap", opts.rel_gap);
        hm.set_option("threads", 1);
        if let Some(t) = opts.time_limit {
            hm.set_option("time_limit", t);
        }
        if !presolve {
            hm.set_option("presolve", "off");
        }
        let solved = hm
            .try_solve()
            .map_err(|s| MilpError::Backend(format!("HiGHS run failed: {s:?}")))?;
        let has_primal = solved.primal_solution_status() == highs::HighsSolutionStatus::Feasible;
        let status = classify(solved.status(), has_primal)?;
        let wall_time = start.elapsed().as_secs_f64();
        if !status.has_solution() {
            return Ok(MilpSolution::without_values(status, wall_time));
        }
        let values = solved.get_solution().columns().to_vec();
        Ok(MilpSolution {
            status,
            objective: model.evaluate_objective(&values),
            gap: achieved_gap(model, solved.mip_gap()),
            values: Some(values),
            wall_time,
        })
    }
}

impl MilpBackend for HighsBackend {
    fn name(&self) -> &'static str {
        "highs"
    }

    fn solve(&self, model: &MilpModel, opts: &SolveOptions) -> Result<MilpSolution, MilpError> {
        check_options(opts)?;
        let sol = self.run(model, opts, true)?;
        if sol.status == SolveStatus::Error {
            // presolve sometimes stops at "infeasible or unbounded"
            return self.run(model, opts, false);
        }
        Ok(sol)
    }
}

struct RawHighs(*mut c_void);

impl RawHighs {
    fn new() -> Self {
        RawHighs(unsafe { highs_sys::Highs_create() })
    }

    fn set_double(&self, name: &str, v: f64) {
        let c = CString::new(name).unwrap();
        unsafe { highs_sys::Highs_setDoubleOptionValue(self.0, c.as_ptr(), v) };
    }

    fn set_int(&self, name: &str, v: i32) {
        let c = CString::new(name).unwrap();
        unsafe { highs_sys::Highs_setIntOptionValue(self.0, c.as_ptr(), v as highs_sys::HighsInt) };
    }

    fn set_bool(&self, name: &str, v: bool) {
        let c = CString::new(name).unwrap();
        unsafe { highs_sys::Highs_setBoolOptionValue(self.0, c.as_ptr(), v as highs_sys::HighsInt) };
    }

    fn double_info(&self, name: &str) -> f64 {
        let c = CString::new(name).unwrap();
        let mut v = f64::NAN;
        unsafe { highs_sys::Highs_getDoubleInfoValue(self.0, c.as_ptr(), &mut v) };
        v
    }

    fn int_info(&self, name: &str) -> i64 {
        let c = CString::new(name).unwrap();
        let mut v: highs_sys::HighsInt = -1;
        unsafe { highs_sys::Highs_getIntInfoValue(self.0, c.as_ptr(), &mut v) };
        v as i64
    }

    fn col_name(&self, j: usize) -> String {
        let mut buf = vec![0 as c_char; 1024];
        unsafe {
            highs_sys::Highs_getColName(self.0, j as highs_sys::HighsInt, buf.as_mut_ptr());
            CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
        }
    }
}

impl Drop for RawHighs {
    fn drop(&mut self) {
        unsafe { highs_sys::Highs_destroy(self.0) };
    }
}

fn scratch_path() -> PathBuf {
    static COUNTER: AtomicUsize = AtomicUsize::new(0);
    let k = COUNTER.fetch_add(1, Ordering::Relaxed);
    std::env::temp_dir().join(format!("nmg-{}-{k}.mps", std::process::id()))
}

impl MilpBackend for HighsMpsBackend {
    fn name(&self) -> &'static str {
        "highs-mps"
    }

    fn solve(&self, model: &MilpModel, opts: &SolveOptions) -> Result<MilpSolution, MilpError> {
        check_options(opts)?;
        let start = Instant::now();
        let path = scratch_path();
        let names = write_mps(model, &path)?;
        let highs = RawHighs::new();
        highs.set_bool("output_flag", false);
        highs.set_double("mip_rel_gap", opts.rel_gap);
        highs.set_int("threads", 1);
        if let Some(t) = opts.time_limit {
            highs.set_double("time_limit", t);
        }
        let cpath = CString::new(path.to_string_lossy().as_bytes()).unwrap();
        let read = unsafe { highs_sys::Highs_readModel(highs.0, cpath.as_ptr()) };
        let _ = std::fs::remove_file(&path);
        let mut side = path.into_os_string();
        side.push(".names.csv");
        let _ = std::fs::remove_file(side);
        if read == highs_sys::STATUS_ERROR {
            return Err(MilpError::Backend("HiGHS could not read the exported MPS file".into()));
        }
        unsafe { highs_sys::Highs_run(highs.0) };
        let raw_status = unsafe { highs_sys::Highs_getModelStatus(highs.0) };
        let status = HighsModelStatus::try_from(raw_status)
            .map_err(|e| MilpError::Backend(format!("{e:?}")))?;
        let has_primal = highs.int_info("primal_solution_status") == 2;
        let status = classify(status, has_primal)?;
        let wall_time = start.elapsed().as_secs_f64();
        if !status.has_solution() {
            return Ok(MilpSolution::without_values(status, wall_time));
        }
        let n = unsafe { highs_sys::Highs_getNumCol(highs.0) } as usize;
        let m = unsafe { highs_sys::Highs_getNumRow(highs.0) } as usize;
        let mut col = vec![0.0; n];
        let mut col_dual = vec![0.0; n];
        let mut row = vec![0.0; m];
        let mut row_dual = vec![0.0; m];
        unsafe {
            highs_sys::Highs_getSolution(
                highs.0,
                col.as_mut_ptr(),
                col_dual.as_mut_ptr(),
                row.as_mut_ptr(),
                row_dual.as_mut_ptr(),
            )
        };
        let index: HashMap<&str, usize> = names
            .columns
            .iter()
            .enumerate()
            .map(|(j, s)| (s.as_str(), j))
            .collect();
        let mut values = vec![f64::NAN; model.variables().len()];
        for (j, &v) in col.iter().enumerate() {
            let name = highs.col_name(j);
            match index.get(name.as_str()) {
                Some(&k) => values[k] = v,
                None => return Err(MilpError::Backend(format!("unexpected column `{name}` in re-read model"))),
            }
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(MilpError::Backend("re-read model lost columns".into()));
        }
        Ok(MilpSolution {
            status,
            objective: model.evaluate_objective(&values),
            gap: achieved_gap(model, highs.double_info("mip_gap")),
            values: Some(values),
            wall_time,
        })
    }
}
