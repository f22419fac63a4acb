//! Solver-agnostic mixed-integer linear programs.
//!
//! [`MilpModel`] is a plain sparse representation: named variables with
//! bounds and integrality, named linear rows and a minimization objective.
//! Backends implementing [`MilpBackend`] turn it into a [`MilpSolution`];
//! [`write_mps`] exports it in fixed MPS format.

mod backend;
mod check;
mod mps;

pub use backend::{
    backend_by_name, backend_from_env, solve, HighsBackend, HighsMpsBackend, MilpBackend,
    SolveOptions, BACKEND_ENV,
};
pub use check::{check_solution, SolutionResiduals};
pub use mps::{write_mps, write_mps_to, NameMap};

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MilpError {
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("duplicate constraint name `{0}`")]
    DuplicateConstraint(String),
    #[error("`{context}` references unknown variable #{index}")]
    UnknownVariable { context: String, index: usize },
    #[error("non-finite coefficient in `{0}`")]
    NonFinite(String),
    #[error("variable `{name}` has invalid bounds [{lb}, {ub}]")]
    BadBounds { name: String, lb: f64, ub: f64 },
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("solver backend `{0}` is not available")]
    Unavailable(String),
    #[error("solver backend error: {0}")]
    Backend(String),
    #[error("time limit reached before any feasible solution was found")]
    TimeLimitNoIncumbent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lb: f64,
    pub ub: f64,
    pub kind: VarKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for RowSense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RowSense::Le => "<=",
            RowSense::Ge => ">=",
            RowSense::Eq => "=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

/// A minimization MILP.
#[derive(Debug, Clone, Default)]
pub struct MilpModel {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Vec<(VarId, f64)>,
    var_names: HashMap<String, VarId>,
    row_names: HashMap<String, usize>,
}

/// Sums repeated variables and drops exact zeros, keeping first-seen order.
fn merge_terms(terms: impl IntoIterator<Item = (VarId, f64)>) -> Vec<(VarId, f64)> {
    let mut merged: Vec<(VarId, f64)> = Vec::new();
    let mut slot: HashMap<VarId, usize> = HashMap::new();
    for (v, c) in terms {
        match slot.get(&v) {
            Some(&k) => merged[k].1 += c,
            None => {
                slot.insert(v, merged.len());
                merged.push((v, c));
            }
        }
    }
    merged.retain(|&(_, c)| c != 0.0);
    merged
}

impl MilpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(
        &mut self,
        name: impl Into<String>,
        lb: f64,
        ub: f64,
        kind: VarKind,
    ) -> Result<VarId, MilpError> {
        let name = name.into();
        if self.var_names.contains_key(&name) {
            return Err(MilpError::DuplicateVariable(name));
        }
        let bad = lb.is_nan()
            || ub.is_nan()
            || lb > ub
            || lb == f64::INFINITY
            || ub == f64::NEG_INFINITY
            || (kind == VarKind::Binary && (lb < 0.0 || ub > 1.0));
        if bad {
            return Err(MilpError::BadBounds { name, lb, ub });
        }
        let id = VarId(self.variables.len());
        self.var_names.insert(name.clone(), id);
        self.variables.push(Variable { name, lb, ub, kind });
        Ok(id)
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lb: f64, ub: f64) -> Result<VarId, MilpError> {
        self.add_variable(name, lb, ub, VarKind::Continuous)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> Result<VarId, MilpError> {
        self.add_variable(name, 0.0, 1.0, VarKind::Binary)
    }

    fn check_terms(&self, context: &str, terms: &[(VarId, f64)]) -> Result<(), MilpError> {
        for &(v, c) in terms {
            if v.0 >= self.variables.len() {
                return Err(MilpError::UnknownVariable {
                    context: context.to_string(),
                    index: v.0,
                });
            }
            if !c.is_finite() {
                return Err(MilpError::NonFinite(context.to_string()));
            }
        }
        Ok(())
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (VarId, f64)>,
        sense: RowSense,
        rhs: f64,
    ) -> Result<usize, MilpError> {
        let name = name.into();
        if self.row_names.contains_key(&name) {
            return Err(MilpError::DuplicateConstraint(name));
        }
        let terms: Vec<_> = terms.into_iter().collect();
        self.check_terms(&name, &terms)?;
        if !rhs.is_finite() {
            return Err(MilpError::NonFinite(name));
        }
        let idx = self.constraints.len();
        self.row_names.insert(name.clone(), idx);
        self.constraints.push(Constraint {
            name,
            terms: merge_terms(terms),
            sense,
            rhs,
        });
        Ok(idx)
    }

    pub fn set_objective(&mut self, terms: impl IntoIterator<Item = (VarId, f64)>) -> Result<(), MilpError> {
        let terms: Vec<_> = terms.into_iter().collect();
        self.check_terms("objective", &terms)?;
        self.objective = merge_terms(terms);
        Ok(())
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.var_names.get(name).copied()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn constraint_by_name(&self, name: &str) -> Option<&Constraint> {
        self.row_names.get(name).map(|&i| &self.constraints[i])
    }

    pub fn objective(&self) -> &[(VarId, f64)] {
        &self.objective
    }

    pub fn num_binaries(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    /// Objective value of a full assignment.
    pub fn evaluate_objective(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * values[v.0]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// Stopped (time limit) with an incumbent whose gap exceeds the request.
    FeasibleGap,
    Infeasible,
    Unbounded,
    Error,
}

impl SolveStatus {
    pub fn has_solution(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::FeasibleGap)
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::FeasibleGap => "feasible-gap",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::Error => "error",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub status: SolveStatus,
    /// Objective value, $; NaN without a solution.
    pub objective: f64,
    /// Values indexed by [`VarId`]; present iff the status carries a solution.
    pub values: Option<Vec<f64>>,
    /// Relative gap reported by the backend.
    pub gap: f64,
    pub wall_time: f64,
}

impl MilpSolution {
    pub fn without_values(status: SolveStatus, wall_time: f64) -> Self {
        Self {
            status,
            objective: f64::NAN,
            values: None,
            gap: f64::NAN,
            wall_time,
        }
    }

    pub fn value(&self, id: VarId) -> Option<f64> {
        self.values.as_ref().map(|v| v[id.0])
    }

    pub fn value_by_name(&self, model: &MilpModel, name: &str) -> Option<f64> {
        model.var_by_name(name).and_then(|id| self.value(id))
    }
}
