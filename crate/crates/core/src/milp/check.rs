use super::{MilpModel, RowSense, VarKind};

/// Worst violations of an assignment against a model.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolutionResiduals {
    /// Largest row violation divided by `max(1, |rhs|)`.
    pub max_row: f64,
    pub worst_row: Option<String>,
    pub max_bound: f64,
    /// Largest distance of a binary variable from {0, 1}.
    pub max_integrality: f64,
}

impl SolutionResiduals {
    pub fn within(&self, tol: f64) -> bool {
        self.max_row <= tol && self.max_bound <= tol && self.max_integrality <= tol
    }
}

/// Re-evaluates every row, bound and integrality requirement.
pub fn check_solution(model: &MilpModel, values: &[f64]) -> SolutionResiduals {
    let mut res = SolutionResiduals::default();
    for c in model.constraints() {
        let lhs: f64 = c.terms.iter().map(|&(v, a)| a * values[v.index()]).sum();
        let viol = match c.sense {
            RowSense::Le => lhs - c.rhs,
            RowSense::Ge => c.rhs - lhs,
            RowSense::Eq => (lhs - c.rhs).abs(),
        }
        .max(0.0)
            / c.rhs.abs().max(1.0);
        if viol > res.max_row {
            res.max_row = viol;
            res.worst_row = Some(c.name.clone());
        }
    }
    for (var, &x) in model.variables().iter().zip(values) {
        let viol = (var.lb - x).max(x - var.ub).max(0.0);
        res.max_bound = res.max_bound.max(viol);
        if var.kind == VarKind::Binary {
            res.max_integrality = res.max_integrality.max((x - x.round()).abs());
        }
    }
    res
}
