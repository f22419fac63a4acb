use super::UncertaintyError;

/// Pivots below this magnitude are treated as exact zeros by the
/// semidefinite factorization.
const PIVOT_TOL: f64 = 1e-10;

/// Checks that `corr` is an `n × n` correlation matrix: symmetric, unit
/// diagonal, entries in `[-1, 1]` and positive semidefinite.
pub fn check_correlation(corr: &[Vec<f64>], n: usize) -> Result<(), UncertaintyError> {
    if corr.len() != n {
        return Err(UncertaintyError::DimensionMismatch {
            what: "correlation matrix rows",
            expected: n,
            found: corr.len(),
        });
    }
    for (i, row) in corr.iter().enumerate() {
        if row.len() != n {
            return Err(UncertaintyError::DimensionMismatch {
                what: "correlation matrix columns",
                expected: n,
                found: row.len(),
            });
        }
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() || !(-1.0..=1.0).contains(&v) {
                return Err(UncertaintyError::OutOfRange { row: i, col: j, value: v });
            }
            if (v - corr[j][i]).abs() > 1e-12 {
                return Err(UncertaintyError::NotSymmetric { row: i, col: j });
            }
        }
        if (row[i] - 1.0).abs() > 1e-12 {
            return Err(UncertaintyError::BadDiagonal { index: i, value: row[i] });
        }
    }
    semidefinite_cholesky(corr).map(|_| ())
}

/// Lower-triangular `L` with `L Lᵀ = corr` for a positive semidefinite matrix.
///
/// Columns whose pivot vanishes are left at zero, which is what makes a
/// perfectly correlated matrix reproduce identical components. A negative
/// pivot, or a zero pivot with a nonzero remainder below it, means the matrix
/// is not PSD and is rejected.
pub fn semidefinite_cholesky(corr: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, UncertaintyError> {
    let n = corr.len();
    let mut l = vec![vec![0.0; n]; n];
    for j in 0..n {
        let d = corr[j][j] - (0..j).map(|k| l[j][k] * l[j][k]).sum::<f64>();
        if d < -PIVOT_TOL {
            return Err(UncertaintyError::NotPsd { pivot: j, value: d });
        }
        if d <= PIVOT_TOL {
            for i in j + 1..n {
                let r = corr[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
                if r.abs() > 1e-8 {
                    return Err(UncertaintyError::NotPsd { pivot: j, value: d });
                }
            }
            continue;
        }
        let root = d.sqrt();
        l[j][j] = root;
        for i in j + 1..n {
            let r = corr[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            l[i][j] = r / root;
        }
    }
    Ok(l)
}

/// Standard deviation of the sum of correlated zero-mean Gaussians:
/// `sqrt(Σ_n Σ_n' corr[n][n'] σ_n σ_n')`.
pub fn aggregate_sigma(sigmas: &[f64], corr: &[Vec<f64>]) -> Result<f64, UncertaintyError> {
    check_correlation(corr, sigmas.len())?;
    if let Some(&s) = sigmas.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
        return Err(UncertaintyError::NegativeSigma(s));
    }
    let mut var = 0.0;
    for (i, si) in sigmas.iter().enumerate() {
        for (j, sj) in sigmas.iter().enumerate() {
            var += corr[i][j] * si * sj;
        }
    }
    Ok(var.max(0.0).sqrt())
}

/// `n × n` matrix with unit diagonal and `rho` elsewhere.
pub fn uniform_correlation(n: usize, rho: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { rho }).collect())
        .collect()
}

/// Principal submatrix on `members`.
pub fn restrict(corr: &[Vec<f64>], members: &[usize]) -> Vec<Vec<f64>> {
    members
        .iter()
        .map(|&i| members.iter().map(|&j| corr[i][j]).collect())
        .collect()
}
