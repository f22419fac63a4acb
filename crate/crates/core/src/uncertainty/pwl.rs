use super::normal::{density, phi};
use super::UncertaintyError;

/// Chord interpolation of the standard normal CDF on a uniform grid over
/// `[-z_max, z_max]`, clamped to the end values outside the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PwlCdf {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

/// One linear piece `value(z) = base + slope · (z - lo)` on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PwlInterval {
    pub lo: f64,
    pub hi: f64,
    pub base: f64,
    pub slope: f64,
}

impl PwlCdf {
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn segments(&self) -> usize {
        self.slopes.len()
    }

    pub fn z_max(&self) -> f64 {
        self.breakpoints[self.breakpoints.len() - 1]
    }

    /// Largest PSI the approximation can represent: `Φ(z_max) − Φ(−z_max)`.
    pub fn psi_cap(&self) -> f64 {
        self.values[self.values.len() - 1] - self.values[0]
    }

    pub fn eval(&self, z: f64) -> f64 {
        let n = self.slopes.len();
        if z <= self.breakpoints[0] {
            return self.values[0];
        }
        if z >= self.breakpoints[n] {
            return self.values[n];
        }
        let width = self.breakpoints[1] - self.breakpoints[0];
        let k = (((z - self.breakpoints[0]) / width).floor() as usize).min(n - 1);
        self.values[k] + self.slopes[k] * (z - self.breakpoints[k])
    }

    /// Upper bound on `|eval(z) − Φ(z)|` over the whole real line.
    ///
    /// Inside the grid the chord error is at most `h²/8 · max|Φ''|` with
    /// `max|Φ''| = φ(1)`; outside, the clamp misses at most the tail mass
    /// `Φ(−z_max)`.
    pub fn error_bound(&self) -> f64 {
        let h = self.breakpoints[1] - self.breakpoints[0];
        let interior = h * h / 8.0 * density(1.0);
        interior.max(self.values[0])
    }

    /// The `segments + 2` pieces used by the MILP embedding, with the two
    /// slope-0 end pieces stretched to `[reach_lo, z_0]` and `[z_N, reach_hi]`.
    pub fn intervals(&self, reach_lo: f64, reach_hi: f64) -> Vec<PwlInterval> {
        let n = self.slopes.len();
        let mut out = Vec::with_capacity(n + 2);
        out.push(PwlInterval {
            lo: reach_lo.min(self.breakpoints[0]),
            hi: self.breakpoints[0],
            base: self.values[0],
            slope: 0.0,
        });
        for k in 0..n {
            out.push(PwlInterval {
                lo: self.breakpoints[k],
                hi: self.breakpoints[k + 1],
                base: self.values[k],
                slope: self.slopes[k],
            });
        }
        out.push(PwlInterval {
            lo: self.breakpoints[n],
            hi: reach_hi.max(self.breakpoints[n]),
            base: self.values[n],
            slope: 0.0,
        });
        out
    }
}

/// Builds the chord approximation with `n_segments` equal pieces on
/// `[-z_max, z_max]`.
pub fn build_pwl_cdf(n_segments: usize, z_max: f64) -> Result<PwlCdf, UncertaintyError> {
    if n_segments < 2 || n_segments % 2 != 0 {
        return Err(UncertaintyError::BadPwl(format!(
            "segment count must be even and at least 2, got {n_segments}"
        )));
    }
    if !(z_max.is_finite() && z_max > 0.0) {
        return Err(UncertaintyError::BadPwl(format!(
            "z_max must be positive and finite, got {z_max}"
        )));
    }
    let h = 2.0 * z_max / n_segments as f64;
    let breakpoints: Vec<f64> = (0..=n_segments)
        .map(|k| {
            if 2 * k == n_segments {
                0.0
            } else {
                -z_max + h * k as f64
            }
        })
        .collect();
    let values: Vec<f64> = breakpoints.iter().map(|&z| phi(z)).collect();
    let slopes = values.windows(2).map(|w| (w[1] - w[0]) / h).collect();
    Ok(PwlCdf {
        breakpoints,
        values,
        slopes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_segment_construction() {
        let pwl = build_pwl_cdf(2, 4.0).unwrap();
        assert_eq!(pwl.breakpoints(), &[-4.0, 0.0, 4.0]);
        assert_eq!(pwl.values(), &[phi(-4.0), 0.5, phi(4.0)]);
        assert_eq!(pwl.segments(), 2);
    }

    #[test]
    fn exact_at_breakpoints() {
        let pwl = build_pwl_cdf(32, 4.0).unwrap();
        for &z in pwl.breakpoints() {
            assert!((pwl.eval(z) - phi(z)).abs() < 1e-12, "z = {z}");
        }
    }

    #[test]
    fn clamps_outside_grid() {
        let pwl = build_pwl_cdf(8, 3.0).unwrap();
        assert_eq!(pwl.eval(-10.0), phi(-3.0));
        assert_eq!(pwl.eval(10.0), phi(3.0));
        assert!((pwl.psi_cap() - (phi(3.0) - phi(-3.0))).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_pwl_cdf(3, 4.0).is_err());
        assert!(build_pwl_cdf(0, 4.0).is_err());
        assert!(build_pwl_cdf(4, 0.0).is_err());
        assert!(build_pwl_cdf(4, f64::NAN).is_err());
    }

    #[test]
    fn intervals_cover_reach() {
        let pwl = build_pwl_cdf(4, 2.0).unwrap();
        let iv = pwl.intervals(-7.0, 9.0);
        assert_eq!(iv.len(), 6);
        assert_eq!(iv[0].lo, -7.0);
        assert_eq!(iv[5].hi, 9.0);
        for w in iv.windows(2) {
            assert_eq!(w[0].hi, w[1].lo);
            let end = w[0].base + w[0].slope * (w[0].hi - w[0].lo);
            assert!((end - w[1].base).abs() < 1e-15);
        }
    }

    #[test]
    fn error_bounds_within_thresholds() {
        assert!(build_pwl_cdf(16, 4.0).unwrap().error_bound() <= 0.0077);
        assert!(build_pwl_cdf(32, 4.0).unwrap().error_bound() <= 0.0020);
    }
}
