use serde::{Deserialize, Serialize};

use super::quad::{exp_linear_moments, linear_sq};
use crate::error::{Error, Result};
use crate::model::HalfLineRobin;

/// Continuous piecewise-linear function on `[grid[0], grid[last]]`, read as
/// zero outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile1D {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl Profile1D {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::InvalidInput("profile grid needs at least 2 points".into()));
        }
        if grid.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) || !grid.iter().all(|g| g.is_finite()) {
            return Err(Error::InvalidInput("profile grid must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("profile values must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` on `n + 1` equispaced points of `[0, s_max]`.
    pub fn sample(s_max: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if !(s_max > 0.0) {
            return Err(Error::NonPositiveLength(s_max));
        }
        let n = n.max(1);
        let grid: Vec<f64> = (0..=n).map(|i| s_max * i as f64 / n as f64).collect();
        let values = grid.iter().map(|&s| f(s)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn start_value(&self) -> f64 {
        self.values[0]
    }

    pub fn value_at(&self, x: f64) -> f64 {
        let g = &self.grid;
        if x < g[0] || x > g[g.len() - 1] {
            return 0.0;
        }
        let i = g.partition_point(|&p| p <= x).clamp(1, g.len() - 1);
        let (a, b) = (g[i - 1], g[i]);
        let w = (x - a) / (b - a);
        self.values[i - 1] * (1.0 - w) + self.values[i] * w
    }

    fn cells(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        self.grid
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(g, v)| (g[0], g[1], v[0], v[1]))
    }

    pub fn norm_sq(&self) -> f64 {
        self.cells().map(|(a, b, va, vb)| linear_sq(b - a, va, vb)).sum()
    }

    pub fn derivative_sq(&self) -> f64 {
        self.cells().map(|(a, b, va, vb)| (vb - va).powi(2) / (b - a)).sum()
    }

    /// `int e^{-k s} v(s) ds`, exact per cell.
    pub fn exp_moment(&self, k: f64) -> f64 {
        self.cells()
            .map(|(a, b, va, vb)| {
                let (i0, i1) = exp_linear_moments(k, a, b);
                va * (i0 - i1) + vb * i1
            })
            .sum()
    }
}

/// The two sides of the half-line inequality
/// `int v^2 - (int phi v)^2 <= alpha^-2 (int v'^2 - alpha v(0)^2 + alpha^2 int v^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionGap {
    pub lhs: f64,
    pub rhs: f64,
}

impl ProjectionGap {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs + tol
    }
}

/// Both sides of the projection inequality for a profile starting at `s = 0`.
pub fn projection_gap(v: &Profile1D, alpha: f64) -> Result<ProjectionGap> {
    let op = HalfLineRobin::new(alpha)?;
    if v.grid[0] != 0.0 {
        return Err(Error::InvalidInput("profile grid must start at 0".into()));
    }
    let mass = v.norm_sq();
    let overlap = op.amplitude() * v.exp_moment(alpha);
    let v0 = v.start_value();
    let energy = v.derivative_sq() - alpha * v0 * v0 + alpha * alpha * mass;
    Ok(ProjectionGap {
        lhs: mass - overlap * overlap,
        rhs: energy / (alpha * alpha),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Midpoint rule on a very fine grid using `value_at`; independent of the
    /// closed-form cell formulas.
    fn brute_gap(v: &Profile1D, alpha: f64) -> (f64, f64) {
        let g = v.grid();
        let s_max = g[g.len() - 1];
        let n = 400_000;
        let h = s_max / n as f64;
        let amp = (2.0 * alpha).sqrt();
        let (mut mass, mut overlap, mut dsq) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let s = (i as f64 + 0.5) * h;
            let val = v.value_at(s);
            mass += val * val * h;
            overlap += amp * (-alpha * s).exp() * val * h;
            let d = (v.value_at((s + 0.5 * h).min(s_max)) - v.value_at(s - 0.5 * h)) / h;
            dsq += d * d * h;
        }
        let v0 = v.value_at(0.0);
        (
            mass - overlap * overlap,
            (dsq - alpha * v0 * v0 + alpha * alpha * mass) / (alpha * alpha),
        )
    }

    #[test]
    fn equality_case_on_groundstate() {
        let alpha = 2.0;
        let op = HalfLineRobin::new(alpha).unwrap();
        let v = Profile1D::sample(20.0 / alpha, 10_000, |s| op.profile(s)).unwrap();
        let gap = projection_gap(&v, alpha).unwrap();
        assert!(gap.lhs.abs() <= 1e-6, "{gap:?}");
        assert!(gap.rhs.abs() <= 1e-6, "{gap:?}");
    }

    #[test]
    fn tent_profile_strict() {
        let v = Profile1D::new(vec![0.0, 0.5, 1.0], vec![0.0, 1.0, 0.0]).unwrap();
        let gap = projection_gap(&v, 1.0).unwrap();
        let (lhs, rhs) = brute_gap(&v, 1.0);
        assert!((gap.lhs - lhs).abs() < 1e-8);
        assert!((gap.rhs - rhs).abs() < 1e-6);
        assert!(gap.lhs < gap.rhs);
    }

    #[test]
    fn constant_step_profile() {
        let v = Profile1D::new(vec![0.0, 1.0], vec![1.0, 1.0]).unwrap();
        let gap = projection_gap(&v, 5.0).unwrap();
        let (lhs, rhs) = brute_gap(&v, 5.0);
        assert!((gap.lhs - lhs).abs() < 1e-8);
        assert!((gap.rhs - rhs).abs() < 1e-8);
        assert!(gap.holds(1e-12));
    }

    #[test]
    fn rejects_bad_input() {
        let v = Profile1D::new(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap();
        assert_eq!(projection_gap(&v, 0.0), Err(Error::NonPositiveAlpha(0.0)));
        assert!(Profile1D::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(Profile1D::new(vec![0.0], vec![1.0]).is_err());
    }

    #[test]
    fn value_at_interpolates() {
        let v = Profile1D::new(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 0.0]).unwrap();
        assert_eq!(v.value_at(0.5), 1.0);
        assert_eq!(v.value_at(2.0), 1.0);
        assert_eq!(v.value_at(3.5), 0.0);
        assert_eq!(v.value_at(3.0), 0.0);
    }
}
