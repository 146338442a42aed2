use serde::{Deserialize, Serialize};

use super::profile::Profile1D;
use super::quad::{exp_linear_moments, linear_product, linear_sq};
use crate::error::{Error, Result};
use crate::model::HalfLineRobin;

/// Piecewise-bilinear field on the half-strip over one side, in the side's
/// `(t, s)` coordinates, read as zero for `s > s_max`.
///
/// `values[i * s.len() + j]` is the value at `(t[i], s[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripField {
    pub side: usize,
    t: Vec<f64>,
    s: Vec<f64>,
    values: Vec<f64>,
}

fn check_grid(g: &[f64], what: &str) -> Result<()> {
    if g.len() < 2 || g.windows(2).any(|w| !(w[1] > w[0])) || !g.iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "{what} grid must have at least 2 strictly increasing points"
        )));
    }
    Ok(())
}

impl StripField {
    pub fn new(side: usize, t: Vec<f64>, s: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_grid(&t, "t")?;
        check_grid(&s, "s")?;
        if t[0] != 0.0 || s[0] != 0.0 {
            return Err(Error::InvalidInput("strip grids must start at 0".into()));
        }
        let expected = t.len() * s.len();
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: values.len(),
            });
        }
        Ok(Self { side, t, s, values })
    }

    pub fn sample(side: usize, t: Vec<f64>, s: Vec<f64>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = t
            .iter()
            .flat_map(|&ti| s.iter().map(move |&sj| (ti, sj)))
            .map(|(ti, sj)| f(ti, sj))
            .collect();
        Self::new(side, t, s, values)
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t
    }

    pub fn s_grid(&self) -> &[f64] {
        &self.s
    }

    pub fn length(&self) -> f64 {
        self.t[self.t.len() - 1]
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.s.len() + j]
    }

    /// Column `t = t[i]` as a function of `s`.
    pub fn column(&self, i: usize) -> &[f64] {
        let ns = self.s.len();
        &self.values[i * ns..(i + 1) * ns]
    }

    fn row(&self, j: usize) -> Vec<f64> {
        (0..self.t.len()).map(|i| self.at(i, j)).collect()
    }

    fn mass_along(grid: &[f64], v: &[f64]) -> f64 {
        grid.windows(2)
            .zip(v.windows(2))
            .map(|(g, w)| linear_sq(g[1] - g[0], w[0], w[1]))
            .sum()
    }

    /// `int int |d_t u|^2`.
    pub fn transverse_energy(&self) -> f64 {
        (0..self.t.len() - 1)
            .map(|i| {
                let ht = self.t[i + 1] - self.t[i];
                let d: Vec<f64> = self
                    .column(i + 1)
                    .iter()
                    .zip(self.column(i))
                    .map(|(b, a)| b - a)
                    .collect();
                Self::mass_along(&self.s, &d) / ht
            })
            .sum()
    }

    /// `int int |d_s u|^2`.
    pub fn normal_energy(&self) -> f64 {
        (0..self.s.len() - 1)
            .map(|j| {
                let hs = self.s[j + 1] - self.s[j];
                let d: Vec<f64> = self
                    .row(j + 1)
                    .iter()
                    .zip(self.row(j))
                    .map(|(b, a)| b - a)
                    .collect();
                Self::mass_along(&self.t, &d) / hs
            })
            .sum()
    }

    /// `int |u(t, 0)|^2 dt`.
    pub fn boundary_mass(&self) -> f64 {
        Self::mass_along(&self.t, &self.row(0))
    }

    pub fn mass(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.t.len() - 1 {
            let ht = self.t[i + 1] - self.t[i];
            let (c0, c1) = (self.column(i), self.column(i + 1));
            // M_t quadratic form over the pair of columns, each term an s-integral
            let m00 = Self::mass_along(&self.s, c0);
            let m11 = Self::mass_along(&self.s, c1);
            let m01: f64 = self
                .s
                .windows(2)
                .enumerate()
                .map(|(j, g)| linear_product(g[1] - g[0], c0[j], c0[j + 1], c1[j], c1[j + 1]))
                .sum();
            acc += ht / 6.0 * (2.0 * m00 + 2.0 * m01 + 2.0 * m11);
        }
        acc
    }

    /// `int phi_alpha(s) u(t_i, s) ds` at every `t_i`.
    pub fn projection(&self, alpha: f64) -> Result<Vec<f64>> {
        let op = HalfLineRobin::new(alpha)?;
        let moments: Vec<(f64, f64)> = self
            .s
            .windows(2)
            .map(|g| exp_linear_moments(alpha, g[0], g[1]))
            .collect();
        Ok((0..self.t.len())
            .map(|i| {
                let c = self.column(i);
                let sum: f64 = moments
                    .iter()
                    .enumerate()
                    .map(|(j, &(i0, i1))| c[j] * (i0 - i1) + c[j + 1] * i1)
                    .sum();
                op.amplitude() * sum
            })
            .collect())
    }
}

/// Energy terms of a strip field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripEnergy {
    pub transverse: f64,
    pub normal: f64,
    pub boundary: f64,
    pub mass: f64,
    /// `int int |grad u|^2 - alpha int_L |u|^2 + alpha^2 int int |u|^2`.
    pub robin_form: f64,
}

impl StripEnergy {
    /// `0 <= transverse <= robin_form`, up to `tol` relative to the largest term.
    pub fn chain_holds(&self, tol: f64) -> bool {
        let scale = self
            .transverse
            .abs()
            .max(self.normal.abs())
            .max(self.robin_form.abs())
            .max(1e-300);
        self.transverse >= -tol * scale && self.transverse <= self.robin_form + tol * scale
    }
}

pub fn strip_energy_gap(f: &StripField, alpha: f64) -> Result<StripEnergy> {
    HalfLineRobin::new(alpha)?;
    let transverse = f.transverse_energy();
    let normal = f.normal_energy();
    let boundary = f.boundary_mass();
    let mass = f.mass();
    Ok(StripEnergy {
        transverse,
        normal,
        boundary,
        mass,
        robin_form: transverse + normal - alpha * boundary + alpha * alpha * mass,
    })
}

/// The projected profile `t -> int phi_alpha(s) u(t, s) ds` on the t-grid.
pub fn project_strip(f: &StripField, alpha: f64) -> Result<Profile1D> {
    let values = f.projection(alpha)?;
    Profile1D::new(f.t.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
    }

    #[test]
    fn separable_sine_mode() {
        let alpha = 3.0;
        let len = 1.3;
        let op = HalfLineRobin::new(alpha).unwrap();
        let f = StripField::sample(1, linspace(0.0, len, 400), linspace(0.0, 20.0 / alpha, 2000), |t, s| {
            (PI * t / len).sin() * op.profile(s)
        })
        .unwrap();
        let e = strip_energy_gap(&f, alpha).unwrap();
        let k2 = (PI / len).powi(2);
        assert!((e.transverse - k2 * e.mass).abs() < 1e-4 * e.transverse);
        assert!((e.robin_form - e.transverse).abs() < 1e-3 * e.transverse, "{e:?}");
        assert!(e.chain_holds(1e-8));
    }

    #[test]
    fn t_independent_field() {
        let f = StripField::sample(0, linspace(0.0, 2.0, 5), linspace(0.0, 3.0, 7), |_, s| 3.0 - s).unwrap();
        assert_eq!(f.transverse_energy(), 0.0);
        // exact bilinear integrals: int_0^2 int_0^3 (3-s)^2 = 2 * 9
        assert!((f.mass() - 18.0).abs() < 1e-12);
        assert!((f.normal_energy() - 6.0).abs() < 1e-12);
        assert!((f.boundary_mass() - 18.0).abs() < 1e-12);
    }

    #[test]
    fn projection_of_step() {
        let f = StripField::sample(0, vec![0.0, 0.5, 1.0], vec![0.0, 1.0], |_, _| 1.0).unwrap();
        let p = project_strip(&f, 1.0).unwrap();
        let expect = 2f64.sqrt() * (1.0 - (-1.0f64).exp());
        for &v in p.values() {
            assert!((v - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn projection_recovers_profile() {
        let alpha = 4.0;
        let op = HalfLineRobin::new(alpha).unwrap();
        let g = |t: f64| 1.0 + t * t;
        let f = StripField::sample(0, linspace(0.0, 1.0, 10), linspace(0.0, 20.0 / alpha, 4000), |t, s| {
            g(t) * op.profile(s)
        })
        .unwrap();
        let p = project_strip(&f, alpha).unwrap();
        for (t, v) in p.grid().iter().zip(p.values()) {
            assert!((v - g(*t)).abs() < 1e-5 * g(*t));
        }
        let zero = StripField::sample(0, linspace(0.0, 1.0, 3), linspace(0.0, 1.0, 3), |_, _| 0.0).unwrap();
        assert!(project_strip(&zero, alpha).unwrap().values().iter().all(|&v| v == 0.0));
    }
}
