use serde::{Deserialize, Serialize};

use super::quad::linear_sq;
use super::trace_constant;
use crate::error::{Error, Result};
use crate::geometry::{Sector, Vec2};

/// P1 field on a polar triangulation of a sector truncated at `radii[last]`.
///
/// Node 0 is the apex. Ring `j >= 1` (radius `radii[j]`) holds `angular + 1`
/// nodes at angles `k * opening / angular`, stored at
/// `1 + (j - 1) * (angular + 1) + k`. `k = 0` lies on `ray_start`, `k = angular`
/// on `ray_end`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorField {
    pub sector: Sector,
    radii: Vec<f64>,
    angular: usize,
    values: Vec<f64>,
}

/// Trace inequality terms: `boundary <= eps * gradient_sq + (c_theta / eps) * mass`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorTrace {
    pub boundary_integral: f64,
    pub gradient_sq: f64,
    pub mass: f64,
    pub c_theta: f64,
    pub volume_bound: f64,
}

impl SectorTrace {
    pub fn holds(&self, tol: f64) -> bool {
        self.boundary_integral <= self.volume_bound + tol * self.volume_bound.abs().max(1e-300)
    }
}

impl SectorField {
    pub fn new(sector: Sector, radii: Vec<f64>, angular: usize, values: Vec<f64>) -> Result<Self> {
        if radii.len() < 2 || radii[0] != 0.0 || radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(
                "sector radii must start at 0 and increase strictly".into(),
            ));
        }
        if angular == 0 {
            return Err(Error::InvalidInput("sector needs at least one angular cell".into()));
        }
        let expected = 1 + (radii.len() - 1) * (angular + 1);
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: values.len(),
            });
        }
        Ok(Self {
            sector,
            radii,
            angular,
            values,
        })
    }

    pub fn sample(sector: Sector, radii: Vec<f64>, angular: usize, f: impl Fn(Vec2) -> f64) -> Result<Self> {
        let angular = angular.max(1);
        let mut values = Vec::with_capacity(1 + (radii.len().saturating_sub(1)) * (angular + 1));
        values.push(f(sector.apex));
        for &r in radii.iter().skip(1) {
            for k in 0..=angular {
                values.push(f(node_point(&sector, r, k, angular)));
            }
        }
        Self::new(sector, radii, angular, values)
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn angular(&self) -> usize {
        self.angular
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    fn idx(&self, j: usize, k: usize) -> usize {
        if j == 0 {
            0
        } else {
            1 + (j - 1) * (self.angular + 1) + k
        }
    }

    pub fn node(&self, j: usize, k: usize) -> Vec2 {
        node_point(&self.sector, self.radii[j], k, self.angular)
    }

    pub fn value(&self, j: usize, k: usize) -> f64 {
        self.values[self.idx(j, k)]
    }

    /// Values along `ray_start` (`end = false`) or `ray_end`, from the apex out.
    pub fn ray_values(&self, end: bool) -> Vec<f64> {
        let k = if end { self.angular } else { 0 };
        (0..self.radii.len()).map(|j| self.value(j, k)).collect()
    }

    fn triangles(&self) -> Vec<[usize; 3]> {
        let mut tris = Vec::new();
        let ka = self.angular;
        for k in 0..ka {
            tris.push([self.idx(0, 0), self.idx(1, k), self.idx(1, k + 1)]);
        }
        for j in 1..self.radii.len() - 1 {
            for k in 0..ka {
                let (a, b) = (self.idx(j, k), self.idx(j, k + 1));
                let (c, d) = (self.idx(j + 1, k), self.idx(j + 1, k + 1));
                tris.push([a, c, d]);
                tris.push([a, d, b]);
            }
        }
        tris
    }

    fn position(&self, i: usize) -> Vec2 {
        if i == 0 {
            return self.sector.apex;
        }
        let j = 1 + (i - 1) / (self.angular + 1);
        let k = (i - 1) % (self.angular + 1);
        self.node(j, k)
    }

    /// `(int |grad u|^2, int |u|^2)` over the truncated sector.
    pub fn energies(&self) -> (f64, f64) {
        let mut grad = 0.0;
        let mut mass = 0.0;
        for t in self.triangles() {
            let p = t.map(|i| self.position(i));
            let u = t.map(|i| self.values[i]);
            let e1 = p[1] - p[0];
            let e2 = p[2] - p[0];
            let det = e1.cross(e2);
            let area = 0.5 * det.abs();
            // gradient of the linear interpolant
            let du1 = u[1] - u[0];
            let du2 = u[2] - u[0];
            let gx = (du1 * e2.y - du2 * e1.y) / det;
            let gy = (du2 * e1.x - du1 * e2.x) / det;
            grad += area * (gx * gx + gy * gy);
            let s = u[0] + u[1] + u[2];
            mass += area / 6.0 * (u[0] * u[0] + u[1] * u[1] + u[2] * u[2] + s * s) / 2.0;
        }
        (grad, mass)
    }

    /// `int |u|^2` over both bounding rays.
    pub fn ray_mass(&self) -> f64 {
        let start = self.ray_values(false);
        let end = self.ray_values(true);
        self.radii
            .windows(2)
            .enumerate()
            .map(|(j, r)| {
                let h = r[1] - r[0];
                linear_sq(h, start[j], start[j + 1]) + linear_sq(h, end[j], end[j + 1])
            })
            .sum()
    }

    /// Largest `|u|` on the outer ring relative to the largest `|u|` overall.
    pub fn outer_ring_ratio(&self) -> (f64, f64) {
        let last = self.radii.len() - 1;
        let ring = (0..=self.angular)
            .map(|k| self.value(last, k).abs())
            .fold(0.0, f64::max);
        let all = self.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        (ring, all)
    }
}

fn node_point(sector: &Sector, r: f64, k: usize, angular: usize) -> Vec2 {
    if k == angular {
        // exact ray direction, so interfaces with strip columns match bit for bit
        sector.apex + sector.ray_end * r
    } else if k == 0 {
        sector.apex + sector.ray_start * r
    } else {
        sector.point(r, sector.opening * k as f64 / angular as f64)
    }
}

/// Both sides of `int_{rays} |u|^2 <= eps int |grad u|^2 + (C_theta / eps) int |u|^2`.
pub fn sector_trace_check(u: &SectorField, eps: f64) -> Result<SectorTrace> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("epsilon must be positive, got {eps}")));
    }
    let c_theta = trace_constant(u.sector.opening)?;
    let (ring, all) = u.outer_ring_ratio();
    if ring > 1e-9 * all.max(f64::MIN_POSITIVE) {
        return Err(Error::FieldNotCompactlySupported { max_abs: ring });
    }
    let (gradient_sq, mass) = u.energies();
    let boundary_integral = u.ray_mass();
    Ok(SectorTrace {
        boundary_integral,
        gradient_sq,
        mass,
        c_theta,
        volume_bound: eps * gradient_sq + c_theta / eps * mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn radii(r_max: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|j| r_max * j as f64 / n as f64).collect()
    }

    fn quarter() -> Sector {
        Sector::new(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), PI / 2.0).unwrap()
    }

    #[test]
    fn exponential_on_quarter_plane() {
        let f = SectorField::sample(quarter(), radii(40.0, 800), 64, |x| (-x.norm()).exp()).unwrap();
        let (grad, mass) = f.energies();
        // continuum: both equal (pi/2) * int_0^inf r e^{-2r} dr = pi/8
        assert!((mass - PI / 8.0).abs() < 2e-3, "{mass}");
        assert!((grad - PI / 8.0).abs() < 2e-3, "{grad}");
        // rays: 2 * int e^{-2r} = 1
        assert!((f.ray_mass() - 1.0).abs() < 1e-3);
        for eps in [0.1, 1.0, 10.0] {
            let tr = sector_trace_check(&f, eps).unwrap();
            assert!((tr.c_theta - 2.0).abs() < 1e-15);
            assert!(tr.holds(1e-8), "{tr:?}");
        }
    }

    #[test]
    fn bump_away_from_rays() {
        let s = quarter();
        let centre = s.point(2.0, PI / 4.0);
        let f = SectorField::sample(s, radii(4.0, 80), 40, |x| {
            let d = x.dist(centre);
            if d < 0.5 {
                (1.0 - (d / 0.5).powi(2)).powi(2)
            } else {
                0.0
            }
        })
        .unwrap();
        let tr = sector_trace_check(&f, 1.0).unwrap();
        assert_eq!(tr.boundary_integral, 0.0);
        assert!(tr.volume_bound > 0.0);
    }

    #[test]
    fn rejects_field_on_arc() {
        let f = SectorField::sample(quarter(), radii(1.0, 4), 4, |_| 1.0).unwrap();
        assert!(matches!(
            sector_trace_check(&f, 1.0),
            Err(Error::FieldNotCompactlySupported { .. })
        ));
    }

    #[test]
    fn linear_field_is_exact() {
        // u = x + 2y is reproduced exactly, so its gradient energy is 5 * area
        let f = SectorField::sample(quarter(), radii(1.0, 3), 5, |x| x.x + 2.0 * x.y).unwrap();
        let (grad, _) = f.energies();
        let mut area = 0.0;
        for t in f.triangles() {
            let p = t.map(|i| f.position(i));
            area += 0.5 * (p[1] - p[0]).cross(p[2] - p[0]).abs();
        }
        assert!((grad - 5.0 * area).abs() < 1e-12);
    }
}
