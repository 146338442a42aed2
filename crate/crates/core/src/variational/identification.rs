use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::profile::Profile1D;
use super::quad::linear_sq;
use super::sector::SectorField;
use super::strip::{strip_energy_gap, StripField};
use crate::error::{Error, Result};
use crate::geometry::{ConvexPolygon, Decomposition};
use crate::model::HalfLineRobin;

/// Cutoffs `rho_n(t) = cos^2(pi t / l_n)` on every side, with the constants
/// `R = max int rho_n^2` and `R' = max int rho_n'^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub lengths: Vec<f64>,
    pub mass_constant: f64,
    pub energy_constant: f64,
}

pub fn default_cutoffs(p: &ConvexPolygon) -> CutoffSpec {
    CutoffSpec::new(p.side_lengths().to_vec())
}

impl CutoffSpec {
    pub fn new(lengths: Vec<f64>) -> Self {
        let mass_constant = lengths.iter().map(|&l| 3.0 * l / 8.0).fold(0.0, f64::max);
        let energy_constant = lengths
            .iter()
            .map(|&l| PI * PI / (2.0 * l))
            .fold(0.0, f64::max);
        Self {
            lengths,
            mass_constant,
            energy_constant,
        }
    }

    fn freq(&self, n: usize) -> f64 {
        2.0 * PI / self.lengths[n]
    }

    pub fn rho(&self, n: usize, t: f64) -> f64 {
        0.5 * (1.0 + (self.freq(n) * t).cos())
    }

    pub fn rho_prime(&self, n: usize, t: f64) -> f64 {
        let w = self.freq(n);
        -0.5 * w * (w * t).sin()
    }

    /// The endpoint whose profile value the cutoff carries at `t`.
    pub fn selector(&self, n: usize, t: f64) -> f64 {
        if t < 0.5 * self.lengths[n] {
            0.0
        } else {
            self.lengths[n]
        }
    }

    /// Samples of `rho_n` on `samples + 1` equispaced points.
    pub fn profile(&self, n: usize, samples: usize) -> Profile1D {
        let l = self.lengths[n];
        Profile1D::sample(l, samples, |t| self.rho(n, t)).expect("positive side length")
    }

    pub fn rho_sq_integral(&self, n: usize, a: f64, b: f64) -> f64 {
        let w = self.freq(n);
        let s1 = |t: f64| (w * t).sin();
        let s2 = |t: f64| (2.0 * w * t).sin();
        0.375 * (b - a) + (s1(b) - s1(a)) / (2.0 * w) + (s2(b) - s2(a)) / (16.0 * w)
    }

    pub fn rho_prime_sq_integral(&self, n: usize, a: f64, b: f64) -> f64 {
        let w = self.freq(n);
        let s2 = |t: f64| (2.0 * w * t).sin();
        w * w / 8.0 * (b - a) - w / 16.0 * (s2(b) - s2(a))
    }

    /// `int_a^b p(t) rho_n(t) dt` for `p` linear with `p(a) = pa`, `p(b) = pb`.
    pub fn linear_rho_integral(&self, n: usize, a: f64, b: f64, pa: f64, pb: f64) -> f64 {
        let w = self.freq(n);
        let slope = (pb - pa) / (b - a);
        let c0 = pa - slope * a;
        // int p cos(wt) = c0 sin/w + slope (t sin/w + cos/w^2)
        let anti = |t: f64| {
            let (s, c) = (w * t).sin_cos();
            c0 * s / w + slope * (t * s / w + c / (w * w))
        };
        0.25 * (b - a) * (pa + pb) + 0.5 * (anti(b) - anti(a))
    }
}

/// A field on the exterior given piece by piece: one strip field per side and
/// one sector field per vertex, matching along the shared rays.
#[derive(Debug, Clone)]
pub struct IdentificationField {
    pub strips: Vec<StripField>,
    pub sectors: Vec<SectorField>,
}

impl IdentificationField {
    /// Samples a field whose strip part is `strip_fn(side, t, s)` and sector part
    /// `sector_fn(vertex, r, phi)`. Nodes on the rays take the strip values so
    /// the pieces agree exactly on the interfaces.
    pub fn sample(
        decomp: &Decomposition,
        t_cells: usize,
        s_grid: &[f64],
        angular: usize,
        strip_fn: impl Fn(usize, f64, f64) -> f64,
        sector_fn: impl Fn(usize, f64, f64) -> f64,
    ) -> Result<Self> {
        let m = decomp.side_count();
        let t_cells = t_cells.max(2);
        let angular = angular.max(1);
        let mut strips = Vec::with_capacity(m);
        for f in &decomp.frames {
            let t: Vec<f64> = (0..=t_cells)
                .map(|i| f.length * i as f64 / t_cells as f64)
                .collect();
            let n = f.index;
            strips.push(StripField::sample(n, t, s_grid.to_vec(), |t, s| strip_fn(n, t, s))?);
        }
        let mut sectors = Vec::with_capacity(m);
        for sec in &decomp.sectors {
            let n = sec.vertex;
            let prev = (n + m - 1) % m;
            let l_prev = decomp.frames[prev].length;
            let mut values = vec![strip_fn(n, 0.0, 0.0)];
            for &r in &s_grid[1..] {
                for k in 0..=angular {
                    let v = if k == 0 {
                        strip_fn(prev, l_prev, r)
                    } else if k == angular {
                        strip_fn(n, 0.0, r)
                    } else {
                        sector_fn(n, r, sec.opening * k as f64 / angular as f64)
                    };
                    values.push(v);
                }
            }
            sectors.push(SectorField::new(*sec, s_grid.to_vec(), angular, values)?);
        }
        Ok(Self { strips, sectors })
    }

    pub fn zero(decomp: &Decomposition, t_cells: usize, s_grid: &[f64], angular: usize) -> Result<Self> {
        Self::sample(decomp, t_cells, s_grid, angular, |_, _, _| 0.0, |_, _, _| 0.0)
    }

    /// Checks that the pieces fit the decomposition and agree on shared rays.
    pub fn check(&self, decomp: &Decomposition) -> Result<()> {
        let m = decomp.side_count();
        let bad = |msg: String| Err(Error::InconsistentDecomposition(msg));
        if self.strips.len() != m || self.sectors.len() != m {
            return bad(format!(
                "{} sides but {} strip and {} sector fields",
                m,
                self.strips.len(),
                self.sectors.len()
            ));
        }
        let scale = self
            .strips
            .iter()
            .flat_map(|s| (0..s.t_grid().len()).flat_map(move |i| s.column(i).iter()))
            .chain(self.sectors.iter().flat_map(|s| s.values().iter()))
            .fold(0.0f64, |a, v| a.max(v.abs()));
        let vtol = 1e-9 * scale.max(f64::MIN_POSITIVE);
        for (n, strip) in self.strips.iter().enumerate() {
            let len = decomp.frames[n].length;
            if strip.side != n {
                return bad(format!("strip field {n} is tagged with side {}", strip.side));
            }
            if (strip.length() - len).abs() > 1e-9 * len {
                return bad(format!(
                    "strip field {n} covers [0, {}] but side length is {len}",
                    strip.length()
                ));
            }
        }
        for (n, sector) in self.sectors.iter().enumerate() {
            let expect = &decomp.sectors[n];
            if (sector.sector.opening - expect.opening).abs() > 1e-9
                || sector.sector.apex.dist(expect.apex) > 1e-9 * decomp.polygon.perimeter()
            {
                return bad(format!("sector field {n} does not sit at vertex {n}"));
            }
        }
        for n in 0..m {
            let strip = &self.strips[n];
            let next = &self.sectors[(n + 1) % m];
            let here = &self.sectors[n];
            let last = strip.t_grid().len() - 1;
            for (sector, col, side_end) in [(here, 0, true), (next, last, false)] {
                if sector.radii() != strip.s_grid() {
                    return bad(format!("radial grid of a sector next to side {n} differs from its strip"));
                }
                let ray = sector.ray_values(side_end);
                let column = strip.column(col);
                if ray.iter().zip(column).any(|(a, b)| (a - b).abs() > vtol) {
                    return bad(format!("field jumps across a ray of side {n}"));
                }
            }
        }
        Ok(())
    }
}

/// Output of the identification map applied to a field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentificationResult {
    pub alpha: f64,
    /// Per side, `t -> int phi_alpha(s) u(t, s) ds`.
    pub projected: Vec<Profile1D>,
    /// Per side, the projected profile minus its cutoff endpoint correction.
    pub corrected: Vec<Profile1D>,
    pub norm_sq: f64,
    pub mapped_norm_sq: f64,
    /// `h_alpha(u, u) + alpha^2 |u|^2`.
    pub form: f64,
    /// One-dimensional Dirichlet energy of the mapped field.
    pub mapped_form: f64,
    pub delta1: f64,
    pub delta2: f64,
}

impl IdentificationResult {
    pub fn max_endpoint_value(&self) -> f64 {
        self.corrected
            .iter()
            .flat_map(|p| [p.values()[0].abs(), p.values()[p.values().len() - 1].abs()])
            .fold(0.0, f64::max)
    }
}

/// `(int p^2, int p'^2)` of `p - c rho_n` on `[a, b]` where `p` is linear
/// with the given end values.
fn corrected_cell(cut: &CutoffSpec, n: usize, a: f64, b: f64, pa: f64, pb: f64, c: f64) -> (f64, f64) {
    let h = b - a;
    let mass = linear_sq(h, pa, pb) - 2.0 * c * cut.linear_rho_integral(n, a, b, pa, pb)
        + c * c * cut.rho_sq_integral(n, a, b);
    let slope = (pb - pa) / h;
    let energy = slope * slope * h - 2.0 * c * slope * (cut.rho(n, b) - cut.rho(n, a))
        + c * c * cut.rho_prime_sq_integral(n, a, b);
    (mass, energy)
}

pub fn identification_map(
    decomp: &Decomposition,
    u: &IdentificationField,
    alpha: f64,
    cut: &CutoffSpec,
) -> Result<IdentificationResult> {
    HalfLineRobin::new(alpha)?;
    u.check(decomp)?;
    if cut.lengths.len() != decomp.side_count() {
        return Err(Error::InconsistentDecomposition(format!(
            "cutoff spec has {} sides, polygon has {}",
            cut.lengths.len(),
            decomp.side_count()
        )));
    }
    let a2 = alpha * alpha;
    let mut norm_sq = 0.0;
    let mut form = 0.0;
    for strip in &u.strips {
        let e = strip_energy_gap(strip, alpha)?;
        norm_sq += e.mass;
        form += e.robin_form;
    }
    for sector in &u.sectors {
        let (grad, mass) = sector.energies();
        norm_sq += mass;
        form += grad + a2 * mass;
    }

    let mut projected = Vec::new();
    let mut corrected = Vec::new();
    let mut mapped_norm_sq = 0.0;
    let mut mapped_form = 0.0;
    for (n, strip) in u.strips.iter().enumerate() {
        let p = strip.projection(alpha)?;
        let t = strip.t_grid();
        let len = cut.lengths[n];
        let half = 0.5 * len;
        let (c_left, c_right) = (p[0], p[p.len() - 1]);
        let ju: Vec<f64> = t
            .iter()
            .zip(&p)
            .map(|(&ti, &pi)| {
                let c = if cut.selector(n, ti) == 0.0 { c_left } else { c_right };
                pi - c * cut.rho(n, ti)
            })
            .collect();
        for i in 0..t.len() - 1 {
            let (a, b, pa, pb) = (t[i], t[i + 1], p[i], p[i + 1]);
            if a < half && b > half {
                let w = (half - a) / (b - a);
                let pm = pa + (pb - pa) * w;
                let (m1, e1) = corrected_cell(cut, n, a, half, pa, pm, c_left);
                let (m2, e2) = corrected_cell(cut, n, half, b, pm, pb, c_right);
                mapped_norm_sq += m1 + m2;
                mapped_form += e1 + e2;
            } else {
                let c = if a < half { c_left } else { c_right };
                let (m, e) = corrected_cell(cut, n, a, b, pa, pb, c);
                mapped_norm_sq += m;
                mapped_form += e;
            }
        }
        projected.push(Profile1D::new(t.to_vec(), p)?);
        corrected.push(Profile1D::new(t.to_vec(), ju)?);
    }

    let denom = form + norm_sq;
    let (delta1, delta2) = if denom > 0.0 {
        ((norm_sq - mapped_norm_sq) / denom, (mapped_form - form) / denom)
    } else {
        (0.0, 0.0)
    };
    Ok(IdentificationResult {
        alpha,
        projected,
        corrected,
        norm_sq,
        mapped_norm_sq,
        form,
        mapped_form,
        delta1,
        delta2,
    })
}

/// Randomized quasi-mode: `g_n(t) psi(s)` on the strips and `c_n psi(r)` in
/// the sectors, with `psi` the half-line ground state shifted to vanish at
/// `s_max = 20 / alpha`. `g_n` interpolates the vertex amplitudes and adds a
/// few sine modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiMode {
    pub vertex_amplitudes: Vec<f64>,
    pub sine_coefficients: Vec<Vec<f64>>,
}

impl QuasiMode {
    pub fn random<R: rand::Rng>(sides: usize, modes: usize, rng: &mut R) -> Self {
        Self {
            vertex_amplitudes: (0..sides).map(|_| rng.random_range(-1.0..1.0)).collect(),
            sine_coefficients: (0..sides)
                .map(|_| (0..modes).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect(),
        }
    }

    pub fn side_profile(&self, decomp: &Decomposition, n: usize, t: f64) -> f64 {
        let m = decomp.side_count();
        let len = decomp.frames[n].length;
        let w = t / len;
        let mut g = self.vertex_amplitudes[n] * (1.0 - w) + self.vertex_amplitudes[(n + 1) % m] * w;
        for (k, a) in self.sine_coefficients[n].iter().enumerate() {
            g += a * ((k + 1) as f64 * PI * w).sin();
        }
        g
    }

    /// The sampled field at Robin parameter `alpha`.
    pub fn field(
        &self,
        decomp: &Decomposition,
        alpha: f64,
        t_cells: usize,
        s_cells: usize,
        angular: usize,
    ) -> Result<IdentificationField> {
        let op = HalfLineRobin::new(alpha)?;
        if self.vertex_amplitudes.len() != decomp.side_count() {
            return Err(Error::InconsistentDecomposition(
                "quasi-mode amplitudes do not match the side count".into(),
            ));
        }
        let s_max = 20.0 / alpha;
        let tail = op.profile(s_max);
        let psi = move |s: f64| op.profile(s) - tail;
        let s_cells = s_cells.max(1);
        let s_grid: Vec<f64> = (0..=s_cells)
            .map(|j| s_max * j as f64 / s_cells as f64)
            .collect();
        IdentificationField::sample(
            decomp,
            t_cells,
            &s_grid,
            angular,
            |n, t, s| self.side_profile(decomp, n, t) * psi(s),
            |n, r, _| self.vertex_amplitudes[n] * psi(r),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::decompose;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn simpson(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let n = 20_000;
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn cutoff_point_values_and_constants() {
        let cut = CutoffSpec::new(vec![1.0, 2.0]);
        assert_eq!(cut.rho(0, 0.0), 1.0);
        assert!(cut.rho(0, 0.5).abs() < 1e-16);
        assert_eq!(cut.rho(0, 1.0), 1.0);
        assert!((cut.rho_sq_integral(0, 0.0, 1.0) - 0.375).abs() < 1e-15);
        assert!((cut.rho_sq_integral(1, 0.0, 2.0) - 2.0 * 0.375).abs() < 1e-15);
        let e1 = cut.rho_prime_sq_integral(0, 0.0, 1.0);
        let e2 = cut.rho_prime_sq_integral(1, 0.0, 2.0);
        assert!((e1 - PI * PI / 2.0).abs() < 1e-12);
        assert!((e2 - e1 / 2.0).abs() < 1e-12);
        assert_eq!(cut.mass_constant, 0.75);
        assert!((cut.energy_constant - PI * PI / 2.0).abs() < 1e-15);
        assert_eq!(cut.selector(0, 0.49), 0.0);
        assert_eq!(cut.selector(0, 0.5), 1.0);
    }

    #[test]
    fn cutoff_integrals_match_quadrature() {
        let cut = CutoffSpec::new(vec![1.7]);
        let (a, b) = (0.3, 1.1);
        assert!((cut.rho_sq_integral(0, a, b) - simpson(a, b, |t| cut.rho(0, t).powi(2))).abs() < 1e-12);
        assert!(
            (cut.rho_prime_sq_integral(0, a, b) - simpson(a, b, |t| cut.rho_prime(0, t).powi(2))).abs() < 1e-11
        );
        let (pa, pb) = (2.0, -0.5);
        let p = |t: f64| pa + (pb - pa) * (t - a) / (b - a);
        let want = simpson(a, b, |t| p(t) * cut.rho(0, t));
        assert!((cut.linear_rho_integral(0, a, b, pa, pb) - want).abs() < 1e-12);
    }

    fn grid(s_max: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|j| s_max * j as f64 / n as f64).collect()
    }

    #[test]
    fn zero_field_maps_to_zero() {
        let d = decompose(&ConvexPolygon::equilateral(1.0));
        let u = IdentificationField::zero(&d, 8, &grid(2.0, 10), 4).unwrap();
        let r = identification_map(&d, &u, 4.0, &default_cutoffs(&d.polygon)).unwrap();
        assert_eq!(r.norm_sq, 0.0);
        assert_eq!(r.mapped_norm_sq, 0.0);
        assert_eq!(r.delta1, 0.0);
        assert_eq!(r.delta2, 0.0);
        assert!(r.corrected.iter().all(|p| p.values().iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn single_strip_sine_mode() {
        let d = decompose(&ConvexPolygon::unit_square());
        let alpha = 6.0;
        let op = HalfLineRobin::new(alpha).unwrap();
        let tail = op.profile(20.0 / alpha);
        let u = IdentificationField::sample(
            &d,
            64,
            &grid(20.0 / alpha, 400),
            8,
            |n, t, s| if n == 0 { (PI * t).sin() * (op.profile(s) - tail) } else { 0.0 },
            |_, _, _| 0.0,
        )
        .unwrap();
        let r = identification_map(&d, &u, alpha, &default_cutoffs(&d.polygon)).unwrap();
        for (t, v) in r.corrected[0].grid().iter().zip(r.corrected[0].values()) {
            assert!((v - (PI * t).sin()).abs() < 1e-3);
        }
        assert!(r.max_endpoint_value() <= 1e-12);
        let gap = r.norm_sq - r.mapped_norm_sq;
        assert!(gap.abs() <= r.delta1.abs() * (r.form + r.norm_sq) + 1e-12);
        assert!(gap.abs() < 1e-3);
    }

    #[test]
    fn random_quasi_mode_endpoints_vanish_and_deltas_decrease() {
        let d = decompose(&ConvexPolygon::from_points(&[[0.0, 0.0], [1.5, 0.1], [1.2, 1.0], [0.2, 0.8]]).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let q = QuasiMode::random(4, 3, &mut rng);
        let cut = default_cutoffs(&d.polygon);
        let mut prev: Option<(f64, f64)> = None;
        for alpha in [4.0, 8.0, 16.0] {
            let u = q.field(&d, alpha, 64, 200, 16).unwrap();
            let r = identification_map(&d, &u, alpha, &cut).unwrap();
            assert!(r.max_endpoint_value() <= 1e-12);
            if let Some((d1, d2)) = prev {
                assert!(r.delta1 < d1, "{} {}", r.delta1, d1);
                assert!(r.delta2 < d2, "{} {}", r.delta2, d2);
            }
            prev = Some((r.delta1, r.delta2));
        }
    }

    #[test]
    fn mismatched_fields_are_rejected() {
        let tri = decompose(&ConvexPolygon::equilateral(1.0));
        let sq = decompose(&ConvexPolygon::unit_square());
        let u = IdentificationField::zero(&tri, 4, &grid(1.0, 4), 4).unwrap();
        let err = identification_map(&sq, &u, 2.0, &default_cutoffs(&sq.polygon)).unwrap_err();
        assert!(matches!(err, Error::InconsistentDecomposition(_)));

        let mut u = IdentificationField::sample(&tri, 4, &grid(1.0, 4), 4, |_, _, s| 1.0 - s, |_, r, _| 1.0 - r).unwrap();
        u.sectors[1].values_mut()[1] += 0.5;
        let err = identification_map(&tri, &u, 2.0, &default_cutoffs(&tri.polygon)).unwrap_err();
        assert!(matches!(err, Error::InconsistentDecomposition(_)));
    }
}
