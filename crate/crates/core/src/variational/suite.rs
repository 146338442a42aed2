//! Randomized inputs for the inequality checks, shared by the command-line
//! checks and the test suites.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::profile::{projection_gap, Profile1D};
use super::sector::{sector_trace_check, SectorField};
use super::strip::{strip_energy_gap, StripField};
use crate::error::Result;
use crate::geometry::{Sector, Vec2};

/// Tally of one randomized check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// Smallest `bound - value` seen; negative means a violation.
    pub worst_margin: f64,
}

impl SuiteOutcome {
    fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            cases: 0,
            failures: 0,
            worst_margin: f64::INFINITY,
        }
    }

    fn record(&mut self, margin: f64, ok: bool) {
        self.cases += 1;
        self.worst_margin = self.worst_margin.min(margin);
        if !ok {
            self.failures += 1;
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

fn sorted_grid<R: Rng>(rng: &mut R, len: f64, cells: usize) -> Vec<f64> {
    let mut g: Vec<f64> = (1..cells).map(|_| rng.random_range(0.0..len)).collect();
    g.push(0.0);
    g.push(len);
    g.sort_by(f64::total_cmp);
    g.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * len);
    g
}

/// Random H^1 profile on `[0, s_max]` vanishing at `s_max`: a random P1 part
/// plus a few damped exponentials.
pub fn random_profile<R: Rng>(rng: &mut R, alpha: f64) -> Result<Profile1D> {
    let s_max = rng.random_range(2.0..12.0) / alpha.max(0.5);
    let cells = rng.random_range(8..200);
    let grid = sorted_grid(rng, s_max, cells);
    let terms: Vec<(f64, f64)> = (0..rng.random_range(0..4))
        .map(|_| (rng.random_range(-2.0..2.0), rng.random_range(0.0..3.0) * alpha))
        .collect();
    let n = grid.len();
    let values = grid
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            if i + 1 == n {
                return 0.0;
            }
            let smooth: f64 = terms.iter().map(|&(c, k)| c * (-k * s).exp()).sum::<f64>() * (1.0 - s / s_max);
            smooth + rng.random_range(-1.0..1.0)
        })
        .collect();
    Profile1D::new(grid, values)
}

/// Random bilinear strip field vanishing on the far edge `s = s_max`.
pub fn random_strip_field<R: Rng>(rng: &mut R, alpha: f64) -> Result<StripField> {
    let len = rng.random_range(0.2..3.0);
    let t_cells = rng.random_range(2..24);
    let t = sorted_grid(rng, len, t_cells);
    let (s_len, s_cells) = (rng.random_range(2.0..10.0) / alpha, rng.random_range(2..40));
    let s = sorted_grid(rng, s_len, s_cells);
    let ns = s.len();
    let decay = rng.random_range(0.0..2.0) * alpha;
    let values = (0..t.len() * ns)
        .map(|k| {
            let j = k % ns;
            if j + 1 == ns {
                0.0
            } else {
                rng.random_range(-1.0..1.0) * (-decay * s[j]).exp()
            }
        })
        .collect();
    StripField::new(0, t, s, values)
}

/// Random P1 field on a polar mesh of a sector with opening `theta`,
/// vanishing on the outer ring.
pub fn random_sector_field<R: Rng>(rng: &mut R, theta: f64) -> Result<SectorField> {
    let start = Vec2::new(1.0, 0.0).rotated(rng.random_range(0.0..2.0 * PI));
    let apex = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let sector = Sector::new(apex, start, theta)?;
    let r_max = rng.random_range(0.5..5.0);
    let cells = rng.random_range(2..30);
    let mut radii = sorted_grid(rng, r_max, cells);
    if radii.len() < 3 {
        radii = vec![0.0, 0.5 * r_max, r_max];
    }
    let angular = rng.random_range(1..24);
    let rings = radii.len() - 1;
    let len = 1 + rings * (angular + 1);
    let decay = rng.random_range(0.0..3.0);
    let values = (0..len)
        .map(|idx| {
            if idx == 0 {
                return rng.random_range(-1.0..1.0);
            }
            let j = 1 + (idx - 1) / (angular + 1);
            if j == rings {
                0.0
            } else {
                rng.random_range(-1.0..1.0) * (-decay * radii[j]).exp()
            }
        })
        .collect();
    SectorField::new(sector, radii, angular, values)
}

/// Half-line projection inequality on `count` random profiles per alpha, with
/// absolute slack `tol`.
pub fn projection_suite<R: Rng>(rng: &mut R, count: usize, alphas: &[f64], tol: f64) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("halfline_projection");
    for &alpha in alphas {
        for _ in 0..count {
            let g = projection_gap(&random_profile(rng, alpha)?, alpha)?;
            out.record(g.rhs - g.lhs, g.holds(tol));
        }
    }
    Ok(out)
}

/// Sector trace inequality over random fields, openings and epsilons.
pub fn trace_suite<R: Rng>(rng: &mut R, count: usize, thetas: &[f64], epsilons: &[f64]) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("sector_trace");
    for _ in 0..count {
        for &theta in thetas {
            let field = random_sector_field(rng, theta)?;
            for &eps in epsilons {
                let t = sector_trace_check(&field, eps)?;
                out.record(t.volume_bound - t.boundary_integral, t.holds(1e-12));
            }
        }
    }
    Ok(out)
}

/// Strip energy chain `0 <= transverse <= robin_form + tol`.
pub fn strip_suite<R: Rng>(rng: &mut R, count: usize, tol: f64) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("strip_chain");
    for _ in 0..count {
        let alpha = rng.random_range(0.5..20.0);
        let e = strip_energy_gap(&random_strip_field(rng, alpha)?, alpha)?;
        let ok = e.transverse >= 0.0 && e.transverse <= e.robin_form + tol;
        out.record((e.robin_form - e.transverse).min(e.transverse), ok);
    }
    Ok(out)
}
