//! Closed-form spectra of the one-dimensional model operators.
//!
//! * `-f''` on `(0, l)` with Dirichlet or Neumann ends, and the direct sum of
//!   one such interval per polygon side;
//! * the half-line Robin operator `-v''`, `v'(0) + alpha v(0) = 0`, whose only
//!   bound state sits at `-alpha^2`;
//! * the two-sided eigenvalue bracket built from them.

use std::cmp::Ordering;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ConvexPolygon;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumKind {
    Dirichlet,
    Neumann,
}

impl SpectrumKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SpectrumKind::Dirichlet => "dirichlet",
            SpectrumKind::Neumann => "neumann",
        }
    }
}

/// Mode `mode` (1-based) of the interval attached to side `side` (0-based).
///
/// For Neumann ends mode 1 is the constant, so mode `k` has `k - 1` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeId {
    pub side: usize,
    pub mode: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub value: f64,
    pub id: ModeId,
}

/// Sorted eigenvalues of the direct sum of interval operators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpectrum {
    pub kind: SpectrumKind,
    pub entries: Vec<SpectrumEntry>,
}

impl ModelSpectrum {
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    /// The `m`-th eigenvalue, 1-based.
    pub fn nth(&self, m: usize) -> Option<f64> {
        m.checked_sub(1)
            .and_then(|i| self.entries.get(i))
            .map(|e| e.value)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Eigenvalue of mode `k >= 1` on an interval of length `len`.
pub fn mode_value(kind: SpectrumKind, len: f64, k: usize) -> f64 {
    let j = match kind {
        SpectrumKind::Dirichlet => k,
        SpectrumKind::Neumann => k - 1,
    };
    (j as f64 * PI / len).powi(2)
}

/// First `count` eigenvalues of `-f''` on `(0, len)`.
pub fn interval_spectrum(kind: SpectrumKind, len: f64, count: usize) -> Result<Vec<f64>> {
    if !(len > 0.0) || !len.is_finite() {
        return Err(Error::NonPositiveLength(len));
    }
    Ok((1..=count).map(|k| mode_value(kind, len, k)).collect())
}

fn entry_order(a: &SpectrumEntry, b: &SpectrumEntry) -> Ordering {
    a.value
        .total_cmp(&b.value)
        .then(a.id.side.cmp(&b.id.side))
        .then(a.id.mode.cmp(&b.id.mode))
}

/// The `count` smallest eigenvalues of the direct sum over the polygon sides,
/// ties broken by side then mode.
pub fn merged_spectrum(polygon: &ConvexPolygon, kind: SpectrumKind, count: usize) -> ModelSpectrum {
    let lengths = polygon.side_lengths();
    let ratio = (polygon.max_side() / polygon.min_side()).ceil() as usize;
    let k_max = count + ratio * count;
    let mut entries: Vec<SpectrumEntry> = lengths
        .iter()
        .enumerate()
        .flat_map(|(side, &len)| {
            (1..=k_max).map(move |mode| SpectrumEntry {
                value: mode_value(kind, len, mode),
                id: ModeId { side, mode },
            })
        })
        .collect();
    entries.sort_by(entry_order);
    entries.truncate(count);
    ModelSpectrum { kind, entries }
}

/// Half-line Robin operator with parameter `alpha`.
///
/// The bound state is `phi(s) = sqrt(2 alpha) exp(-alpha s)`, normalized in
/// `L^2(0, inf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfLineRobin {
    alpha: f64,
}

impl HalfLineRobin {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::NonPositiveAlpha(alpha));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eigenvalue(&self) -> f64 {
        -self.alpha * self.alpha
    }

    pub fn amplitude(&self) -> f64 {
        (2.0 * self.alpha).sqrt()
    }

    pub fn profile(&self, s: f64) -> f64 {
        self.amplitude() * (-self.alpha * s).exp()
    }

    /// `int_a^b phi(s) ds` in closed form.
    pub fn profile_integral(&self, a: f64, b: f64) -> f64 {
        let k = self.alpha;
        self.amplitude() * (-k * a).exp() * -(-k * (b - a)).exp_m1() / k
    }

    /// `int_0^inf phi(s)^2 ds`, identically one.
    pub fn norm_sq(&self) -> f64 {
        let k = self.alpha;
        self.amplitude().powi(2) / (2.0 * k)
    }
}

pub fn robin_halfline_groundstate(alpha: f64) -> Result<(f64, HalfLineRobin)> {
    let op = HalfLineRobin::new(alpha)?;
    Ok((op.eigenvalue(), op))
}

/// Dirichlet/Neumann bracket `[-alpha^2 + mu^N_m, -alpha^2 + mu^D_m]` for the
/// `m`-th exterior Robin eigenvalue. The upper bound is only a theorem when
/// `mu^D_m < alpha^2`, which `valid` records.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub m: usize,
    pub alpha: f64,
    pub mu_neumann: f64,
    pub mu_dirichlet: f64,
    pub lower: f64,
    pub upper: f64,
    pub valid: bool,
}

impl Bracket {
    pub fn width(&self) -> f64 {
        self.mu_dirichlet - self.mu_neumann
    }
}

pub fn bracket(polygon: &ConvexPolygon, alpha: f64, m: usize) -> Result<Bracket> {
    HalfLineRobin::new(alpha)?;
    if m == 0 {
        return Err(Error::InvalidInput("eigenvalue index m is 1-based".into()));
    }
    let mu_d = merged_spectrum(polygon, SpectrumKind::Dirichlet, m).entries[m - 1].value;
    let mu_n = merged_spectrum(polygon, SpectrumKind::Neumann, m).entries[m - 1].value;
    let a2 = alpha * alpha;
    Ok(Bracket {
        m,
        alpha,
        mu_neumann: mu_n,
        mu_dirichlet: mu_d,
        lower: -a2 + mu_n,
        upper: -a2 + mu_d,
        valid: mu_d < a2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_examples() {
        let d = interval_spectrum(SpectrumKind::Dirichlet, PI, 3).unwrap();
        for (v, e) in d.iter().zip([1.0, 4.0, 9.0]) {
            assert!((v - e).abs() < 1e-14);
        }
        let n = interval_spectrum(SpectrumKind::Neumann, PI, 3).unwrap();
        for (v, e) in n.iter().zip([0.0, 1.0, 4.0]) {
            assert!((v - e).abs() < 1e-14);
        }
        assert_eq!(
            interval_spectrum(SpectrumKind::Dirichlet, 1.0, 1).unwrap(),
            vec![PI * PI]
        );
        assert_eq!(
            interval_spectrum(SpectrumKind::Neumann, 0.0, 2),
            Err(Error::NonPositiveLength(0.0))
        );
    }

    #[test]
    fn merged_equilateral() {
        let s = merged_spectrum(&ConvexPolygon::equilateral(1.0), SpectrumKind::Dirichlet, 3);
        let pi2 = PI * PI;
        let mut sides: Vec<usize> = s.entries.iter().map(|e| e.id.side).collect();
        sides.sort();
        assert_eq!(sides, vec![0, 1, 2]);
        for e in &s.entries {
            assert!((e.value - pi2).abs() < 1e-12);
            assert_eq!(e.id.mode, 1);
        }
    }

    #[test]
    fn merged_two_one_one_one() {
        // a triangle with sides (1, 1, 2) is degenerate, so use the isosceles
        // trapezoid with sides 2, 1, 1, 1
        let h = 0.75f64.sqrt();
        let trap = ConvexPolygon::from_points(&[[0.0, 0.0], [2.0, 0.0], [1.5, h], [0.5, h]]).unwrap();
        let s = merged_spectrum(&trap, SpectrumKind::Dirichlet, 4);
        let pi2 = PI * PI;
        let expect = [pi2 / 4.0, pi2, pi2, pi2];
        for (e, x) in s.entries.iter().zip(expect) {
            assert!((e.value - x).abs() < 1e-12, "{e:?}");
        }
        assert_eq!(s.entries[0].id, ModeId { side: 0, mode: 1 });
        assert_eq!(s.entries[1].id, ModeId { side: 0, mode: 2 });
    }

    #[test]
    fn neumann_zeros() {
        let p = ConvexPolygon::regular(5, 0.7).unwrap();
        let s = merged_spectrum(&p, SpectrumKind::Neumann, 5);
        assert!(s.entries.iter().all(|e| e.value == 0.0));
    }

    #[test]
    fn halfline_groundstate() {
        let (ev, op) = robin_halfline_groundstate(1.0).unwrap();
        assert_eq!(ev, -1.0);
        assert!((op.profile(0.0) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(robin_halfline_groundstate(4.0).unwrap().0, -16.0);
        for a in [0.3, 1.0, 7.5] {
            assert!((HalfLineRobin::new(a).unwrap().norm_sq() - 1.0).abs() < 1e-15);
        }
        assert_eq!(
            robin_halfline_groundstate(0.0).unwrap_err(),
            Error::NonPositiveAlpha(0.0)
        );
    }

    #[test]
    fn bracket_examples() {
        let tri = ConvexPolygon::equilateral(1.0);
        let b = bracket(&tri, 10.0, 1).unwrap();
        assert_eq!(b.lower, -100.0);
        assert!((b.upper - (-100.0 + PI * PI)).abs() < 1e-12);
        assert!(b.valid);
        let b = bracket(&tri, 3.0, 1).unwrap();
        assert!((b.upper - 0.869_604_401_089_358_6).abs() < 1e-12);
        assert!(!b.valid);
        let sq = bracket(&ConvexPolygon::unit_square(), 10.0, 4).unwrap();
        assert_eq!(sq.lower, -100.0);
        assert!((sq.upper - (-100.0 + PI * PI)).abs() < 1e-12);
    }
}
