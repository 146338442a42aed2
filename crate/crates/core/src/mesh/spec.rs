use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ConvexPolygon;
use crate::model::{merged_spectrum, HalfLineRobin, SpectrumKind};

/// Condition imposed on the artificial outer boundary of the truncated domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArtificialBc {
    Dirichlet,
    Neumann,
}

impl ArtificialBc {
    pub fn as_str(self) -> &'static str {
        match self {
            ArtificialBc::Dirichlet => "dirichlet",
            ArtificialBc::Neumann => "neumann",
        }
    }
}

/// How the exterior is cut off and how finely it is meshed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationSpec {
    /// Distance from the polygon to the artificial boundary.
    pub offset: f64,
    pub artificial_bc: ArtificialBc,
    /// Cell size in the layer along the polygon.
    pub boundary_cell: f64,
    /// Cell size away from the polygon.
    pub interior_cell: f64,
    /// Ratio of successive cell sizes towards a corner.
    pub grading_ratio: f64,
    /// Number of geometric grading levels at each corner.
    pub grading_levels: u32,
}

impl TruncationSpec {
    pub fn validate(&self, polygon: &ConvexPolygon) -> Result<()> {
        let bad = |m: String| Err(Error::DegenerateSpec(m));
        if !(self.offset > 0.0 && self.offset.is_finite()) {
            return bad(format!("offset must be positive, got {}", self.offset));
        }
        if !(self.boundary_cell > 0.0 && self.boundary_cell <= self.interior_cell) {
            return bad(format!(
                "need 0 < boundary cell ({}) <= interior cell ({})",
                self.boundary_cell, self.interior_cell
            ));
        }
        if !self.interior_cell.is_finite() {
            return bad("interior cell size must be finite".into());
        }
        if !(self.grading_ratio > 0.0 && self.grading_ratio < 1.0) {
            return bad(format!("grading ratio must lie in (0, 1), got {}", self.grading_ratio));
        }
        if self.boundary_cell > polygon.min_side() / 4.0 {
            return bad(format!(
                "boundary cell {} is too large for the shortest side {}",
                self.boundary_cell,
                polygon.min_side()
            ));
        }
        Ok(())
    }
}

/// Truncation and resolution suited to the `m_max` lowest eigenvalues at
/// Robin parameter `alpha`.
pub fn default_spec(polygon: &ConvexPolygon, alpha: f64, m_max: usize) -> Result<TruncationSpec> {
    HalfLineRobin::new(alpha)?;
    let m_max = m_max.max(1);
    let mu = merged_spectrum(polygon, SpectrumKind::Dirichlet, m_max).entries[m_max - 1].value;
    let a2 = alpha * alpha;
    if mu >= a2 {
        return Err(Error::BracketInvalid {
            m: m_max,
            mu,
            alpha_sq: a2,
        });
    }
    let decay = (a2 - mu).sqrt();
    let decay = if decay > 0.0 { decay } else { alpha };
    let l_min = polygon.min_side();
    let boundary_cell = (0.1 / alpha).min(l_min / 20.0);
    Ok(TruncationSpec {
        offset: (1.5 * polygon.max_side()).max(16.0 / decay),
        artificial_bc: ArtificialBc::Dirichlet,
        boundary_cell,
        interior_cell: (5.0 * boundary_cell).min(l_min / 4.0),
        grading_ratio: 0.5,
        grading_levels: 3,
    })
}
