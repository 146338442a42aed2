//! Discrete realizations of the variational inequalities behind the
//! asymptotics: the half-line projection bound, the sector trace inequality,
//! the strip energy chain and the identification map with its defects.

mod identification;
mod profile;
mod quad;
mod sector;
mod strip;
mod suite;

use std::f64::consts::PI;

pub use identification::{
    default_cutoffs, identification_map, CutoffSpec, IdentificationField, IdentificationResult, QuasiMode,
};
pub use profile::{projection_gap, ProjectionGap, Profile1D};
pub use quad::exp_linear_moments;
pub use sector::{sector_trace_check, SectorField, SectorTrace};
pub use strip::{project_strip, strip_energy_gap, StripEnergy, StripField};
pub use suite::{
    projection_suite, random_profile, random_sector_field, random_strip_field, strip_suite, trace_suite, SuiteOutcome,
};

use crate::error::{Error, Result};

/// Constant of the sector trace inequality for opening `theta`:
/// `2 / (1 - cos theta)` below `pi`, and 1 from `pi` on.
pub fn trace_constant(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < 2.0 * PI) {
        return Err(Error::AngleOutOfRange(theta));
    }
    if theta < PI {
        Ok(2.0 / (1.0 - theta.cos()))
    } else {
        Ok(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_constant_values() {
        assert!((trace_constant(PI / 2.0).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(trace_constant(PI).unwrap(), 1.0);
        assert!((trace_constant(2.0 * PI / 3.0).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!((trace_constant(PI - 1e-6).unwrap() - 1.0).abs() < 1e-5);
        assert_eq!(trace_constant(0.0), Err(Error::AngleOutOfRange(0.0)));
        assert_eq!(trace_constant(2.0 * PI), Err(Error::AngleOutOfRange(2.0 * PI)));
    }
}
