use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Perturbation data for comparing the `m`-th eigenvalue of two forms linked
/// by an almost-isometric map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonInput {
    pub lambda: f64,
    pub delta1: f64,
    pub delta2: f64,
}

/// Upper bound `lambda + (lambda delta1 + delta2)(1 + lambda) / (1 - (1 + lambda) delta1)`
/// for the compared eigenvalue.
///
/// At `delta1 = 1 / (1 + lambda)` the bound is vacuous and `+inf` is returned.
pub fn comparison_bound(c: ComparisonInput) -> Result<f64> {
    let ComparisonInput { lambda, delta1, delta2 } = c;
    if ![lambda, delta1, delta2].iter().all(|x| x.is_finite()) || lambda < 0.0 || delta1 < 0.0 || delta2 < 0.0 {
        return Err(Error::InvalidInput(format!(
            "comparison needs finite lambda, delta1, delta2 >= 0, got {lambda}, {delta1}, {delta2}"
        )));
    }
    let limit = 1.0 / (1.0 + lambda);
    if delta1 > limit {
        return Err(Error::DeltaTooLarge { delta1, limit });
    }
    let denom = 1.0 - (1.0 + lambda) * delta1;
    if denom <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(lambda + (lambda * delta1 + delta2) * (1.0 + lambda) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn input(lambda: f64, delta1: f64, delta2: f64) -> ComparisonInput {
        ComparisonInput { lambda, delta1, delta2 }
    }

    #[test]
    fn examples() {
        assert_eq!(comparison_bound(input(1.0, 0.1, 0.1)).unwrap(), 1.5);
        assert!((comparison_bound(input(3.0, 1e-15, 1e-15)).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(comparison_bound(input(0.0, 0.5, 0.0)).unwrap(), 0.0);
        assert_eq!(comparison_bound(input(1.0, 0.5, 0.0)).unwrap(), f64::INFINITY);
        assert!(matches!(
            comparison_bound(input(1.0, 0.6, 0.0)),
            Err(Error::DeltaTooLarge { .. })
        ));
        assert!(comparison_bound(input(-1.0, 0.1, 0.1)).is_err());
    }

    proptest! {
        #[test]
        fn monotone_in_deltas(lambda in 0.0..50.0f64, a in 0.0..1.0f64, b in 0.0..1.0f64, d2 in 0.0..5.0f64, e in 0.0..5.0f64) {
            let limit = 1.0 / (1.0 + lambda);
            let (lo, hi) = (a.min(b) * limit * 0.999, a.max(b) * limit * 0.999);
            let base = comparison_bound(input(lambda, lo, d2)).unwrap();
            prop_assert!(base >= lambda);
            prop_assert!(comparison_bound(input(lambda, hi, d2)).unwrap() >= base);
            prop_assert!(comparison_bound(input(lambda, lo, d2 + e)).unwrap() >= base);
        }
    }
}
