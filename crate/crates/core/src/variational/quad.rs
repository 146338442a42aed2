//! Closed-form cell integrals for piecewise-linear data.

/// `(int_a^b e^{-k s} ds, int_a^b e^{-k s} (s - a)/(b - a) ds)`.
///
/// A linear function with end values `va`, `vb` then integrates against the
/// exponential as `va * (i0 - i1) + vb * i1`.
pub fn exp_linear_moments(k: f64, a: f64, b: f64) -> (f64, f64) {
    let h = b - a;
    let x = k * h;
    let scale = (-k * a).exp();
    let i0 = scale * h * one_minus_exp_over_x(x);
    let i1 = scale * h * ramp_moment(x);
    (i0, i1)
}

/// `(1 - e^{-x}) / x`
fn one_minus_exp_over_x(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - 0.5 * x
    } else {
        -(-x).exp_m1() / x
    }
}

/// `(1 - e^{-x}(1 + x)) / x^2`, i.e. `int_0^1 e^{-x u} u du`.
fn ramp_moment(x: f64) -> f64 {
    if x.abs() < 0.05 {
        // alternating series, coefficients (-1)^n (n+1) / (n+2)!
        let mut sum = 0.0;
        let mut term = 0.5;
        let mut n = 0.0;
        let mut xp = 1.0;
        for _ in 0..10 {
            sum += term * xp;
            n += 1.0;
            xp *= -x;
            term = (n + 1.0) / factorial(n + 2.0);
        }
        sum
    } else {
        (-(-x).exp_m1() - x * (-x).exp()) / (x * x)
    }
}

fn factorial(n: f64) -> f64 {
    let mut f = 1.0;
    let mut k = 2.0;
    while k <= n {
        f *= k;
        k += 1.0;
    }
    f
}

/// `int` of the product of two linear functions on a cell of width `h`.
pub fn linear_product(h: f64, a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    h / 6.0 * (2.0 * a0 * b0 + a0 * b1 + a1 * b0 + 2.0 * a1 * b1)
}

pub fn linear_sq(h: f64, a0: f64, a1: f64) -> f64 {
    h / 3.0 * (a0 * a0 + a0 * a1 + a1 * a1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(k: f64, a: f64, b: f64) -> (f64, f64) {
        // composite Simpson with many panels
        let n = 20_000;
        let h = (b - a) / n as f64;
        let f0 = |s: f64| (-k * s).exp();
        let f1 = |s: f64| (-k * s).exp() * (s - a) / (b - a);
        let simpson = |f: &dyn Fn(f64) -> f64| {
            let mut acc = f(a) + f(b);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * f(a + i as f64 * h);
            }
            acc * h / 3.0
        };
        (simpson(&f0), simpson(&f1))
    }

    #[test]
    fn moments_match_quadrature() {
        for &(k, a, b) in &[
            (1.0, 0.0, 1.0),
            (5.0, 0.2, 0.21),
            (20.0, 0.0, 0.001),
            (0.3, 1.0, 4.0),
            (10.0, 0.5, 0.5 + 1e-7),
        ] {
            let (i0, i1) = exp_linear_moments(k, a, b);
            let (b0, b1) = brute(k, a, b);
            assert!((i0 - b0).abs() <= 1e-12 * b0.abs().max(1e-300) + 1e-18, "{k} {a} {b}");
            assert!((i1 - b1).abs() <= 1e-10 * b1.abs() + 1e-18, "{k} {a} {b}: {i1} {b1}");
        }
    }

    #[test]
    fn ramp_series_continuous() {
        let lo = ramp_moment(0.0499999);
        let hi = ramp_moment(0.0500001);
        assert!((lo - hi).abs() < 1e-7);
        assert!((ramp_moment(0.0) - 0.5).abs() < 1e-16);
    }
}
