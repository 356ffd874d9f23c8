//! Exponential integral for negative arguments.
//!
//! `Ei(x) = -E1(-x)` for `x < 0`. `E1(z)` uses the convergent power series
//! `-gamma - ln z - sum (-z)^k / (k k!)` for `z <= SERIES_LIMIT` and the
//! continued fraction `e^{-z} / (z + 1 - 1^2/(z + 3 - 2^2/(z + 5 - ...)))`
//! (modified Lentz) above it. The series alternates, so its cancellation
//! grows like `e^z`; the limit keeps it where it loses under one digit.

use crate::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_431;

/// Series/continued-fraction switchover for `E1(z)`.
pub const SERIES_LIMIT: f64 = 1.0;

const MAX_TERMS: usize = 500;

fn e1_series(z: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0; // (-z)^k / k!
    for k in 1..MAX_TERMS {
        term *= -z / k as f64;
        let add = term / k as f64;
        sum += add;
        if add.abs() <= f64::EPSILON * 0.25 * sum.abs() {
            break;
        }
    }
    -EULER_GAMMA - z.ln() - sum
}

// Continued fraction for e^z E1(z), z > 0.
fn scaled_e1_fraction(z: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = z + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_TERMS {
        let an = -((i * i) as f64);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() <= f64::EPSILON {
            break;
        }
    }
    h
}

/// `E1(z) = int_z^inf e^{-t}/t dt` for `z > 0`.
pub fn e1(z: f64) -> f64 {
    debug_assert!(z > 0.0);
    if z <= SERIES_LIMIT {
        e1_series(z)
    } else {
        scaled_e1_fraction(z) * (-z).exp()
    }
}

/// `e^z E1(z)` for `z > 0`, finite for arbitrarily large `z`.
pub fn scaled_e1(z: f64) -> f64 {
    debug_assert!(z > 0.0);
    if z <= SERIES_LIMIT {
        e1_series(z) * z.exp()
    } else {
        scaled_e1_fraction(z)
    }
}

/// `Ei(x) = -int_{-x}^inf e^{-t}/t dt` for finite `x < 0`.
pub fn exp_integral_ei(x: f64) -> Result<f64> {
    if !(x < 0.0) || !x.is_finite() {
        return Err(Error::EiDomain(x));
    }
    Ok(-e1(-x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, Tolerance};

    // E1(z) = int_0^inf exp(-z e^u) du, smooth after t = z e^u.
    fn e1_by_quadrature(z: f64) -> f64 {
        let upper = (800.0 / z).ln().max(1.0);
        let tol = Tolerance {
            abs: 0.0,
            rel: 1e-15,
            max_subdivisions: 10_000,
        };
        integrate(|u| (-z * u.exp()).exp(), 0.0, upper, tol)
            .unwrap()
            .value
    }

    #[test]
    fn known_values() {
        let ei = exp_integral_ei(-1.0).unwrap();
        assert!((ei + 0.219_383_934_395_520_3).abs() < 1e-15);
        assert!((ei - -e1_by_quadrature(1.0)).abs() < 1e-15);

        // small-argument expansion ln|x| + gamma + x
        let x = -1e-3;
        let ei = exp_integral_ei(x).unwrap();
        assert!((ei - (1e-3f64.ln() + EULER_GAMMA + x + x * x / 4.0)).abs() < 1e-10);
        assert!((ei + 6.3315).abs() < 1e-4);
    }

    #[test]
    fn decays_to_zero_from_below() {
        let mut prev = exp_integral_ei(-1.0).unwrap();
        for x in [-5.0, -20.0, -100.0, -600.0] {
            let v = exp_integral_ei(x).unwrap();
            assert!(v <= 0.0 && v > prev);
            prev = v;
        }
        assert!(exp_integral_ei(-1000.0).unwrap().abs() < 1e-300);
    }

    #[test]
    fn domain_rejected() {
        for x in [0.0, 1.0, f64::NAN, f64::NEG_INFINITY] {
            assert!(matches!(exp_integral_ei(x), Err(Error::EiDomain(_))));
        }
    }

    #[test]
    fn regimes_agree_near_switchover() {
        for z in [0.5, 0.9, 1.0, 1.1, 1.5, 2.0, 3.0] {
            let series = e1_series(z);
            let fraction = scaled_e1_fraction(z) * (-z).exp();
            assert!(
                (series - fraction).abs() <= 5e-14 * series,
                "z = {z}: {series} vs {fraction}"
            );
        }
    }

    #[test]
    fn scaled_form_for_large_arguments() {
        // e^z E1(z) ~ 1/z - 1/z^2 + 2/z^3 - 6/z^4
        for z in [1e5f64, 1e6, 1e12] {
            let asym = 1.0 / z - 1.0 / (z * z) + 2.0 / z.powi(3) - 6.0 / z.powi(4);
            assert!((scaled_e1(z) - asym).abs() <= 1e-14 * asym);
        }
        assert!((scaled_e1(0.5) - e1(0.5) * 0.5f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn log_grid_against_quadrature() {
        let mut worst: f64 = 0.0;
        for i in 0..200 {
            let t = i as f64 / 199.0;
            let x = -(1e-8f64.ln() + t * (50f64.ln() - 1e-8f64.ln())).exp();
            let truth = -e1_by_quadrature(-x);
            let got = exp_integral_ei(x).unwrap();
            worst = worst.max((got - truth).abs() / truth.abs());
        }
        assert!(worst <= 1e-12, "max relative error {worst:e}");
    }
}
