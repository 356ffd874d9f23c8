//! The warden's radiometer.
//!
//! With infinitely long blocks the average received power at the source is
//! deterministic given `|h_rd|^2`: `P_r^0 |h_rs|^2 + sigma2_s` without a
//! covert message and `(P_r^1 + P_delta) |h_rs|^2 + sigma2_s` with one. The
//! warden declares "covert" when that power reaches the threshold `tau`.
//! All rates here are conditioned on the covert-opportunity condition,
//! i.e. `|h_rd|^2` is exponential, shifted to start at the covert threshold.

use crate::{DerivedConstants, Error, Result};

/// Grid size of the coarse threshold scan.
pub const THRESHOLD_GRID: usize = 1024;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectionCurve {
    pub taus: Vec<f64>,
    pub p_fa: Vec<f64>,
    pub p_md: Vec<f64>,
    pub xi: Vec<f64>,
}

impl DetectionCurve {
    /// Samples the rates at each threshold (which should be ascending).
    pub fn sample(c: &DerivedConstants, taus: &[f64]) -> Result<Self> {
        let mut curve = DetectionCurve::default();
        for &tau in taus {
            let fa = false_alarm_rate(tau, c)?;
            let md = miss_detection_rate(tau, c)?;
            curve.taus.push(tau);
            curve.p_fa.push(fa);
            curve.p_md.push(md);
            curve.xi.push(fa + md);
        }
        Ok(curve)
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdResult {
    pub tau_star: f64,
    pub xi_star: f64,
    /// Number of objective evaluations spent.
    pub evaluations: usize,
}

/// `exp{mu sigma2_d [1/headroom - |h_rs|^2 / gap]}` with the `gap -> 0+`
/// limit (exponent to minus infinity) handled explicitly.
fn kappa(gap: f64, c: &DerivedConstants) -> f64 {
    if gap <= 0.0 {
        return 0.0;
    }
    let m = c.mu * c.params.sigma2_d;
    (m * (1.0 / c.headroom() - c.params.h_rs2 / gap)).exp()
}

fn check_tau(tau: f64) -> Result<()> {
    if tau.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFiniteThreshold(tau))
    }
}

/// `P(T >= tau | H0)`.
pub fn false_alarm_rate(tau: f64, c: &DerivedConstants) -> Result<f64> {
    check_tau(tau)?;
    let noise = c.params.sigma2_s;
    Ok(if tau < noise {
        1.0
    } else if tau <= c.rho1 {
        1.0 - kappa(tau - noise, c)
    } else {
        0.0
    })
}

/// `P(T < tau | H1)`.
pub fn miss_detection_rate(tau: f64, c: &DerivedConstants) -> Result<f64> {
    check_tau(tau)?;
    Ok(if tau < c.rho2 {
        0.0
    } else if tau <= c.rho3 {
        kappa(tau - c.rho2, c)
    } else {
        1.0
    })
}

/// Total error rate `P_FA + P_MD`.
pub fn total_error(tau: f64, c: &DerivedConstants) -> Result<f64> {
    Ok(false_alarm_rate(tau, c)? + miss_detection_rate(tau, c)?)
}

// 1 - kappa1 + kappa2, valid on [rho2, rho1].
fn bracket_objective(tau: f64, c: &DerivedConstants) -> f64 {
    1.0 - kappa(tau - c.params.sigma2_s, c) + kappa(tau - c.rho2, c)
}

/// Threshold minimizing the warden's total error.
///
/// The minimizer lies in `[rho2, rho1]`. The objective there is not known to
/// be unimodal, so the bracket is scanned on a uniform grid and the best
/// cell is refined by golden-section search. When `P_delta` exceeds the
/// soft bound the bracket inverts, any `tau` in `[rho1, rho2]` gives zero
/// error, and the midpoint is returned.
pub fn optimal_threshold(c: &DerivedConstants) -> ThresholdResult {
    let (lo, hi) = (c.rho2, c.rho1);
    if hi < lo {
        return ThresholdResult {
            tau_star: 0.5 * (lo + hi),
            xi_star: 0.0,
            evaluations: 0,
        };
    }
    let f = |tau: f64| bracket_objective(tau, c);
    if hi == lo {
        return ThresholdResult {
            tau_star: lo,
            xi_star: f(lo),
            evaluations: 1,
        };
    }

    let step = (hi - lo) / (THRESHOLD_GRID - 1) as f64;
    let grid_point = |i: usize| {
        if i == THRESHOLD_GRID - 1 {
            hi
        } else {
            lo + step * i as f64
        }
    };
    let mut best = (0, f(lo));
    for i in 1..THRESHOLD_GRID {
        let v = f(grid_point(i));
        if v < best.1 {
            best = (i, v);
        }
    }
    let mut evaluations = THRESHOLD_GRID;

    let a = grid_point(best.0.saturating_sub(1));
    let b = grid_point((best.0 + 1).min(THRESHOLD_GRID - 1));
    let (tau, value, n) = golden_section_min(f, a, b, 1e-9 * (hi - lo));
    evaluations += n;

    let (tau_star, xi_star) = if value < best.1 {
        (tau, value)
    } else {
        (grid_point(best.0), best.1)
    };
    ThresholdResult {
        tau_star,
        xi_star,
        evaluations,
    }
}

/// Golden-section minimization on `[a, b]` down to an interval of width
/// `tol`. Returns `(x, f(x), evaluations)`.
pub(crate) fn golden_section_min<F: Fn(f64) -> f64>(
    f: F,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> (f64, f64, usize) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evals = 2;
    // 200 iterations shrink any finite interval below f64 resolution.
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
        evals += 1;
    }
    if f1 <= f2 {
        (x1, f1, evals)
    } else {
        (x2, f2, evals)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive_constants, detection_scenario};

    fn consts() -> DerivedConstants {
        derive_constants(&detection_scenario()).unwrap()
    }

    #[test]
    fn false_alarm_examples() {
        let c = consts();
        assert_eq!(false_alarm_rate(0.5, &c).unwrap(), 1.0);
        let expected = 1.0 - ((33.0 / 7.0) * (7.0 / 50.0 - 0.25f64)).exp();
        assert!((false_alarm_rate(5.0, &c).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 0.4046).abs() < 1e-4);
        assert!(false_alarm_rate(c.rho1, &c).unwrap().abs() < 1e-14);
        assert_eq!(false_alarm_rate(c.rho1 + 1e-9, &c).unwrap(), 0.0);
        assert_eq!(false_alarm_rate(1.0, &c).unwrap(), 1.0);
    }

    #[test]
    fn miss_detection_examples() {
        let c = consts();
        let expected = ((33.0 / 7.0) * (7.0 / 50.0 - 0.875f64)).exp();
        assert!((miss_detection_rate(5.0, &c).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 0.0313).abs() < 1e-4);
        assert!((miss_detection_rate(11.0, &c).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(miss_detection_rate(c.rho2, &c).unwrap(), 0.0);
        assert_eq!(miss_detection_rate(1e6, &c).unwrap(), 1.0);
    }

    #[test]
    fn total_error_examples() {
        let c = consts();
        assert!((total_error(5.0, &c).unwrap() - 0.4359).abs() < 1e-4);
        assert_eq!(total_error(11.0, &c).unwrap(), 1.0);
        assert_eq!(total_error(20.0, &c).unwrap(), 1.0);
        assert!(matches!(
            total_error(f64::NAN, &c),
            Err(Error::NonFiniteThreshold(_))
        ));
        assert!(false_alarm_rate(f64::INFINITY, &c).is_err());

        // above the soft bound the warden can make no errors
        let c = c.with_p_delta(1.2).unwrap();
        assert!(c.rho1 < c.rho2);
        for i in 0..=10 {
            let tau = c.rho1 + (c.rho2 - c.rho1) * i as f64 / 10.0;
            assert!(total_error(tau, &c).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn continuity_at_breakpoints() {
        let c = consts();
        let h = 1e-12;
        for x in [c.params.sigma2_s, c.rho1, c.rho2, c.rho3] {
            for rate in [false_alarm_rate, miss_detection_rate] {
                let left = rate(x - h, &c).unwrap();
                let right = rate(x + h, &c).unwrap();
                assert!(
                    (left - right).abs() < 1e-9,
                    "jump at {x}: {left} vs {right}"
                );
            }
        }
    }

    #[test]
    fn curve_is_monotone() {
        let c = consts();
        let taus: Vec<f64> = (0..=1200).map(|i| i as f64 * 0.01).collect();
        let curve = DetectionCurve::sample(&c, &taus).unwrap();
        assert_eq!(curve.len(), taus.len());
        for w in 0..curve.len() - 1 {
            assert!(curve.p_fa[w + 1] <= curve.p_fa[w]);
            assert!(curve.p_md[w + 1] >= curve.p_md[w]);
        }
        for (i, xi) in curve.xi.iter().enumerate() {
            assert_eq!(*xi, curve.p_fa[i] + curve.p_md[i]);
            assert!((0.0..=1.0).contains(&curve.p_fa[i]));
            assert!((0.0..=1.0).contains(&curve.p_md[i]));
        }
    }

    // Dense brute-force oracle over the bracket.
    fn brute_force_min(c: &DerivedConstants, n: usize) -> f64 {
        (0..n)
            .map(|i| {
                let tau = c.rho2 + (c.rho1 - c.rho2) * i as f64 / (n - 1) as f64;
                total_error(tau, c).unwrap()
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn optimal_threshold_matches_dense_scan() {
        let c = consts();
        let r = optimal_threshold(&c);
        assert!(c.rho2 <= r.tau_star && r.tau_star <= c.rho1);
        let oracle = brute_force_min(&c, 1_000_000);
        assert!(r.xi_star <= oracle + 1e-12);
        assert!((r.xi_star - oracle).abs() < 1e-6);
        assert_eq!(r.xi_star, total_error(r.tau_star, &c).unwrap());
        assert!(r.evaluations > THRESHOLD_GRID);
    }

    #[test]
    fn optimal_threshold_limits() {
        let c = consts();
        let tiny = c.with_p_delta(1e-9).unwrap();
        assert!(optimal_threshold(&tiny).xi_star > 1.0 - 1e-6);
        let none = c.with_p_delta(0.0).unwrap();
        assert_eq!(optimal_threshold(&none).xi_star, 1.0);

        let edge = c.with_p_delta(c.p_delta_u).unwrap();
        let r = optimal_threshold(&edge);
        assert!(r.xi_star.abs() < 1e-12);

        let above = c.with_p_delta(1.1).unwrap();
        let r = optimal_threshold(&above);
        assert_eq!(r.xi_star, 0.0);
        assert!(above.rho1 <= r.tau_star && r.tau_star <= above.rho2);
    }

    #[test]
    fn min_error_decreases_with_covert_power() {
        let c = consts();
        let mut prev = f64::INFINITY;
        for i in 0..=64 {
            let p = c.p_delta_u * i as f64 / 64.0;
            let xi = optimal_threshold(&c.with_p_delta(p).unwrap()).xi_star;
            assert!(xi <= prev + 1e-12, "xi* rose at p_delta = {p}");
            prev = xi;
        }
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, fx, _) = golden_section_min(|x| (x - 0.3).powi(2) + 1.0, -2.0, 5.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-15);
    }
}
