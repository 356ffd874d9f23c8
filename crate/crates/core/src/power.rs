//! Relay transmit-power policies.
//!
//! The relay spends exactly enough power to pin the destination capacity
//! to `R_sd`. With a covert message it must also pay for the interference
//! that message causes, and it drops the covert message whenever the total
//! would exceed the budget. Branch boundaries are closed on the left.

use crate::{DerivedConstants, Error, Result, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerDecision {
    /// Power spent forwarding the source's signal.
    pub p_forward: f64,
    /// Power spent on the covert message, 0 when suppressed.
    pub p_covert: f64,
    /// Relay stays silent and the destination requests a retransmission.
    pub outage: bool,
}

impl PowerDecision {
    pub const OUTAGE: PowerDecision = PowerDecision {
        p_forward: 0.0,
        p_covert: 0.0,
        outage: true,
    };

    fn forward(p_forward: f64, p_covert: f64) -> Self {
        PowerDecision {
            p_forward,
            p_covert,
            outage: false,
        }
    }

    pub fn total(&self) -> f64 {
        self.p_forward + self.p_covert
    }
}

/// Which branch of the covert policy a realisation falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyBranch {
    /// Covert message sent on top of forwarding.
    Covert,
    /// Forwarding only; covert message abandoned to respect the budget.
    ForwardOnly,
    Outage,
}

pub fn classify(h_rd2: f64, c: &DerivedConstants) -> PolicyBranch {
    if h_rd2 >= c.covert_threshold() {
        PolicyBranch::Covert
    } else if h_rd2 >= c.outage_threshold() {
        PolicyBranch::ForwardOnly
    } else {
        PolicyBranch::Outage
    }
}

/// Policy when the relay never sends its own message.
pub fn power_no_covert(h_rd2: f64, c: &DerivedConstants) -> PowerDecision {
    debug_assert!(h_rd2 >= 0.0);
    if h_rd2 >= c.outage_threshold() {
        PowerDecision::forward(c.mu * c.params.sigma2_d / h_rd2, 0.0)
    } else {
        PowerDecision::OUTAGE
    }
}

/// Policy when the relay embeds a covert message of power `P_delta`.
pub fn power_with_covert(h_rd2: f64, c: &DerivedConstants) -> Result<PowerDecision> {
    debug_assert!(h_rd2 >= 0.0);
    let budget = c.p_delta_budget();
    if c.params.p_delta >= budget {
        return Err(Error::CovertPowerExceedsBudget {
            p_delta: c.params.p_delta,
            limit: budget,
        });
    }
    let noise_term = c.mu * c.params.sigma2_d / h_rd2;
    Ok(match classify(h_rd2, c) {
        PolicyBranch::Covert => {
            PowerDecision::forward(c.mu * c.params.p_delta + noise_term, c.params.p_delta)
        }
        PolicyBranch::ForwardOnly => PowerDecision::forward(noise_term, 0.0),
        PolicyBranch::Outage => PowerDecision::OUTAGE,
    })
}

/// SNR (or SINR, with a covert message present) of the forwarded signal at
/// the destination.
pub fn forward_snr(h_rd2: f64, decision: &PowerDecision, params: &SystemParams) -> Result<f64> {
    if decision.outage {
        return Err(Error::OutageDecision);
    }
    let g1 = params.p_s * params.h_sr2 / params.sigma2_r;
    let g3 = decision.p_forward * h_rd2 / params.sigma2_d;
    if decision.p_covert == 0.0 {
        Ok(g1 * g3 / (g1 + g3 + 1.0))
    } else {
        let interference = g3 * decision.p_covert / decision.p_forward;
        Ok(g1 * g3 / (g3 + (g1 + 1.0) * (interference + 1.0)))
    }
}

/// Capacity of the two-phase link for a given end-to-end SNR.
pub fn destination_capacity(snr: f64) -> f64 {
    0.5 * snr.ln_1p() / std::f64::consts::LN_2
}

/// Probability that the relay cannot support `R_sd` even at full power,
/// under unit-mean Rayleigh fading on the relay-destination link.
pub fn outage_probability(c: &DerivedConstants) -> f64 {
    -(-c.outage_threshold()).exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive_constants, detection_scenario};
    use proptest::prelude::*;

    fn consts() -> DerivedConstants {
        derive_constants(&detection_scenario()).unwrap()
    }

    #[test]
    fn no_covert_policy_examples() {
        let c = consts();
        let d = power_no_covert(1.0, &c);
        assert!(!d.outage);
        assert!((d.p_forward - 33.0 / 7.0).abs() < 1e-12);
        assert_eq!(d.p_covert, 0.0);

        assert_eq!(power_no_covert(0.3, &c), PowerDecision::OUTAGE);
        assert!((c.outage_threshold() - 33.0 / 70.0).abs() < 1e-15);
        assert!(power_no_covert(1e12, &c).p_forward < 1e-11);
        assert!(!power_no_covert(c.outage_threshold(), &c).outage);
    }

    #[test]
    fn covert_policy_examples() {
        let c = consts();
        assert!((c.covert_threshold() - 0.66).abs() < 1e-12);

        let d = power_with_covert(1.0, &c).unwrap();
        assert!((d.p_forward - (33.0 / 7.0) * 1.5).abs() < 1e-12);
        assert_eq!(d.p_covert, 0.5);
        assert!((d.total() - 7.571428571428571).abs() < 1e-12);

        let d = power_with_covert(0.55, &c).unwrap();
        assert!((d.p_forward - (33.0 / 7.0) / 0.55).abs() < 1e-12);
        assert!((d.p_forward - 8.5714).abs() < 1e-4);
        assert_eq!(d.p_covert, 0.0);

        assert_eq!(power_with_covert(0.4, &c).unwrap(), PowerDecision::OUTAGE);
        assert_eq!(classify(c.covert_threshold(), &c), PolicyBranch::Covert);
    }

    #[test]
    fn snr_pins_rate() {
        let c = consts();
        let p = c.params;
        let d = power_no_covert(1.0, &c);
        let snr = forward_snr(1.0, &d, &p).unwrap();
        assert!((snr - 3.0).abs() < 1e-12);
        assert!((destination_capacity(snr) - 1.0).abs() < 1e-12);

        let d = power_with_covert(1.0, &c).unwrap();
        let snr = forward_snr(1.0, &d, &p).unwrap();
        assert!((destination_capacity(snr) - 1.0).abs() < 1e-12);

        assert_eq!(
            forward_snr(0.1, &PowerDecision::OUTAGE, &p),
            Err(Error::OutageDecision)
        );
    }

    #[test]
    fn outage_probability_examples() {
        let c = consts();
        let delta = outage_probability(&c);
        assert!((delta - (1.0 - (-33.0f64 / 70.0).exp())).abs() < 1e-15);
        assert!((delta - 0.3759).abs() < 1e-4);

        let big = derive_constants(&detection_scenario().with_p_r_max(1e9)).unwrap();
        assert!(outage_probability(&big) < 1e-8);

        let mut low_rate = detection_scenario();
        low_rate.r_sd = 1e-9;
        let c = derive_constants(&low_rate).unwrap();
        assert!(c.mu < 1e-8);
        assert!(outage_probability(&c) < 1e-8);
    }

    #[test]
    fn budget_violation_is_error() {
        let mut c = consts();
        c.params.p_delta = 10.0;
        assert!(matches!(
            power_with_covert(1.0, &c),
            Err(Error::CovertPowerExceedsBudget { .. })
        ));
    }

    proptest! {
        #[test]
        fn zero_covert_power_matches_plain_policy(h in 0.0f64..20.0) {
            let c = derive_constants(&detection_scenario().with_p_delta(0.0)).unwrap();
            prop_assert_eq!(power_with_covert(h, &c).unwrap(), power_no_covert(h, &c));
        }

        #[test]
        fn budget_and_rate_pinning(h in 0.0f64..50.0, frac in 0.0f64..0.999) {
            let base = consts();
            let c = base.with_p_delta(frac * base.p_delta_budget()).unwrap();
            for d in [power_no_covert(h, &c), power_with_covert(h, &c).unwrap()] {
                prop_assert!(d.total() <= c.params.p_r_max * (1.0 + 1e-12));
                if d.outage {
                    prop_assert_eq!(d.total(), 0.0);
                } else {
                    let cap = destination_capacity(forward_snr(h, &d, &c.params).unwrap());
                    prop_assert!((cap - c.params.r_sd).abs() <= 1e-12 * c.params.r_sd);
                }
            }
        }
    }
}
