//! Physical scenario and the constants every analytic formula consumes.
//!
//! Everything here is in linear units. The scenario file format (flat
//! `key = value` text with optional `_db` keys) lives in [`file`].

pub mod file;

use crate::{Error, Result};

/// Raw physical scenario.
///
/// Fading is Rayleigh with unit mean power, so `h_sr2` and `h_rs2` are the
/// realised channel power gains known to the relay and to the warden.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Source transmit power.
    pub p_s: f64,
    /// Relay power budget.
    pub p_r_max: f64,
    /// Noise variance at the relay.
    pub sigma2_r: f64,
    /// Noise variance at the destination.
    pub sigma2_d: f64,
    /// Noise variance at the source (warden).
    pub sigma2_s: f64,
    /// Fixed source-to-destination rate in bits per channel use.
    pub r_sd: f64,
    /// Covert transmit power, fixed across fading blocks.
    pub p_delta: f64,
    /// |h_sr|^2
    pub h_sr2: f64,
    /// |h_rs|^2
    pub h_rs2: f64,
}

impl SystemParams {
    /// Scenario with channel reciprocity, `|h_rs|^2 = |h_sr|^2`.
    #[allow(clippy::too_many_arguments)]
    pub fn reciprocal(
        p_s: f64,
        p_r_max: f64,
        sigma2_r: f64,
        sigma2_d: f64,
        sigma2_s: f64,
        r_sd: f64,
        p_delta: f64,
        h_sr2: f64,
    ) -> Self {
        SystemParams {
            p_s,
            p_r_max,
            sigma2_r,
            sigma2_d,
            sigma2_s,
            r_sd,
            p_delta,
            h_sr2,
            h_rs2: h_sr2,
        }
    }

    /// Unit noise everywhere, reciprocal channel.
    pub fn unit_noise(p_s: f64, p_r_max: f64, r_sd: f64, p_delta: f64, h_sr2: f64) -> Self {
        Self::reciprocal(p_s, p_r_max, 1.0, 1.0, 1.0, r_sd, p_delta, h_sr2)
    }

    pub fn with_p_delta(mut self, p_delta: f64) -> Self {
        self.p_delta = p_delta;
        self
    }

    pub fn with_p_r_max(mut self, p_r_max: f64) -> Self {
        self.p_r_max = p_r_max;
        self
    }

    /// Sets `|h_sr|^2` and keeps the reverse channel reciprocal.
    pub fn with_h_sr2(mut self, h_sr2: f64) -> Self {
        self.h_sr2 = h_sr2;
        self.h_rs2 = h_sr2;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let strictly_positive = [
            ("p_s", self.p_s),
            ("p_r_max", self.p_r_max),
            ("sigma2_r", self.sigma2_r),
            ("sigma2_d", self.sigma2_d),
            ("sigma2_s", self.sigma2_s),
            ("r_sd", self.r_sd),
            ("h_sr2", self.h_sr2),
            ("h_rs2", self.h_rs2),
        ];
        for (name, value) in strictly_positive {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and strictly positive",
                });
            }
        }
        if !self.p_delta.is_finite() || self.p_delta < 0.0 {
            return Err(Error::InvalidParameter {
                name: "p_delta",
                value: self.p_delta,
                reason: "must be finite and non-negative",
            });
        }
        Ok(())
    }

    /// `2^(2 R_sd) - 1`: the destination SNR that exactly supports `r_sd`
    /// over the two-phase (half-duplex) link.
    pub fn target_snr(&self) -> f64 {
        (2.0 * self.r_sd).exp2() - 1.0
    }
}

/// Cached scenario algebra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    /// The scenario these constants were derived from.
    pub params: SystemParams,
    /// Power-scaling factor: forwarding power is `mu * sigma2_d / |h_rd|^2`.
    pub mu: f64,
    /// `P_s / sigma2_r`.
    pub eta: f64,
    /// Largest covert power that keeps the warden's total error positive.
    pub p_delta_u: f64,
    /// Upper end of the warden's received power under H0.
    pub rho1: f64,
    /// Lower end of the warden's received power under H1.
    pub rho2: f64,
    /// Upper end of the warden's received power under H1.
    pub rho3: f64,
    /// Probability that the covert-opportunity condition holds.
    pub p_c: f64,
    /// Amplify-and-forward scaling gain `1/sqrt(P_s |h_sr|^2 + sigma2_r)`.
    pub gain: f64,
}

impl DerivedConstants {
    /// `P_r^max - (mu + 1) P_delta`, the power left for forwarding once the
    /// covert message and its forwarding overhead are paid for. Positive for
    /// any successfully derived constants.
    pub fn headroom(&self) -> f64 {
        self.params.p_r_max - (self.mu + 1.0) * self.params.p_delta
    }

    /// `|h_rd|^2` below which the relay is in outage.
    pub fn outage_threshold(&self) -> f64 {
        self.mu * self.params.sigma2_d / self.params.p_r_max
    }

    /// `|h_rd|^2` at or above which the relay can add covert power.
    pub fn covert_threshold(&self) -> f64 {
        self.mu * self.params.sigma2_d / self.headroom()
    }

    /// `P_r^max / (mu + 1)`: covert powers at or above this are never usable.
    pub fn p_delta_budget(&self) -> f64 {
        p_delta_budget(self.params.p_r_max, self.mu)
    }

    /// Same scenario with a different covert power.
    pub fn with_p_delta(&self, p_delta: f64) -> Result<DerivedConstants> {
        derive_constants(&self.params.with_p_delta(p_delta))
    }
}

fn p_delta_budget(p_r_max: f64, mu: f64) -> f64 {
    p_r_max / (mu + 1.0)
}

/// Power-scaling factor of the forwarding policy, or `InfeasibleRate` when
/// the relay link cannot carry `r_sd` at any relay power.
pub fn scaling_factor(params: &SystemParams) -> Result<f64> {
    let target = params.target_snr();
    let received = params.p_s * params.h_sr2;
    let required = params.sigma2_r * target;
    if !(received > required) {
        return Err(Error::InfeasibleRate { received, required });
    }
    Ok((received + params.sigma2_r) * target / (received - required))
}

pub fn derive_constants(params: &SystemParams) -> Result<DerivedConstants> {
    params.validate()?;
    let p = params;
    let mu = scaling_factor(p)?;

    let limit = p_delta_budget(p.p_r_max, mu);
    if p.p_delta >= limit {
        return Err(Error::CovertPowerExceedsBudget {
            p_delta: p.p_delta,
            limit,
        });
    }
    let headroom = p.p_r_max - (mu + 1.0) * p.p_delta;

    Ok(DerivedConstants {
        params: *p,
        mu,
        eta: p.p_s / p.sigma2_r,
        p_delta_u: p.p_r_max / (2.0 * (mu + 1.0)),
        rho1: headroom * p.h_rs2 + p.sigma2_s,
        rho2: (mu + 1.0) * p.p_delta * p.h_rs2 + p.sigma2_s,
        rho3: p.p_r_max * p.h_rs2 + p.sigma2_s,
        p_c: (-mu * p.sigma2_d / headroom).exp(),
        gain: 1.0 / (p.p_s * p.h_sr2 + p.sigma2_r).sqrt(),
    })
}

#[cfg(test)]
pub(crate) fn detection_scenario() -> SystemParams {
    SystemParams::unit_noise(10.0, 10.0, 1.0, 0.5, 1.0)
}
