use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The relay link cannot carry `r_sd` at any relay power.
    #[error(
        "infeasible rate: P_s*|h_sr|^2 = {received} must exceed sigma_r^2*(2^(2 R_sd) - 1) = {required}"
    )]
    InfeasibleRate { received: f64, required: f64 },

    /// Covert power so large that the covert-opportunity condition can never hold.
    #[error("covert power {p_delta} is not below the budget P_r^max/(mu+1) = {limit}")]
    CovertPowerExceedsBudget { p_delta: f64, limit: f64 },

    #[error("threshold must be finite, got {0}")]
    NonFiniteThreshold(f64),

    #[error("decision is an outage; no signal reaches the destination")]
    OutageDecision,

    #[error("|h_rd|^2 = {h_rd2} is below the covert threshold {threshold}")]
    BelowCovertThreshold { h_rd2: f64, threshold: f64 },

    #[error("exponential integral Ei(x) requires finite x < 0, got {0}")]
    EiDomain(f64),

    #[error(
        "quadrature did not converge: estimate {estimate}, error estimate {error_estimate} after {subdivisions} subdivisions"
    )]
    QuadratureNotConverged {
        estimate: f64,
        error_estimate: f64,
        subdivisions: usize,
    },

    /// Closed-form and quadrature covert rates disagree beyond tolerance.
    #[error("closed-form rate {closed} and quadrature rate {quadrature} disagree at p_delta = {p_delta}")]
    OracleDisagreement {
        p_delta: f64,
        closed: f64,
        quadrature: f64,
    },

    #[error("{context}: {message}")]
    Config { context: String, message: String },
}

impl Error {
    pub(crate) fn config(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            context: context.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by a scenario the model cannot support.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::InfeasibleRate { .. } | Error::CovertPowerExceedsBudget { .. }
        )
    }

    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNotConverged { .. } | Error::OracleDisagreement { .. }
        )
    }
}
