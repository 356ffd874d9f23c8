//! Covert communication analysis for a one-way amplify-and-forward relay.
//!
//! A source `S` sends to a destination `D` through a relay `R`. The relay
//! may embed its own message on top of the forwarded signal, while `S`
//! acts as a warden and runs a radiometer test on the power it receives
//! back from `R`. This crate provides:
//!
//! - [`params`]: the scenario and its cached algebra ([`DerivedConstants`]),
//! - [`power`]: the relay's piecewise power policies and destination SNR,
//! - [`detection`]: closed-form false alarm / miss detection rates and the
//!   warden's optimal threshold,
//! - [`covert_rate`]: the effective covert rate (closed form and quadrature),
//!   the exponential integral, and covert-power optimization,
//! - [`montecarlo`]: seeded, parallel simulation of the same quantities,
//! - [`cli`]: the sweep experiments behind the `covert-relay` binary.
//!
//! All quantities are in linear units. dB conversion only happens when
//! reading scenario files or command-line overrides.

pub mod cli;
pub mod covert_rate;
pub mod detection;
mod error;
pub mod montecarlo;
pub mod params;
pub mod power;
pub mod quadrature;

pub use error::{Error, Result};
pub use params::{derive_constants, DerivedConstants, SystemParams};
