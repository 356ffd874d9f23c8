//! Sweep experiments behind the `covert-relay` binary.
//!
//! Every run produces CSV text: `#`-prefixed metadata lines (enough to
//! rebuild the configuration, see [`ExperimentConfig::from_header`]), one
//! column-header line, then data rows. Sweep points are evaluated in
//! parallel and written in sweep order; Monte Carlo seeds are derived per
//! row, so output is byte-stable for a fixed configuration.

pub mod config;

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::covert_rate::{
    effective_rate_closed, effective_rate_quadrature, optimize_covert_power, relative_gap,
};
use crate::detection::{false_alarm_rate, miss_detection_rate, optimal_threshold};
use crate::montecarlo::{simulate_detection, simulate_effective_rate, Hypothesis};
use crate::{derive_constants, DerivedConstants, Error, Result};

pub use config::{preset, Command, ExperimentConfig, Overrides, Series, Sweep, SweepVariable};

/// Largest tolerated closed-form/quadrature disagreement in a rate sweep.
pub const ORACLE_TOLERANCE: f64 = 1e-6;

/// Exit status for an error, as documented for the binary.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_infeasible() {
        3
    } else if err.is_numerical() {
        4
    } else {
        2
    }
}

pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<String> {
    cfg.validate(command)?;
    match command {
        Command::DetectionSweep => run_detection_sweep(cfg),
        Command::MinErrorSweep => run_minerror_sweep(cfg),
        Command::RateSweep => run_rate_sweep(cfg),
        Command::Optimize => run_optimize(cfg),
    }
}

// splitmix64 finalizer: decorrelates per-row seeds from the master seed.
fn derive_seed(master: u64, row: u64, tag: u64) -> u64 {
    let mut z = master
        .wrapping_add(row.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(tag.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn write_derived(out: &mut String, label: &str, c: &DerivedConstants) {
    let _ = writeln!(
        out,
        "# derived{label} mu={} eta={} p_delta_u={} rho1={} rho2={} rho3={} p_c={}",
        c.mu, c.eta, c.p_delta_u, c.rho1, c.rho2, c.rho3, c.p_c
    );
}

fn series_label(cfg: &ExperimentConfig, value: Option<f64>) -> String {
    match (&cfg.series, value) {
        (Some(s), Some(v)) => format!(" {}={}", s.variable.name(), v),
        _ => String::new(),
    }
}

/// False alarm, miss detection and total error over a threshold sweep.
pub fn run_detection_sweep(cfg: &ExperimentConfig) -> Result<String> {
    let c = derive_constants(&cfg.scenario)?;
    let taus = cfg.sweep.values();
    let with_mc = cfg.trials > 0;

    let rows: Vec<String> = taus
        .par_iter()
        .enumerate()
        .map(|(i, &tau)| -> Result<String> {
            let fa = false_alarm_rate(tau, &c)?;
            let md = miss_detection_rate(tau, &c)?;
            let mut row = format!("{tau},{fa},{md},{}", fa + md);
            if with_mc {
                let row_id = i as u64;
                let mc_fa = simulate_detection(
                    &cfg.scenario,
                    tau,
                    Hypothesis::H0,
                    cfg.trials,
                    derive_seed(cfg.seed, row_id, 0),
                )?;
                let mc_md = simulate_detection(
                    &cfg.scenario,
                    tau,
                    Hypothesis::H1,
                    cfg.trials,
                    derive_seed(cfg.seed, row_id, 1),
                )?;
                let _ = write!(
                    row,
                    ",{},{},{},{}",
                    mc_fa.value, mc_fa.half_width, mc_md.value, mc_md.half_width
                );
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let mut out = cfg.render_header(Command::DetectionSweep);
    write_derived(&mut out, "", &c);
    out.push_str("tau,p_fa,p_md,xi");
    if with_mc {
        out.push_str(",mc_p_fa,mc_p_fa_half_width,mc_p_md,mc_p_md_half_width");
    }
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}

/// Minimum total error and its threshold, one curve per series value.
pub fn run_minerror_sweep(cfg: &ExperimentConfig) -> Result<String> {
    let scenarios = cfg.series_scenarios();
    let values = cfg.sweep.values();
    let var = cfg.sweep.variable;

    let mut out = cfg.render_header(Command::MinErrorSweep);
    for (label, params) in &scenarios {
        write_derived(
            &mut out,
            &series_label(cfg, *label),
            &derive_constants(params)?,
        );
    }
    let series_name = cfg.series.as_ref().map(|s| s.variable.name());
    if let Some(name) = series_name {
        let _ = write!(out, "{name},");
    }
    let _ = writeln!(out, "{},tau_star,xi_star", var.name());

    let jobs: Vec<(Option<f64>, f64, _)> = scenarios
        .iter()
        .flat_map(|(label, params)| {
            values
                .iter()
                .map(move |&v| (*label, v, var.apply(*params, v)))
        })
        .collect();
    let rows: Vec<String> = jobs
        .par_iter()
        .map(|(label, v, params)| -> Result<String> {
            let r = optimal_threshold(&derive_constants(params)?);
            Ok(match label {
                Some(s) => format!("{s},{v},{},{}", r.tau_star, r.xi_star),
                None => format!("{v},{},{}", r.tau_star, r.xi_star),
            })
        })
        .collect::<Result<_>>()?;
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}

/// Effective covert rate by closed form and quadrature, with
/// `p_delta_eps` and constrained-optimum marker rows per curve.
pub fn run_rate_sweep(cfg: &ExperimentConfig) -> Result<String> {
    let scenarios = cfg.series_scenarios();
    let values = cfg.sweep.values();
    let var = cfg.sweep.variable;
    let with_mc = cfg.trials > 0;

    let mut out = cfg.render_header(Command::RateSweep);
    for (label, params) in &scenarios {
        write_derived(
            &mut out,
            &series_label(cfg, *label),
            &derive_constants(params)?,
        );
    }
    out.push_str("kind,");
    if let Some(s) = &cfg.series {
        let _ = write!(out, "{},", s.variable.name());
    }
    let _ = write!(out, "{},r_bar_c_closed,r_bar_c_quadrature", var.name());
    if with_mc {
        out.push_str(",mc_r_bar_c,mc_half_width");
    }
    out.push('\n');

    let format_row = |kind: &str,
                      label: Option<f64>,
                      v: f64,
                      c: &DerivedConstants,
                      row_id: u64|
     -> Result<String> {
        let closed = effective_rate_closed(c)?.r_bar_c;
        let quad = effective_rate_quadrature(c)?.r_bar_c;
        if relative_gap(closed, quad) > ORACLE_TOLERANCE {
            return Err(Error::OracleDisagreement {
                p_delta: c.params.p_delta,
                closed,
                quadrature: quad,
            });
        }
        let mut row = String::from(kind);
        if let Some(s) = label {
            let _ = write!(row, ",{s}");
        }
        let _ = write!(row, ",{v},{closed},{quad}");
        if with_mc {
            let mc =
                simulate_effective_rate(&c.params, cfg.trials, derive_seed(cfg.seed, row_id, 2))?;
            let _ = write!(row, ",{},{}", mc.value, mc.half_width);
        }
        Ok(row)
    };

    let jobs: Vec<(Option<f64>, f64, _)> = scenarios
        .iter()
        .flat_map(|(label, params)| {
            values
                .iter()
                .map(move |&v| (*label, v, var.apply(*params, v)))
        })
        .collect();
    let curve_rows: Vec<String> = jobs
        .par_iter()
        .enumerate()
        .map(|(i, (label, v, params))| {
            format_row("curve", *label, *v, &derive_constants(params)?, i as u64)
        })
        .collect::<Result<_>>()?;

    let marker_rows: Vec<Vec<String>> = scenarios
        .par_iter()
        .enumerate()
        .map(|(k, (label, params))| -> Result<Vec<String>> {
            let opt = optimize_covert_power(params, cfg.epsilon)?;
            let base = derive_constants(&params.with_p_delta(0.0))?;
            let id = (jobs.len() + 2 * k) as u64;
            let at = |p: f64| -> Result<DerivedConstants> { base.with_p_delta(p) };
            Ok(vec![
                format_row(
                    "p_delta_eps",
                    *label,
                    opt.p_delta_eps,
                    &at(opt.p_delta_eps)?,
                    id,
                )?,
                format_row(
                    "optimum",
                    *label,
                    opt.p_delta_star,
                    &at(opt.p_delta_star)?,
                    id + 1,
                )?,
            ])
        })
        .collect::<Result<_>>()?;

    for row in curve_rows
        .into_iter()
        .chain(marker_rows.into_iter().flatten())
    {
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}

/// Constrained covert-power optimum for each series value.
pub fn run_optimize(cfg: &ExperimentConfig) -> Result<String> {
    let scenarios = cfg.series_scenarios();
    let mut out = cfg.render_header(Command::Optimize);
    for (label, params) in &scenarios {
        write_derived(
            &mut out,
            &series_label(cfg, *label),
            &derive_constants(&params.with_p_delta(0.0))?,
        );
    }
    if let Some(s) = &cfg.series {
        let _ = write!(out, "{},", s.variable.name());
    }
    out.push_str("epsilon,p_delta_eps,p_delta_star,r_bar_c_star,binding,monotone\n");
    let rows: Vec<String> = scenarios
        .par_iter()
        .map(|(label, params)| -> Result<String> {
            let r = optimize_covert_power(params, cfg.epsilon)?;
            let mut row = String::new();
            if let Some(v) = label {
                let _ = write!(row, "{v},");
            }
            let _ = write!(
                row,
                "{},{},{},{},{},{}",
                cfg.epsilon, r.p_delta_eps, r.p_delta_star, r.r_bar_c_star, r.binding, r.monotone
            );
            Ok(row)
        })
        .collect::<Result<_>>()?;
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}
