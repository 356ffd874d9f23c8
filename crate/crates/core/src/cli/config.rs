//! Experiment configuration, presets, and the CSV header echo.

use std::fmt::Write as _;

use crate::params::file::{parse_scenario, Field, ScenarioPatch};
use crate::{Error, Result, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Command {
    DetectionSweep,
    MinErrorSweep,
    RateSweep,
    Optimize,
}

impl Command {
    pub const ALL: [Command; 4] = [
        Command::DetectionSweep,
        Command::MinErrorSweep,
        Command::RateSweep,
        Command::Optimize,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::DetectionSweep => "detection-sweep",
            Command::MinErrorSweep => "minerror-sweep",
            Command::RateSweep => "rate-sweep",
            Command::Optimize => "optimize",
        }
    }

    pub fn parse(name: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepVariable {
    Tau,
    PDelta,
    PRMax,
    HSr2,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Tau => "tau",
            SweepVariable::PDelta => "p_delta",
            SweepVariable::PRMax => "p_r_max",
            SweepVariable::HSr2 => "h_sr2",
        }
    }

    pub fn parse(name: &str) -> Option<SweepVariable> {
        [
            SweepVariable::Tau,
            SweepVariable::PDelta,
            SweepVariable::PRMax,
            SweepVariable::HSr2,
        ]
        .into_iter()
        .find(|v| v.name() == name)
    }

    /// Writes the value into the scenario. `Tau` is not a scenario field.
    pub fn apply(self, params: SystemParams, value: f64) -> SystemParams {
        match self {
            SweepVariable::Tau => params,
            SweepVariable::PDelta => params.with_p_delta(value),
            SweepVariable::PRMax => params.with_p_r_max(value),
            SweepVariable::HSr2 => params.with_h_sr2(value),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.from];
        }
        let last = self.points - 1;
        (0..self.points)
            .map(|i| {
                if i == last {
                    self.to
                } else {
                    self.from + (self.to - self.from) * i as f64 / last as f64
                }
            })
            .collect()
    }
}

/// Second sweep dimension: one curve per value.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: SystemParams,
    pub sweep: Sweep,
    pub series: Option<Series>,
    /// Monte Carlo trials per point; 0 disables the validation overlay.
    pub trials: u64,
    pub seed: u64,
    pub epsilon: f64,
}

impl ExperimentConfig {
    pub fn validate(&self, command: Command) -> Result<()> {
        let s = &self.sweep;
        if !s.from.is_finite() || !s.to.is_finite() || s.from > s.to {
            return Err(Error::config(
                "sweep",
                format!("range [{}, {}] must be finite and ordered", s.from, s.to),
            ));
        }
        if s.points == 0 {
            return Err(Error::config("sweep", "at least one point required"));
        }
        let tau_sweep = s.variable == SweepVariable::Tau;
        if (command == Command::DetectionSweep) != tau_sweep && command != Command::Optimize {
            return Err(Error::config(
                "sweep",
                format!("`{}` cannot sweep `{}`", command.name(), s.variable.name()),
            ));
        }
        if let Some(series) = &self.series {
            if !matches!(series.variable, SweepVariable::PRMax | SweepVariable::HSr2) {
                return Err(Error::config(
                    "series",
                    "series variable must be p_r_max or h_sr2",
                ));
            }
            if series.variable == s.variable {
                return Err(Error::config(
                    "series",
                    "series and sweep variables must differ",
                ));
            }
            if series.values.is_empty() || series.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::config(
                    "series",
                    "values must be finite and non-empty",
                ));
            }
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::config("epsilon", "must lie in [0, 1]"));
        }
        self.scenario.validate()
    }

    /// Scenarios for each series value (or just the base scenario).
    pub fn series_scenarios(&self) -> Vec<(Option<f64>, SystemParams)> {
        match &self.series {
            Some(s) => s
                .values
                .iter()
                .map(|&v| (Some(v), s.variable.apply(self.scenario, v)))
                .collect(),
            None => vec![(None, self.scenario)],
        }
    }

    /// Header lines sufficient to rebuild this configuration exactly.
    pub fn render_header(&self, command: Command) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# covert-relay {}", command.name());
        for field in Field::ALL {
            let _ = writeln!(
                out,
                "# scenario {}={}",
                field.name(),
                field.get(&self.scenario)
            );
        }
        let s = &self.sweep;
        let _ = writeln!(
            out,
            "# sweep {} from={} to={} points={}",
            s.variable.name(),
            s.from,
            s.to,
            s.points
        );
        if let Some(series) = &self.series {
            let values: Vec<String> = series.values.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(
                out,
                "# series {}={}",
                series.variable.name(),
                values.join(",")
            );
        }
        let _ = writeln!(out, "# trials={}", self.trials);
        let _ = writeln!(out, "# seed={}", self.seed);
        let _ = writeln!(out, "# epsilon={}", self.epsilon);
        out
    }

    /// Rebuilds the command and configuration from a CSV's header lines.
    pub fn from_header(csv: &str) -> Result<(Command, ExperimentConfig)> {
        let mut command = None;
        let mut scenario_text = String::new();
        let mut sweep = None;
        let mut series = None;
        let mut trials = None;
        let mut seed = None;
        let mut epsilon = None;

        for (i, line) in csv.lines().enumerate() {
            let Some(meta) = line.strip_prefix("# ") else {
                continue;
            };
            let context = format!("header line {}", i + 1);
            let bad = |what: &str| Error::config(&context, format!("malformed {what}: `{meta}`"));
            if let Some(rest) = meta.strip_prefix("covert-relay ") {
                command = Some(Command::parse(rest.trim()).ok_or_else(|| bad("command"))?);
            } else if let Some(rest) = meta.strip_prefix("scenario ") {
                scenario_text.push_str(rest);
                scenario_text.push('\n');
            } else if let Some(rest) = meta.strip_prefix("sweep ") {
                sweep = Some(parse_sweep(rest).ok_or_else(|| bad("sweep"))?);
            } else if let Some(rest) = meta.strip_prefix("series ") {
                series =
                    Some(parse_series(rest).map_err(|e| Error::config(&context, e.to_string()))?);
            } else if let Some(rest) = meta.strip_prefix("trials=") {
                trials = Some(rest.parse().map_err(|_| bad("trials"))?);
            } else if let Some(rest) = meta.strip_prefix("seed=") {
                seed = Some(rest.parse().map_err(|_| bad("seed"))?);
            } else if let Some(rest) = meta.strip_prefix("epsilon=") {
                epsilon = Some(rest.parse().map_err(|_| bad("epsilon"))?);
            }
        }

        let missing = |what: &str| Error::config("header", format!("missing {what}"));
        let patch = parse_scenario(&scenario_text)?;
        let mut scenario = SystemParams::unit_noise(1.0, 1.0, 1.0, 0.0, 1.0);
        for field in Field::ALL {
            if patch.get(field).is_none() {
                return Err(missing(field.name()));
            }
        }
        patch.apply(&mut scenario);
        Ok((
            command.ok_or_else(|| missing("command"))?,
            ExperimentConfig {
                scenario,
                sweep: sweep.ok_or_else(|| missing("sweep"))?,
                series,
                trials: trials.ok_or_else(|| missing("trials"))?,
                seed: seed.ok_or_else(|| missing("seed"))?,
                epsilon: epsilon.ok_or_else(|| missing("epsilon"))?,
            },
        ))
    }
}

fn parse_sweep(text: &str) -> Option<Sweep> {
    let mut parts = text.split_whitespace();
    let variable = SweepVariable::parse(parts.next()?)?;
    let mut from = None;
    let mut to = None;
    let mut points = None;
    for kv in parts {
        let (k, v) = kv.split_once('=')?;
        match k {
            "from" => from = Some(v.parse().ok()?),
            "to" => to = Some(v.parse().ok()?),
            "points" => points = Some(v.parse().ok()?),
            _ => return None,
        }
    }
    Some(Sweep {
        variable,
        from: from?,
        to: to?,
        points: points?,
    })
}

/// Parses `var=v1,v2,...`.
pub fn parse_series(text: &str) -> Result<Series> {
    let (var, values) = text
        .split_once('=')
        .ok_or_else(|| Error::config("--series", "expected var=v1,v2,..."))?;
    let variable = SweepVariable::parse(var.trim())
        .ok_or_else(|| Error::config("--series", format!("unknown variable `{var}`")))?;
    let values = values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::config("--series", format!("`{v}` is not a number")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Series { variable, values })
}

/// Scenario and sweep defaults for each command.
///
/// - detection: `P_s = P_r^max = 10`, unit noise, `R_sd = 1`,
///   `P_delta = 0.5`, `|h_sr|^2 = |h_rs|^2 = 1`, `tau` over `[0, 12]`.
/// - minerror: `P_s = 10`, unit noise, `R_sd = 1`, unit channel, curves for
///   `P_r^max` of 10, 15 and 20 dB, `P_delta` over `[0, P_delta^u]` of the
///   smallest budget.
/// - rate / optimize: `P_s = P_r^max = 1000`, unit noise, `R_sd = 1`,
///   curves for `|h_sr|^2` of 1 and 2, `epsilon = 0.1`.
///
/// The noise variance at the warden defaults to 1 (0 dB) throughout.
pub fn preset(command: Command) -> ExperimentConfig {
    match command {
        Command::DetectionSweep => ExperimentConfig {
            scenario: SystemParams::unit_noise(10.0, 10.0, 1.0, 0.5, 1.0),
            sweep: Sweep {
                variable: SweepVariable::Tau,
                from: 0.0,
                to: 12.0,
                points: 121,
            },
            series: None,
            trials: 0,
            seed: 1,
            epsilon: 0.1,
        },
        Command::MinErrorSweep => ExperimentConfig {
            scenario: SystemParams::unit_noise(10.0, 10.0, 1.0, 0.0, 1.0),
            sweep: Sweep {
                variable: SweepVariable::PDelta,
                from: 0.0,
                to: f64::NAN,
                points: 101,
            },
            series: Some(Series {
                variable: SweepVariable::PRMax,
                values: vec![10.0, 10f64.powf(1.5), 100.0],
            }),
            trials: 0,
            seed: 1,
            epsilon: 0.1,
        },
        Command::RateSweep | Command::Optimize => ExperimentConfig {
            scenario: SystemParams::unit_noise(1000.0, 1000.0, 1.0, 0.0, 1.0),
            sweep: Sweep {
                variable: SweepVariable::PDelta,
                from: 0.0,
                to: f64::NAN,
                points: 101,
            },
            series: Some(Series {
                variable: SweepVariable::HSr2,
                values: vec![1.0, 2.0],
            }),
            trials: 0,
            seed: 1,
            epsilon: 0.1,
        },
    }
}

/// Command-line or file inputs layered over a preset.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub config_file: Option<ScenarioPatch>,
    pub set: ScenarioPatch,
    pub sweep: Option<SweepVariable>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub points: Option<usize>,
    pub series: Option<Option<Series>>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub epsilon: Option<f64>,
}

impl Overrides {
    /// Applies the overrides to the command's preset and resolves any
    /// automatic sweep bound. A changed sweep variable requires explicit
    /// bounds.
    pub fn resolve(&self, command: Command) -> Result<ExperimentConfig> {
        let mut cfg = preset(command);
        if let Some(patch) = &self.config_file {
            patch.apply(&mut cfg.scenario);
        }
        self.set.apply(&mut cfg.scenario);
        if let Some(var) = self.sweep {
            if var != cfg.sweep.variable {
                cfg.sweep.variable = var;
                cfg.sweep.from = f64::NAN;
                cfg.sweep.to = f64::NAN;
            }
        }
        if let Some(v) = self.from {
            cfg.sweep.from = v;
        }
        if let Some(v) = self.to {
            cfg.sweep.to = v;
        }
        if let Some(v) = self.points {
            cfg.sweep.points = v;
        }
        if let Some(series) = &self.series {
            cfg.series = series.clone();
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.epsilon {
            cfg.epsilon = v;
        }
        if cfg.sweep.to.is_nan() && cfg.sweep.variable == SweepVariable::PDelta {
            cfg.sweep.to = automatic_p_delta_limit(command, &cfg)?;
        }
        if cfg.sweep.from.is_nan() || cfg.sweep.to.is_nan() {
            return Err(Error::config(
                "sweep",
                format!(
                    "`{}` sweeps need --from and --to",
                    cfg.sweep.variable.name()
                ),
            ));
        }
        cfg.validate(command)?;
        Ok(cfg)
    }
}

// Upper p_delta bound shared by all curves: the soft bound P_delta^u for the
// error sweeps, just under the hard budget P_r^max/(mu+1) for rate sweeps.
fn automatic_p_delta_limit(command: Command, cfg: &ExperimentConfig) -> Result<f64> {
    let mut limit = f64::INFINITY;
    for (_, params) in cfg.series_scenarios() {
        let c = crate::derive_constants(&params.with_p_delta(0.0))?;
        let bound = match command {
            Command::RateSweep => 0.999 * c.p_delta_budget(),
            _ => c.p_delta_u,
        };
        limit = limit.min(bound);
    }
    Ok(limit)
}
