//! Flat `key = value` scenario files.
//!
//! ```text
//! # detection scenario
//! p_s_db = 10
//! p_r_max = 10
//! sigma2_r_db = 0
//! r_sd = 1
//! p_delta = 0.5
//! h_sr2 = 1
//! ```
//!
//! Keys are the [`SystemParams`] field names. Every field except `r_sd`
//! also accepts a `_db` suffix, converted with `10^(x/10)`. Giving both
//! forms of the same field in one source is an error. Setting `h_sr2`
//! without `h_rs2` sets both (channel reciprocity). Blank lines and lines
//! starting with `#` are ignored.

use std::collections::BTreeMap;

use super::SystemParams;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Field {
    PS,
    PRMax,
    Sigma2R,
    Sigma2D,
    Sigma2S,
    RSd,
    PDelta,
    HSr2,
    HRs2,
}

impl Field {
    pub const ALL: [Field; 9] = [
        Field::PS,
        Field::PRMax,
        Field::Sigma2R,
        Field::Sigma2D,
        Field::Sigma2S,
        Field::RSd,
        Field::PDelta,
        Field::HSr2,
        Field::HRs2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Field::PS => "p_s",
            Field::PRMax => "p_r_max",
            Field::Sigma2R => "sigma2_r",
            Field::Sigma2D => "sigma2_d",
            Field::Sigma2S => "sigma2_s",
            Field::RSd => "r_sd",
            Field::PDelta => "p_delta",
            Field::HSr2 => "h_sr2",
            Field::HRs2 => "h_rs2",
        }
    }

    fn accepts_db(self) -> bool {
        self != Field::RSd
    }

    pub fn get(self, p: &SystemParams) -> f64 {
        match self {
            Field::PS => p.p_s,
            Field::PRMax => p.p_r_max,
            Field::Sigma2R => p.sigma2_r,
            Field::Sigma2D => p.sigma2_d,
            Field::Sigma2S => p.sigma2_s,
            Field::RSd => p.r_sd,
            Field::PDelta => p.p_delta,
            Field::HSr2 => p.h_sr2,
            Field::HRs2 => p.h_rs2,
        }
    }

    pub fn set(self, p: &mut SystemParams, value: f64) {
        let slot = match self {
            Field::PS => &mut p.p_s,
            Field::PRMax => &mut p.p_r_max,
            Field::Sigma2R => &mut p.sigma2_r,
            Field::Sigma2D => &mut p.sigma2_d,
            Field::Sigma2S => &mut p.sigma2_s,
            Field::RSd => &mut p.r_sd,
            Field::PDelta => &mut p.p_delta,
            Field::HSr2 => &mut p.h_sr2,
            Field::HRs2 => &mut p.h_rs2,
        };
        *slot = value;
    }

    /// Resolves a key, returning the field and whether it is the dB form.
    pub fn parse_key(key: &str) -> Option<(Field, bool)> {
        if let Some(f) = Field::ALL.iter().find(|f| f.name() == key) {
            return Some((*f, false));
        }
        let base = key.strip_suffix("_db")?;
        Field::ALL
            .iter()
            .find(|f| f.name() == base && f.accepts_db())
            .map(|f| (*f, true))
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Field assignments collected from one source (a file, or the set of
/// command-line overrides), already converted to linear units.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioPatch {
    values: BTreeMap<Field, f64>,
    // Key spelling each field was given with, for duplicate diagnostics.
    spelling: BTreeMap<Field, String>,
}

impl ScenarioPatch {
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, field: Field) -> Option<f64> {
        self.values.get(&field).copied()
    }

    /// Adds one `key`/`value` pair. `context` names the origin for errors
    /// (`"line 4"`, `"--set p_s=3"`).
    pub fn assign(&mut self, key: &str, value: &str, context: &str) -> Result<()> {
        let (field, is_db) = Field::parse_key(key)
            .ok_or_else(|| Error::config(context, format!("unknown key `{key}`")))?;
        let raw: f64 = value
            .parse()
            .map_err(|_| Error::config(context, format!("`{value}` is not a number")))?;
        if !raw.is_finite() {
            return Err(Error::config(context, format!("`{value}` is not finite")));
        }
        if let Some(prev) = self.spelling.get(&field) {
            let message = if prev == key {
                format!("`{key}` given more than once")
            } else {
                format!("`{key}` conflicts with `{prev}`; give only one form")
            };
            return Err(Error::config(context, message));
        }
        let linear = if is_db { db_to_linear(raw) } else { raw };
        self.values.insert(field, linear);
        self.spelling.insert(field, key.to_string());
        Ok(())
    }

    /// Parses a `key=value` assignment as given on the command line.
    pub fn assign_pair(&mut self, pair: &str) -> Result<()> {
        let context = format!("--set {pair}");
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::config(&context, "expected key=value"))?;
        self.assign(key.trim(), value.trim(), &context)
    }

    pub fn apply(&self, params: &mut SystemParams) {
        for (field, value) in &self.values {
            field.set(params, *value);
        }
        if let (Some(h), None) = (self.get(Field::HSr2), self.get(Field::HRs2)) {
            params.h_rs2 = h;
        }
    }
}

/// Parses scenario file text. Errors carry the 1-based line number.
pub fn parse_scenario(text: &str) -> Result<ScenarioPatch> {
    let mut patch = ScenarioPatch::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let context = format!("line {}", i + 1);
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::config(&context, format!("expected `key = value`, got `{line}`"))
        })?;
        patch.assign(key.trim(), value.trim(), &context)?;
    }
    Ok(patch)
}

/// Renders a scenario in the file format, linear units, full precision.
pub fn render_scenario(params: &SystemParams) -> String {
    let mut out = String::new();
    for field in Field::ALL {
        out.push_str(&format!("{} = {}\n", field.name(), field.get(params)));
    }
    out
}
