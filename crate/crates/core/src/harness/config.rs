//! Sweep configuration files and grid syntax.
//!
//! A configuration file is flat `key = value` text whose keys mirror the
//! `simulate` flags. `#` starts a comment. List-valued keys (`scheme`,
//! `beta-db`, `timing-sigma`) take comma-separated values; `ebn0` also
//! accepts `start:step:stop`.
//!
//! ```text
//! scheme = proposed, noncoop, alamouti
//! ebn0 = 0:2:30
//! beta-db = 10, 30
//! mu-db = beta
//! min-errors = 200
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use super::engine::{MuSetting, StoppingRule, SweepSpec};
use crate::protocol::{GroupLoading, Scheme, SchemeConfig};
use crate::{Error, Result};

const MAX_GRID_POINTS: usize = 10_000;

const KEYS: &[&str] = &[
    "scheme",
    "ebn0",
    "beta-db",
    "mu-db",
    "spreading",
    "groups",
    "timing-sigma",
    "min-errors",
    "max-bits",
    "confidence",
    "seed",
    "out",
];

/// Parses `start:step:stop` (inclusive) or a comma-separated list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.contains(':') {
        let parts: Vec<f64> = parse_list(&text.replace(':', ","))?;
        let [start, step, stop] = parts[..] else {
            return Err(Error::invalid(format!(
                "range '{text}' must be start:step:stop"
            )));
        };
        if !(step.is_finite() && step != 0.0 && start.is_finite() && stop.is_finite()) {
            return Err(Error::invalid(format!("bad range '{text}'")));
        }
        let span = (stop - start) / step;
        if span < -1e-9 {
            return Err(Error::invalid(format!(
                "range '{text}' never reaches its end"
            )));
        }
        let count = (span + 1e-9).floor() as usize + 1;
        if count > MAX_GRID_POINTS {
            return Err(Error::invalid(format!("range '{text}' has {count} points")));
        }
        return Ok((0..count).map(|i| start + i as f64 * step).collect());
    }
    let values: Vec<f64> = parse_list(text)?;
    if let Some(x) = values.iter().find(|x| !x.is_finite()) {
        return Err(Error::invalid(format!("non-finite grid value {x}")));
    }
    Ok(values)
}

pub fn parse_list<T: FromStr>(text: &str) -> Result<Vec<T>> {
    let items: Vec<&str> = text.split(',').map(str::trim).collect();
    if items.iter().any(|s| s.is_empty()) {
        return Err(Error::invalid(format!("empty item in list '{text}'")));
    }
    items
        .into_iter()
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| Error::invalid(format!("cannot parse '{s}'")))
        })
        .collect()
}

fn parse_one<T: FromStr>(key: &str, text: &str) -> Result<T> {
    text.trim()
        .parse()
        .map_err(|_| Error::invalid(format!("{key}: cannot parse '{text}'")))
}

/// `"beta"` ties mu to beta; anything else is a fixed dB value.
pub fn parse_mu(text: &str) -> Result<MuSetting> {
    match text.trim() {
        "beta" => Ok(MuSetting::FollowBeta),
        other => Ok(MuSetting::Fixed(parse_one("mu-db", other)?)),
    }
}

/// A parsed sweep configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepFile {
    pub spec: SweepSpec,
    pub out: Option<PathBuf>,
}

pub fn parse_sweep_config(text: &str) -> Result<SweepFile> {
    let mut entries = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::invalid(format!(
                "line {}: expected key = value",
                lineno + 1
            )));
        };
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::invalid(format!(
                "line {}: unknown key '{key}'",
                lineno + 1
            )));
        }
        if entries
            .insert(key.clone(), value.trim().to_string())
            .is_some()
        {
            return Err(Error::invalid(format!(
                "line {}: duplicate key '{key}'",
                lineno + 1
            )));
        }
    }
    let get = |k: &str| entries.get(k).map(String::as_str);
    let require = |k: &str| get(k).ok_or_else(|| Error::invalid(format!("missing key '{k}'")));

    let schemes: Vec<Scheme> = parse_list(require("scheme")?).map_err(|_| {
        Error::invalid(format!("bad scheme list '{}'", get("scheme").unwrap_or("")))
    })?;
    let ebn0_db = parse_grid(require("ebn0")?)?;
    let beta_db = get("beta-db")
        .map(parse_grid)
        .transpose()?
        .unwrap_or_else(|| vec![0.0]);
    let mu = get("mu-db")
        .map(parse_mu)
        .transpose()?
        .unwrap_or(MuSetting::FollowBeta);
    let timing_sigma = get("timing-sigma")
        .map(parse_grid)
        .transpose()?
        .unwrap_or_else(|| vec![0.0]);

    let mut template = SchemeConfig::new(schemes[0]);
    if let Some(n) = get("spreading") {
        template.spreading = parse_one("spreading", n)?;
    }
    if let Some(g) = get("groups") {
        template.loading = g.parse::<GroupLoading>()?;
    }

    let defaults = StoppingRule::default();
    let rule = StoppingRule {
        min_errors: get("min-errors")
            .map(|v| parse_one("min-errors", v))
            .transpose()?
            .unwrap_or(defaults.min_errors),
        max_bits: get("max-bits")
            .map(parse_max_bits)
            .transpose()?
            .unwrap_or(defaults.max_bits),
        confidence: get("confidence")
            .map(|v| parse_one("confidence", v))
            .transpose()?
            .unwrap_or(defaults.confidence),
    };
    let seed = get("seed")
        .map(|v| parse_one("seed", v))
        .transpose()?
        .unwrap_or(1);

    let spec = SweepSpec {
        schemes,
        ebn0_db,
        beta_db,
        mu,
        timing_sigma,
        template,
        rule,
        seed,
    };
    spec.validate()?;
    Ok(SweepFile {
        spec,
        out: get("out").map(PathBuf::from),
    })
}

/// Accepts plain integers and exponent forms such as `2e7`.
pub fn parse_max_bits(text: &str) -> Result<u64> {
    let t = text.trim();
    if let Ok(v) = t.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = parse_one("max-bits", t)?;
    if v.is_finite() && v >= 1.0 && v.fract() == 0.0 && v < u64::MAX as f64 {
        Ok(v as u64)
    } else {
        Err(Error::invalid(format!("max-bits: cannot parse '{text}'")))
    }
}
