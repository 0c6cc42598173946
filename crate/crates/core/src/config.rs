//! Flat `section.key = value` configuration files.
//!
//! ```text
//! # comment
//! actor.alpha_flip = 0.1
//! harness.n_trials = 50   # trailing comments are allowed
//! ```
//!
//! Omitted keys keep their defaults. Unknown sections or keys, duplicate
//! keys and unparsable values are rejected with the offending line number.

use std::collections::HashSet;
use std::path::Path;
use std::str::FromStr;

use crate::actor::UpdateRule;
use crate::device::SpinValveParams;
use crate::env::Presentation;
use crate::error::{Error, Result};
use crate::harness::ExperimentConfig;
use crate::num::Float;

pub const SECTIONS: [&str; 5] = ["device", "actor", "critic", "env", "harness"];

#[derive(Debug, Clone, PartialEq)]
pub struct Config<T = f64> {
    pub experiment: ExperimentConfig<T>,
    pub device: SpinValveParams<T>,
}

impl<T: Float> Default for Config<T> {
    fn default() -> Self {
        Self { experiment: ExperimentConfig::default(), device: SpinValveParams::measured() }
    }
}

pub fn parse_config<T: Float>(path: &Path) -> Result<Config<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
        path: path.to_path_buf(),
        msg: format!("cannot read: {e}"),
    })?;
    parse_config_str(&text, path)
}

/// Parses config text; `path` is only used in error messages.
pub fn parse_config_str<T: Float>(text: &str, path: &Path) -> Result<Config<T>> {
    let mut cfg = Config::<T>::default();
    let mut seen = HashSet::new();
    let mut tau_given = false;
    let mut lr_out_given = false;
    let line_err = |line: usize, msg: String| Error::ConfigLine { path: path.to_path_buf(), line, msg };

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| line_err(lineno, format!("expected `section.key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let (section, name) = key
            .split_once('.')
            .ok_or_else(|| line_err(lineno, format!("key `{key}` is missing a section prefix")))?;
        if !SECTIONS.contains(&section) {
            return Err(line_err(lineno, format!("unknown section `{section}`")));
        }
        if value.is_empty() {
            return Err(line_err(lineno, format!("missing value for `{key}`")));
        }
        if !seen.insert(key.to_string()) {
            return Err(line_err(lineno, format!("duplicate key `{key}`")));
        }
        let e = &mut cfg.experiment;
        let d = &mut cfg.device;
        let res: std::result::Result<(), String> = match (section, name) {
            ("device", "g_min") => num(value).map(|v| d.g_min = v),
            ("device", "g_max") => num(value).map(|v| d.g_max = v),
            ("device", "g_th") => num(value).map(|v| d.g_th = v),
            ("device", "mg_max") => num(value).map(|v| d.mg_max = v),
            ("device", "mg_exponent") => num(value).map(|v| d.mg_exponent = v),
            ("device", "pulse_threshold_v") => num(value).map(|v| d.pulse_threshold_v = v),
            ("device", "pulse_time_constant_tau") => {
                tau_given = true;
                num(value).map(|v| d.pulse_time_constant_tau = v)
            }
            ("actor", "n_in") => parse(value).map(|v| e.actor.n_in = v),
            ("actor", "n_hidden") => parse(value).map(|v| e.actor.n_hidden = v),
            ("actor", "n_out") => parse(value).map(|v| e.actor.n_out = v),
            ("actor", "alpha_flip") => num(value).map(|v| e.actor.alpha_flip = v),
            ("actor", "lr_hidden") => num(value).map(|v| e.actor.lr_hidden = v),
            ("actor", "lr_out") => {
                lr_out_given = true;
                num(value).map(|v| e.actor.lr_out = v)
            }
            ("actor", "batch_size") => parse(value).map(|v| e.actor.batch_size = v),
            ("actor", "dw_min") => num(value).map(|v| e.actor.dw_min = v),
            ("actor", "update_rule") => parse::<UpdateRule>(value).map(|v| e.actor.update_rule = v),
            ("actor", "power_exponent") => num(value).map(|v| e.actor.power_exponent = v),
            ("critic", "n_in") => parse(value).map(|v| e.critic.n_in = v),
            ("critic", "n_hidden") => parse(value).map(|v| e.critic.n_hidden = v),
            ("critic", "lr") => num(value).map(|v| e.critic.lr = v),
            ("critic", "l1_coeff") => num(value).map(|v| e.critic.l1_coeff = v),
            ("critic", "batch_size") => parse(value).map(|v| e.critic.batch_size = v),
            ("env", "presentation") => parse::<Presentation>(value).map(|v| e.presentation = v),
            ("harness", "n_trials") => parse(value).map(|v| e.n_trials = v),
            ("harness", "max_epochs") => parse(value).map(|v| e.max_epochs = v),
            ("harness", "goal") => num(value).map(|v| e.goal = v),
            ("harness", "filter_keep") => num(value).map(|v| e.filter_keep = v),
            ("harness", "filter_gain") => num(value).map(|v| e.filter_gain = v),
            ("harness", "filter_init") => num(value).map(|v| e.filter_init = v),
            ("harness", "lr_sweep_from") => num(value).map(|v| e.lr_sweep.from = v),
            ("harness", "lr_sweep_to") => num(value).map(|v| e.lr_sweep.to = v),
            ("harness", "lr_sweep_step") => num(value).map(|v| e.lr_sweep.step = v),
            ("harness", "lr_linear") => num(value).map(|v| e.lr_linear = v),
            ("harness", "lr_powerlaw") => num(value).map(|v| e.lr_powerlaw = v),
            ("harness", "master_seed") => parse(value).map(|v| e.master_seed = v),
            _ => Err(format!("unknown key `{key}`")),
        };
        res.map_err(|m| line_err(lineno, m))?;
    }

    if !lr_out_given {
        cfg.experiment.actor.lr_out = cfg.experiment.actor.lr_hidden * T::HALF;
    }
    let invalid = |e: Error| Error::Config { path: path.to_path_buf(), msg: e.to_string() };
    if !tau_given {
        // keep the reference calibration when the bounds or threshold change
        let probe = SpinValveParams { pulse_time_constant_tau: T::ONE, ..cfg.device };
        probe.validate().map_err(invalid)?;
        cfg.device.pulse_time_constant_tau = probe.calibrated_tau().map_err(invalid)?;
    }
    cfg.device.validate().map_err(invalid)?;
    cfg.experiment.validate().map_err(invalid)?;
    Ok(cfg)
}

fn parse<V: FromStr>(s: &str) -> std::result::Result<V, String>
where
    V::Err: std::fmt::Display,
{
    s.parse::<V>().map_err(|e| format!("cannot parse `{s}`: {e}"))
}

fn num<T: Float>(s: &str) -> std::result::Result<T, String> {
    let v: f64 = parse(s)?;
    if !v.is_finite() {
        return Err(format!("value `{s}` is not finite"));
    }
    T::from_f64(v).ok_or_else(|| format!("value `{s}` out of range"))
}
