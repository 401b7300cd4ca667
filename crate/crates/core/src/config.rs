//! Flat key=value run configuration. All physical keys default to the
//! reference parameter set, so the reproduction scenarios need no file.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::generating::Amplitudes;
use crate::model::ScreenParams;

/// Parsed run configuration: physical parameters plus command options.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: ScreenParams,
    /// Simulation end time; default 10 periods.
    pub t_end: Option<f64>,
    /// Integration step; default T/8192.
    pub step: Option<f64>,
    /// Continuation endpoint for the stop stiffness.
    pub k1_max: f64,
    /// Continuation grid intervals.
    pub steps: usize,
    /// Keep every n-th trajectory sample.
    pub thin: usize,
    pub output: Option<PathBuf>,
    /// Averaged-field strategy name.
    pub field: String,
    /// Seed amplitudes for simulation start, when given.
    pub seed: Option<Amplitudes>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: ScreenParams::p0(),
            t_end: None,
            step: None,
            k1_max: 2.0,
            steps: 8,
            thin: 1,
            output: None,
            field: "quadrature".to_string(),
            seed: None,
        }
    }
}

impl RunConfig {
    /// Parse a flat key=value text; unknown keys are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seed = [None::<f64>; 4];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidParams(format!("line {}: expected key=value", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim().trim_matches('"');
            let parse_f64 = || -> Result<f64> {
                value.parse::<f64>().map_err(|_| {
                    Error::InvalidParams(format!("line {}: bad number `{value}`", lineno + 1))
                })
            };
            let parse_usize = || -> Result<usize> {
                value.parse::<usize>().map_err(|_| {
                    Error::InvalidParams(format!("line {}: bad integer `{value}`", lineno + 1))
                })
            };
            match key {
                "m1" => cfg.params.m1 = parse_f64()?,
                "m2" => cfg.params.m2 = parse_f64()?,
                "k0_bar" => cfg.params.k0_bar = parse_f64()?,
                "k2_bar" => cfg.params.k2_bar = parse_f64()?,
                "k0_tilde" => cfg.params.k0_tilde = parse_f64()?,
                "k2_tilde" => cfg.params.k2_tilde = parse_f64()?,
                "k1_hat" => cfg.params.k1_hat = parse_f64()?,
                "r" => cfg.params.r = parse_f64()?,
                "eps" => cfg.params.eps = parse_f64()?,
                "l" => cfg.params.l = parse_usize()? as u32,
                "t_end" => cfg.t_end = Some(parse_f64()?),
                "step" => cfg.step = Some(parse_f64()?),
                "k1_max" => cfg.k1_max = parse_f64()?,
                "steps" => cfg.steps = parse_usize()?,
                "thin" => cfg.thin = parse_usize()?.max(1),
                "output" => cfg.output = Some(PathBuf::from(value)),
                "field" => cfg.field = value.to_string(),
                "a1c" => seed[0] = Some(parse_f64()?),
                "a1s" => seed[1] = Some(parse_f64()?),
                "a2c" => seed[2] = Some(parse_f64()?),
                "a2s" => seed[3] = Some(parse_f64()?),
                other => {
                    return Err(Error::InvalidParams(format!(
                        "line {}: unknown key `{other}`",
                        lineno + 1
                    )))
                }
            }
        }
        if seed.iter().any(|v| v.is_some()) {
            cfg.seed = Some(Amplitudes::new(
                seed[0].unwrap_or(0.0),
                seed[1].unwrap_or(0.0),
                seed[2].unwrap_or(0.0),
                seed[3].unwrap_or(0.0),
            ));
        }
        cfg.params.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParams(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}
