//! Settings from the TOML config file, merged with command-line flags.
//!
//! Precedence, highest first: `BEAMALIGN_SEED` (seed only), flags, the
//! config file, built-in defaults.

use std::path::Path;

use beamalign::alignment::IiaOptions;
use beamalign::experiments::RunOptions;
use beamalign::gradient::GradientOptions;
use beamalign::maxsinr::MaxSinrOptions;
use beamalign::solution::Algorithm;
use serde::Deserialize;

use crate::CliError;

pub const SEED_ENV: &str = "BEAMALIGN_SEED";

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    #[serde(rename = "K")]
    pub users: Option<usize>,
    #[serde(rename = "M")]
    pub antennas: Option<usize>,
    #[serde(rename = "d")]
    pub streams: Option<usize>,
    pub seed: Option<u64>,
    pub snr_db: Option<f64>,
    pub inits: Option<usize>,
    pub workers: Option<usize>,
    pub algo: Option<Algorithm>,
    #[serde(default)]
    pub iia: IiaOptions,
    #[serde(default)]
    pub max_sinr: MaxSinrOptions,
    #[serde(default)]
    pub gradient: GradientOptions,
}

impl CliConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        let cfg: Self = toml::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        cfg.run_options(None)?;
        Ok(cfg)
    }

    /// Algorithm options with the worker count resolved; validated.
    pub fn run_options(&self, workers: Option<usize>) -> Result<RunOptions, CliError> {
        let workers = workers.or(self.workers);
        if workers == Some(0) {
            return Err(CliError::config("--workers must be at least 1"));
        }
        self.max_sinr.validate()?;
        self.gradient.validate()?;
        self.iia.validate()?;
        Ok(RunOptions {
            iia: self.iia,
            max_sinr: self.max_sinr,
            gradient: self.gradient,
            workers,
        })
    }

    pub fn seed(&self, flag: Option<u64>) -> Result<u64, CliError> {
        self.seed_with_env(flag, std::env::var(SEED_ENV).ok().as_deref())
    }

    fn seed_with_env(&self, flag: Option<u64>, env: Option<&str>) -> Result<u64, CliError> {
        if let Some(text) = env.filter(|t| !t.trim().is_empty()) {
            return text
                .trim()
                .parse()
                .map_err(|_| CliError::config(format!("{SEED_ENV}={text:?} is not an unsigned integer")));
        }
        Ok(flag.or(self.seed).unwrap_or(0))
    }
}

pub fn pick<T>(flag: Option<T>, file: Option<T>, name: &str) -> Result<T, CliError> {
    flag.or(file).ok_or_else(|| CliError::config(format!("missing {name} (flag or config key)")))
}

/// Parses `start:step:stop` (inclusive) or a single value.
pub fn parse_snr_range(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::config(format!("invalid SNR range {text:?}; expected start:step:stop or a single value"));
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    if parts.iter().any(|x| !x.is_finite()) {
        return Err(bad());
    }
    match parts[..] {
        [x] => Ok(vec![x]),
        [start, step, stop] => {
            if !(step > 0.0) || stop < start {
                return Err(CliError::config(format!(
                    "SNR range {text:?} needs a positive step and stop >= start"
                )));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| start + i as f64 * step).collect())
        }
        _ => Err(bad()),
    }
}
