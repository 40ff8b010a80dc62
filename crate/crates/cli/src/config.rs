//! Flat `key = value` configuration with `#` comments. Unspecified keys
//! fall back to the reference operating point: a 4x4 array, 4-symbol
//! codewords, 5 dB per-antenna SNR, 50 us symbols, carrier 3 GHz, 5 cm
//! spacing, scatter decay 0.1, block length 1.

use dstm_core::channel::SystemConfig;
use dstm_core::simkit::{noise_var_for_snr_db, Scheme};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: invalid value for `{key}`: {reason}")]
    BadValue {
        line: usize,
        key: String,
        reason: String,
    },
    #[error("{0}")]
    Invalid(String),
}

/// Resolved run configuration: the physical system plus the sweep-level
/// knobs that are not part of the channel model.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub cfg: SystemConfig<f64>,
    pub snr_db: f64,
    pub v_mps: f64,
    pub theta_rad: f64,
    pub scheme: Scheme,
    pub decisions: u64,
    pub seed: u64,
    /// Set when the block duration exceeds the coherence budget at the
    /// configured speed; the run proceeds, the warning is recorded.
    pub coherence_warning: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let snr_db = 5.0;
        let cfg = SystemConfig {
            n_tx: 4,
            n_rx: 4,
            codeword_len: 4,
            tx_power: 1.0,
            noise_var: noise_var_for_snr_db(snr_db, 4, 1.0),
            symbol_duration: 50e-6,
            carrier_freq: 3e9,
            antenna_spacing: 0.05,
            scatter_decay: 0.1,
            block_len: 1,
        };
        RunConfig {
            cfg,
            snr_db,
            v_mps: 50.0,
            theta_rad: 0.0,
            scheme: Scheme::Proposed,
            decisions: 100_000,
            seed: 0x0D57_A51B_ED0C_ABA1,
            coherence_warning: None,
        }
    }
}

impl RunConfig {
    /// All scalar parameters as manifest/config `(key, value)` lines.
    pub fn snapshot(&self) -> Vec<(String, String)> {
        vec![
            ("n_tx".into(), self.cfg.n_tx.to_string()),
            ("n_rx".into(), self.cfg.n_rx.to_string()),
            ("codeword_len".into(), self.cfg.codeword_len.to_string()),
            ("snr_db".into(), format!("{}", self.snr_db)),
            ("symbol_duration_s".into(), format!("{:e}", self.cfg.symbol_duration)),
            ("carrier_freq_hz".into(), format!("{:e}", self.cfg.carrier_freq)),
            ("antenna_spacing_m".into(), format!("{}", self.cfg.antenna_spacing)),
            ("scatter_decay".into(), format!("{}", self.cfg.scatter_decay)),
            ("block_len".into(), self.cfg.block_len.to_string()),
            ("v_mps".into(), format!("{}", self.v_mps)),
            ("theta_rad".into(), format!("{}", self.theta_rad)),
            ("scheme".into(), self.scheme.as_str().into()),
            ("decisions".into(), self.decisions.to_string()),
            ("seed".into(), self.seed.to_string()),
        ]
    }

    fn apply(&mut self, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        fn num<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T, ConfigError>
        where
            T::Err: std::fmt::Display,
        {
            value.parse().map_err(|e| ConfigError::BadValue {
                line,
                key: key.to_string(),
                reason: format!("{e}"),
            })
        }
        match key {
            "n_tx" => self.cfg.n_tx = num(key, value, line)?,
            "n_rx" => self.cfg.n_rx = num(key, value, line)?,
            "codeword_len" => self.cfg.codeword_len = num(key, value, line)?,
            "snr_db" => self.snr_db = num(key, value, line)?,
            "symbol_duration_s" => self.cfg.symbol_duration = num(key, value, line)?,
            "carrier_freq_hz" => self.cfg.carrier_freq = num(key, value, line)?,
            "antenna_spacing_m" => self.cfg.antenna_spacing = num(key, value, line)?,
            "scatter_decay" => self.cfg.scatter_decay = num(key, value, line)?,
            "block_len" => self.cfg.block_len = num(key, value, line)?,
            "v_mps" => self.v_mps = num(key, value, line)?,
            "theta_rad" => self.theta_rad = num(key, value, line)?,
            "decisions" => self.decisions = num(key, value, line)?,
            "seed" => self.seed = num(key, value, line)?,
            "scheme" => {
                self.scheme = match value {
                    "conventional" => Scheme::Conventional,
                    "proposed" => Scheme::Proposed,
                    "sliced" => Scheme::Sliced,
                    other => {
                        return Err(ConfigError::BadValue {
                            line,
                            key: key.to_string(),
                            reason: format!(
                                "expected conventional|proposed|sliced, got `{other}`"
                            ),
                        })
                    }
                }
            }
            _ => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    fn finish(mut self) -> Result<Self, ConfigError> {
        self.cfg.noise_var = noise_var_for_snr_db(self.snr_db, self.cfg.n_tx, self.cfg.tx_power);
        self.cfg
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let half_lambda = 0.5 * self.cfg.wavelength();
        if self.cfg.antenna_spacing < half_lambda {
            return Err(ConfigError::Invalid(format!(
                "antenna_spacing_m = {} is below half a wavelength ({:.6}); \
                 correlation windows would overlap",
                self.cfg.antenna_spacing, half_lambda
            )));
        }
        let v_limit = self.cfg.coherence_speed_limit();
        if self.v_mps > v_limit {
            self.coherence_warning = Some(format!(
                "speed {} m/s exceeds the coherence budget {:.1} m/s for one codeword; \
                 the channel is no longer static within a block",
                self.v_mps, v_limit
            ));
        }
        Ok(self)
    }
}

/// Parse a config document; `None` means pure defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut rc = RunConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let stripped = raw.split('#').next().unwrap_or("").trim();
        if stripped.is_empty() {
            continue;
        }
        let (key, value) = stripped.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            text: stripped.to_string(),
        })?;
        rc.apply(key.trim(), value.trim(), line)?;
    }
    rc.finish()
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}
