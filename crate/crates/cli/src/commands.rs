//! Subcommand implementations, kept library-side so integration tests can
//! drive them without spawning the binary.

use thiserror::Error;

use dstm_core::adaptive::{
    correlation_for_block, hta_block_length, optm_search, velocity_threshold, AdaptationPolicy,
    AdaptiveError,
};
use dstm_core::analysis::{
    pep_bound_general_log10, pep_bound_special_log10, pep_floor_log10, AnalysisError, PepInputs,
};
use dstm_core::channel::{correlation_spec, ChannelError, CorrelationCase, MobilityState};
use dstm_core::codebook::{make_cyclic_codebook, Codebook, CodebookError};
use dstm_core::simkit::{noise_var_for_snr_db, sweep, SimError};

use crate::config::{ConfigError, RunConfig};
use crate::output::{
    adaptive_csv, correlation_csv, manifest, pep_bound_csv, ser_sweep_csv, AdaptiveRow,
    CorrelationRow, PepBoundRow,
};
use crate::plot::PlotError;
use crate::presets::{build_preset, Preset};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("unknown preset `{0}` (expected fig5|fig7|fig8|fig9|fig10)")]
    UnknownPreset(String),
    #[error("model violation: {0}")]
    Channel(#[from] ChannelError),
    #[error("model violation: {0}")]
    Analysis(#[from] AnalysisError),
    #[error("model violation: {0}")]
    Adaptive(#[from] AdaptiveError),
    #[error("model violation: {0}")]
    Codebook(#[from] CodebookError),
    #[error("simulation failure: {0}")]
    Sim(#[from] SimError),
    #[error(transparent)]
    Plot(#[from] PlotError),
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit code: 1 for configuration problems, 2 for runtime
    /// model violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::UnknownPreset(_) => 1,
            _ => 2,
        }
    }
}

/// Everything a subcommand produces; the binary decides where it goes.
#[derive(Debug)]
pub struct CommandOutput {
    pub csv: String,
    pub manifest: String,
}

pub fn default_codebook(rc: &RunConfig) -> Result<Codebook<f64>, CliError> {
    // Diagonal cyclic group with full diversity at rate 1/2 for 4 antennas;
    // degenerates gracefully for other power-of-two array sizes.
    let exponents: Vec<i64> = match rc.cfg.n_tx {
        4 => vec![1, 1, 3, 3],
        n => vec![1; n],
    };
    Ok(make_cyclic_codebook(rc.cfg.n_tx, rc.cfg.n_tx, &exponents)?)
}

/// `correlation`: the correlation structure versus speed at the configured
/// direction and block length.
pub fn cmd_correlation(rc: &RunConfig) -> Result<CommandOutput, CliError> {
    let mut rows = Vec::new();
    for v in 0..=200u32 {
        let mob = MobilityState::new(v as f64, rc.theta_rad)?;
        let spec = correlation_spec(&mob, &rc.cfg)?;
        rows.push(CorrelationRow {
            v_mps: v as f64,
            theta_rad: rc.theta_rad,
            m: rc.cfg.block_len,
            d_m: rc.cfg.antenna_spacing,
            spec,
        });
    }
    Ok(CommandOutput {
        csv: correlation_csv(&rows),
        manifest: manifest(rc, None, &[]),
    })
}

/// Worst pairwise bound over the codebook in the log domain, together with
/// the floor when the single-superdiagonal analysis applies.
fn worst_pair_log10(
    spec: &dstm_core::channel::CorrelationSpec<f64>,
    cfg: &dstm_core::channel::SystemConfig<f64>,
    cb: &Codebook<f64>,
) -> Result<(f64, Option<f64>), CliError> {
    if spec.case == CorrelationCase::CaseIII || spec.lag >= cfg.n_rx {
        return Ok((0.0, None));
    }
    let mut worst = f64::NEG_INFINITY;
    let mut worst_floor = f64::NEG_INFINITY;
    for a in 0..cb.cardinality() {
        for b in 0..cb.cardinality() {
            if a == b {
                continue;
            }
            let inp = PepInputs::new(cb, a, b, spec, cfg);
            let l10 = match spec.case {
                CorrelationCase::CaseI => pep_bound_general_log10(&inp)?,
                _ => pep_bound_special_log10(&inp)?,
            };
            worst = worst.max(l10);
            if spec.case == CorrelationCase::CaseII {
                worst_floor = worst_floor.max(pep_floor_log10(&inp)?);
            }
        }
    }
    let floor = (spec.case == CorrelationCase::CaseII).then_some(worst_floor);
    Ok((worst, floor))
}

/// `pep-bound`: worst-pair PEP bound and floor versus SNR at the configured
/// speed and block length.
pub fn cmd_pep_bound(rc: &RunConfig) -> Result<CommandOutput, CliError> {
    let cb = default_codebook(rc)?;
    let mob = MobilityState::new(rc.v_mps, rc.theta_rad)?;
    let mut rows = Vec::new();
    for snr_db in 0..=30u32 {
        let mut cfg = rc.cfg.clone();
        cfg.noise_var = noise_var_for_snr_db(snr_db as f64, cfg.n_tx, cfg.tx_power);
        let spec = correlation_spec(&mob, &cfg)?;
        let (bound_l10, floor_l10) = worst_pair_log10(&spec, &cfg, &cb)?;
        rows.push(PepBoundRow {
            v_mps: rc.v_mps,
            m: cfg.block_len,
            snr_db: snr_db as f64,
            d_m: cfg.antenna_spacing,
            spec,
            pep_bound: 10f64.powf(bound_l10),
            pep_bound_log10: bound_l10,
            pep_floor: floor_l10.map(|f| 10f64.powf(f)),
            pep_floor_log10: floor_l10,
        });
    }
    Ok(CommandOutput {
        csv: pep_bound_csv(&rows),
        manifest: manifest(rc, None, &[]),
    })
}

/// `ser-sweep`: Monte Carlo sweep, either a named preset or the single
/// configured operating point.
pub fn cmd_ser_sweep(rc: &RunConfig, preset: Option<&str>) -> Result<CommandOutput, CliError> {
    let cb = default_codebook(rc)?;
    let (plans, preset_name, extra) = match preset {
        Some(name) => {
            let p = Preset::parse(name).ok_or_else(|| CliError::UnknownPreset(name.into()))?;
            let run = build_preset(p, rc, &cb)?;
            (run.plans, p.name(), run.manifest_extra)
        }
        None => {
            let run = build_preset_single(rc);
            (run, "none", Vec::new())
        }
    };
    let records = sweep(&plans, &cb)?;
    Ok(CommandOutput {
        csv: ser_sweep_csv(preset_name, &records),
        manifest: manifest(rc, preset, &extra),
    })
}

fn build_preset_single(rc: &RunConfig) -> Vec<dstm_core::simkit::TrialPlan> {
    vec![dstm_core::simkit::TrialPlan {
        scheme: rc.scheme,
        n_decisions: rc.decisions,
        base_seed: rc.seed,
        mobility: MobilityState::new(rc.v_mps, rc.theta_rad).expect("validated by config"),
        cfg: rc.cfg.clone(),
        policy: AdaptationPolicy::Fixed(rc.cfg.block_len),
    }]
}

/// `adaptive`: block-length choices and worst-pair bounds of the
/// exhaustive and heuristic policies over speed, plus the threshold v0.
pub fn cmd_adaptive(rc: &RunConfig) -> Result<CommandOutput, CliError> {
    let cb = default_codebook(rc)?;
    let v0 = velocity_threshold(&rc.cfg, &cb)?;
    let hta = AdaptationPolicy::Hta { v0 };
    let mut rows = Vec::new();
    for step in 0..=30u32 {
        let v = step as f64 * 5.0;
        for policy in ["optm", "hta"] {
            let m = match policy {
                "optm" => optm_search(v, 64, &rc.cfg, &cb)?,
                _ => hta_block_length(v, &hta, &rc.cfg),
            };
            let spec = correlation_for_block(v, m, &rc.cfg)?;
            let (bound_l10, _) = worst_pair_log10(&spec, &rc.cfg.with_block_len(m), &cb)?;
            rows.push(AdaptiveRow {
                policy: policy.to_string(),
                v_mps: v,
                m,
                spec,
                bound: 10f64.powf(bound_l10),
            });
        }
    }
    let extra = vec![("v0_mps".to_string(), format!("{v0:.2}"))];
    Ok(CommandOutput {
        csv: adaptive_csv(&rows),
        manifest: manifest(rc, None, &extra),
    })
}
