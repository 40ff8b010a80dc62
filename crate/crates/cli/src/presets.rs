//! Named sweep presets. Each preset expands to a list of trial plans plus
//! extra manifest entries (for values computed while building the preset,
//! such as the velocity thresholds of the adaptive comparison).

use crate::config::RunConfig;
use dstm_core::adaptive::{velocity_threshold, AdaptationPolicy, AdaptiveError};
use dstm_core::channel::MobilityState;
use dstm_core::codebook::Codebook;
use dstm_core::simkit::{noise_var_for_snr_db, Scheme, TrialPlan};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Speed and direction sweep, both decoders, fixed M = 1.
    Fig5,
    /// Row-sliced equivalence: the correlation-aware decoder at speed
    /// against a static conventional receiver with fewer antennas.
    Fig7,
    /// SNR sweep at displacement-aligned speeds with analytic bound and
    /// floor columns.
    Fig8,
    /// Block-length family: every (v, M) combination with M in 1..=5.
    Fig9,
    /// Adaptation policy comparison over speed for two antenna spacings.
    Fig10,
}

impl Preset {
    pub fn parse(name: &str) -> Option<Preset> {
        match name {
            "fig5" => Some(Preset::Fig5),
            "fig7" => Some(Preset::Fig7),
            "fig8" => Some(Preset::Fig8),
            "fig9" => Some(Preset::Fig9),
            "fig10" => Some(Preset::Fig10),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig5 => "fig5",
            Preset::Fig7 => "fig7",
            Preset::Fig8 => "fig8",
            Preset::Fig9 => "fig9",
            Preset::Fig10 => "fig10",
        }
    }

    pub const ALL: [Preset; 5] = [
        Preset::Fig5,
        Preset::Fig7,
        Preset::Fig8,
        Preset::Fig9,
        Preset::Fig10,
    ];
}

/// A preset expanded against a configuration.
#[derive(Debug, Clone)]
pub struct PresetRun {
    pub plans: Vec<TrialPlan>,
    pub manifest_extra: Vec<(String, String)>,
}

fn template(rc: &RunConfig) -> TrialPlan {
    TrialPlan {
        scheme: rc.scheme,
        n_decisions: rc.decisions,
        base_seed: rc.seed,
        mobility: MobilityState::new(rc.v_mps, rc.theta_rad).expect("validated by config"),
        cfg: rc.cfg.clone(),
        policy: AdaptationPolicy::Fixed(rc.cfg.block_len),
    }
}

fn speeds(from: f64, to: f64, step: f64) -> Vec<f64> {
    let mut v = Vec::new();
    let mut x = from;
    while x <= to + 1e-9 {
        v.push(x);
        x += step;
    }
    v
}

/// Displacement lag the geometry produces at speed `v` with block length `m`.
fn alignment_lag(rc: &RunConfig, v: f64, m: usize) -> usize {
    let tau = m as f64 * rc.cfg.codeword_len as f64 * rc.cfg.symbol_duration;
    (v * tau / rc.cfg.antenna_spacing).round() as usize
}

pub fn build_preset(
    preset: Preset,
    rc: &RunConfig,
    cb: &Codebook<f64>,
) -> Result<PresetRun, AdaptiveError> {
    let base = template(rc);
    let mut plans = Vec::new();
    let mut manifest_extra = Vec::new();
    match preset {
        Preset::Fig5 => {
            for &scheme in &[Scheme::Conventional, Scheme::Proposed] {
                for &theta in &[0.0, PI / 16.0, PI / 8.0, PI / 4.0] {
                    for &v in &speeds(0.0, 200.0, 5.0) {
                        let mut p = base.clone();
                        p.scheme = scheme;
                        p.mobility = MobilityState::new(v, theta).expect("in range");
                        p.policy = AdaptationPolicy::Fixed(1);
                        plans.push(p);
                    }
                }
            }
        }
        Preset::Fig7 => {
            for &v in &[0.0, 50.0, 100.0, 150.0] {
                let lag = alignment_lag(rc, v, 5);
                let mut p = base.clone();
                p.scheme = Scheme::Proposed;
                p.mobility = MobilityState::new(v, 0.0).expect("in range");
                p.policy = AdaptationPolicy::Fixed(5);
                plans.push(p);

                // Static reference: conventional decoding with the l
                // leading receive branches removed.
                let mut q = base.clone();
                q.scheme = Scheme::Conventional;
                q.mobility = MobilityState::new(0.0, 0.0).expect("in range");
                q.policy = AdaptationPolicy::Fixed(5);
                q.cfg.n_rx = rc.cfg.n_rx - lag;
                plans.push(q);
                manifest_extra.push((format!("fig7_lag_v{v}"), lag.to_string()));
            }
        }
        Preset::Fig8 => {
            for &v in &[50.0, 100.0, 150.0] {
                for snr_db in (0..=30).step_by(2) {
                    let mut p = base.clone();
                    p.scheme = Scheme::Proposed;
                    p.mobility = MobilityState::new(v, 0.0).expect("in range");
                    p.policy = AdaptationPolicy::Fixed(5);
                    p.cfg.noise_var =
                        noise_var_for_snr_db(snr_db as f64, p.cfg.n_tx, p.cfg.tx_power);
                    plans.push(p);
                }
            }
        }
        Preset::Fig9 => {
            for m in 1..=5usize {
                for &v in &speeds(0.0, 200.0, 5.0) {
                    let mut p = base.clone();
                    p.scheme = Scheme::Proposed;
                    p.mobility = MobilityState::new(v, 0.0).expect("in range");
                    p.policy = AdaptationPolicy::Fixed(m);
                    plans.push(p);
                }
            }
        }
        Preset::Fig10 => {
            for &d in &[0.05, 0.1] {
                let mut cfg_d = rc.cfg.clone();
                cfg_d.antenna_spacing = d;
                let v0 = velocity_threshold(&cfg_d, cb)?;
                manifest_extra.push((format!("fig10_v0_d{d}"), format!("{v0:.2}")));
                let policies = [
                    AdaptationPolicy::Fixed(1),
                    AdaptationPolicy::OptM { m_max: 64 },
                    AdaptationPolicy::Hta { v0 },
                ];
                for policy in policies {
                    for &v in &speeds(0.0, 150.0, 5.0) {
                        let mut p = base.clone();
                        p.scheme = Scheme::Proposed;
                        p.mobility = MobilityState::new(v, 0.0).expect("in range");
                        p.policy = policy;
                        p.cfg.antenna_spacing = d;
                        plans.push(p);
                    }
                }
            }
        }
    }
    Ok(PresetRun {
        plans,
        manifest_extra,
    })
}
