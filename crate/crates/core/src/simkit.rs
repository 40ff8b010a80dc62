//! Monte Carlo engine: drives differential chains over the first-order
//! vector-autoregressive channel, decodes with a selected scheme, and
//! accumulates symbol error rates with Wilson confidence intervals.
//!
//! Reproducibility contract: every sweep point derives its seed by mixing
//! the base seed with a hash of the point's physical parameters, so results
//! are independent of point ordering and of how many worker threads rayon
//! uses. Within a point, chains are seeded from (point seed, chain index)
//! and run sequentially. The generator is ChaCha8 (`RNG_ALGORITHM`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::adaptive::{
    hta_block_length, optm_search, AdaptationPolicy, AdaptiveError,
};
use crate::analysis::{pep_bound_special, pep_floor, AnalysisError, PepInputs};
use crate::channel::{
    build_correlation_matrix, channel_init, channel_step, correlation_spec, ChannelError,
    CorrelationCase, CorrelationSpec, MobilityState, SystemConfig,
};
use crate::codebook::{Codebook, CodebookError, DifferentialChain};
use crate::numerics::ComplexMatrix;
use crate::receiver::{
    decode_conventional, decode_proposed, decode_sliced, DecodeResult, ReceiverError,
};
use num_complex::Complex64;

/// RNG algorithm identifier recorded in run manifests.
pub const RNG_ALGORITHM: &str = "chacha8+splitmix64";

#[derive(Debug, Error)]
pub enum SimError {
    #[error("trial plan must request at least one decision")]
    NoDecisions,
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Codebook(#[from] CodebookError),
    #[error(transparent)]
    Receiver(#[from] ReceiverError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Adaptive(#[from] AdaptiveError),
}

/// Decoding scheme under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Conventional,
    Proposed,
    Sliced,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Conventional => "conventional",
            Scheme::Proposed => "proposed",
            Scheme::Sliced => "sliced",
        }
    }
}

/// One Monte Carlo operating point.
#[derive(Debug, Clone)]
pub struct TrialPlan {
    pub scheme: Scheme,
    pub n_decisions: u64,
    pub base_seed: u64,
    pub mobility: MobilityState<f64>,
    pub cfg: SystemConfig<f64>,
    pub policy: AdaptationPolicy<f64>,
}

/// Result of one sweep point: the swept parameters, the observed error
/// counts with the 95% Wilson interval, the correlation snapshot, and the
/// matching analytic bound/floor (union multiplier included) where the
/// single-superdiagonal analysis applies.
#[derive(Debug, Clone)]
pub struct SweepRecord {
    pub scheme: Scheme,
    pub v_mps: f64,
    pub theta_rad: f64,
    pub m: usize,
    pub snr_db: f64,
    pub d_m: f64,
    pub spec: CorrelationSpec<f64>,
    pub decisions: u64,
    pub errors: u64,
    pub ser: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bound: Option<f64>,
    pub floor: Option<f64>,
}

/// splitmix64 step, the mixing primitive behind all seed derivation.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mix(a: u64, b: u64) -> u64 {
    let mut s = a ^ 0xA076_1D64_78BD_642F;
    let x = splitmix64(&mut s);
    s ^= b;
    splitmix64(&mut s) ^ x
}

fn policy_words(policy: &AdaptationPolicy<f64>) -> (u64, u64) {
    match policy {
        AdaptationPolicy::Fixed(m) => (0, *m as u64),
        AdaptationPolicy::OptM { m_max } => (1, *m_max as u64),
        AdaptationPolicy::Hta { v0 } => (2, v0.to_bits()),
    }
}

/// Hash of the plan's physical parameters; deliberately ignores anything
/// positional so that reordering sweep axes cannot change per-point seeds.
/// The decoding scheme is also excluded on purpose: plans that differ only
/// in the receiver share channel and noise realizations, so scheme
/// comparisons are paired (common random numbers) instead of adding
/// independent Monte Carlo noise to the difference.
fn param_hash(plan: &TrialPlan) -> u64 {
    let cfg = &plan.cfg;
    let (pol_kind, pol_arg) = policy_words(&plan.policy);
    let words = [
        plan.n_decisions,
        plan.mobility.speed.to_bits(),
        plan.mobility.direction.to_bits(),
        cfg.n_tx as u64,
        cfg.n_rx as u64,
        cfg.codeword_len as u64,
        cfg.tx_power.to_bits(),
        cfg.noise_var.to_bits(),
        cfg.symbol_duration.to_bits(),
        cfg.carrier_freq.to_bits(),
        cfg.antenna_spacing.to_bits(),
        cfg.scatter_decay.to_bits(),
        pol_kind,
        pol_arg,
    ];
    let mut h = 0x243F_6A88_85A3_08D3u64;
    for w in words {
        h = mix(h, w);
    }
    h
}

/// Resolve the block length the plan's policy selects at its speed.
pub fn resolve_block_len(plan: &TrialPlan, cb: &Codebook<f64>) -> Result<usize, SimError> {
    Ok(match plan.policy {
        AdaptationPolicy::Fixed(m) => m,
        AdaptationPolicy::OptM { m_max } => {
            optm_search(plan.mobility.speed, m_max, &plan.cfg, cb)?
        }
        AdaptationPolicy::Hta { .. } => {
            hta_block_length(plan.mobility.speed, &plan.policy, &plan.cfg)
        }
    })
}

fn noisy_observation<R: Rng>(
    h: &ComplexMatrix<f64>,
    x: &ComplexMatrix<f64>,
    cfg: &SystemConfig<f64>,
    rng: &mut R,
) -> ComplexMatrix<f64> {
    let signal = h.matmul(x).expect("dimension match by construction");
    let amp = cfg.tx_power.sqrt();
    let std = (cfg.noise_var * 0.5).sqrt();
    ComplexMatrix::from_fn(signal.rows(), signal.cols(), |r, c| {
        let nr: f64 = rng.sample(StandardNormal);
        let ni: f64 = rng.sample(StandardNormal);
        signal[(r, c)].scale(amp) + Complex64::new(nr * std, ni * std)
    })
}

fn decode(
    scheme: Scheme,
    y_prev: &ComplexMatrix<f64>,
    y_curr: &ComplexMatrix<f64>,
    cm: &crate::channel::CorrelationMatrix<f64>,
    lag: usize,
    cb: &Codebook<f64>,
) -> Result<DecodeResult<f64>, ReceiverError> {
    match scheme {
        Scheme::Conventional => decode_conventional(y_prev, y_curr, cb),
        Scheme::Proposed => decode_proposed(y_prev, y_curr, cm, cb),
        Scheme::Sliced => decode_sliced(y_prev, y_curr, lag, cb),
    }
}

/// Run all chains of one operating point and return (decisions, errors).
///
/// The point runs independent chains covering the M antenna-position
/// phases of the block schedule, replicated across fresh channel draws;
/// each received block is used exactly once as the "current" observation
/// of a decision.
pub fn run_chain(plan: &TrialPlan, cb: &Codebook<f64>) -> Result<(u64, u64), SimError> {
    if plan.n_decisions == 0 {
        return Err(SimError::NoDecisions);
    }
    plan.cfg.validate()?;
    let m = resolve_block_len(plan, cb)?;
    let cfg = plan.cfg.with_block_len(m);
    let spec = correlation_spec(&plan.mobility, &cfg)?;
    let cm = build_correlation_matrix(&spec, cfg.n_rx)?;
    let k_card = cb.cardinality();

    // One chain per antenna-position phase of the block schedule,
    // replicated with fresh channel draws so the estimate averages over
    // the fading ensemble. Without replication a static or slowly mixing
    // channel would pin the whole budget onto a handful of realizations
    // and the binomial interval would understate the uncertainty.
    let replicates = (plan.n_decisions / (m as u64 * 256)).clamp(1, 4096);
    let chains = m as u64 * replicates;
    let base = plan.n_decisions / chains;
    let rem = plan.n_decisions % chains;
    let mut errors = 0u64;
    for chain in 0..chains {
        let quota = base + u64::from(chain < rem);
        if quota == 0 {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(mix(plan.base_seed, chain));
        let mut state = channel_init::<f64, _>(cfg.n_rx, cfg.n_tx, &mut rng);
        let mut tx = DifferentialChain::new(cb);
        let mut y_prev = noisy_observation(&state.h, tx.current(), &cfg, &mut rng);
        for _ in 0..quota {
            let k = rng.random_range(0..k_card);
            tx.advance(k, cb)?;
            state = channel_step(&state, &cm, &mut rng)?;
            let y_curr = noisy_observation(&state.h, tx.current(), &cfg, &mut rng);
            let out = decode(plan.scheme, &y_prev, &y_curr, &cm, spec.lag, cb)?;
            if out.symbol_index != k {
                errors += 1;
            }
            y_prev = y_curr;
        }
    }
    Ok((plan.n_decisions, errors))
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(errors: u64, decisions: u64, confidence: f64) -> (f64, f64) {
    assert!(decisions >= 1 && errors <= decisions);
    assert!(confidence > 0.0 && confidence < 1.0);
    let z = probit(0.5 + confidence / 2.0);
    let n = decisions as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Inverse standard normal CDF (Acklam's rational approximation with one
/// Halley refinement step; absolute error far below any CI use here).
fn probit(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0);
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;
    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if x.abs() > 4.0 {
        // Tail quantiles: the raw approximation (relative error ~1e-9) is
        // already far tighter than any Monte Carlo interval needs.
        return x;
    }
    // One Halley step against the series erf for full double precision.
    let phi = 0.5 * (1.0 + erf_series(x / std::f64::consts::SQRT_2));
    let e = phi - p;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (x * x / 2.0).exp();
    x - u / (1.0 + x * u / 2.0)
}

/// Error function by its Maclaurin series; accurate to full double
/// precision for the |x| <= ~3 range the refinement above uses.
fn erf_series(x: f64) -> f64 {
    let mut term = x;
    let mut sum = x;
    let x2 = x * x;
    for n in 1..80 {
        term *= -x2 / n as f64;
        let add = term / (2 * n + 1) as f64;
        sum += add;
        if add.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum * 2.0 / std::f64::consts::PI.sqrt()
}

/// Axis definitions for a Cartesian sweep; empty axes use the template's
/// value for that parameter.
#[derive(Debug, Clone, Default)]
pub struct SweepAxes {
    pub schemes: Vec<Scheme>,
    pub speeds: Vec<f64>,
    pub thetas: Vec<f64>,
    pub policies: Vec<AdaptationPolicy<f64>>,
    pub snr_dbs: Vec<f64>,
    pub spacings: Vec<f64>,
}

/// Noise variance giving the requested per-receive-antenna SNR in dB with
/// the template's transmit power.
pub fn noise_var_for_snr_db(snr_db: f64, n_tx: usize, tx_power: f64) -> f64 {
    n_tx as f64 * tx_power / 10f64.powf(snr_db / 10.0)
}

/// Expand axes against a template plan into one plan per Cartesian point.
pub fn expand_axes(axes: &SweepAxes, template: &TrialPlan) -> Vec<TrialPlan> {
    fn or_default<T: Clone>(axis: &[T], fallback: T) -> Vec<T> {
        if axis.is_empty() {
            vec![fallback]
        } else {
            axis.to_vec()
        }
    }
    let schemes = or_default(&axes.schemes, template.scheme);
    let speeds = or_default(&axes.speeds, template.mobility.speed);
    let thetas = or_default(&axes.thetas, template.mobility.direction);
    let policies = or_default(&axes.policies, template.policy);
    let snr_dbs = or_default(
        &axes.snr_dbs,
        10.0 * (template.cfg.n_tx as f64 * template.cfg.tx_power / template.cfg.noise_var).log10(),
    );
    let spacings = or_default(&axes.spacings, template.cfg.antenna_spacing);

    let mut plans = Vec::new();
    for &scheme in &schemes {
        for &v in &speeds {
            for &theta in &thetas {
                for &policy in &policies {
                    for &snr_db in &snr_dbs {
                        for &d in &spacings {
                            let mut plan = template.clone();
                            plan.scheme = scheme;
                            plan.mobility =
                                MobilityState::new(v, theta).expect("axis values validated");
                            plan.policy = policy;
                            plan.cfg.noise_var =
                                noise_var_for_snr_db(snr_db, plan.cfg.n_tx, plan.cfg.tx_power);
                            plan.cfg.antenna_spacing = d;
                            plans.push(plan);
                        }
                    }
                }
            }
        }
    }
    plans
}

/// Simulate one plan and package the full record, attaching the analytic
/// union bound and floor when the correlation structure is Case II.
pub fn run_point(plan: &TrialPlan, cb: &Codebook<f64>) -> Result<SweepRecord, SimError> {
    let mut seeded = plan.clone();
    seeded.base_seed = mix(plan.base_seed, param_hash(plan));
    let m = resolve_block_len(plan, cb)?;
    let cfg = plan.cfg.with_block_len(m);
    let spec = correlation_spec(&plan.mobility, &cfg)?;
    let (decisions, errors) = run_chain(&seeded, cb)?;
    let ser = errors as f64 / decisions as f64;
    let (ci_low, ci_high) = wilson_interval(errors, decisions, 0.95);

    let (bound, floor) = if spec.case == CorrelationCase::CaseII && spec.lag >= cfg.n_rx {
        // The correlation band falls entirely outside the array: the
        // channel renews completely between receptions and only the
        // trivial bound holds.
        (Some(1.0), Some(1.0))
    } else if spec.case == CorrelationCase::CaseII {
        let k_minus_1 = (cb.cardinality() - 1) as f64;
        let mut worst_bound: f64 = 0.0;
        let mut worst_floor: f64 = 0.0;
        for a in 0..cb.cardinality() {
            for b in 0..cb.cardinality() {
                if a == b {
                    continue;
                }
                let inp = PepInputs::new(cb, a, b, &spec, &cfg);
                worst_bound = worst_bound.max(pep_bound_special(&inp)?);
                worst_floor = worst_floor.max(pep_floor(&inp)?);
            }
        }
        (
            Some((k_minus_1 * worst_bound).min(1.0)),
            Some((k_minus_1 * worst_floor).min(1.0)),
        )
    } else {
        (None, None)
    };

    Ok(SweepRecord {
        scheme: plan.scheme,
        v_mps: plan.mobility.speed,
        theta_rad: plan.mobility.direction,
        m,
        snr_db: 10.0 * (cfg.n_tx as f64 * cfg.tx_power / cfg.noise_var).log10(),
        d_m: cfg.antenna_spacing,
        spec,
        decisions,
        errors,
        ser,
        ci_low,
        ci_high,
        bound,
        floor,
    })
}

/// Simulate every plan in parallel; record order matches plan order and the
/// content is independent of the rayon worker count.
pub fn sweep(plans: &[TrialPlan], cb: &Codebook<f64>) -> Result<Vec<SweepRecord>, SimError> {
    plans.par_iter().map(|plan| run_point(plan, cb)).collect()
}
