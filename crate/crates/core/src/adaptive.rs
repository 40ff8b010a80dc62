//! Block-length adaptation: how the correlation structure depends on the
//! block length M, an exhaustive search minimizing the worst-case pairwise
//! error bound, the heuristic rule `M = max{Round(D/(v T t_s)), 1}`, and
//! the velocity threshold below which a fixed M = 1 wins.

use thiserror::Error;

use crate::analysis::{worst_pair_bound, AnalysisError};
use crate::channel::{ChannelError, CorrelationSpec, MobilityState, SystemConfig};
use crate::codebook::Codebook;
use crate::scalar::{lit, Scalar};

#[derive(Debug, Error)]
pub enum AdaptiveError {
    #[error("no crossing of the fixed-M and aligned-M bounds on (0, {v_max}] m/s")]
    NoCrossing { v_max: f64 },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

/// How the transmitter chooses the block length for a given speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AdaptationPolicy<T> {
    /// Always the same block length.
    Fixed(usize),
    /// Exhaustive bound-minimizing search over 1..=m_max.
    OptM { m_max: usize },
    /// Heuristic: M = 1 below the velocity threshold `v0`, otherwise the
    /// displacement-aligned `max(Round(D/(v T t_s)), 1)`.
    Hta { v0: T },
}

/// Correlation structure seen by a scheme with block length `m`: axial
/// motion (θ = 0) over one block duration `τ = m·T·t_s`.
pub fn correlation_for_block<T: Scalar>(
    v: T,
    m: usize,
    cfg: &SystemConfig<T>,
) -> Result<CorrelationSpec<T>, AdaptiveError> {
    let mob = MobilityState::new(v, T::zero())?;
    Ok(crate::channel::correlation_spec(
        &mob,
        &cfg.with_block_len(m),
    )?)
}

fn round_half_away<T: Scalar>(x: T) -> i64 {
    // T::round is half-away-from-zero for the IEEE floats behind Scalar.
    x.round().to_f64().expect("finite rounding") as i64
}

/// Displacement-aligned block length `max(Round(D/(v T t_s)), 1)`.
fn aligned_block_length<T: Scalar>(v: T, cfg: &SystemConfig<T>) -> usize {
    let per_block = v * lit::<T>(cfg.codeword_len as f64) * cfg.symbol_duration;
    round_half_away(cfg.antenna_spacing / per_block).max(1) as usize
}

/// Heuristic block-length rule: 1 below the threshold speed, otherwise the
/// value that moves the array by one antenna spacing per block.
pub fn hta_block_length<T: Scalar>(
    v: T,
    policy: &AdaptationPolicy<T>,
    cfg: &SystemConfig<T>,
) -> usize {
    let v0 = match policy {
        AdaptationPolicy::Hta { v0 } => *v0,
        AdaptationPolicy::Fixed(m) => return *m,
        AdaptationPolicy::OptM { .. } => {
            panic!("hta_block_length requires the heuristic policy")
        }
    };
    if v < v0 {
        1
    } else {
        aligned_block_length(v, cfg)
    }
}

/// Worst-case pairwise bound for speed `v` and block length `m`, the
/// objective the adaptation minimizes.
pub fn block_bound<T: Scalar>(
    v: T,
    m: usize,
    cfg: &SystemConfig<T>,
    cb: &Codebook<T>,
) -> Result<T, AdaptiveError> {
    let spec = correlation_for_block(v, m, cfg)?;
    Ok(worst_pair_bound(&spec, &cfg.with_block_len(m), cb)?)
}

/// Exhaustive search for the bound-minimizing block length in `1..=m_max`;
/// ties go to the smaller M.
pub fn optm_search<T: Scalar>(
    v: T,
    m_max: usize,
    cfg: &SystemConfig<T>,
    cb: &Codebook<T>,
) -> Result<usize, AdaptiveError> {
    let mut best_m = 1;
    let mut best = block_bound(v, 1, cfg, cb)?;
    for m in 2..=m_max {
        let b = block_bound(v, m, cfg, cb)?;
        if b < best {
            best = b;
            best_m = m;
        }
    }
    Ok(best_m)
}

/// Smallest speed at which the displacement-aligned block length stops
/// losing to M = 1: scans a 0.5 m/s grid over (0, 200] for a sign change of
/// `bound(v, 1) − bound(v, Round(D/(v T t_s)))`, then bisects to 0.01 m/s.
pub fn velocity_threshold<T: Scalar>(
    cfg: &SystemConfig<T>,
    cb: &Codebook<T>,
) -> Result<T, AdaptiveError> {
    let diff = |v: T| -> Result<T, AdaptiveError> {
        let m = aligned_block_length(v, cfg);
        Ok(block_bound(v, 1, cfg, cb)? - block_bound(v, m, cfg, cb)?)
    };
    let v_max = lit::<T>(200.0);
    let step = lit::<T>(0.5);
    let mut lo = step;
    let mut f_lo = diff(lo)?;
    let mut hi = lo;
    let mut found = false;
    while hi < v_max {
        hi = hi + step;
        let f_hi = diff(hi)?;
        if f_lo.signum() != f_hi.signum() || f_hi == T::zero() {
            found = true;
            break;
        }
        lo = hi;
        f_lo = f_hi;
    }
    if !found {
        return Err(AdaptiveError::NoCrossing {
            v_max: v_max.to_f64().unwrap_or(f64::NAN),
        });
    }
    let tol = lit::<T>(0.01);
    while hi - lo > tol {
        let mid = (lo + hi) * lit::<T>(0.5);
        let f_mid = diff(mid)?;
        if f_mid.signum() == f_lo.signum() && f_mid != T::zero() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * lit::<T>(0.5))
}
