//! Closed-form performance analysis: equivalent SINR after combining two
//! receptions, pairwise-error-probability (PEP) upper bounds for the
//! general two-tap and single-tap correlation structures, the high-SNR
//! error floor, and the quasi-static Chernoff baseline the general bound
//! reduces to.
//!
//! All bounds are evaluated in the log domain (log-determinant through a
//! Cholesky factorization) so that high-SNR values underflow gracefully;
//! both the linear value and its base-10 logarithm are exposed.

use thiserror::Error;

use crate::channel::{CorrelationCase, CorrelationSpec, SystemConfig};
use crate::codebook::Codebook;
use crate::numerics::linalg::logdet_hermitian_pd;
use crate::numerics::{ComplexMatrix, NumericsError};
use crate::scalar::{lit, Scalar};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("operation requires a single-superdiagonal (case {expected}) spec, got case {got}")]
    CaseMismatch {
        expected: &'static str,
        got: &'static str,
    },
    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("correlation lag {lag} reaches past the {n_rx}-element array; no receive branch pair remains")]
    LagExceedsArray { lag: usize, n_rx: usize },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Everything a pairwise bound needs: the competing group elements, the
/// initial matrix `D`, the array dimensions and the channel operating point.
#[derive(Debug, Clone)]
pub struct PepInputs<T> {
    pub g: ComplexMatrix<T>,
    pub g_prime: ComplexMatrix<T>,
    pub initial: ComplexMatrix<T>,
    pub n_tx: usize,
    pub n_rx: usize,
    pub lag: usize,
    pub spec: CorrelationSpec<T>,
    pub tx_power: T,
    pub noise_var: T,
}

impl<T: Scalar> PepInputs<T> {
    pub fn new(
        cb: &Codebook<T>,
        a: usize,
        b: usize,
        spec: &CorrelationSpec<T>,
        cfg: &SystemConfig<T>,
    ) -> Self {
        PepInputs {
            g: cb.generator(a).clone(),
            g_prime: cb.generator(b).clone(),
            initial: cb.initial().clone(),
            n_tx: cfg.n_tx,
            n_rx: cfg.n_rx,
            lag: spec.lag,
            spec: spec.clone(),
            tx_power: cfg.tx_power,
            noise_var: cfg.noise_var,
        }
    }
}

/// Equivalent SINR after the second reception:
/// `γ = [(1−l/N_R)ρ_l² + (1−(l+1)/N_R)ρ_{l+1}²] /
///      [1 − (1−l/N_R)ρ_l² − (1−(l+1)/N_R)ρ_{l+1}² + σ_n²/(N_T P)]`.
pub fn sinr_gamma<T: Scalar>(
    spec: &CorrelationSpec<T>,
    n_rx: usize,
    n_tx: usize,
    tx_power: T,
    noise_var: T,
) -> Result<T, AnalysisError> {
    if noise_var <= T::zero() {
        return Err(AnalysisError::NonPositive {
            what: "noise variance",
            value: noise_var.to_f64().unwrap_or(f64::NAN),
        });
    }
    let nr = T::from_usize(n_rx).expect("small count");
    let l = T::from_usize(spec.lag).expect("small count");
    let one = T::one();
    let num = (one - l / nr) * spec.rho_l * spec.rho_l
        + (one - (l + one) / nr) * spec.rho_l1 * spec.rho_l1;
    let den = one - num + noise_var / (T::from_usize(n_tx).expect("small count") * tx_power);
    assert!(den > T::zero(), "SINR denominator must stay positive");
    Ok(num / den)
}

/// Log-domain evaluation of `1/det(I + coeff * kernel)^exponent` where
/// `kernel` is Hermitian PSD. Returns `(linear, log10)`.
fn det_bound<T: Scalar>(
    kernel: &ComplexMatrix<T>,
    coeff: T,
    exponent: usize,
) -> Result<(T, T), AnalysisError> {
    let n = kernel.rows();
    let arg = ComplexMatrix::<T>::identity(n).add(&kernel.scale_real(coeff))?;
    let log_det = logdet_hermitian_pd(&arg)?;
    let e = T::from_usize(exponent).expect("small count");
    let log10 = -e * log_det / lit::<T>(10.0).ln();
    Ok(((-e * log_det).exp(), log10))
}

/// Kernel of the general bound:
/// `I − (1/(4N_T)) D (I + G'Gᴴ)(I + G G'ᴴ) Dᴴ`. Hermitian PSD because the
/// middle factor is `M Mᴴ` with `M = I + G'Gᴴ` and `D Dᴴ = N_T I`.
fn general_kernel<T: Scalar>(inp: &PepInputs<T>) -> Result<ComplexMatrix<T>, AnalysisError> {
    let eye = ComplexMatrix::<T>::identity(inp.n_tx);
    let m = eye.add(&inp.g_prime.matmul(&inp.g.hermitian_transpose())?)?;
    let inner = m.matmul(&m.hermitian_transpose())?;
    let outer = inp
        .initial
        .matmul(&inner)?
        .matmul(&inp.initial.hermitian_transpose())?;
    let quarter_nt = lit::<T>(0.25) / T::from_usize(inp.n_tx).expect("small count");
    Ok(eye.sub(&outer.scale_real(quarter_nt))?)
}

fn check_lag<T>(inp: &PepInputs<T>) -> Result<(), AnalysisError> {
    if inp.lag >= inp.n_rx {
        return Err(AnalysisError::LagExceedsArray {
            lag: inp.lag,
            n_rx: inp.n_rx,
        });
    }
    Ok(())
}

fn pep_bound_general_pair<T: Scalar>(inp: &PepInputs<T>) -> Result<(T, T), AnalysisError> {
    check_lag(inp)?;
    let gamma = sinr_gamma(&inp.spec, inp.n_rx, inp.n_tx, inp.tx_power, inp.noise_var)?;
    let coeff = gamma * gamma / (T::one() + lit::<T>(2.0) * gamma);
    det_bound(&general_kernel(inp)?, coeff, inp.n_rx - inp.lag)
}

/// General PEP upper bound (two-tap correlation structure).
pub fn pep_bound_general<T: Scalar>(inp: &PepInputs<T>) -> Result<T, AnalysisError> {
    pep_bound_general_pair(inp).map(|(lin, _)| lin)
}

/// Base-10 logarithm of [`pep_bound_general`], safe at high SNR.
pub fn pep_bound_general_log10<T: Scalar>(inp: &PepInputs<T>) -> Result<T, AnalysisError> {
    pep_bound_general_pair(inp).map(|(_, l10)| l10)
}

/// Chernoff PEP bound for unitary space-time codes over a quasi-static
/// channel: `1/det(I + ((ρ/t)² n̄²/(4(1+(ρ/t)n̄)))·[I − (1/n̄²) C_G C_G'ᴴ C_G' C_Gᴴ])^r`.
pub fn pep_chernoff_baseline<T: Scalar>(
    codeword_g: &ComplexMatrix<T>,
    codeword_g_prime: &ComplexMatrix<T>,
    n_bar: usize,
    t: usize,
    r: usize,
    rho: T,
) -> Result<T, AnalysisError> {
    let cross = codeword_g
        .matmul(&codeword_g_prime.hermitian_transpose())?
        .matmul(&codeword_g_prime.matmul(&codeword_g.hermitian_transpose())?)?;
    let nb = T::from_usize(n_bar).expect("small count");
    let eye = ComplexMatrix::<T>::identity(codeword_g.rows());
    let kernel = eye.sub(&cross.scale_real(T::one() / (nb * nb)))?;
    let snr_per_tx = rho / T::from_usize(t).expect("small count");
    let coeff = snr_per_tx * snr_per_tx * nb * nb
        / (lit::<T>(4.0) * (T::one() + snr_per_tx * nb));
    det_bound(&kernel, coeff, r).map(|(lin, _)| lin)
}

/// The SINR pair of the single-superdiagonal analysis:
/// `γ₁ = N_T P/σ_n²`, `γ₂ = ρ_l²/(1 − ρ_l² + σ_n²/(N_T P))`, with the
/// perfect-correlation branch `γ₂ = γ₁` when `ρ_l² = 1` (the algebraic
/// limit, kept for continuity).
pub fn gamma_pair<T: Scalar>(
    spec: &CorrelationSpec<T>,
    n_tx: usize,
    tx_power: T,
    noise_var: T,
) -> Result<(T, T), AnalysisError> {
    if spec.case != CorrelationCase::CaseII {
        return Err(AnalysisError::CaseMismatch {
            expected: CorrelationCase::CaseII.as_str(),
            got: spec.case.as_str(),
        });
    }
    let nt_p = T::from_usize(n_tx).expect("small count") * tx_power;
    let gamma1 = nt_p / noise_var;
    let rho2 = spec.rho_l * spec.rho_l;
    let gamma2 = if (T::one() - rho2).abs() < lit::<T>(1e-15) {
        gamma1
    } else {
        rho2 / (T::one() - rho2 + noise_var / nt_p)
    };
    Ok((gamma1, gamma2))
}

fn special_kernel<T: Scalar>(inp: &PepInputs<T>) -> Result<ComplexMatrix<T>, AnalysisError> {
    let diff = inp.g.sub(&inp.g_prime)?;
    Ok(inp
        .initial
        .matmul(&diff)?
        .matmul(&diff.hermitian_transpose())?
        .matmul(&inp.initial.hermitian_transpose())?)
}

fn pep_bound_special_pair<T: Scalar>(inp: &PepInputs<T>) -> Result<(T, T), AnalysisError> {
    check_lag(inp)?;
    let (g1, g2) = gamma_pair(&inp.spec, inp.n_tx, inp.tx_power, inp.noise_var)?;
    if g2 == T::zero() {
        return Ok((T::one(), T::zero()));
    }
    let gh = lit::<T>(2.0) * g1 * g2 / (g1 + g2);
    let nt = T::from_usize(inp.n_tx).expect("small count");
    let coeff = gh * gh / (lit::<T>(4.0) * nt * (T::one() + lit::<T>(2.0) * gh));
    det_bound(&special_kernel(inp)?, coeff, inp.n_rx - inp.lag)
}

/// Tighter PEP bound when the correlation matrix has a single
/// superdiagonal (or main diagonal), using the harmonic-mean SINR
/// `γ_h = 2γ₁γ₂/(γ₁+γ₂)`.
pub fn pep_bound_special<T: Scalar>(inp: &PepInputs<T>) -> Result<T, AnalysisError> {
    pep_bound_special_pair(inp).map(|(lin, _)| lin)
}

/// Base-10 logarithm of [`pep_bound_special`].
pub fn pep_bound_special_log10<T: Scalar>(inp: &PepInputs<T>) -> Result<T, AnalysisError> {
    pep_bound_special_pair(inp).map(|(_, l10)| l10)
}

fn pep_floor_pair<T: Scalar>(inp: &PepInputs<T>) -> Result<(T, T), AnalysisError> {
    check_lag(inp)?;
    if inp.spec.case != CorrelationCase::CaseII {
        return Err(AnalysisError::CaseMismatch {
            expected: CorrelationCase::CaseII.as_str(),
            got: inp.spec.case.as_str(),
        });
    }
    let rho2 = inp.spec.rho_l * inp.spec.rho_l;
    if (T::one() - rho2).abs() < lit::<T>(1e-15) {
        // Perfect correlation: the error probability keeps decaying with
        // SNR, so there is no floor.
        return Ok((T::zero(), T::neg_infinity()));
    }
    let nt = T::from_usize(inp.n_tx).expect("small count");
    let coeff =
        rho2 * rho2 / (nt * (T::one() + lit::<T>(3.0) * rho2) * (T::one() - rho2));
    det_bound(&special_kernel(inp)?, coeff, inp.n_rx - inp.lag)
}

/// High-SNR limit of [`pep_bound_special`]: the irreducible error floor
/// caused by the channel changing between the two receptions.
pub fn pep_floor<T: Scalar>(inp: &PepInputs<T>) -> Result<T, AnalysisError> {
    pep_floor_pair(inp).map(|(lin, _)| lin)
}

/// Base-10 logarithm of [`pep_floor`]; `-inf` when `ρ_l² = 1`.
pub fn pep_floor_log10<T: Scalar>(inp: &PepInputs<T>) -> Result<T, AnalysisError> {
    pep_floor_pair(inp).map(|(_, l10)| l10)
}

/// Worst pairwise bound over all distinct group-element pairs, using the
/// bound that matches the correlation structure: the general bound for a
/// two-tap spec, the single-tap bound otherwise, and 1 when the channel
/// renews completely. This is the scalar objective the block-length
/// adaptation minimizes.
pub fn worst_pair_bound<T: Scalar>(
    spec: &CorrelationSpec<T>,
    cfg: &SystemConfig<T>,
    cb: &Codebook<T>,
) -> Result<T, AnalysisError> {
    if spec.case == CorrelationCase::CaseIII || spec.lag >= cfg.n_rx {
        // Complete renewal, or the band falls entirely outside the array:
        // nothing couples the two receptions, so the trivial bound applies.
        return Ok(T::one());
    }
    let mut worst = T::zero();
    for a in 0..cb.cardinality() {
        for b in 0..cb.cardinality() {
            if a == b {
                continue;
            }
            let inp = PepInputs::new(cb, a, b, spec, cfg);
            let bound = match spec.case {
                CorrelationCase::CaseI => pep_bound_general(&inp)?,
                _ => pep_bound_special(&inp)?,
            };
            if bound > worst {
                worst = bound;
            }
        }
    }
    Ok(worst)
}
