//! Spatial-temporal correlation model of a moving antenna array and the
//! VAR(1) channel evolution built on it.
//!
//! A receive array sliding along its own axis revisits, one block later,
//! physical positions previously occupied by neighboring elements. Channels
//! of element pairs closer than half a wavelength across the block boundary
//! are correlated; everything farther apart is not. The resulting
//! correlation matrix `C` is Toeplitz with at most two adjacent nonzero
//! superdiagonals (`lag` and `lag+1`), and the channel evolves as
//! `H_{i+1} = C H_i + U_{i+1}` with innovation covariance `I - C C^H`.

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::numerics::{
    bessel_i0_complex, bessel_j0, cholesky_psd, max_eigenvalue_psd, ComplexMatrix, NumericsError,
};
use crate::scalar::{lit, Scalar};
use crate::SPEED_OF_LIGHT;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("invalid configuration: {field}: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("antenna spacing {spacing} m is below half a wavelength ({half_lambda} m); correlation windows overlap")]
    SpacingBelowHalfWavelength { spacing: f64, half_lambda: f64 },
    #[error("geometry produced a correlation hit-set {hits:?} outside the supported one/two-band structure")]
    AmbiguousGeometry { hits: Vec<usize> },
    #[error("scattering spec inconsistent with mobility: beta - alpha = {beta_minus_alpha}, direction = {direction}")]
    ScatteringMismatch {
        beta_minus_alpha: f64,
        direction: f64,
    },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Physical and signaling parameters of the link.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig<T> {
    /// Transmit antennas at the base station (N_T).
    pub n_tx: usize,
    /// Receive antennas on the moving array (N_R).
    pub n_rx: usize,
    /// Symbols per codeword matrix (T).
    pub codeword_len: usize,
    /// Transmit power per antenna, watts (P).
    pub tx_power: T,
    /// Noise variance per receive antenna, watts.
    pub noise_var: T,
    /// Symbol duration, seconds.
    pub symbol_duration: T,
    /// Carrier frequency, Hz.
    pub carrier_freq: T,
    /// Receive element spacing, meters (D).
    pub antenna_spacing: T,
    /// Scatterer mobility decay constant, 1/meter (c0).
    pub scatter_decay: T,
    /// Codewords per transmission block (M).
    pub block_len: usize,
}

impl<T: Scalar> SystemConfig<T> {
    /// Carrier wavelength, meters.
    pub fn wavelength(&self) -> T {
        lit::<T>(SPEED_OF_LIGHT) / self.carrier_freq
    }

    /// Block duration tau = M * T * t_s, seconds.
    pub fn block_duration(&self) -> T {
        lit::<T>((self.block_len * self.codeword_len) as f64) * self.symbol_duration
    }

    /// Same configuration with a different block length.
    pub fn with_block_len(&self, block_len: usize) -> Self {
        let mut cfg = self.clone();
        cfg.block_len = block_len;
        cfg
    }

    /// Speed above which a codeword no longer fits inside the coherence
    /// time t_c = 0.423 / f_D.
    pub fn coherence_speed_limit(&self) -> T {
        lit::<T>(0.423) * self.wavelength()
            / (lit::<T>(self.codeword_len as f64) * self.symbol_duration)
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let positive: [(&'static str, T); 6] = [
            ("tx_power", self.tx_power),
            ("noise_var", self.noise_var),
            ("symbol_duration", self.symbol_duration),
            ("carrier_freq", self.carrier_freq),
            ("antenna_spacing", self.antenna_spacing),
            ("scatter_decay", self.scatter_decay),
        ];
        for (field, v) in positive {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(ChannelError::InvalidConfig {
                    field,
                    reason: format!("must be finite and > 0, got {v}"),
                });
            }
        }
        if self.n_tx < 1 || self.n_rx < 1 || self.block_len < 1 {
            return Err(ChannelError::InvalidConfig {
                field: "antenna/block counts",
                reason: "counts must be >= 1".into(),
            });
        }
        if self.codeword_len < self.n_tx {
            return Err(ChannelError::InvalidConfig {
                field: "codeword_len",
                reason: format!(
                    "codeword length {} must be >= n_tx {}",
                    self.codeword_len, self.n_tx
                ),
            });
        }
        Ok(())
    }
}

/// Velocity and direction of the array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityState<T> {
    /// Speed, m/s.
    pub speed: T,
    /// Moving direction relative to the array axis, radians, strictly
    /// inside (-pi/2, pi/2).
    pub direction: T,
}

impl<T: Scalar> MobilityState<T> {
    pub fn new(speed: T, direction: T) -> Result<Self, ChannelError> {
        if !(speed >= T::zero()) || !speed.is_finite() {
            return Err(ChannelError::InvalidConfig {
                field: "speed",
                reason: format!("must be finite and >= 0, got {speed}"),
            });
        }
        if !(direction.abs() < T::FRAC_PI_2()) {
            return Err(ChannelError::InvalidConfig {
                field: "direction",
                reason: format!("must lie strictly inside (-pi/2, pi/2), got {direction}"),
            });
        }
        Ok(Self { speed, direction })
    }

    /// Along-track displacement over `tau` seconds.
    pub fn axial(&self, tau: T) -> T {
        self.speed * tau * self.direction.cos()
    }

    /// Cross-track displacement over `tau` seconds.
    pub fn lateral(&self, tau: T) -> T {
        self.speed * tau * self.direction.sin()
    }
}

/// Non-isotropic scattering geometry for the general correlation model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringSpec<T> {
    /// AOA concentration (kappa >= 0); 0 is isotropic.
    pub aoa_width: T,
    /// Mean AOA direction, radians in [-pi, pi).
    pub aoa_mean: T,
    /// Array-axis angle alpha, radians.
    pub angle_alpha: T,
    /// Motion angle beta, radians; `beta - alpha` must equal the moving
    /// direction of the accompanying mobility state.
    pub angle_beta: T,
}

/// Correlation band structure regimes.
///
/// `CaseI`: the displaced element sits within half a wavelength of two
/// consecutive previous element positions (two bands). `CaseII`: of one
/// (single band). `CaseIII`: of none (all-zero C, full renewal).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationCase {
    CaseI,
    CaseII,
    CaseIII,
}

impl CorrelationCase {
    pub fn as_str(&self) -> &'static str {
        match self {
            CorrelationCase::CaseI => "I",
            CorrelationCase::CaseII => "II",
            CorrelationCase::CaseIII => "III",
        }
    }
}

/// Summary of the spatial-temporal correlation: case, superdiagonal index
/// and the two band coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationSpec<T> {
    pub case: CorrelationCase,
    pub lag: usize,
    pub rho_l: T,
    pub rho_l1: T,
    /// True when `psd_safeguard` rescaled the coefficients.
    pub safeguard_applied: bool,
}

/// Toeplitz correlation matrix and the Cholesky factor of its innovation
/// covariance `R_u = I - C C^H`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix<T> {
    pub c: ComplexMatrix<T>,
    pub noise_cov_chol: ComplexMatrix<T>,
    /// Set when a nonzero band index fell outside the matrix and was
    /// dropped (degenerates towards CaseIII semantics).
    pub band_truncated: bool,
    /// Set when two-band `C` was shrunk to a sub-unit spectral norm so the
    /// stationary innovation covariance stays positive semidefinite.
    pub spectral_rescaled: bool,
}

/// Channel matrix plus evolution counter.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState<T> {
    pub h: ComplexMatrix<T>,
    pub block_index: u64,
}

/// Classifies the correlation geometry; coefficients are left at zero.
///
/// Scans the candidate lag range for previous element positions within
/// half a wavelength (strict) of the displaced first element. Rejects
/// spacings below half a wavelength, where more than two consecutive
/// windows could overlap and the two-band structure breaks down.
pub fn classify_correlation<T: Scalar>(
    mob: &MobilityState<T>,
    cfg: &SystemConfig<T>,
) -> Result<CorrelationSpec<T>, ChannelError> {
    cfg.validate()?;
    let lambda = cfg.wavelength();
    let half_lambda = lit::<T>(0.5) * lambda;
    let d = cfg.antenna_spacing;
    if d < half_lambda {
        return Err(ChannelError::SpacingBelowHalfWavelength {
            spacing: d.to_f64().unwrap_or(f64::NAN),
            half_lambda: half_lambda.to_f64().unwrap_or(f64::NAN),
        });
    }
    let tau = cfg.block_duration();
    let axial = mob.axial(tau);
    let lateral = mob.lateral(tau);
    let l_max = (mob.speed * tau / d).ceil().to_usize().unwrap_or(0) + 1;
    let mut hits = Vec::new();
    for l in 0..=l_max {
        let dx = axial - lit::<T>(l as f64) * d;
        let dist = (dx * dx + lateral * lateral).sqrt();
        if dist < half_lambda {
            hits.push(l);
        }
    }
    let (case, lag) = match hits.as_slice() {
        [] => (CorrelationCase::CaseIII, 0),
        [l] => (CorrelationCase::CaseII, *l),
        [l, m] if *m == *l + 1 => (CorrelationCase::CaseI, *l),
        _ => return Err(ChannelError::AmbiguousGeometry { hits }),
    };
    Ok(CorrelationSpec {
        case,
        lag,
        rho_l: T::zero(),
        rho_l1: T::zero(),
        safeguard_applied: false,
    })
}

/// Isotropic-scattering correlation coefficient for superdiagonal `k`:
/// `J0(sqrt(a^2 + b_k^2 - 2 a b_k cos(theta))) * exp(-c0 v tau)` with
/// `a = 2 pi (v / lambda) tau` and `b_k = 2 pi k D / lambda`.
pub fn correlation_coefficient_isotropic<T: Scalar>(
    k: usize,
    mob: &MobilityState<T>,
    cfg: &SystemConfig<T>,
) -> T {
    let lambda = cfg.wavelength();
    let tau = cfg.block_duration();
    let two_pi = lit::<T>(2.0) * T::PI();
    let a = two_pi * mob.speed * tau / lambda;
    let b_k = two_pi * lit::<T>(k as f64) * cfg.antenna_spacing / lambda;
    let cos_theta = mob.direction.cos();
    let arg_sq = a * a + b_k * b_k - lit::<T>(2.0) * a * b_k * cos_theta;
    let arg = arg_sq.max(T::zero()).sqrt();
    let decay = (-cfg.scatter_decay * mob.speed * tau).exp();
    bessel_j0(arg) * decay
}

/// General (von Mises AOA) correlation coefficient for superdiagonal `k`.
///
/// Reduces to the isotropic coefficient when `aoa_width` is zero.
pub fn correlation_coefficient_general<T: Scalar>(
    k: usize,
    mob: &MobilityState<T>,
    scat: &ScatteringSpec<T>,
    cfg: &SystemConfig<T>,
) -> Result<Complex<T>, ChannelError> {
    let beta_minus_alpha = scat.angle_beta - scat.angle_alpha;
    if (beta_minus_alpha - mob.direction).abs() > lit(1e-9) {
        return Err(ChannelError::ScatteringMismatch {
            beta_minus_alpha: beta_minus_alpha.to_f64().unwrap_or(f64::NAN),
            direction: mob.direction.to_f64().unwrap_or(f64::NAN),
        });
    }
    let lambda = cfg.wavelength();
    let tau = cfg.block_duration();
    let two_pi = lit::<T>(2.0) * T::PI();
    let a = two_pi * mob.speed * tau / lambda;
    let b_k = two_pi * lit::<T>(k as f64) * cfg.antenna_spacing / lambda;
    let kappa = scat.aoa_width;
    let re = kappa * kappa - a * a - b_k * b_k
        + lit::<T>(2.0) * a * b_k * beta_minus_alpha.cos();
    let im = -lit::<T>(2.0)
        * kappa
        * (a * (scat.aoa_mean - scat.angle_alpha).cos()
            - b_k * (scat.aoa_mean - scat.angle_beta).cos());
    let w = Complex::new(re, im).sqrt();
    let numer = bessel_i0_complex(w)?;
    let denom = bessel_i0_complex(Complex::new(kappa, T::zero()))?;
    let decay = (-cfg.scatter_decay * mob.speed * tau.abs()).exp();
    Ok(numer / denom * Complex::new(decay, T::zero()))
}

/// Rescales the band coefficients so that `rho_l^2 + rho_{l+1}^2 <= 1 - 1e-6`,
/// keeping their ratio, so the VAR(1) innovation covariance stays PSD.
pub fn psd_safeguard<T: Scalar>(spec: CorrelationSpec<T>) -> CorrelationSpec<T> {
    let s = spec.rho_l * spec.rho_l + spec.rho_l1 * spec.rho_l1;
    let limit = T::one() - lit(1e-6);
    if s > limit {
        let scale = (limit / s).sqrt();
        CorrelationSpec {
            rho_l: spec.rho_l * scale,
            rho_l1: spec.rho_l1 * scale,
            safeguard_applied: true,
            ..spec
        }
    } else {
        spec
    }
}

/// Classifies the geometry and fills in the isotropic coefficients,
/// applying the PSD safeguard. This is the spec the simulation path uses.
pub fn correlation_spec<T: Scalar>(
    mob: &MobilityState<T>,
    cfg: &SystemConfig<T>,
) -> Result<CorrelationSpec<T>, ChannelError> {
    let mut spec = classify_correlation(mob, cfg)?;
    match spec.case {
        CorrelationCase::CaseI => {
            spec.rho_l = correlation_coefficient_isotropic(spec.lag, mob, cfg);
            spec.rho_l1 = correlation_coefficient_isotropic(spec.lag + 1, mob, cfg);
        }
        CorrelationCase::CaseII => {
            spec.rho_l = if mob.speed.is_zero() && spec.lag == 0 {
                T::one()
            } else {
                correlation_coefficient_isotropic(spec.lag, mob, cfg)
            };
        }
        CorrelationCase::CaseIII => {}
    }
    // A single band with |rho| <= 1 always leaves I - C C^H PSD; rescaling
    // there would only perturb the static-channel limit (v = 0, rho_0 = 1),
    // so the safeguard applies to two-tap structures only.
    if spec.rho_l1.is_zero() {
        Ok(spec)
    } else {
        Ok(psd_safeguard(spec))
    }
}

/// Builds the Toeplitz band matrix `C` and the Cholesky factor of
/// `R_u = I - C C^H`.
pub fn build_correlation_matrix<T: Scalar>(
    spec: &CorrelationSpec<T>,
    n_rx: usize,
) -> Result<CorrelationMatrix<T>, ChannelError> {
    let mut c = ComplexMatrix::<T>::zeros(n_rx, n_rx);
    let mut truncated = false;
    let mut place = |band: usize, value: T, c: &mut ComplexMatrix<T>| {
        if value.is_zero() {
            return;
        }
        if band >= n_rx {
            truncated = true;
            return;
        }
        for p in 0..(n_rx - band) {
            c[(p, p + band)] = Complex::new(value, T::zero());
        }
    };
    if spec.case != CorrelationCase::CaseIII {
        place(spec.lag, spec.rho_l, &mut c);
        place(spec.lag + 1, spec.rho_l1, &mut c);
    }
    // The coefficient rescale caps the diagonal of C C^H but, with two
    // bands present, not its extreme eigenvalue: near window-boundary
    // geometries the off-diagonal rho_l * rho_{l+1} terms push the spectral
    // norm of C above one, which makes I - C C^H indefinite — no stationary
    // unit-power process with that one-step cross-covariance exists. Shrink
    // only the weaker band (the model artifact) until the spectral norm is
    // strictly sub-unit, keeping the dominant correlation intact. A single
    // band never needs this (and must not be touched, to keep the static
    // limit C = I exact).
    let mut spectral_rescaled = false;
    if !spec.rho_l.is_zero() && !spec.rho_l1.is_zero() && spec.lag + 1 < n_rx {
        let limit = T::one() - lit(1e-6);
        let weak_band = if spec.rho_l.abs() >= spec.rho_l1.abs() {
            spec.lag + 1
        } else {
            spec.lag
        };
        let lambda_max = |c: &ComplexMatrix<T>| -> Result<T, NumericsError> {
            max_eigenvalue_psd(&c.matmul(&c.hermitian_transpose())?)
        };
        if lambda_max(&c)? > limit {
            let scaled = |t: T| {
                let mut ct = c.clone();
                for p in 0..(n_rx - weak_band) {
                    ct[(p, p + weak_band)] = ct[(p, p + weak_band)].scale(t);
                }
                ct
            };
            let mut lo = T::zero();
            let mut hi = T::one();
            for _ in 0..60 {
                let mid = (lo + hi) * lit(0.5);
                if lambda_max(&scaled(mid))? > limit {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            c = scaled(lo);
            spectral_rescaled = true;
        }
    }
    let r_u = ComplexMatrix::<T>::identity(n_rx)
        .sub(&c.matmul(&c.hermitian_transpose())?)?;
    let noise_cov_chol = cholesky_psd(&r_u, lit(1e-9))?;
    Ok(CorrelationMatrix {
        c,
        noise_cov_chol,
        band_truncated: truncated,
        spectral_rescaled,
    })
}

/// Draws one `CN(0,1)` entry (real and imaginary parts i.i.d. N(0, 1/2)).
#[inline]
fn cn01<T: Scalar, R: Rng>(rng: &mut R) -> Complex<T>
where
    StandardNormal: Distribution<T>,
{
    let scale = lit::<T>(0.5).sqrt();
    let re: T = rng.sample(StandardNormal);
    let im: T = rng.sample(StandardNormal);
    Complex::new(re * scale, im * scale)
}

/// Fresh i.i.d. CN(0,1) channel matrix.
pub fn channel_init<T: Scalar, R: Rng>(n_rx: usize, n_tx: usize, rng: &mut R) -> ChannelState<T>
where
    StandardNormal: Distribution<T>,
{
    let h = ComplexMatrix::from_fn(n_rx, n_tx, |_, _| cn01(rng));
    ChannelState { h, block_index: 0 }
}

/// One VAR(1) step: `H_{i+1} = C H_i + L Z` with `Z` i.i.d. CN(0,1) and
/// `L` the Cholesky factor of the innovation covariance.
pub fn channel_step<T: Scalar, R: Rng>(
    state: &ChannelState<T>,
    cm: &CorrelationMatrix<T>,
    rng: &mut R,
) -> Result<ChannelState<T>, ChannelError>
where
    StandardNormal: Distribution<T>,
{
    let z = ComplexMatrix::from_fn(state.h.rows(), state.h.cols(), |_, _| cn01(rng));
    let h = cm.c.matmul(&state.h)?.add(&cm.noise_cov_chol.matmul(&z)?)?;
    Ok(ChannelState {
        h,
        block_index: state.block_index + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;
    use rand::SeedableRng;

    fn table1_cfg() -> SystemConfig<f64> {
        SystemConfig {
            n_tx: 4,
            n_rx: 4,
            codeword_len: 4,
            tx_power: 1.0,
            noise_var: 4.0 / 10f64.powf(0.5),
            symbol_duration: 50e-6,
            carrier_freq: 3e9,
            antenna_spacing: 0.05,
            scatter_decay: 0.1,
            block_len: 1,
        }
    }

    #[test]
    fn stationary_array_is_case_ii_lag_zero() {
        let cfg = table1_cfg();
        let mob = MobilityState::new(0.0, 0.3).unwrap();
        let spec = classify_correlation(&mob, &cfg).unwrap();
        assert_eq!(spec.case, CorrelationCase::CaseII);
        assert_eq!(spec.lag, 0);
    }

    #[test]
    fn moderate_speed_is_case_i() {
        // v=100, theta=0, tau=2e-4, D=0.05, lambda~0.1: d_0=0.02, d_1=0.03.
        let cfg = table1_cfg();
        let mob = MobilityState::new(100.0, 0.0).unwrap();
        let spec = classify_correlation(&mob, &cfg).unwrap();
        assert_eq!(spec.case, CorrelationCase::CaseI);
        assert_eq!(spec.lag, 0);
    }

    #[test]
    fn oblique_fast_motion_is_case_iii() {
        // v=300, theta=pi/3: d_0=0.06, d_1~0.0557, both >= 0.05.
        let cfg = table1_cfg();
        let mob = MobilityState::new(300.0, std::f64::consts::FRAC_PI_3).unwrap();
        let spec = classify_correlation(&mob, &cfg).unwrap();
        assert_eq!(spec.case, CorrelationCase::CaseIII);
    }

    #[test]
    fn closed_form_lag_matches_scan() {
        // Case I: l = floor(v tau cos theta / D); Case II: l = round(...).
        let cfg = table1_cfg();
        for i in 0..=400 {
            let v = 0.5 * i as f64;
            for &theta in &[0.0, 0.1, std::f64::consts::FRAC_PI_8] {
                let mob = MobilityState::new(v, theta).unwrap();
                let spec = classify_correlation(&mob, &cfg).unwrap();
                let x = v * cfg.block_duration() * theta.cos() / cfg.antenna_spacing;
                match spec.case {
                    CorrelationCase::CaseI => {
                        assert_eq!(spec.lag, x.floor() as usize, "v={v} theta={theta}")
                    }
                    CorrelationCase::CaseII => {
                        assert_eq!(spec.lag, x.round() as usize, "v={v} theta={theta}")
                    }
                    CorrelationCase::CaseIII => {}
                }
            }
        }
    }

    #[test]
    fn rejects_sub_half_wavelength_spacing() {
        let mut cfg = table1_cfg();
        cfg.antenna_spacing = 0.04;
        let mob = MobilityState::new(10.0, 0.0).unwrap();
        assert!(matches!(
            classify_correlation(&mob, &cfg),
            Err(ChannelError::SpacingBelowHalfWavelength { .. })
        ));
    }

    #[test]
    fn isotropic_coefficient_examples() {
        let cfg = table1_cfg();
        let still = MobilityState::new(0.0, 0.0).unwrap();
        assert_eq!(correlation_coefficient_isotropic(0, &still, &cfg), 1.0);

        let mob = MobilityState::new(100.0, 0.0).unwrap();
        let r0 = correlation_coefficient_isotropic(0, &mob, &cfg);
        let r1 = correlation_coefficient_isotropic(1, &mob, &cfg);
        // Roughly J0(0.4 pi) e^{-0.002} and J0(0.6 pi) e^{-0.002}.
        let lambda = cfg.wavelength();
        let direct = bessel_j0(2.0 * std::f64::consts::PI * 0.02 / lambda) * (-0.002f64).exp();
        assert!((r0 - direct).abs() < 1e-12);
        assert!((r0 - 0.641).abs() < 2e-3);
        assert!((r1 - 0.290).abs() < 2e-3);
        // Cross-check against the theta=0 form J0(2 pi (v tau - kD)/lambda).
        let alt = bessel_j0(2.0 * std::f64::consts::PI * (0.02 - 0.05) / lambda) * (-0.002f64).exp();
        assert!((r1 - alt).abs() < 1e-12);
    }

    #[test]
    fn general_reduces_to_isotropic_at_zero_width() {
        let cfg = table1_cfg();
        for i in 0..100 {
            let v = 2.0 * i as f64;
            let theta = -1.5 + 0.03 * i as f64;
            let mob = MobilityState::new(v, theta).unwrap();
            let scat = ScatteringSpec {
                aoa_width: 0.0,
                aoa_mean: 0.5,
                angle_alpha: 0.2,
                angle_beta: 0.2 + theta,
            };
            for k in 0..3 {
                let g = correlation_coefficient_general(k, &mob, &scat, &cfg).unwrap();
                let iso = correlation_coefficient_isotropic(k, &mob, &cfg);
                assert!((g.re - iso).abs() < 1e-10, "v={v} k={k}: {} vs {iso}", g.re);
                assert!(g.im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn general_at_zero_displacement_is_one() {
        let cfg = table1_cfg();
        let mob = MobilityState::new(0.0, 0.0).unwrap();
        let scat = ScatteringSpec {
            aoa_width: 3.0,
            aoa_mean: 0.7,
            angle_alpha: 0.1,
            angle_beta: 0.1,
        };
        let g = correlation_coefficient_general(0, &mob, &scat, &cfg).unwrap();
        assert!((g.re - 1.0).abs() < 1e-12);
        assert!(g.im.abs() < 1e-12);
    }

    #[test]
    fn safeguard_rescales_only_above_limit() {
        let base = CorrelationSpec {
            case: CorrelationCase::CaseI,
            lag: 0,
            rho_l: 0.6,
            rho_l1: 0.6,
            safeguard_applied: false,
        };
        let out = psd_safeguard(base);
        assert_eq!(out, base);

        let unit = psd_safeguard(CorrelationSpec {
            rho_l: 1.0,
            rho_l1: 0.0,
            ..base
        });
        assert!(unit.safeguard_applied);
        assert!((unit.rho_l - (1.0 - 1e-6f64).sqrt()).abs() < 1e-12);

        let boundary = psd_safeguard(CorrelationSpec {
            rho_l: -0.3027,
            rho_l1: 0.995,
            ..base
        });
        let s = 0.3027f64.powi(2) + 0.995f64.powi(2);
        let scale = ((1.0 - 1e-6) / s).sqrt();
        assert!((scale - 0.9614).abs() < 1e-3);
        assert!((boundary.rho_l - (-0.3027 * scale)).abs() < 1e-12);
        assert!((boundary.rho_l1 - 0.995 * scale).abs() < 1e-12);
    }

    #[test]
    fn boundary_geometry_shrinks_spectral_norm() {
        // Near-static mobility with the second tap at the edge of the
        // half-wavelength window: both bands significant, spectral norm of
        // the raw band matrix above one even after the coefficient rescale.
        let cfg = table1_cfg();
        let mob = MobilityState::new(5.0, 0.0).unwrap();
        let spec = correlation_spec(&mob, &cfg).unwrap();
        assert_eq!(spec.case, CorrelationCase::CaseI);
        assert!(spec.safeguard_applied);
        let cm = build_correlation_matrix(&spec, cfg.n_rx).unwrap();
        assert!(cm.spectral_rescaled);
        // The dominant band survives untouched; only the weak band shrinks.
        assert!((cm.c[(0, 0)].re - spec.rho_l).abs() < 1e-12);
        assert!(cm.c[(0, 1)].re.abs() < spec.rho_l1.abs());
        // Unit-power stationarity is restored exactly: iterating the
        // covariance recursion from I stays at I.
        let cov = cm
            .noise_cov_chol
            .matmul(&cm.noise_cov_chol.hermitian_transpose())
            .unwrap();
        let mut sigma = ComplexMatrix::<f64>::identity(cfg.n_rx);
        for _ in 0..200 {
            sigma = cm
                .c
                .matmul(&sigma)
                .unwrap()
                .matmul(&cm.c.hermitian_transpose())
                .unwrap()
                .add(&cov)
                .unwrap();
        }
        assert!(
            sigma
                .sub(&ComplexMatrix::identity(cfg.n_rx))
                .unwrap()
                .frobenius_norm()
                < 1e-8
        );
        // Well-posed two-band geometries are untouched.
        let mild = correlation_spec(&MobilityState::new(100.0, 0.0).unwrap(), &cfg).unwrap();
        let cm_mild = build_correlation_matrix(&mild, cfg.n_rx).unwrap();
        assert!(!cm_mild.spectral_rescaled);
        assert!((cm_mild.c[(0, 0)].re - mild.rho_l).abs() < 1e-15);
    }

    #[test]
    fn correlation_matrix_band_structure() {
        let spec = CorrelationSpec {
            case: CorrelationCase::CaseII,
            lag: 1,
            rho_l: 0.9,
            rho_l1: 0.0,
            safeguard_applied: false,
        };
        let cm = build_correlation_matrix(&spec, 4).unwrap();
        for p in 0..4 {
            for q in 0..4 {
                let expected = if q == p + 1 { 0.9 } else { 0.0 };
                assert_eq!(cm.c[(p, q)].re, expected);
                assert_eq!(cm.c[(p, q)].im, 0.0);
            }
        }
        // R_u = diag(0.19, 0.19, 0.19, 1).
        let l = &cm.noise_cov_chol;
        let ru = l.matmul(&l.hermitian_transpose()).unwrap();
        for i in 0..4 {
            let expected: f64 = if i < 3 { 0.19 } else { 1.0 };
            assert!((ru[(i, i)].re - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn static_channel_has_zero_innovation() {
        let spec = CorrelationSpec {
            case: CorrelationCase::CaseII,
            lag: 0,
            rho_l: 1.0,
            rho_l1: 0.0,
            safeguard_applied: false,
        };
        let cm = build_correlation_matrix(&spec, 4).unwrap();
        assert!(cm.noise_cov_chol.frobenius_norm() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s0 = channel_init::<f64, _>(4, 4, &mut rng);
        let s1 = channel_step(&s0, &cm, &mut rng).unwrap();
        assert!(s1.h.sub(&s0.h).unwrap().frobenius_norm() < 1e-12);
        assert_eq!(s1.block_index, 1);
    }

    #[test]
    fn case_iii_renews_the_channel() {
        let spec = CorrelationSpec {
            case: CorrelationCase::CaseIII,
            lag: 0,
            rho_l: 0.0,
            rho_l1: 0.0,
            safeguard_applied: false,
        };
        let cm = build_correlation_matrix(&spec, 4).unwrap();
        assert!(cm.c.frobenius_norm() == 0.0);
        assert!(cm
            .noise_cov_chol
            .sub(&ComplexMatrix::identity(4))
            .unwrap()
            .frobenius_norm()
            < 1e-12);
    }

    #[test]
    fn channel_init_is_deterministic_per_seed() {
        let mut a = ChaCha8Rng::seed_from_u64(42);
        let mut b = ChaCha8Rng::seed_from_u64(42);
        let sa = channel_init::<f64, _>(4, 4, &mut a);
        let sb = channel_init::<f64, _>(4, 4, &mut b);
        assert_eq!(sa.h, sb.h);
    }

    #[test]
    fn low_speed_limit_recovers_identity_correlation() {
        let cfg = table1_cfg();
        let mob = MobilityState::new(0.0, 0.0).unwrap();
        let spec = correlation_spec(&mob, &cfg).unwrap();
        assert_eq!(spec.case, CorrelationCase::CaseII);
        assert_eq!(spec.lag, 0);
        assert_eq!(spec.rho_l, 1.0);
        let cm = build_correlation_matrix(&spec, 4).unwrap();
        assert!(cm
            .c
            .sub(&ComplexMatrix::identity(4))
            .unwrap()
            .frobenius_norm()
            < 1e-9);
    }

    #[test]
    fn coherence_speed_limit_matches_footnote() {
        // Table I footnote: v < 211.5 m/s for T t_s = 200 us at 3 GHz.
        let cfg = table1_cfg();
        assert!((cfg.coherence_speed_limit() - 211.4).abs() < 0.5);
    }
}
