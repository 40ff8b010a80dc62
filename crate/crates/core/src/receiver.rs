//! Differential decoders: the conventional trace correlator, the
//! correlation-aware decoder, the row-sliced equivalent form, the MMSE
//! estimator interpretation and the quadratic-receiver metric used by the
//! bound derivations.

use thiserror::Error;

use crate::channel::{CorrelationMatrix, SystemConfig};
use crate::codebook::Codebook;
use crate::numerics::{ComplexMatrix, NumericsError};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ReceiverError {
    #[error("slicing lag {lag} must be smaller than the receive antenna count {n_rx}")]
    LagTooLarge { lag: usize, n_rx: usize },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Decoder decision: winning symbol index plus the full metric vector.
/// Ties break towards the lowest index.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult<T> {
    pub symbol_index: usize,
    pub metric: T,
    pub metrics_all: Vec<T>,
}

fn argmax_metrics<T: Scalar>(metrics: Vec<T>) -> DecodeResult<T> {
    let mut best = 0;
    for (k, &m) in metrics.iter().enumerate().skip(1) {
        if m > metrics[best] {
            best = k;
        }
    }
    DecodeResult {
        symbol_index: best,
        metric: metrics[best],
        metrics_all: metrics,
    }
}

/// `Re Tr{G A}` for each group element, where `A` is precomputed.
fn trace_metrics<T: Scalar>(a: &ComplexMatrix<T>, cb: &Codebook<T>) -> Vec<T> {
    let n = a.rows();
    cb.generators()
        .iter()
        .map(|g| {
            let mut acc = T::zero();
            for i in 0..n {
                for j in 0..n {
                    let p = g[(i, j)] * a[(j, i)];
                    acc += p.re;
                }
            }
            acc
        })
        .collect()
}

/// Conventional ML differential decoder:
/// `argmax_G Re Tr{G Y_{i+1}^H Y_i}`.
pub fn decode_conventional<T: Scalar>(
    y_prev: &ComplexMatrix<T>,
    y_curr: &ComplexMatrix<T>,
    cb: &Codebook<T>,
) -> Result<DecodeResult<T>, ReceiverError> {
    let a = y_curr.hermitian_transpose().matmul(y_prev)?;
    Ok(argmax_metrics(trace_metrics(&a, cb)))
}

/// Correlation-aware decoder: `argmax_G Re Tr{G Y_{i+1}^H C Y_i}`.
///
/// Coincides with the conventional decoder when `C = I`.
pub fn decode_proposed<T: Scalar>(
    y_prev: &ComplexMatrix<T>,
    y_curr: &ComplexMatrix<T>,
    cm: &CorrelationMatrix<T>,
    cb: &Codebook<T>,
) -> Result<DecodeResult<T>, ReceiverError> {
    let a = y_curr
        .hermitian_transpose()
        .matmul(&cm.c.matmul(y_prev)?)?;
    Ok(argmax_metrics(trace_metrics(&a, cb)))
}

/// Row-sliced decoder: conventional decoding applied to rows
/// `lag+1..N_R` of `Y_i` against rows `1..N_R-lag` of `Y_{i+1}`.
///
/// For a single-superdiagonal `C` with positive coefficient this makes the
/// same decisions as the correlation-aware decoder.
pub fn decode_sliced<T: Scalar>(
    y_prev: &ComplexMatrix<T>,
    y_curr: &ComplexMatrix<T>,
    lag: usize,
    cb: &Codebook<T>,
) -> Result<DecodeResult<T>, ReceiverError> {
    let n_rx = y_prev.rows();
    if lag >= n_rx {
        return Err(ReceiverError::LagTooLarge { lag, n_rx });
    }
    let prev = y_prev.row_slice(lag, n_rx);
    let curr = y_curr.row_slice(0, n_rx - lag);
    decode_conventional(&prev, &curr, cb)
}

/// MMSE estimate of `H_i X_{i+1}` from the second observation:
/// `(sqrt(P) N_T / (P N_T + sigma_n^2)) C^H Y_{i+1}`.
pub fn mmse_estimate<T: Scalar>(
    y_curr: &ComplexMatrix<T>,
    cm: &CorrelationMatrix<T>,
    cfg: &SystemConfig<T>,
) -> Result<ComplexMatrix<T>, ReceiverError> {
    let p = cfg.tx_power;
    let nt = T::from_usize(cfg.n_tx).expect("small count");
    let coeff = p.sqrt() * nt / (p * nt + cfg.noise_var);
    Ok(cm.c.hermitian_transpose().matmul(y_curr)?.scale_real(coeff))
}

/// Quadratic-receiver metric `Tr{Ybar Xbar^H Xbar Ybar^H}` with
/// `Xbar = [X_i, X_i G]` and `Ybar = [C Y_i, Y_{i+1}]`. Ranking group
/// elements by this metric reproduces the correlation-aware decoder's
/// ranking up to a G-independent additive constant.
pub fn metric_quadratic<T: Scalar>(
    y_prev: &ComplexMatrix<T>,
    y_curr: &ComplexMatrix<T>,
    cm: &CorrelationMatrix<T>,
    x_i: &ComplexMatrix<T>,
    g: &ComplexMatrix<T>,
) -> Result<T, ReceiverError> {
    let x_bar = x_i.hcat(&x_i.matmul(g)?)?;
    let y_bar = cm.c.matmul(y_prev)?.hcat(y_curr)?;
    let inner = x_bar.hermitian_transpose().matmul(&x_bar)?;
    let m = y_bar.matmul(&inner)?.matmul(&y_bar.hermitian_transpose())?;
    Ok(m.trace()?.re)
}

/// Residual covariance of `W = Y_{i+1} - C Y_i G`:
/// `R_w = sigma_n^2 C C^H + N_T P (I - C C^H) + sigma_n^2 I`.
pub fn residual_covariance<T: Scalar>(
    cm: &CorrelationMatrix<T>,
    cfg: &SystemConfig<T>,
) -> Result<ComplexMatrix<T>, ReceiverError> {
    let n_rx = cm.c.rows();
    let nt_p = T::from_usize(cfg.n_tx).expect("small count") * cfg.tx_power;
    let cch = cm.c.matmul(&cm.c.hermitian_transpose())?;
    let eye = ComplexMatrix::<T>::identity(n_rx);
    let r = cch
        .scale_real(cfg.noise_var)
        .add(&eye.sub(&cch)?.scale_real(nt_p))?
        .add(&eye.scale_real(cfg.noise_var))?;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{build_correlation_matrix, CorrelationCase, CorrelationSpec};
    use crate::codebook::make_cyclic_codebook;
    use num_complex::Complex64;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    type M = ComplexMatrix<f64>;

    fn cb4() -> Codebook<f64> {
        make_cyclic_codebook(4, 4, &[1, 1, 3, 3]).unwrap()
    }

    fn cfg() -> SystemConfig<f64> {
        SystemConfig {
            n_tx: 4,
            n_rx: 4,
            codeword_len: 4,
            tx_power: 1.0,
            noise_var: 0.4,
            symbol_duration: 50e-6,
            carrier_freq: 3e9,
            antenna_spacing: 0.05,
            scatter_decay: 0.1,
            block_len: 1,
        }
    }

    fn spec_band(lag: usize, rho: f64) -> CorrelationSpec<f64> {
        CorrelationSpec {
            case: CorrelationCase::CaseII,
            lag,
            rho_l: rho,
            rho_l1: 0.0,
            safeguard_applied: false,
        }
    }

    fn random_matrix(rng: &mut StdRng, rows: usize, cols: usize) -> M {
        M::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn noiseless_static_channel_round_trips_every_symbol() {
        let cb = cb4();
        let mut rng = StdRng::seed_from_u64(3);
        let h = random_matrix(&mut rng, 4, 4);
        for k in 0..4 {
            let x_prev = cb.initial().clone();
            let x_curr = x_prev.matmul(cb.generator(k)).unwrap();
            let y_prev = h.matmul(&x_prev).unwrap();
            let y_curr = h.matmul(&x_curr).unwrap();
            let out = decode_conventional(&y_prev, &y_curr, &cb).unwrap();
            assert_eq!(out.symbol_index, k);
        }
    }

    #[test]
    fn zero_observation_ties_to_index_zero() {
        let cb = cb4();
        let y_prev = M::zeros(4, 4);
        let y_curr = M::zeros(4, 4);
        let out = decode_conventional(&y_prev, &y_curr, &cb).unwrap();
        assert_eq!(out.symbol_index, 0);
        assert!(out.metrics_all.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn conventional_matches_direct_norm_ranking() {
        // argmax Re Tr{G Yc^H Yp} equals argmin ||Yc - Yp G||_F for unitary G.
        let cb = cb4();
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..200 {
            let y_prev = random_matrix(&mut rng, 4, 4);
            let y_curr = random_matrix(&mut rng, 4, 4);
            let out = decode_conventional(&y_prev, &y_curr, &cb).unwrap();
            let by_norm = (0..4)
                .min_by(|&a, &b| {
                    let da = y_curr
                        .sub(&y_prev.matmul(cb.generator(a)).unwrap())
                        .unwrap()
                        .frobenius_norm();
                    let db = y_curr
                        .sub(&y_prev.matmul(cb.generator(b)).unwrap())
                        .unwrap()
                        .frobenius_norm();
                    da.partial_cmp(&db).unwrap()
                })
                .unwrap();
            assert_eq!(out.symbol_index, by_norm);
        }
    }

    #[test]
    fn proposed_with_identity_c_reduces_to_conventional() {
        let cb = cb4();
        let cm = build_correlation_matrix(&spec_band(0, 1.0), 4).unwrap();
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..500 {
            let y_prev = random_matrix(&mut rng, 4, 4);
            let y_curr = random_matrix(&mut rng, 4, 4);
            let a = decode_proposed(&y_prev, &y_curr, &cm, &cb).unwrap();
            let b = decode_conventional(&y_prev, &y_curr, &cb).unwrap();
            assert_eq!(a.symbol_index, b.symbol_index);
        }
    }

    #[test]
    fn proposed_with_zero_c_ties_to_zero() {
        let cb = cb4();
        let cm = build_correlation_matrix(
            &CorrelationSpec {
                case: CorrelationCase::CaseIII,
                lag: 0,
                rho_l: 0.0,
                rho_l1: 0.0,
                safeguard_applied: false,
            },
            4,
        )
        .unwrap();
        let mut rng = StdRng::seed_from_u64(9);
        let y_prev = random_matrix(&mut rng, 4, 4);
        let y_curr = random_matrix(&mut rng, 4, 4);
        let out = decode_proposed(&y_prev, &y_curr, &cm, &cb).unwrap();
        assert_eq!(out.symbol_index, 0);
        assert!(out.metrics_all.iter().all(|&m| m.abs() < 1e-12));
    }

    #[test]
    fn sliced_equals_conventional_at_lag_zero() {
        let cb = cb4();
        let mut rng = StdRng::seed_from_u64(13);
        for _ in 0..100 {
            let y_prev = random_matrix(&mut rng, 4, 4);
            let y_curr = random_matrix(&mut rng, 4, 4);
            let a = decode_sliced(&y_prev, &y_curr, 0, &cb).unwrap();
            let b = decode_conventional(&y_prev, &y_curr, &cb).unwrap();
            assert_eq!(a.symbol_index, b.symbol_index);
            assert!((a.metric - b.metric).abs() < 1e-12);
        }
    }

    #[test]
    fn sliced_matches_proposed_for_positive_band() {
        // Theorem-level equivalence for a single positive superdiagonal.
        let cb = cb4();
        let cm = build_correlation_matrix(&spec_band(1, 0.9), 4).unwrap();
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..2000 {
            let y_prev = random_matrix(&mut rng, 4, 4);
            let y_curr = random_matrix(&mut rng, 4, 4);
            let a = decode_proposed(&y_prev, &y_curr, &cm, &cb).unwrap();
            let b = decode_sliced(&y_prev, &y_curr, 1, &cb).unwrap();
            assert_eq!(a.symbol_index, b.symbol_index);
        }
    }

    #[test]
    fn sliced_single_row_is_well_formed() {
        let cb = cb4();
        let mut rng = StdRng::seed_from_u64(19);
        let y_prev = random_matrix(&mut rng, 4, 4);
        let y_curr = random_matrix(&mut rng, 4, 4);
        let out = decode_sliced(&y_prev, &y_curr, 3, &cb).unwrap();
        assert!(out.symbol_index < 4);
        assert!(matches!(
            decode_sliced(&y_prev, &y_curr, 4, &cb),
            Err(ReceiverError::LagTooLarge { .. })
        ));
    }

    #[test]
    fn metric_scaling_invariance_in_c() {
        let cb = cb4();
        let cm1 = build_correlation_matrix(&spec_band(1, 0.3), 4).unwrap();
        let cm2 = build_correlation_matrix(&spec_band(1, 0.6), 4).unwrap();
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..200 {
            let y_prev = random_matrix(&mut rng, 4, 4);
            let y_curr = random_matrix(&mut rng, 4, 4);
            let a = decode_proposed(&y_prev, &y_curr, &cm1, &cb).unwrap();
            let b = decode_proposed(&y_prev, &y_curr, &cm2, &cb).unwrap();
            assert_eq!(a.symbol_index, b.symbol_index);
        }
    }

    #[test]
    fn mmse_estimator_cases() {
        let cb = cb4();
        let _ = &cb;
        let cfg = cfg();
        let mut rng = StdRng::seed_from_u64(29);
        let y = random_matrix(&mut rng, 4, 4);

        let zero_cm = build_correlation_matrix(
            &CorrelationSpec {
                case: CorrelationCase::CaseIII,
                lag: 0,
                rho_l: 0.0,
                rho_l1: 0.0,
                safeguard_applied: false,
            },
            4,
        )
        .unwrap();
        assert!(mmse_estimate(&y, &zero_cm, &cfg).unwrap().frobenius_norm() < 1e-15);

        // sigma -> 0 with C = I: estimate -> Y / sqrt(P).
        let mut low_noise = cfg.clone();
        low_noise.noise_var = 1e-15;
        let id_cm = build_correlation_matrix(&spec_band(0, 1.0), 4).unwrap();
        let est = mmse_estimate(&y, &id_cm, &low_noise).unwrap();
        let expected = y.scale_real(1.0 / low_noise.tx_power.sqrt());
        assert!(est.sub(&expected).unwrap().frobenius_norm() < 1e-9);

        // Linearity.
        let cm = build_correlation_matrix(&spec_band(1, 0.9), 4).unwrap();
        let e1 = mmse_estimate(&y, &cm, &cfg).unwrap();
        let e2 = mmse_estimate(&y.scale_real(2.0), &cm, &cfg).unwrap();
        assert!(e2.sub(&e1.scale_real(2.0)).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn quadratic_metric_block_structure() {
        // Xbar^H Xbar = N_T [[I, G], [G^H, I]].
        let cb = cb4();
        let x = cb.initial().clone();
        let g = cb.generator(1);
        let x_bar = x.hcat(&x.matmul(g).unwrap()).unwrap();
        let inner = x_bar.hermitian_transpose().matmul(&x_bar).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let nt = 4.0;
                let eye = if r == c { 1.0 } else { 0.0 };
                assert!((inner[(r, c)] - Complex64::new(nt * eye, 0.0)).norm() < 1e-12);
                assert!((inner[(r, c + 4)] - g[(r, c)].scale(nt)).norm() < 1e-12);
                assert!((inner[(r + 4, c)] - g[(c, r)].conj().scale(nt)).norm() < 1e-12);
                assert!((inner[(r + 4, c + 4)] - Complex64::new(nt * eye, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn quadratic_metric_ranks_like_proposed() {
        let cb = cb4();
        let cm = build_correlation_matrix(&spec_band(1, 0.9), 4).unwrap();
        let mut rng = StdRng::seed_from_u64(31);
        for _ in 0..300 {
            let y_prev = random_matrix(&mut rng, 4, 4);
            let y_curr = random_matrix(&mut rng, 4, 4);
            let x_i = cb.initial().clone();
            let by_quadratic = (0..4)
                .max_by(|&a, &b| {
                    let ma =
                        metric_quadratic(&y_prev, &y_curr, &cm, &x_i, cb.generator(a)).unwrap();
                    let mb =
                        metric_quadratic(&y_prev, &y_curr, &cm, &x_i, cb.generator(b)).unwrap();
                    ma.partial_cmp(&mb).unwrap()
                })
                .unwrap();
            let direct = decode_proposed(&y_prev, &y_curr, &cm, &cb).unwrap();
            assert_eq!(by_quadratic, direct.symbol_index);
        }
    }

    #[test]
    fn quadratic_metric_constant_when_c_zero() {
        let cb = cb4();
        let cm = build_correlation_matrix(
            &CorrelationSpec {
                case: CorrelationCase::CaseIII,
                lag: 0,
                rho_l: 0.0,
                rho_l1: 0.0,
                safeguard_applied: false,
            },
            4,
        )
        .unwrap();
        let mut rng = StdRng::seed_from_u64(37);
        let y_prev = random_matrix(&mut rng, 4, 4);
        let y_curr = random_matrix(&mut rng, 4, 4);
        let x_i = cb.initial().clone();
        let m0 = metric_quadratic(&y_prev, &y_curr, &cm, &x_i, cb.generator(0)).unwrap();
        for k in 1..4 {
            let mk = metric_quadratic(&y_prev, &y_curr, &cm, &x_i, cb.generator(k)).unwrap();
            assert!((mk - m0).abs() < 1e-10);
        }
    }

    #[test]
    fn residual_covariance_closed_forms() {
        let cfg = cfg();
        let id_cm = build_correlation_matrix(&spec_band(0, 1.0), 4).unwrap();
        let r = residual_covariance(&id_cm, &cfg).unwrap();
        let expected = M::identity(4).scale_real(2.0 * cfg.noise_var);
        assert!(r.sub(&expected).unwrap().frobenius_norm() < 1e-12);

        let zero_cm = build_correlation_matrix(
            &CorrelationSpec {
                case: CorrelationCase::CaseIII,
                lag: 0,
                rho_l: 0.0,
                rho_l1: 0.0,
                safeguard_applied: false,
            },
            4,
        )
        .unwrap();
        let r = residual_covariance(&zero_cm, &cfg).unwrap();
        let expected = M::identity(4).scale_real(4.0 * cfg.tx_power + cfg.noise_var);
        assert!(r.sub(&expected).unwrap().frobenius_norm() < 1e-12);
    }
}
