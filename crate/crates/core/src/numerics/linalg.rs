//! Cholesky factorization with a PSD safeguard and LU determinants.

use num_complex::Complex;

use super::{ComplexMatrix, NumericsError};
use crate::scalar::{lit, Scalar};

/// Cholesky factor of a Hermitian positive semidefinite matrix.
///
/// Pivots in `[-tol, 0]` are clamped to zero (with the rest of the column
/// zeroed), so numerically semidefinite inputs such as `I - C C^H` with
/// a unit-modulus correlation still factor. A pivot below `-tol` is a
/// genuine violation and reported as `NotPsd`.
pub fn cholesky_psd<T: Scalar>(
    a: &ComplexMatrix<T>,
    tol: T,
) -> Result<ComplexMatrix<T>, NumericsError> {
    if !a.is_square() {
        return Err(NumericsError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let scale = T::one() + a.max_abs();
    if a.hermitian_deviation()? > tol * scale {
        return Err(NumericsError::NotHermitian {
            tol: tol.to_f64().unwrap_or(f64::NAN),
        });
    }
    let n = a.rows();
    let mut l = ComplexMatrix::<T>::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d = d - l[(j, k)].norm_sqr();
        }
        if d < -tol * scale {
            return Err(NumericsError::NotPsd {
                pivot: d.to_f64().unwrap_or(f64::NAN),
                index: j,
            });
        }
        if d <= T::zero() {
            // Clamped pivot: the column carries no innovation.
            continue;
        }
        let dsqrt = d.sqrt();
        l[(j, j)] = Complex::new(dsqrt, T::zero());
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s = s - l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / Complex::new(dsqrt, T::zero());
        }
    }
    Ok(l)
}

/// Determinant via LU with partial pivoting. Singular inputs return zero.
pub fn det_complex<T: Scalar>(a: &ComplexMatrix<T>) -> Result<Complex<T>, NumericsError> {
    if !a.is_square() {
        return Err(NumericsError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let mut m = a.clone();
    let mut det = Complex::new(T::one(), T::zero());
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_mag = m[(col, col)].norm();
        for r in (col + 1)..n {
            let mag = m[(r, col)].norm();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = r;
            }
        }
        if pivot_mag.is_zero() {
            return Ok(Complex::new(T::zero(), T::zero()));
        }
        if pivot_row != col {
            for c in 0..n {
                let tmp = m[(col, c)];
                m[(col, c)] = m[(pivot_row, c)];
                m[(pivot_row, c)] = tmp;
            }
            det = -det;
        }
        let pivot = m[(col, col)];
        det = det * pivot;
        for r in (col + 1)..n {
            let factor = m[(r, col)] / pivot;
            for c in col..n {
                let sub = factor * m[(col, c)];
                m[(r, c)] = m[(r, c)] - sub;
            }
        }
    }
    Ok(det)
}

/// `ln det(A)` for Hermitian positive definite `A`, via Cholesky.
///
/// Avoids overflow of the plain determinant at high-SNR bound evaluation.
pub(crate) fn logdet_hermitian_pd<T: Scalar>(
    a: &ComplexMatrix<T>,
) -> Result<T, NumericsError> {
    let l = cholesky_psd(a, lit(1e-9))?;
    let mut logdet = T::zero();
    for i in 0..l.rows() {
        let d = l[(i, i)].re;
        if d <= T::zero() {
            return Err(NumericsError::NotPsd {
                pivot: 0.0,
                index: i,
            });
        }
        logdet += lit::<T>(2.0) * d.ln();
    }
    Ok(logdet)
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Returns `(eigenvalues, V)` with `A = V diag(w) V^H`; the
/// eigenvalues are unsorted. Deterministic and accurate for the small
/// matrices used here.
pub fn eigh<T: Scalar>(a: &ComplexMatrix<T>) -> Result<(Vec<T>, ComplexMatrix<T>), NumericsError> {
    if !a.is_square() {
        return Err(NumericsError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let tol: T = lit(1e-9);
    let scale = T::one() + a.max_abs();
    if a.hermitian_deviation()? > tol * scale {
        return Err(NumericsError::NotHermitian {
            tol: tol.to_f64().unwrap_or(f64::NAN),
        });
    }
    let n = a.rows();
    let mut m = a.clone();
    let mut v = ComplexMatrix::<T>::identity(n);
    let eps: T = lit(1e-14);
    for _sweep in 0..100 {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + m[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= eps * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.norm() <= eps * scale {
                    continue;
                }
                // Rotation in the (p, q) plane zeroing the off-diagonal
                // entry of the 2x2 Hermitian block [[app, apq], [apq^H, aqq]].
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let abs_apq = apq.norm();
                let phase = apq / Complex::new(abs_apq, T::zero());
                let theta = (lit::<T>(2.0) * abs_apq).atan2(aqq - app) * lit(0.5);
                let (c, s) = (theta.cos(), theta.sin());
                // Column rotation: col_p' = c*col_p - s*phase^H*col_q,
                //                  col_q' = s*phase*col_p + c*col_q.
                let cs = Complex::new(c, T::zero());
                let sp = phase.scale(s);
                for r in 0..n {
                    let mp = m[(r, p)];
                    let mq = m[(r, q)];
                    m[(r, p)] = mp * cs - mq * sp.conj();
                    m[(r, q)] = mp * sp + mq * cs;
                    let vp = v[(r, p)];
                    let vq = v[(r, q)];
                    v[(r, p)] = vp * cs - vq * sp.conj();
                    v[(r, q)] = vp * sp + vq * cs;
                }
                for rc in 0..n {
                    let mp = m[(p, rc)];
                    let mq = m[(q, rc)];
                    m[(p, rc)] = mp * cs.conj() - mq * sp;
                    m[(q, rc)] = mp * sp.conj() + mq * cs.conj();
                }
            }
        }
    }
    let w = (0..n).map(|i| m[(i, i)].re).collect();
    Ok((w, v))
}

/// Largest eigenvalue of a Hermitian PSD matrix, by bisecting on the
/// smallest shift `mu` for which `mu I - M` admits a Cholesky
/// factorization. Deterministic and exact to bisection precision.
pub fn max_eigenvalue_psd<T: Scalar>(m: &ComplexMatrix<T>) -> Result<T, NumericsError> {
    if !m.is_square() {
        return Err(NumericsError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    // Gershgorin upper bound.
    let mut hi = T::zero();
    for p in 0..n {
        let mut row = T::zero();
        for q in 0..n {
            row = row + m[(p, q)].norm();
        }
        if row > hi {
            hi = row;
        }
    }
    let mut lo = T::zero();
    for _ in 0..100 {
        let mid = (lo + hi) * lit(0.5);
        let mut shifted = m.scale_real(-T::one());
        for i in 0..n {
            shifted[(i, i)] = shifted[(i, i)] + Complex::new(mid, T::zero());
        }
        if cholesky_psd(&shifted, lit(1e-12)).is_ok() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Factor `F` with `F F^H` equal to the projection of a Hermitian matrix
/// onto the PSD cone (negative eigenvalues zeroed). Used when a model
/// covariance falls slightly outside the cone; for PSD input it is an
/// exact factorization.
pub fn psd_projection_factor<T: Scalar>(
    a: &ComplexMatrix<T>,
) -> Result<ComplexMatrix<T>, NumericsError> {
    let (w, v) = eigh(a)?;
    let n = a.rows();
    Ok(ComplexMatrix::from_fn(n, n, |r, c| {
        let lam = if w[c] > T::zero() { w[c].sqrt() } else { T::zero() };
        v[(r, c)].scale(lam)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    type M = ComplexMatrix<f64>;

    #[test]
    fn cholesky_of_identity() {
        let l = cholesky_psd(&M::identity(4), 1e-9).unwrap();
        assert!(l.sub(&M::identity(4)).unwrap().frobenius_norm() < 1e-14);
    }

    #[test]
    fn cholesky_of_diagonal() {
        let a = M::diag(&[Complex64::new(4.0, 0.0), Complex64::new(1.0, 0.0)]);
        let l = cholesky_psd(&a, 1e-9).unwrap();
        assert!((l[(0, 0)].re - 2.0).abs() < 1e-15);
        assert!((l[(1, 1)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cholesky_reconstructs_banded_innovation_covariance() {
        // I - C C^H for C with 0.9 on the first superdiagonal, N_R = 4.
        let mut c = M::zeros(4, 4);
        for i in 0..3 {
            c[(i, i + 1)] = Complex64::new(0.9, 0.0);
        }
        let a = M::identity(4)
            .sub(&c.matmul(&c.hermitian_transpose()).unwrap())
            .unwrap();
        let l = cholesky_psd(&a, 1e-9).unwrap();
        let recon = l.matmul(&l.hermitian_transpose()).unwrap();
        assert!(recon.sub(&a).unwrap().frobenius_norm() < 1e-10);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = M::diag(&[Complex64::new(1.0, 0.0), Complex64::new(-0.5, 0.0)]);
        assert!(matches!(
            cholesky_psd(&a, 1e-9),
            Err(NumericsError::NotPsd { .. })
        ));
    }

    #[test]
    fn det_of_identity_and_diagonal() {
        assert_eq!(det_complex(&M::identity(4)).unwrap(), Complex64::new(1.0, 0.0));
        let d = M::diag(&[
            Complex64::new(2.0, 0.0),
            Complex64::new(3.0, 0.0),
            Complex64::new(4.0, 0.0),
            Complex64::new(5.0, 0.0),
        ]);
        assert!((det_complex(&d).unwrap().re - 120.0).abs() < 1e-12);
    }

    #[test]
    fn det_of_random_unitary_has_unit_magnitude() {
        // Random diagonal-phases times Hadamard/2 is unitary.
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let h = [
                [1.0, 1.0, 1.0, 1.0],
                [1.0, -1.0, 1.0, -1.0],
                [1.0, 1.0, -1.0, -1.0],
                [1.0, -1.0, -1.0, 1.0],
            ];
            let had = M::from_fn(4, 4, |r, c| Complex64::new(h[r][c] / 2.0, 0.0));
            let phases = M::diag(&std::array::from_fn::<_, 4, _>(|_| {
                Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
            }));
            let u = phases.matmul(&had).unwrap();
            let det = det_complex(&u).unwrap();
            assert!((det.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn eigh_reconstructs_random_hermitian() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..50 {
            let b = M::from_fn(4, 4, |_, _| {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let a = b.add(&b.hermitian_transpose()).unwrap();
            let (w, v) = eigh(&a).unwrap();
            let recon = v
                .matmul(&M::diag(&w.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>()))
                .unwrap()
                .matmul(&v.hermitian_transpose())
                .unwrap();
            assert!(recon.sub(&a).unwrap().frobenius_norm() < 1e-10);
            let gram = v.matmul(&v.hermitian_transpose()).unwrap();
            assert!(gram.sub(&M::identity(4)).unwrap().frobenius_norm() < 1e-10);
        }
    }

    #[test]
    fn psd_projection_exact_on_psd_input() {
        let mut rng = StdRng::seed_from_u64(12);
        let b = M::from_fn(4, 4, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let a = b.matmul(&b.hermitian_transpose()).unwrap();
        let f = psd_projection_factor(&a).unwrap();
        let recon = f.matmul(&f.hermitian_transpose()).unwrap();
        assert!(recon.sub(&a).unwrap().frobenius_norm() < 1e-10 * a.frobenius_norm());
    }

    #[test]
    fn psd_projection_zeroes_negative_modes() {
        let a = M::diag(&[Complex64::new(2.0, 0.0), Complex64::new(-0.5, 0.0)]);
        let f = psd_projection_factor(&a).unwrap();
        let recon = f.matmul(&f.hermitian_transpose()).unwrap();
        assert!((recon[(0, 0)].re - 2.0).abs() < 1e-12);
        assert!(recon[(1, 1)].norm() < 1e-12);
    }

    #[test]
    fn det_of_singular_is_zero() {
        let mut a = M::zeros(3, 3);
        a[(0, 0)] = Complex64::new(1.0, 0.0);
        a[(1, 0)] = Complex64::new(2.0, 0.0);
        assert_eq!(det_complex(&a).unwrap(), Complex64::new(0.0, 0.0));
    }
}
