//! Unitary differential space-time codebooks: Hadamard initial matrix plus
//! a diagonal cyclic unitary group, and the differential encoder.

use num_complex::Complex;
use thiserror::Error;

use crate::numerics::{det_complex, ComplexMatrix, NumericsError};
use crate::scalar::{lit, Scalar};

/// Encode steps between exact-group renormalizations of a chain.
const RENORM_INTERVAL: u64 = 1024;

#[derive(Debug, Error)]
pub enum CodebookError {
    #[error("initial matrix size {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("expected {expected} generator exponents, got {got}")]
    ExponentCount { expected: usize, got: usize },
    #[error("cardinality must be >= 2, got {0}")]
    CardinalityTooSmall(usize),
    #[error("full diversity violated: |det(G_{a} - G_{b})| = {det_mag}")]
    FullDiversityViolated { a: usize, b: usize, det_mag: f64 },
    #[error("symbol index {index} out of range for cardinality {cardinality}")]
    SymbolOutOfRange { index: usize, cardinality: usize },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// A cyclic unitary group code with its initial matrix.
#[derive(Debug, Clone)]
pub struct Codebook<T> {
    initial: ComplexMatrix<T>,
    generators: Vec<ComplexMatrix<T>>,
    chain_elements: Vec<ComplexMatrix<T>>,
    exponents: Vec<i64>,
    cardinality: usize,
}

impl<T: Scalar> Codebook<T> {
    /// Initial codeword (the known differential reference).
    pub fn initial(&self) -> &ComplexMatrix<T> {
        &self.initial
    }

    /// The group element carrying symbol `k` (k-th power of the generator).
    pub fn generator(&self, k: usize) -> &ComplexMatrix<T> {
        &self.generators[k]
    }

    pub fn generators(&self) -> &[ComplexMatrix<T>] {
        &self.generators
    }

    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    pub fn bits_per_symbol(&self) -> f64 {
        (self.cardinality as f64).log2()
    }

    pub fn n_tx(&self) -> usize {
        self.initial.rows()
    }

    pub fn exponents(&self) -> &[i64] {
        &self.exponents
    }

    /// `initial * G^k`, computed from exact angle arithmetic.
    pub fn chain_element(&self, k: usize) -> &ComplexMatrix<T> {
        &self.chain_elements[k % self.cardinality]
    }
}

/// Sylvester-construction Hadamard matrix of power-of-two size `n`,
/// satisfying `D D^H = n I`.
pub fn make_hadamard_initial<T: Scalar>(n: usize) -> Result<ComplexMatrix<T>, CodebookError> {
    if n == 0 || !n.is_power_of_two() {
        return Err(CodebookError::NotPowerOfTwo(n));
    }
    Ok(ComplexMatrix::from_fn(n, n, |r, c| {
        // Sylvester entry: (-1)^{popcount(r & c)}.
        let sign = if (r & c).count_ones() % 2 == 0 {
            T::one()
        } else {
            -T::one()
        };
        Complex::new(sign, T::zero())
    }))
}

/// Builds the cyclic group codebook with generator
/// `G = diag(e^{j 2 pi u_1 / K}, ..., e^{j 2 pi u_{n_tx} / K})` and code set
/// `{G^0, ..., G^{K-1}}`. Full diversity is validated at construction.
pub fn make_cyclic_codebook<T: Scalar>(
    n_tx: usize,
    k_card: usize,
    exponents: &[i64],
) -> Result<Codebook<T>, CodebookError> {
    if k_card < 2 {
        return Err(CodebookError::CardinalityTooSmall(k_card));
    }
    if exponents.len() != n_tx {
        return Err(CodebookError::ExponentCount {
            expected: n_tx,
            got: exponents.len(),
        });
    }
    let initial = make_hadamard_initial::<T>(n_tx)?;
    // Angles are reduced mod K before the trig call, so high powers stay
    // exactly on the unit circle grid.
    let element = |power: usize| -> ComplexMatrix<T> {
        ComplexMatrix::from_fn(n_tx, n_tx, |r, c| {
            if r != c {
                return Complex::new(T::zero(), T::zero());
            }
            let e = (exponents[r] * power as i64).rem_euclid(k_card as i64);
            let angle = lit::<T>(2.0) * T::PI() * lit::<T>(e as f64) / lit::<T>(k_card as f64);
            Complex::from_polar(T::one(), angle)
        })
    };
    let generators: Vec<_> = (0..k_card).map(element).collect();
    for a in 0..k_card {
        for b in (a + 1)..k_card {
            let det = det_complex(&generators[a].sub(&generators[b])?)?;
            let mag = det.norm().to_f64().unwrap_or(0.0);
            if mag <= 1e-8 {
                return Err(CodebookError::FullDiversityViolated { a, b, det_mag: mag });
            }
        }
    }
    let chain_elements = generators
        .iter()
        .map(|g| initial.matmul(g).expect("conforming dims"))
        .collect();
    Ok(Codebook {
        initial,
        generators,
        chain_elements,
        exponents: exponents.to_vec(),
        cardinality: k_card,
    })
}

/// One differential encode step: `X_{i+1} = X_i G_k`.
pub fn differential_encode<T: Scalar>(
    x_prev: &ComplexMatrix<T>,
    symbol_index: usize,
    cb: &Codebook<T>,
) -> Result<ComplexMatrix<T>, CodebookError> {
    if symbol_index >= cb.cardinality {
        return Err(CodebookError::SymbolOutOfRange {
            index: symbol_index,
            cardinality: cb.cardinality,
        });
    }
    Ok(x_prev.matmul(cb.generator(symbol_index))?)
}

/// A differential chain that tracks the exact group exponent and snaps the
/// floating-point codeword back onto the code set periodically, bounding
/// drift over long Monte Carlo runs.
#[derive(Debug, Clone)]
pub struct DifferentialChain<T> {
    x: ComplexMatrix<T>,
    exponent: usize,
    steps: u64,
}

impl<T: Scalar> DifferentialChain<T> {
    pub fn new(cb: &Codebook<T>) -> Self {
        Self {
            x: cb.initial().clone(),
            exponent: 0,
            steps: 0,
        }
    }

    pub fn current(&self) -> &ComplexMatrix<T> {
        &self.x
    }

    pub fn advance(&mut self, symbol_index: usize, cb: &Codebook<T>) -> Result<(), CodebookError> {
        self.x = differential_encode(&self.x, symbol_index, cb)?;
        self.exponent = (self.exponent + symbol_index) % cb.cardinality();
        self.steps += 1;
        if self.steps % RENORM_INTERVAL == 0 {
            self.x = cb.chain_element(self.exponent).clone();
        }
        Ok(())
    }
}
