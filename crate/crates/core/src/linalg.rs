//! Dense complex linear algebra used by the exact propagator and the oracle.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default cap on the number of qubits realized as a dense matrix.
pub const DEFAULT_MAX_DENSE_QUBITS: usize = 12;

/// Environment variable overriding [`DEFAULT_MAX_DENSE_QUBITS`].
pub const DENSE_CAP_ENV: &str = "QPROBE_MAX_DENSE_QUBITS";

/// Qubit cap for dense realizations, read once from the environment.
pub fn max_dense_qubits() -> usize {
    static CAP: OnceLock<usize> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var(DENSE_CAP_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_MAX_DENSE_QUBITS)
    })
}

pub(crate) fn check_cap(what: &'static str, qubits: usize, cap: usize) -> Result<()> {
    if qubits > cap {
        return Err(Error::Resource { what, qubits, cap });
    }
    Ok(())
}

/// Largest entrywise deviation `max |m - m†|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for r in 0..n {
        for c in r..n {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Eigendecomposition of a Hermitian matrix, energies ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, aligned with `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(m: &CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical("matrix has non-finite entries".into()));
        }
        let n = m.nrows();
        if n == 0 {
            return Ok(Self {
                values: vec![],
                vectors: CMatrix::zeros(0, 0),
            });
        }
        let eig = m.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(Self { values, vectors })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V f(E) V†` for a scalar function of the eigenvalues.
    pub fn map(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for (c, &e) in self.values.iter().enumerate() {
            let w = f(e);
            for r in 0..n {
                scaled[(r, c)] *= w;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// Applies `V diag(f(E)) V†` to a vector without forming the matrix.
    pub fn apply(&self, v: &CVector, f: impl Fn(f64) -> Complex64) -> CVector {
        let mut coords = self.vectors.ad_mul(v);
        for (x, &e) in coords.iter_mut().zip(&self.values) {
            *x *= f(e);
        }
        &self.vectors * coords
    }

    /// Spectral radius.
    pub fn norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, e| m.max(e.abs()))
    }
}

/// Operator 2-norm of a Hermitian matrix.
pub fn hermitian_norm(m: &CMatrix) -> Result<f64> {
    Ok(HermitianEigen::new(m)?.norm())
}
