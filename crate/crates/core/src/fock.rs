//! Truncated Fock-space realization of the q-algebra.
//!
//! `a` has superdiagonal entries `sqrt([n])`, `a^+` is its adjoint. The
//! last basis vector is a truncation artifact: `a^+` maps it out of the
//! space, so identities fail there and callers keep states away from it.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::observables::UncertaintyReport;
use crate::qcore::q_integer;

/// Default truncation dimension.
pub const DEFAULT_DIM: usize = 80;

#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    amplitudes: Vec<Complex64>,
}

impl FockVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidParameter(
                "Fock vector needs at least one amplitude".into(),
            ));
        }
        Ok(Self { amplitudes })
    }

    /// The number state `|n>` in a space of dimension `dim`.
    pub fn basis(dim: usize, n: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::Domain(format!(
                "basis index {n} outside dimension {dim}"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[n] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    fn as_vector(&self) -> DVector<Complex64> {
        DVector::from_column_slice(&self.amplitudes)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LadderMatrices {
    dim: usize,
    q: f64,
    a: DMatrix<Complex64>,
    a_dag: DMatrix<Complex64>,
}

pub fn ladder_matrices(dim: usize, q: f64) -> Result<LadderMatrices> {
    if dim < 2 {
        return Err(Error::InvalidParameter(format!(
            "Fock dimension must be at least 2, got {dim}"
        )));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "q must lie in (0, 1), got {q}"
        )));
    }
    let mut a = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = Complex64::new(q_integer(n as u32, q).sqrt(), 0.0);
    }
    let a_dag = a.adjoint();
    Ok(LadderMatrices { dim, q, a, a_dag })
}

impl LadderMatrices {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn a(&self) -> &DMatrix<Complex64> {
        &self.a
    }

    pub fn a_dag(&self) -> &DMatrix<Complex64> {
        &self.a_dag
    }

    /// `a a^+ - q a^+ a`; the identity except in the last diagonal entry.
    pub fn commutator(&self) -> DMatrix<Complex64> {
        &self.a * &self.a_dag - (&self.a_dag * &self.a) * Complex64::new(self.q, 0.0)
    }

    pub fn position(&self) -> DMatrix<Complex64> {
        (&self.a + &self.a_dag) * Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
    }

    pub fn momentum(&self) -> DMatrix<Complex64> {
        (&self.a - &self.a_dag) * Complex64::new(0.0, -std::f64::consts::FRAC_1_SQRT_2)
    }

    /// `(omega/2)(a a^+ + a^+ a)`. Both products are diagonal, so the
    /// matrix is assembled from the superdiagonal of `a` directly.
    pub fn hamiltonian(&self, omega: f64) -> DMatrix<Complex64> {
        let sup = |n: usize| {
            if n == 0 || n >= self.dim {
                0.0
            } else {
                self.a[(n - 1, n)].norm_sqr()
            }
        };
        DMatrix::from_fn(self.dim, self.dim, |i, j| {
            if i == j {
                Complex64::new(0.5 * omega * (sup(i + 1) + sup(i)), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }
}

/// `v^+ M v / v^+ v`.
pub fn fock_expectation(op: &DMatrix<Complex64>, v: &FockVector) -> Result<Complex64> {
    if op.nrows() != v.dim() || op.ncols() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.nrows(),
            found: v.dim(),
        });
    }
    let norm = v.norm_sqr();
    if norm == 0.0 {
        return Err(Error::ZeroState);
    }
    let x = v.as_vector();
    Ok(x.dotc(&(op * &x)) / norm)
}

/// Means, variances and energy of `v` from the truncated matrices.
pub fn fock_uncertainty_report(
    m: &LadderMatrices,
    v: &FockVector,
    omega: f64,
) -> Result<UncertaintyReport> {
    if v.dim() != m.dim {
        return Err(Error::DimensionMismatch {
            expected: m.dim,
            found: v.dim(),
        });
    }
    let norm = v.norm_sqr();
    if norm == 0.0 {
        return Err(Error::ZeroState);
    }
    let x = v.as_vector();
    let xv = m.position() * &x;
    let pv = m.momentum() * &x;
    let mean_x = x.dotc(&xv) / norm;
    let mean_p = x.dotc(&pv) / norm;
    // <v|X X v> = |X v|^2 for the Hermitian truncated matrix
    let x2 = Complex64::new(xv.norm_squared() / norm, 0.0);
    let p2 = Complex64::new(pv.norm_squared() / norm, 0.0);
    let energy = fock_expectation(&m.hamiltonian(omega), v)?;
    UncertaintyReport::from_moments(mean_x, mean_p, x2, p2, energy)
}
