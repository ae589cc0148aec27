//! Matrix-free linear operator interface used by the solver and probes.

use crate::dense;
use crate::error::{Error, Result};
use ndarray::{Array1, Array2};
use num_complex::Complex64;

/// A complex linear map `C^cols -> C^rows` exposing forward and adjoint
/// application. Implementations must satisfy the inner-product identity
/// `<Ax, y> = <x, A* y>`.
pub trait LinearOperator: Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;

    /// Compute `A x`.
    fn apply(&self, x: &Array1<Complex64>) -> Result<Array1<Complex64>>;

    /// Compute `A* y`.
    fn adjoint_apply(&self, y: &Array1<Complex64>) -> Result<Array1<Complex64>>;
}

pub(crate) fn check_len(expected: usize, got: usize, what: &str) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension(format!(
            "{what}: expected length {expected}, got {got}"
        )));
    }
    Ok(())
}

/// Plain dense matrix as a [`LinearOperator`].
#[derive(Debug, Clone)]
pub struct DenseMatrixOperator {
    matrix: Array2<Complex64>,
}

impl DenseMatrixOperator {
    pub fn new(matrix: Array2<Complex64>) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }
}

impl LinearOperator for DenseMatrixOperator {
    fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    fn apply(&self, x: &Array1<Complex64>) -> Result<Array1<Complex64>> {
        check_len(self.cols(), x.len(), "apply input")?;
        Ok(dense::matvec(&self.matrix, x))
    }

    fn adjoint_apply(&self, y: &Array1<Complex64>) -> Result<Array1<Complex64>> {
        check_len(self.rows(), y.len(), "adjoint input")?;
        Ok(dense::adjoint_matvec(&self.matrix, y))
    }
}

/// Materialize any operator as a dense matrix by applying it to basis vectors.
pub fn densify(op: &dyn LinearOperator) -> Result<Array2<Complex64>> {
    let (m, n) = (op.rows(), op.cols());
    let mut out = Array2::zeros((m, n));
    let mut e = Array1::zeros(n);
    for j in 0..n {
        e[j] = Complex64::new(1.0, 0.0);
        let col = op.apply(&e)?;
        for i in 0..m {
            out[(i, j)] = col[i];
        }
        e[j] = Complex64::new(0.0, 0.0);
    }
    Ok(out)
}
