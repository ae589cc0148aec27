//! Small dense complex linear algebra: matvecs, Gram matrices, a Hermitian
//! Jacobi eigensolver, and a power-method operator-norm estimate.
//!
//! Everything here targets desk-scale dimensions (N up to a few thousand for
//! matvecs, a few hundred for eigendecompositions); no external LAPACK.

use crate::error::{Error, Result};
use crate::operator::LinearOperator;
use crate::rng;
use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::Rng;

/// `sum_i a_i * b_i` over slices.
#[inline]
pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    let (mut re, mut im) = (0.0_f64, 0.0_f64);
    for (u, v) in a.iter().zip(b) {
        re += u.re * v.re - u.im * v.im;
        im += u.re * v.im + u.im * v.re;
    }
    Complex64::new(re, im)
}

/// `sum_i conj(a_i) * b_i` over slices.
#[inline]
pub fn dot_conj(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    let (mut re, mut im) = (0.0_f64, 0.0_f64);
    for (u, v) in a.iter().zip(b) {
        re += u.re * v.re + u.im * v.im;
        im += u.re * v.im - u.im * v.re;
    }
    Complex64::new(re, im)
}

/// Euclidean norm of a complex slice.
#[inline]
pub fn norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Row-major dense matvec `A x`.
pub fn matvec(a: &Array2<Complex64>, x: &Array1<Complex64>) -> Array1<Complex64> {
    let xs = x.as_slice().expect("contiguous input");
    let mut out = Array1::zeros(a.nrows());
    for (i, row) in a.rows().into_iter().enumerate() {
        out[i] = dot(row.as_slice().expect("contiguous row"), xs);
    }
    out
}

/// Dense adjoint matvec `A* y` (conjugate transpose), accumulated row-wise.
pub fn adjoint_matvec(a: &Array2<Complex64>, y: &Array1<Complex64>) -> Array1<Complex64> {
    let mut out = Array1::<Complex64>::zeros(a.ncols());
    let outs = out.as_slice_mut().expect("contiguous output");
    for (i, row) in a.rows().into_iter().enumerate() {
        let yi = y[i];
        for (o, aij) in outs.iter_mut().zip(row.as_slice().expect("contiguous row")) {
            *o += aij.conj() * yi;
        }
    }
    out
}

/// Gram matrix `A* A` (Hermitian, ncols x ncols).
pub fn gram(a: &Array2<Complex64>) -> Array2<Complex64> {
    let n = a.ncols();
    let mut g = Array2::<Complex64>::zeros((n, n));
    for row in a.rows() {
        let r = row.as_slice().expect("contiguous row");
        for j in 0..n {
            let cj = r[j].conj();
            for k in j..n {
                g[(j, k)] += cj * r[k];
            }
        }
    }
    for j in 0..n {
        for k in 0..j {
            g[(j, k)] = g[(k, j)].conj();
        }
    }
    g
}

/// Eigenvalues of a Hermitian matrix via cyclic complex Jacobi rotations,
/// returned in ascending order.
pub fn hermitian_eigenvalues(a: &Array2<Complex64>) -> Result<Vec<f64>> {
    Ok(hermitian_eig(a)?.0)
}

/// Full Hermitian eigendecomposition `A = V diag(w) V*`; eigenvalues ascend,
/// `V` holds the corresponding eigenvectors in its columns.
pub fn hermitian_eig(a: &Array2<Complex64>) -> Result<(Vec<f64>, Array2<Complex64>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension("hermitian_eig: matrix not square".into()));
    }
    let mut m = a.clone();
    let mut v: Array2<Complex64> = Array2::eye(n);
    // scale-aware threshold
    let fro: f64 = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let tol = 1e-14 * fro.max(1e-300);

    for _sweep in 0..60 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let b = apq.norm();
                if b <= tol / (n as f64) {
                    continue;
                }
                // phase that makes the pivot real, then a real Jacobi rotation
                let phase = apq / b; // e^{i phi}
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let tau = (aqq - app) / (2.0 * b);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // columns: col_p' = c*col_p - s*conj(phase)*col_q
                //          col_q' = s*phase*col_p + c*col_q
                let sp = Complex64::new(s, 0.0) * phase;
                let spc = sp.conj();
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - spc * mkq;
                    m[(k, q)] = sp * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - sp * mqk;
                    m[(q, k)] = spc * mpk + c * mqk;
                }
                // keep the diagonal exactly real
                m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
                m[(p, q)] = Complex64::new(0.0, 0.0);
                m[(q, p)] = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - spc * vkq;
                    v[(k, q)] = sp * vkp + c * vkq;
                }
            }
        }
    }

    let mut idx: Vec<usize> = (0..n).collect();
    let mut w: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    idx.sort_by(|&i, &j| w[i].partial_cmp(&w[j]).unwrap());
    w.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut vs = Array2::zeros((n, n));
    for (new_col, &old_col) in idx.iter().enumerate() {
        for k in 0..n {
            vs[(k, new_col)] = v[(k, old_col)];
        }
    }
    Ok((w, vs))
}

/// Solve `(A + shift I) x = b` for Hermitian PSD `A` through its
/// eigendecomposition, dropping eigenvalues below a relative cutoff
/// (pseudo-inverse behaviour for consistent rank-deficient systems).
pub struct HermitianSolver {
    eigenvalues: Vec<f64>,
    vectors: Array2<Complex64>,
}

impl HermitianSolver {
    pub fn new(a: &Array2<Complex64>) -> Result<Self> {
        let (w, v) = hermitian_eig(a)?;
        Ok(Self {
            eigenvalues: w,
            vectors: v,
        })
    }

    pub fn solve(&self, b: &Array1<Complex64>, shift: f64) -> Array1<Complex64> {
        let n = self.eigenvalues.len();
        let max_ev = self
            .eigenvalues
            .iter()
            .fold(0.0_f64, |acc, &x| acc.max(x.abs()))
            + shift.abs();
        let cutoff = 1e-12 * max_ev.max(1e-300);
        let mut out = Array1::zeros(n);
        for j in 0..n {
            let lam = self.eigenvalues[j] + shift;
            if lam.abs() <= cutoff {
                continue;
            }
            let mut coeff = Complex64::new(0.0, 0.0);
            for k in 0..n {
                coeff += self.vectors[(k, j)].conj() * b[k];
            }
            let scaled = coeff / lam;
            for k in 0..n {
                out[k] += self.vectors[(k, j)] * scaled;
            }
        }
        out
    }
}

/// Power-method estimate of the spectral norm of an operator.
pub fn power_opnorm(op: &dyn LinearOperator, iterations: usize, tol: f64, seed: u64) -> Result<f64> {
    let n = op.cols();
    let mut rng = rng::stream(seed, &[0x6f70_6e6f]);
    let mut v: Array1<Complex64> = Array1::from_iter(
        (0..n).map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)),
    );
    let nv = norm2(v.as_slice().unwrap());
    if nv == 0.0 || n == 0 {
        return Ok(0.0);
    }
    v.mapv_inplace(|z| z / nv);
    let mut sigma = 0.0;
    for _ in 0..iterations.max(1) {
        let av = op.apply(&v)?;
        let new_sigma = norm2(av.as_slice().unwrap());
        if new_sigma == 0.0 {
            return Ok(0.0);
        }
        let mut w = op.adjoint_apply(&av)?;
        let nw = norm2(w.as_slice().unwrap());
        if nw == 0.0 {
            return Ok(new_sigma);
        }
        w.mapv_inplace(|z| z / nw);
        let done = (new_sigma - sigma).abs() <= tol * new_sigma;
        sigma = new_sigma;
        v = w;
        if done {
            break;
        }
    }
    Ok(sigma)
}

/// Visit every size-`k` subset of `0..n` in lexicographic order.
pub fn for_each_combination<F: FnMut(&[usize])>(n: usize, k: usize, mut f: F) {
    if k > n {
        return;
    }
    if k == 0 {
        f(&[]);
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Random unitary from a product of complex Givens rotations.
    fn random_unitary(n: usize, seed: u64) -> Array2<Complex64> {
        let mut rng = rng::stream(seed, &[99]);
        let mut u: Array2<Complex64> = Array2::eye(n);
        for _ in 0..(4 * n * n) {
            let p = rng.random_range(0..n);
            let mut q = rng.random_range(0..n);
            if p == q {
                q = (q + 1) % n;
            }
            let theta: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            let phi: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            let (cth, sth) = (theta.cos(), theta.sin());
            let ph = Complex64::from_polar(1.0, phi);
            for k in 0..n {
                let a = u[(k, p)];
                let b = u[(k, q)];
                u[(k, p)] = cth * a - sth * ph * b;
                u[(k, q)] = sth * ph.conj() * a + cth * b;
            }
        }
        u
    }

    #[test]
    fn eig_recovers_known_spectrum() {
        let n = 6;
        let u = random_unitary(n, 7);
        let spectrum = [-3.0, -0.5, 0.0, 1.25, 2.0, 10.0];
        // A = U diag(spectrum) U*
        let mut a = Array2::<Complex64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                let mut s = c(0.0, 0.0);
                for k in 0..n {
                    s += u[(i, k)] * spectrum[k] * u[(j, k)].conj();
                }
                a[(i, j)] = s;
            }
        }
        let w = hermitian_eigenvalues(&a).unwrap();
        for (got, want) in w.iter().zip(spectrum.iter()) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-10);
        }
    }

    #[test]
    fn eig_two_by_two_closed_form() {
        let a = array![[c(2.0, 0.0), c(0.0, 1.0)], [c(0.0, -1.0), c(2.0, 0.0)]];
        let w = hermitian_eigenvalues(&a).unwrap();
        assert_abs_diff_eq!(w[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn eigenvector_residuals_vanish() {
        let u = random_unitary(5, 3);
        let spectrum = [0.1, 0.2, 0.3, 4.0, 5.0];
        let mut a = Array2::<Complex64>::zeros((5, 5));
        for i in 0..5 {
            for j in 0..5 {
                let mut s = c(0.0, 0.0);
                for k in 0..5 {
                    s += u[(i, k)] * spectrum[k] * u[(j, k)].conj();
                }
                a[(i, j)] = s;
            }
        }
        let (w, v) = hermitian_eig(&a).unwrap();
        for j in 0..5 {
            let vj: Array1<Complex64> = v.column(j).to_owned();
            let av = matvec(&a, &vj);
            let mut res = 0.0;
            for i in 0..5 {
                res += (av[i] - w[j] * vj[i]).norm_sqr();
            }
            assert!(res.sqrt() < 1e-9, "residual {} for eigenpair {}", res.sqrt(), j);
        }
    }

    #[test]
    fn hermitian_solver_inverts() {
        let a = array![[c(4.0, 0.0), c(1.0, 0.5)], [c(1.0, -0.5), c(3.0, 0.0)]];
        let solver = HermitianSolver::new(&a).unwrap();
        let b = Array1::from(vec![c(1.0, -1.0), c(2.0, 0.5)]);
        let x = solver.solve(&b, 0.0);
        let ax = matvec(&a, &x);
        for i in 0..2 {
            assert_abs_diff_eq!(ax[i].re, b[i].re, epsilon = 1e-10);
            assert_abs_diff_eq!(ax[i].im, b[i].im, epsilon = 1e-10);
        }
    }

    #[test]
    fn combinations_enumerate_lexicographically() {
        let mut seen = Vec::new();
        for_each_combination(4, 2, |s| seen.push(s.to_vec()));
        assert_eq!(
            seen,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        let mut count = 0;
        for_each_combination(6, 3, |_| count += 1);
        assert_eq!(count, 20);
    }
}
