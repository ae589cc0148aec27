//! DFT helpers shared by the circulant profile machinery.
//!
//! Conventions: the unitary DFT is `Phi[k,j] = exp(-2*pi*i*k*j/N)/sqrt(N)`.
//! A circulant matrix with first column (symbol) `h` diagonalizes as
//! `H = Phi^* diag(lambda) Phi` with `lambda = sqrt(N) Phi h`, i.e. `lambda`
//! is the unnormalized forward DFT of the symbol. Applying `H` is then a
//! cyclic convolution evaluated with two FFTs.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

struct PlanCache {
    forward: HashMap<usize, Arc<dyn Fft<f64>>>,
    inverse: HashMap<usize, Arc<dyn Fft<f64>>>,
}

fn cache() -> &'static Mutex<PlanCache> {
    static CACHE: OnceLock<Mutex<PlanCache>> = OnceLock::new();
    CACHE.get_or_init(|| {
        Mutex::new(PlanCache {
            forward: HashMap::new(),
            inverse: HashMap::new(),
        })
    })
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut guard = cache().lock().unwrap();
    let map = if inverse {
        &mut guard.inverse
    } else {
        &mut guard.forward
    };
    map.entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

/// In-place unnormalized forward DFT: `X[k] = sum_j x[j] exp(-2 pi i k j / N)`.
pub fn fft_forward(buf: &mut [Complex64]) {
    plan(buf.len(), false).process(buf);
}

/// In-place unnormalized inverse DFT: `x[j] = sum_k X[k] exp(+2 pi i k j / N)`.
pub fn fft_inverse(buf: &mut [Complex64]) {
    plan(buf.len(), true).process(buf);
}

/// Eigenvalues of the circulant matrix with the given symbol (first column),
/// `lambda = sqrt(N) * Phi * h`.
pub fn circulant_eigenvalues(symbol: &[Complex64]) -> Vec<Complex64> {
    let mut buf = symbol.to_vec();
    fft_forward(&mut buf);
    buf
}

/// Symbol of the circulant matrix with the given eigenvalues (inverse of
/// [`circulant_eigenvalues`]).
pub fn circulant_symbol(eigenvalues: &[Complex64]) -> Vec<Complex64> {
    let n = eigenvalues.len();
    let mut buf = eigenvalues.to_vec();
    fft_inverse(&mut buf);
    let inv = 1.0 / n as f64;
    for v in &mut buf {
        *v *= inv;
    }
    buf
}

/// Apply the circulant matrix with eigenvalues `eigs` to `x` (cyclic
/// convolution with the symbol).
pub fn circulant_apply(eigs: &[Complex64], x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    assert_eq!(eigs.len(), n, "eigenvalue/vector length mismatch");
    let mut buf = x.to_vec();
    fft_forward(&mut buf);
    for (v, lam) in buf.iter_mut().zip(eigs) {
        *v *= lam;
    }
    fft_inverse(&mut buf);
    let inv = 1.0 / n as f64;
    for v in &mut buf {
        *v *= inv;
    }
    buf
}
