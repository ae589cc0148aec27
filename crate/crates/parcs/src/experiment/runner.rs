//! Single-solve and profile-check experiment runs.

use super::config::{ProfileCheckConfig, SolveConfig};
use crate::error::{Error, Result};
use crate::profiles::{ProfileNorms, Scenario};
use crate::rng;
use crate::sampling::{assemble_distinct, assemble_identical, RowDistribution};
use crate::signals::{draw_sparse, draw_sparse_distributed};
use crate::solver::{recovery_error, solve_bp};
use crate::LinearOperator;
use ndarray::Array1;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// JSON result of a `solve` run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub objective: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub dual_certificate_residual: f64,
    pub l2_error: f64,
    pub relative_error: f64,
    /// `sigma + sqrt(s) eta` right-hand side of the recovery guarantee
    /// (absolute constant unknown).
    pub bound_rhs: f64,
    pub x_hat: Vec<[f64; 2]>,
}

pub fn run_solve(config: &SolveConfig) -> Result<SolveReport> {
    if config.m == 0 || config.m % config.c != 0 {
        return Err(Error::Config(format!(
            "m={} must be a positive multiple of C={}",
            config.m, config.c
        )));
    }
    let partition = config.partition.build(config.n, config.c)?;
    let needs_partition = config.family.uses_levels() || config.signal.lambda.is_some();
    let profiles = config.family.build(
        config.c,
        config.n,
        config.scenario,
        if needs_partition { Some(&partition) } else { None },
        rng::derive_seed(config.seed, &[0]),
    )?;
    let dist = RowDistribution::new(config.law, config.n);
    let op_seed = rng::derive_seed(config.seed, &[1]);
    let op = match config.scenario {
        Scenario::Distinct => assemble_distinct(&profiles, &[dist], config.m, op_seed)?,
        Scenario::Identical => assemble_identical(&profiles, &dist, config.m, op_seed)?,
    };

    let sig_seed = rng::derive_seed(config.seed, &[2]);
    let signal = match config.signal.lambda {
        Some(lambda) => draw_sparse_distributed(
            &partition,
            config.signal.s,
            lambda,
            sig_seed,
            config.signal.value_law,
        )?,
        None => draw_sparse(config.n, config.signal.s, sig_seed, config.signal.value_law)?,
    };

    let mut y = op.apply(&signal.x)?;
    if config.noise_norm > 0.0 {
        let mut nrng = rng::stream(config.seed, &[3]);
        let mut noise = Array1::from_iter((0..config.m).map(|_| {
            Complex64::new(nrng.sample(StandardNormal), nrng.sample(StandardNormal))
        }));
        let norm = noise.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        noise.mapv_inplace(|z| z * (config.noise_norm / norm));
        y = &y + &noise;
    }

    let bp = config.solver.to_bp_config(config.eta);
    let result = solve_bp(&op, &y, &bp)?;
    let err = recovery_error(
        &result.x_hat,
        &signal.x,
        config.signal.s,
        config.eta,
        config.signal.lambda.map(|l| (l, &partition)),
    )?;
    let xnorm = signal.x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Ok(SolveReport {
        objective: result.objective,
        residual: result.residual,
        iterations: result.iterations,
        converged: result.converged,
        dual_certificate_residual: result.dual_certificate_residual,
        l2_error: err.l2_error,
        relative_error: if xnorm > 0.0 { err.l2_error / xnorm } else { err.l2_error },
        bound_rhs: err.bound_rhs,
        x_hat: result.x_hat.iter().map(|z| [z.re, z.im]).collect(),
    })
}

/// JSON result of a `profile-check` run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileCheckReport {
    pub residual: f64,
    /// Residual within the construction tolerance 1e-10.
    pub pass: bool,
    pub norms: Vec<ProfileNorms>,
    pub norm1_max_squared: f64,
    pub xi_dist: f64,
}

pub fn run_profile_check(config: &ProfileCheckConfig) -> Result<ProfileCheckReport> {
    let partition = config.partition.build(config.n, config.c)?;
    let profiles = config.family.build(
        config.c,
        config.n,
        config.scenario,
        if config.family.uses_levels() {
            Some(&partition)
        } else {
            None
        },
        config.seed,
    )?;
    let residual = profiles.verify_joint_isometry();
    Ok(ProfileCheckReport {
        residual,
        pass: residual <= 1e-10,
        norms: profiles.profile_norms(),
        norm1_max_squared: profiles.norm1_max_squared(),
        xi_dist: profiles.xi_dist(),
    })
}
