//! Evaluation of the theoretical quantities in the multi-sensor measurement
//! conditions, plus empirical verification probes.
//!
//! The measurement conditions all hide an absolute constant behind `>~`, so
//! every condition evaluator returns the scaling quantity only, flagged as
//! such. The probes (coherence product bound, concentration tail, restricted
//! isometry constant) draw seeded Monte-Carlo samples and compare against
//! the corresponding closed-form bound.

use crate::dense;
use crate::error::{Error, Result};
use crate::operator::LinearOperator;
use crate::partition::LevelPartition;
use crate::profiles::{ProfileFamilySpec, ProfileKind, Scenario, SensorProfileSet};
use crate::rng;
use crate::sampling::{OperatorSpec, RowDistribution, RowLaw};
use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Subexponential Bernstein constant of the concentration inequality:
/// `zeta = (32 a_max^2 Xi^2 max{2, exp(1/(4 a_min))} + 8 a_max Xi)^{-1}`.
pub fn zeta(alpha_min: f64, alpha_max: f64, xi_dist: f64) -> Result<f64> {
    if alpha_min <= 0.0 || alpha_max <= 0.0 {
        return Err(Error::Config(format!(
            "subgaussian parameters must be positive (got {alpha_min}, {alpha_max})"
        )));
    }
    if alpha_max < alpha_min {
        return Err(Error::Config(format!(
            "alpha_max={alpha_max} < alpha_min={alpha_min}"
        )));
    }
    if xi_dist < 1.0 - 1e-9 {
        return Err(Error::Config(format!(
            "Xi_dist={xi_dist} below 1; profiles not normalized?"
        )));
    }
    let beta = 2.0_f64.max((1.0 / (4.0 * alpha_min)).exp());
    Ok(1.0 / (32.0 * alpha_max * alpha_max * xi_dist * xi_dist * beta + 8.0 * alpha_max * xi_dist))
}

fn require_diagonal(profiles: &SensorProfileSet, what: &str) -> Result<()> {
    if profiles.kind() != ProfileKind::Diagonal {
        return Err(Error::Unsupported(format!(
            "{what} is defined for diagonal profiles only"
        )));
    }
    Ok(())
}

/// Distinct-sampling level factor
/// `Upsilon_dist = D^{-1} max_c sum_d ||h_c||_inf ||P_{I_d} h_c||_inf`.
pub fn upsilon_dist(profiles: &SensorProfileSet, partition: &LevelPartition) -> Result<f64> {
    require_diagonal(profiles, "Upsilon_dist")?;
    if profiles.scenario() != Scenario::Distinct {
        return Err(Error::ScenarioMismatch {
            expected: Scenario::Distinct,
            found: profiles.scenario(),
        });
    }
    if partition.n() != profiles.n() {
        return Err(Error::Dimension(format!(
            "partition N={} vs profiles N={}",
            partition.n(),
            profiles.n()
        )));
    }
    let d = partition.d() as f64;
    let mut best = 0.0_f64;
    for h in profiles.vectors() {
        let sup = h.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut sum = 0.0;
        for level in partition.levels() {
            let level_sup = level.iter().map(|&i| h[i].norm()).fold(0.0, f64::max);
            sum += sup * level_sup;
        }
        best = best.max(sum / d);
    }
    Ok(best)
}

/// Identical-sampling level factor
/// `Upsilon_idt = (C/D) max_i sum_d max_{j in I_d} |sum_c conj(h_{c,i}) h_{c,j}|`,
/// evaluated through the cross-sensor Gram `g(i,j) = sum_c conj(h_{c,i}) h_{c,j}`.
pub fn upsilon_idt(profiles: &SensorProfileSet, partition: &LevelPartition) -> Result<f64> {
    require_diagonal(profiles, "Upsilon_idt")?;
    if profiles.scenario() != Scenario::Identical {
        return Err(Error::ScenarioMismatch {
            expected: Scenario::Identical,
            found: profiles.scenario(),
        });
    }
    let n = profiles.n();
    if partition.n() != n {
        return Err(Error::Dimension(format!(
            "partition N={} vs profiles N={}",
            partition.n(),
            n
        )));
    }
    let c = profiles.c() as f64;
    let d = partition.d() as f64;
    let vectors = profiles.vectors();
    let per_i: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            // row i of the cross-sensor Gram
            let mut row = vec![Complex64::ZERO; n];
            for h in vectors {
                let hi = h[i].conj();
                for (acc, hj) in row.iter_mut().zip(h.iter()) {
                    *acc += hi * hj;
                }
            }
            partition
                .levels()
                .iter()
                .map(|level| level.iter().map(|&j| row[j].norm()).fold(0.0, f64::max))
                .sum::<f64>()
        })
        .collect();
    Ok(per_i.iter().fold(0.0_f64, |a, &b| a.max(b)) * c / d)
}

/// All computed theoretical quantities for one profile/scenario pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub c: usize,
    pub n: usize,
    pub scenario: Scenario,
    /// `max_c mu(G_c)`; None when some law has no finite coherence and no
    /// proxy was requested.
    pub mu_max: Option<f64>,
    /// True when `mu_max` uses the non-rigorous gaussian sup-norm proxy.
    pub mu_is_proxy: bool,
    /// `max_c ||H_c||_{1->1}^2`.
    pub norm1_max: f64,
    /// `Xi_dist = max_c ||H_c||_{2->2}^2`.
    pub xi_dist: f64,
    pub alpha_min: Option<f64>,
    pub alpha_max: Option<f64>,
    pub zeta: Option<f64>,
    pub upsilon_dist: Option<f64>,
    pub upsilon_idt: Option<f64>,
    /// Coherence of the piecewise-constant isometry, when that family built
    /// the profiles.
    pub mu_v: Option<f64>,
    /// Log factor L of the nonuniform conditions; defaults to `log^2 N`.
    pub log_factor: f64,
    /// Failure-probability parameter of the nonuniform statements; carried
    /// as metadata only (its dependence is inside L).
    pub epsilon: Option<f64>,
    /// Every condition hides an absolute constant; always true.
    pub absolute_constants_unknown: bool,
}

/// Options for [`compute_report`].
#[derive(Debug, Clone, Default)]
pub struct ReportOptions<'a> {
    /// Evaluate the gaussian coherence proxy at this row count.
    pub gaussian_proxy_m: Option<usize>,
    /// Override the default log factor `log^2 N`.
    pub log_factor: Option<f64>,
    /// Family that built the profiles (supplies `mu(V)`).
    pub family: Option<&'a ProfileFamilySpec>,
    pub epsilon: Option<f64>,
}

/// Assemble a [`BoundReport`] for a profile set and the row laws in play.
pub fn compute_report(
    profiles: &SensorProfileSet,
    partition: Option<&LevelPartition>,
    laws: &[RowDistribution],
    opts: &ReportOptions,
) -> Result<BoundReport> {
    let n = profiles.n();
    let mut mu_max: Option<f64> = Some(0.0);
    let mut mu_is_proxy = false;
    for law in laws {
        let mu = match law.coherence() {
            Some(mu) => Some(mu),
            None => opts.gaussian_proxy_m.map(|m| {
                mu_is_proxy = true;
                law.coherence_proxy(m)
            }),
        };
        mu_max = match (mu_max, mu) {
            (Some(acc), Some(v)) => Some(acc.max(v)),
            _ => None,
        };
    }
    if laws.is_empty() {
        mu_max = None;
    }
    let alphas: Option<Vec<f64>> = laws.iter().map(|l| l.subgaussian_alpha()).collect();
    let (alpha_min, alpha_max) = match &alphas {
        Some(v) if !v.is_empty() => (
            Some(v.iter().cloned().fold(f64::INFINITY, f64::min)),
            Some(v.iter().cloned().fold(0.0_f64, f64::max)),
        ),
        _ => (None, None),
    };
    let xi = profiles.xi_dist();
    let zeta_val = match (alpha_min, alpha_max) {
        (Some(lo), Some(hi)) => Some(zeta(lo, hi, xi.max(1.0))?),
        _ => None,
    };
    let upsilon_dist_val = match (profiles.kind(), profiles.scenario(), partition) {
        (ProfileKind::Diagonal, Scenario::Distinct, Some(p)) => Some(upsilon_dist(profiles, p)?),
        _ => None,
    };
    let upsilon_idt_val = match (profiles.kind(), profiles.scenario(), partition) {
        (ProfileKind::Diagonal, Scenario::Identical, Some(p)) => Some(upsilon_idt(profiles, p)?),
        _ => None,
    };
    Ok(BoundReport {
        c: profiles.c(),
        n,
        scenario: profiles.scenario(),
        mu_max,
        mu_is_proxy,
        norm1_max: profiles.norm1_max_squared(),
        xi_dist: xi,
        alpha_min,
        alpha_max,
        zeta: zeta_val,
        upsilon_dist: upsilon_dist_val,
        upsilon_idt: upsilon_idt_val,
        mu_v: opts.family.and_then(|f| f.mu_v()),
        log_factor: opts.log_factor.unwrap_or_else(|| {
            let ln = (n as f64).ln();
            ln * ln
        }),
        epsilon: opts.epsilon,
        absolute_constants_unknown: true,
    })
}

/// A measurement-condition scaling quantity; the absolute constant in front
/// is unknown by construction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConditionQuantity {
    pub value: f64,
    pub absolute_constant_unknown: bool,
    pub mu_is_proxy: bool,
}

fn mu_or_err(report: &BoundReport) -> Result<f64> {
    report.mu_max.ok_or_else(|| {
        Error::Unsupported(
            "mu(G) is unbounded for the gaussian law; supply a high-probability proxy".into(),
        )
    })
}

/// Nonuniform sparse condition scaling: `s * mu * max_c ||H_c||_{1->1}^2 * L`.
pub fn condition_thm1(report: &BoundReport, s: usize, l: f64) -> Result<ConditionQuantity> {
    let mu = mu_or_err(report)?;
    Ok(ConditionQuantity {
        value: s as f64 * mu * report.norm1_max * l,
        absolute_constant_unknown: true,
        mu_is_proxy: report.mu_is_proxy,
    })
}

/// Uniform (RIP) condition scaling:
/// `delta^{-2} * Xi_dist^2 * (s log(2N/s) + log(2/epsilon))`.
pub fn condition_thm2(
    report: &BoundReport,
    s: usize,
    delta: f64,
    epsilon: f64,
    n: usize,
) -> Result<ConditionQuantity> {
    if !(0.0..1.0).contains(&delta) || delta == 0.0 {
        return Err(Error::Config(format!("delta={delta} outside (0,1)")));
    }
    if !(0.0..1.0).contains(&epsilon) || epsilon == 0.0 {
        return Err(Error::Config(format!("epsilon={epsilon} outside (0,1)")));
    }
    if s == 0 || s > n {
        return Err(Error::Config(format!("s={s} outside 1..=N={n}")));
    }
    let value = delta.powi(-2)
        * report.xi_dist
        * report.xi_dist
        * (s as f64 * (2.0 * n as f64 / s as f64).ln() + (2.0 / epsilon).ln());
    Ok(ConditionQuantity {
        value,
        absolute_constant_unknown: true,
        mu_is_proxy: false,
    })
}

/// Distinct sparse-and-distributed condition scaling:
/// `lambda * s * mu * Upsilon_dist * L`.
pub fn condition_cor1(
    report: &BoundReport,
    s: usize,
    lambda: f64,
    l: f64,
) -> Result<ConditionQuantity> {
    let mu = mu_or_err(report)?;
    let upsilon = report
        .upsilon_dist
        .ok_or_else(|| Error::Unsupported("report carries no Upsilon_dist".into()))?;
    Ok(ConditionQuantity {
        value: lambda * s as f64 * mu * upsilon * l,
        absolute_constant_unknown: true,
        mu_is_proxy: report.mu_is_proxy,
    })
}

/// Identical sparse-and-distributed condition scaling:
/// `lambda * s * mu * Upsilon_idt * L`.
pub fn condition_cor2(
    report: &BoundReport,
    s: usize,
    lambda: f64,
    l: f64,
) -> Result<ConditionQuantity> {
    let mu = mu_or_err(report)?;
    let upsilon = report
        .upsilon_idt
        .ok_or_else(|| Error::Unsupported("report carries no Upsilon_idt".into()))?;
    Ok(ConditionQuantity {
        value: lambda * s as f64 * mu * upsilon * l,
        absolute_constant_unknown: true,
        mu_is_proxy: report.mu_is_proxy,
    })
}

/// Result of the coherence product-bound probe.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoherenceCheck {
    /// Per sensor: (empirical max ||a_c||_inf^2, bound mu(G_c) ||H_c||_{1->1}^2).
    pub per_sensor: Vec<(f64, f64)>,
    pub holds: bool,
}

/// Sample `a_c = H_c^* atilde` and confirm the empirical squared sup-norm
/// never exceeds `mu(G_c) ||H_c||_{1->1}^2`. Requires a bounded-coherence
/// law.
pub fn coherence_bound_check(
    profiles: &SensorProfileSet,
    dist: &RowDistribution,
    trials: usize,
    seed: u64,
) -> Result<CoherenceCheck> {
    let mu = dist.coherence().ok_or_else(|| {
        Error::Unsupported("coherence_bound_check requires a bounded law (not gaussian)".into())
    })?;
    if dist.n != profiles.n() {
        return Err(Error::Dimension(format!(
            "law dimension {} vs profiles N={}",
            dist.n,
            profiles.n()
        )));
    }
    let norms = profiles.profile_norms();
    let mut per_sensor = Vec::with_capacity(profiles.c());
    let mut holds = true;
    let mut atilde = vec![Complex64::ZERO; profiles.n()];
    for sensor in 0..profiles.c() {
        let bound = mu * norms[sensor].norm_1to1 * norms[sensor].norm_1to1;
        let mut empirical = 0.0_f64;
        for trial in 0..trials {
            let mut stream = rng::stream(seed, &[sensor as u64, trial as u64]);
            dist.draw_row_into(&mut stream, &mut atilde);
            let a = profiles.apply_adjoint(sensor, &Array1::from(atilde.clone()))?;
            let sup2 = a.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
            empirical = empirical.max(sup2);
        }
        // tiny slack for the fp evaluation of the closed-form bound
        if empirical > bound * (1.0 + 1e-12) {
            holds = false;
        }
        per_sensor.push((empirical, bound));
    }
    Ok(CoherenceCheck { per_sensor, holds })
}

/// Empirical tail probability `P(| ||Ax||^2 - ||x||^2 | >= t ||x||^2)` over
/// fresh operator draws. The concentration statement is over the reals, so
/// the profiles must be real and the law subgaussian (gaussian or
/// Bernoulli).
pub fn empirical_concentration(
    opspec: &OperatorSpec,
    x: &Array1<Complex64>,
    t: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if !(0.0..1.0).contains(&t) || t == 0.0 {
        return Err(Error::Config(format!("t={t} outside (0,1)")));
    }
    if !matches!(opspec.law, RowLaw::Gaussian | RowLaw::BernoulliPm1) {
        return Err(Error::Unsupported(
            "concentration probe requires a subgaussian law (gaussian or bernoulli)".into(),
        ));
    }
    if opspec.profiles.max_imag() > 1e-12 {
        return Err(Error::Unsupported(
            "concentration statement assumes real profiles; got complex input".into(),
        ));
    }
    if x.len() != opspec.profiles.n() {
        return Err(Error::Dimension(format!(
            "x length {} vs N={}",
            x.len(),
            opspec.profiles.n()
        )));
    }
    if trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    let xnorm2 = x.iter().map(|z| z.norm_sqr()).sum::<f64>();
    if xnorm2 == 0.0 {
        return Err(Error::Config("x must be nonzero".into()));
    }
    let violations: usize = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let op = opspec
                .assemble_seeded(rng::derive_seed(seed, &[trial as u64]))
                .expect("assembly from validated spec");
            let ax = op.apply(x).expect("dimensions validated");
            let dev = (ax.iter().map(|z| z.norm_sqr()).sum::<f64>() - xnorm2).abs();
            usize::from(dev >= t * xnorm2)
        })
        .sum();
    Ok(violations as f64 / trials as f64)
}

/// Monte-Carlo restricted isometry constant estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RicEstimate {
    pub mean: f64,
    pub max: f64,
    pub per_trial: Vec<f64>,
}

/// Estimate the order-`s` restricted isometry constant over `trials` fresh
/// operator draws. Per trial, `delta_s` is computed exactly: supports are
/// enumerated lexicographically and the extreme eigenvalue deviation of each
/// restricted Gram from the identity is taken. Guarded to `N <= 24`.
pub fn empirical_ric(
    opspec: &OperatorSpec,
    s: usize,
    trials: usize,
    seed: u64,
) -> Result<RicEstimate> {
    let n = opspec.profiles.n();
    if n > 24 {
        return Err(Error::GuardExceeded(format!(
            "empirical_ric enumerates all supports; N={n} exceeds the N<=24 guard"
        )));
    }
    if s == 0 || s > n {
        return Err(Error::Config(format!("s={s} outside 1..=N={n}")));
    }
    if trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    let per_trial: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<f64> {
            let op = opspec.assemble_seeded(rng::derive_seed(seed, &[trial as u64]))?;
            let a = crate::operator::densify(&op)?;
            let gram = dense::gram(&a);
            let mut delta = 0.0_f64;
            dense::for_each_combination(n, s, |support| {
                let mut sub = Array2::zeros((s, s));
                for (bi, &i) in support.iter().enumerate() {
                    for (bj, &j) in support.iter().enumerate() {
                        sub[(bi, bj)] = gram[(i, j)];
                    }
                }
                let eigs = dense::hermitian_eigenvalues(&sub).expect("square Hermitian");
                let lo = eigs.first().copied().unwrap_or(1.0);
                let hi = eigs.last().copied().unwrap_or(1.0);
                delta = delta.max((hi - 1.0).max(1.0 - lo));
            });
            Ok(delta)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean = per_trial.iter().sum::<f64>() / per_trial.len() as f64;
    let max = per_trial.iter().cloned().fold(0.0, f64::max);
    Ok(RicEstimate {
        mean,
        max,
        per_trial,
    })
}
