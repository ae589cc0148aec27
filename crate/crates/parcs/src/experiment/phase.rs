//! Phase-transition experiments: per-cell recovery trials over a
//! (m/N, s/m) grid, plus extraction of the 50%-success contour.

use super::config::PhaseConfig;
use super::output::fnv1a_hex;
use crate::error::{Error, Result};
use crate::partition::LevelPartition;
use crate::profiles::Scenario;
use crate::rng;
use crate::sampling::{assemble_distinct, assemble_identical, RowDistribution};
use crate::signals::draw_sparse;
use crate::solver::solve_bp;
use crate::LinearOperator;
use ndarray::Array1;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Success counts over one (scenario, C) grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub scenario: Scenario,
    pub c: usize,
    pub n: usize,
    pub m_values: Vec<usize>,
    /// Nominal s/m fractions of the s axis.
    pub s_fractions: Vec<f64>,
    /// Realized sparsity per cell, `s = round(m * fraction)`.
    pub s_values: Vec<Vec<usize>>,
    /// Successes per cell, indexed `[m][s]`.
    pub successes: Vec<Vec<u32>>,
    pub trials: u32,
    pub seed: u64,
    pub config_hash: String,
}

impl PhaseGrid {
    pub fn success_rate(&self, mi: usize, sj: usize) -> f64 {
        self.successes[mi][sj] as f64 / self.trials as f64
    }
}

/// Relative-error success test: `||x_hat - x|| <= threshold ||x||`, with the
/// zero-signal case succeeding iff `||x_hat|| <= threshold`. Closed
/// inequality on the boundary.
pub fn success_criterion(
    x_hat: &Array1<Complex64>,
    x: &Array1<Complex64>,
    threshold: f64,
) -> Result<bool> {
    if threshold <= 0.0 {
        return Err(Error::Config(format!("threshold={threshold} must be > 0")));
    }
    if x_hat.len() != x.len() {
        return Err(Error::Dimension(format!(
            "x_hat length {} vs x length {}",
            x_hat.len(),
            x.len()
        )));
    }
    let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let err = x_hat
        .iter()
        .zip(x.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(if xnorm == 0.0 {
        err <= threshold
    } else {
        err <= threshold * xnorm
    })
}

/// Scenario tag for seed derivation.
fn scenario_tag(scenario: Scenario) -> u64 {
    match scenario {
        Scenario::Distinct => 1,
        Scenario::Identical => 2,
    }
}

fn run_trial(
    config: &PhaseConfig,
    scenario: Scenario,
    c: usize,
    partition: &LevelPartition,
    m: usize,
    s: usize,
    path: &[u64],
) -> Result<bool> {
    let n = config.n;
    let profile_seed = rng::derive_seed(config.seed, &[path[0], path[1], path[2], path[3], path[4], 0]);
    let op_seed = rng::derive_seed(config.seed, &[path[0], path[1], path[2], path[3], path[4], 1]);
    let sig_seed = rng::derive_seed(config.seed, &[path[0], path[1], path[2], path[3], path[4], 2]);

    let needs_partition = config.family.uses_levels();
    let profiles = config.family.build(
        c,
        n,
        scenario,
        if needs_partition { Some(partition) } else { None },
        profile_seed,
    )?;
    let dist = RowDistribution::new(config.law, n);
    let op = match scenario {
        Scenario::Distinct => assemble_distinct(&profiles, &[dist], m, op_seed)?,
        Scenario::Identical => assemble_identical(&profiles, &dist, m, op_seed)?,
    };

    let x = if s == 0 {
        Array1::zeros(n)
    } else {
        draw_sparse(n, s, sig_seed, config.value_law)?.x
    };
    let y = op.apply(&x)?;
    let bp = config.solver.to_bp_config(0.0);
    let result = solve_bp(&op, &y, &bp)?;
    success_criterion(&result.x_hat, &x, config.success_threshold)
}

/// Run the full experiment: one grid per (scenario, C) pair, cells and
/// trials in parallel with per-trial seed paths, accumulation in
/// deterministic order.
pub fn run_phase_transition(config: &PhaseConfig) -> Result<Vec<PhaseGrid>> {
    config.validate()?;
    let m_values = config.m_grid();
    let s_fractions: Vec<f64> = (1..=config.s_count)
        .map(|j| j as f64 / config.s_count as f64)
        .collect();
    let config_hash = fnv1a_hex(&serde_json::to_string(config)?);

    let mut grids = Vec::new();
    for &scenario in &config.scenarios {
        for &c in &config.c_values {
            let partition = LevelPartition::contiguous(config.n, c)?;
            let s_values: Vec<Vec<usize>> = m_values
                .iter()
                .map(|&m| {
                    s_fractions
                        .iter()
                        .map(|f| ((m as f64 * f).round() as usize).min(config.n))
                        .collect()
                })
                .collect();

            // flat (cell, trial) task list
            let mut tasks = Vec::new();
            for (mi, &m) in m_values.iter().enumerate() {
                for (sj, &s) in s_values[mi].iter().enumerate() {
                    for trial in 0..config.trials {
                        tasks.push((mi, sj, m, s, trial));
                    }
                }
            }
            let outcomes: Result<Vec<(usize, usize, bool)>> = tasks
                .par_iter()
                .map(|&(mi, sj, m, s, trial)| {
                    let path = [
                        scenario_tag(scenario),
                        c as u64,
                        mi as u64,
                        sj as u64,
                        trial as u64,
                    ];
                    run_trial(config, scenario, c, &partition, m, s, &path)
                        .map(|ok| (mi, sj, ok))
                })
                .collect();
            let mut successes = vec![vec![0u32; config.s_count]; m_values.len()];
            for (mi, sj, ok) in outcomes? {
                if ok {
                    successes[mi][sj] += 1;
                }
            }
            grids.push(PhaseGrid {
                scenario,
                c,
                n: config.n,
                m_values: m_values.clone(),
                s_fractions: s_fractions.clone(),
                s_values,
                successes,
                trials: config.trials,
                seed: config.seed,
                config_hash: config_hash.clone(),
            });
        }
    }
    Ok(grids)
}

/// Where a success column crosses 50%, in s/m units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Crossing {
    At(f64),
    /// Success stays at or above 50% across the whole column (open-ended
    /// above).
    AboveAll,
    /// Success is below 50% already at the smallest sparsity.
    BelowAll,
}

impl Crossing {
    /// Numeric value for curve comparison: the top of the grid for
    /// `AboveAll`, zero for `BelowAll`.
    pub fn value(&self) -> f64 {
        match self {
            Crossing::At(v) => *v,
            Crossing::AboveAll => 1.0,
            Crossing::BelowAll => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HalfCurvePoint {
    pub m_over_n: f64,
    pub crossing: Crossing,
}

/// Pool-adjacent-violators: least-squares non-increasing fit.
fn isotonic_non_increasing(rates: &[f64], weights: &[f64]) -> Vec<f64> {
    // classic PAVA on the negated sequence (non-decreasing)
    let mut level: Vec<f64> = rates.iter().map(|r| -r).collect();
    let mut weight = weights.to_vec();
    let mut size = vec![1usize; rates.len()];
    let mut blocks = 0usize;
    for i in 0..rates.len() {
        level[blocks] = -rates[i];
        weight[blocks] = weights[i];
        size[blocks] = 1;
        blocks += 1;
        while blocks > 1 && level[blocks - 2] > level[blocks - 1] {
            let w = weight[blocks - 2] + weight[blocks - 1];
            let v = (level[blocks - 2] * weight[blocks - 2]
                + level[blocks - 1] * weight[blocks - 1])
                / w;
            level[blocks - 2] = v;
            weight[blocks - 2] = w;
            size[blocks - 2] += size[blocks - 1];
            blocks -= 1;
        }
    }
    let mut out = Vec::with_capacity(rates.len());
    for b in 0..blocks {
        for _ in 0..size[b] {
            out.push(-level[b]);
        }
    }
    out
}

/// Extract the 50% contour: per m-column, merge duplicate sparsity cells,
/// apply isotonic (non-increasing in s) smoothing, and interpolate the 0.5
/// crossing linearly.
pub fn extract_half_curve(grid: &PhaseGrid) -> Vec<HalfCurvePoint> {
    let mut curve = Vec::with_capacity(grid.m_values.len());
    for (mi, &m) in grid.m_values.iter().enumerate() {
        // merge cells with identical realized s
        let mut xs: Vec<f64> = Vec::new();
        let mut rates: Vec<f64> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        let mut j = 0;
        while j < grid.s_values[mi].len() {
            let s = grid.s_values[mi][j];
            let mut successes = 0u32;
            let mut count = 0u32;
            while j < grid.s_values[mi].len() && grid.s_values[mi][j] == s {
                successes += grid.successes[mi][j];
                count += grid.trials;
                j += 1;
            }
            xs.push(s as f64 / m as f64);
            rates.push(successes as f64 / count as f64);
            weights.push(count as f64);
        }
        let smooth = isotonic_non_increasing(&rates, &weights);
        let crossing = if smooth.iter().all(|&p| p >= 0.5) {
            Crossing::AboveAll
        } else if smooth[0] < 0.5 {
            Crossing::BelowAll
        } else {
            let k = smooth.iter().position(|&p| p < 0.5).unwrap();
            let (x0, p0) = (xs[k - 1], smooth[k - 1]);
            let (x1, p1) = (xs[k], smooth[k]);
            let t = if p0 - p1 > 0.0 { (p0 - 0.5) / (p0 - p1) } else { 0.5 };
            Crossing::At(x0 + t * (x1 - x0))
        };
        curve.push(HalfCurvePoint {
            m_over_n: m as f64 / grid.n as f64,
            crossing,
        });
    }
    curve
}
