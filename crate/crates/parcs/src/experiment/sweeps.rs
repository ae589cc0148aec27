//! Bound sweeps (level factors as a function of C) and concentration grids.

use super::config::{BoundsSweepConfig, ConcentrationConfig};
use crate::bounds::{empirical_concentration, upsilon_dist, upsilon_idt, zeta};
use crate::error::{Error, Result};
use crate::profiles::Scenario;
use crate::rng;
use crate::sampling::{OperatorSpec, RowDistribution, RowLaw};
use ndarray::Array1;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub c: usize,
    pub d: usize,
    pub quantity: String,
    pub value: f64,
}

/// Evaluate the level factors per C. Exact formula evaluation; the only
/// randomness is the profile draw for stochastic families.
pub fn run_bounds_sweep(config: &BoundsSweepConfig) -> Result<Vec<SweepRow>> {
    if !config.family.is_diagonal() {
        return Err(Error::Config(
            "bounds sweep requires a diagonal profile family".into(),
        ));
    }
    if config.c_values.is_empty() || config.scenarios.is_empty() {
        return Err(Error::Config("c_values and scenarios must be nonempty".into()));
    }
    let mut rows = Vec::new();
    for &c in &config.c_values {
        let partition = config.partition.build(config.n, c)?;
        let d = partition.d();
        for &scenario in &config.scenarios {
            let profiles = config.family.build(
                c,
                config.n,
                scenario,
                Some(&partition),
                rng::derive_seed(config.seed, &[c as u64]),
            )?;
            let (name, value) = match scenario {
                Scenario::Distinct => ("upsilon_dist", upsilon_dist(&profiles, &partition)?),
                Scenario::Identical => ("upsilon_idt", upsilon_idt(&profiles, &partition)?),
            };
            rows.push(SweepRow {
                c,
                d,
                quantity: name.into(),
                value,
            });
            rows.push(SweepRow {
                c,
                d,
                quantity: format!("xi_dist_{scenario:?}").to_lowercase(),
                value: profiles.xi_dist(),
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub t: f64,
    pub m: usize,
    pub empirical_tail: f64,
    pub bound: f64,
}

/// Empirical concentration tails against the closed-form bound
/// `2 exp(-zeta t^2 m)` over a (t, m) grid.
pub fn run_concentration(config: &ConcentrationConfig) -> Result<Vec<ConcentrationRow>> {
    if !matches!(config.law, RowLaw::Gaussian | RowLaw::BernoulliPm1) {
        return Err(Error::Config(
            "concentration requires a subgaussian law (gaussian or bernoulli_pm1)".into(),
        ));
    }
    if config.m_values.iter().any(|&m| m == 0 || m % config.c != 0) {
        return Err(Error::Config(format!(
            "every m must be a positive multiple of C={}",
            config.c
        )));
    }
    let partition = config.partition.build(config.n, config.c)?;
    let profiles = config.family.build(
        config.c,
        config.n,
        Scenario::Distinct,
        if config.family.uses_levels() {
            Some(&partition)
        } else {
            None
        },
        rng::derive_seed(config.seed, &[0x70726f66]),
    )?;
    if profiles.max_imag() > 1e-12 {
        return Err(Error::Config(
            "concentration requires real profiles; pick a real family".into(),
        ));
    }

    // fixed real probe vector, unit norm
    let mut xrng = rng::stream(config.seed, &[0x78766563]);
    let mut x = Array1::from_iter(
        (0..config.n).map(|_| Complex64::new(xrng.sample::<f64, _>(StandardNormal), 0.0)),
    );
    let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    x.mapv_inplace(|z| z / norm);

    let alpha = RowDistribution::new(config.law, config.n)
        .subgaussian_alpha()
        .expect("subgaussian law");
    let zeta_val = zeta(alpha, alpha, profiles.xi_dist().max(1.0))?;

    let mut rows = Vec::new();
    for (ti, &t) in config.t_values.iter().enumerate() {
        for &m in &config.m_values {
            let spec = OperatorSpec::new(
                Scenario::Distinct,
                config.law,
                m,
                0,
                profiles.clone(),
            );
            let tail = empirical_concentration(
                &spec,
                &x,
                t,
                config.trials,
                rng::derive_seed(config.seed, &[ti as u64, m as u64]),
            )?;
            rows.push(ConcentrationRow {
                t,
                m,
                empirical_tail: tail,
                bound: 2.0 * (-zeta_val * t * t * m as f64).exp(),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sweep_matches_single_point_calls() {
        let config: BoundsSweepConfig = serde_json::from_str(
            r#"{
                "n": 64,
                "c_values": [1, 2, 4],
                "scenarios": ["identical"],
                "family": {"family": "oscillatory"},
                "seed": 0
            }"#,
        )
        .unwrap();
        let rows = run_bounds_sweep(&config).unwrap();
        let upsilons: Vec<&SweepRow> =
            rows.iter().filter(|r| r.quantity == "upsilon_idt").collect();
        assert_eq!(upsilons.len(), 3);
        for row in upsilons {
            let partition = crate::LevelPartition::contiguous(64, row.c).unwrap();
            let profiles = crate::make_profiles(
                &crate::ProfileFamilySpec::Oscillatory,
                None,
                row.c,
                64,
                Scenario::Identical,
                rng::derive_seed(0, &[row.c as u64]),
            )
            .unwrap();
            let direct = upsilon_idt(&profiles, &partition).unwrap();
            assert_abs_diff_eq!(row.value, direct, epsilon = 0.0);
        }
        // degenerate C=1 sweep
        let single: BoundsSweepConfig = serde_json::from_str(
            r#"{
                "n": 16, "c_values": [1], "scenarios": ["identical"],
                "family": {"family": "oscillatory"}, "seed": 0
            }"#,
        )
        .unwrap();
        let rows = run_bounds_sweep(&single).unwrap();
        assert_abs_diff_eq!(
            rows.iter().find(|r| r.quantity == "upsilon_idt").unwrap().value,
            1.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn sweep_rejects_circulant_family() {
        let config: BoundsSweepConfig = serde_json::from_str(
            r#"{
                "n": 16, "c_values": [2], "scenarios": ["identical"],
                "family": {"family": "circulant_unit_modulus"}, "seed": 0
            }"#,
        )
        .unwrap();
        assert!(run_bounds_sweep(&config).is_err());
    }

    #[test]
    fn concentration_grid_bound_formula() {
        let config: ConcentrationConfig = serde_json::from_str(
            r#"{
                "n": 16, "c": 2, "m_values": [16, 32], "t_values": [0.5, 0.9],
                "trials": 200,
                "family": {"family": "banded"},
                "seed": 3
            }"#,
        )
        .unwrap();
        let rows = run_concentration(&config).unwrap();
        assert_eq!(rows.len(), 4);
        // bound column is 2 exp(-zeta t^2 m), recomputed offline
        let partition = crate::LevelPartition::contiguous(16, 2).unwrap();
        let profiles = config
            .family
            .build(2, 16, Scenario::Distinct, Some(&partition), rng::derive_seed(3, &[0x70726f66]))
            .unwrap();
        let z = zeta(0.5, 0.5, profiles.xi_dist().max(1.0)).unwrap();
        for row in &rows {
            assert_abs_diff_eq!(
                row.bound,
                2.0 * (-z * row.t * row.t * row.m as f64).exp(),
                epsilon = 1e-14
            );
            assert!(row.empirical_tail <= row.bound + 1e-12);
        }
        // t = 0.9 at m = 32 should concentrate hard
        let last = rows.iter().find(|r| r.t == 0.9 && r.m == 32).unwrap();
        assert!(last.empirical_tail <= 0.05);
    }
}
