//! JSON-facing experiment configuration. Field defaults follow the desk-scale
//! protocol: 16x16 phase grids, 50 trials per cell, relative success
//! threshold 1e-3.

use crate::error::{Error, Result};
use crate::partition::LevelPartition;
use crate::profiles::{
    dft_isometry, make_profiles, BandWindow, ProfileFamilySpec, ProfileKind, Scenario,
    SensorProfileSet,
};
use crate::sampling::RowLaw;
use crate::signals::ValueLaw;
use crate::solver::BpConfig;
use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

/// Isometry choice for the piecewise-constant family.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IsometryConfig {
    /// `"dft"` (incoherent) or `"identity"` (maximally coherent).
    Preset(String),
    /// Explicit C x D matrix as `[re, im]` pairs.
    Matrix(Vec<Vec<[f64; 2]>>),
}

/// Profile family selector, one-to-one with the built-in families.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilyConfig {
    Banded {
        #[serde(default = "one")]
        r1: usize,
        #[serde(default = "one")]
        r2: usize,
        #[serde(default)]
        window: BandWindow,
    },
    PiecewiseConstant {
        #[serde(default = "dft_preset")]
        v: IsometryConfig,
    },
    Oscillatory,
    CirculantUnitModulus {
        #[serde(default)]
        conjugate_symmetric: bool,
    },
    Custom {
        kind: ProfileKind,
        vectors: Vec<Vec<[f64; 2]>>,
    },
}

fn one() -> usize {
    1
}

fn dft_preset() -> IsometryConfig {
    IsometryConfig::Preset("dft".into())
}

impl FamilyConfig {
    pub fn uses_levels(&self) -> bool {
        matches!(
            self,
            FamilyConfig::Banded { .. } | FamilyConfig::PiecewiseConstant { .. }
        )
    }

    pub fn is_diagonal(&self) -> bool {
        match self {
            FamilyConfig::CirculantUnitModulus { .. } => false,
            FamilyConfig::Custom { kind, .. } => *kind == ProfileKind::Diagonal,
            _ => true,
        }
    }

    pub fn to_spec(&self, c: usize, d: usize) -> Result<ProfileFamilySpec> {
        Ok(match self {
            FamilyConfig::Banded { r1, r2, window } => ProfileFamilySpec::Banded {
                r1: *r1,
                r2: *r2,
                window: *window,
            },
            FamilyConfig::PiecewiseConstant { v } => {
                let v = match v {
                    IsometryConfig::Preset(name) => match name.as_str() {
                        "dft" => dft_isometry(c, d)?,
                        "identity" => {
                            if d > c {
                                return Err(Error::Config(format!(
                                    "identity isometry needs D <= C (got C={c}, D={d})"
                                )));
                            }
                            Array2::from_shape_fn((c, d), |(i, j)| {
                                if i == j {
                                    Complex64::new(1.0, 0.0)
                                } else {
                                    Complex64::ZERO
                                }
                            })
                        }
                        other => {
                            return Err(Error::Config(format!(
                                "unknown isometry preset {other:?} (expected \"dft\" or \"identity\")"
                            )))
                        }
                    },
                    IsometryConfig::Matrix(rows) => {
                        let nrows = rows.len();
                        let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
                        if nrows != c || ncols != d || rows.iter().any(|r| r.len() != ncols) {
                            return Err(Error::Config(format!(
                                "isometry matrix must be C x D = {c} x {d}"
                            )));
                        }
                        Array2::from_shape_fn((c, d), |(i, j)| {
                            Complex64::new(rows[i][j][0], rows[i][j][1])
                        })
                    }
                };
                ProfileFamilySpec::PiecewiseConstant { v }
            }
            FamilyConfig::Oscillatory => ProfileFamilySpec::Oscillatory,
            FamilyConfig::CirculantUnitModulus {
                conjugate_symmetric,
            } => ProfileFamilySpec::CirculantUnitModulus {
                conjugate_symmetric: *conjugate_symmetric,
            },
            FamilyConfig::Custom { kind, vectors } => ProfileFamilySpec::Custom {
                kind: *kind,
                vectors: vectors
                    .iter()
                    .map(|v| {
                        Array1::from_iter(v.iter().map(|[re, im]| Complex64::new(*re, *im)))
                    })
                    .collect(),
            },
        })
    }

    /// Build profiles for the given geometry, routing the partition to the
    /// families that need one.
    pub fn build(
        &self,
        c: usize,
        n: usize,
        scenario: Scenario,
        partition: Option<&LevelPartition>,
        seed: u64,
    ) -> Result<SensorProfileSet> {
        let d = partition.map(|p| p.d()).unwrap_or(c);
        let spec = self.to_spec(c, d)?;
        make_profiles(&spec, partition, c, n, scenario, seed)
    }
}

/// Level-partition selector.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PartitionChoice {
    /// D = C contiguous near-equal blocks.
    #[default]
    EqualToC,
    /// Fixed number of contiguous blocks.
    D(usize),
    /// Explicit level index sets (zero-based).
    Levels(Vec<Vec<usize>>),
}

impl PartitionChoice {
    pub fn build(&self, n: usize, c: usize) -> Result<LevelPartition> {
        match self {
            PartitionChoice::EqualToC => LevelPartition::contiguous(n, c),
            PartitionChoice::D(d) => LevelPartition::contiguous(n, *d),
            PartitionChoice::Levels(levels) => LevelPartition::new(n, levels.clone()),
        }
    }
}

/// Basis-pursuit settings as they appear in config files.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SolverSettings {
    #[serde(default)]
    pub max_iterations: Option<usize>,
    #[serde(default)]
    pub tol_rel: Option<f64>,
    #[serde(default)]
    pub tol_feas_rel: Option<f64>,
}

impl SolverSettings {
    pub fn to_bp_config(&self, eta: f64) -> BpConfig {
        let defaults = BpConfig::default();
        BpConfig {
            eta,
            max_iterations: self.max_iterations.unwrap_or(defaults.max_iterations),
            tau: None,
            sigma: None,
            tol_rel: self.tol_rel.unwrap_or(defaults.tol_rel),
            tol_feas_rel: self.tol_feas_rel.unwrap_or(defaults.tol_feas_rel),
        }
    }

    /// Experiment-grade settings: phase sweeps decide success at 1e-3, so a
    /// shorter iteration budget and looser tolerances suffice per solve.
    pub fn phase_defaults() -> Self {
        Self {
            max_iterations: Some(2000),
            tol_rel: Some(1e-7),
            tol_feas_rel: Some(1e-7),
        }
    }
}

/// Phase-transition experiment over a (m/N, s/m) grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseConfig {
    pub n: usize,
    pub c_values: Vec<usize>,
    pub scenarios: Vec<Scenario>,
    pub family: FamilyConfig,
    #[serde(default)]
    pub partition: PartitionChoice,
    pub law: RowLaw,
    #[serde(default)]
    pub value_law: ValueLaw,
    #[serde(default = "sixteen")]
    pub m_count: usize,
    #[serde(default = "sixteen")]
    pub s_count: usize,
    #[serde(default = "fifty")]
    pub trials: u32,
    #[serde(default = "default_threshold")]
    pub success_threshold: f64,
    pub seed: u64,
    #[serde(default = "SolverSettings::phase_defaults")]
    pub solver: SolverSettings,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn sixteen() -> usize {
    16
}

fn fifty() -> u32 {
    50
}

fn default_threshold() -> f64 {
    1e-3
}

impl PhaseConfig {
    pub fn validate(&self) -> Result<()> {
        if self.c_values.is_empty() || self.scenarios.is_empty() {
            return Err(Error::Config("c_values and scenarios must be nonempty".into()));
        }
        if self.c_values.iter().any(|&c| c == 0 || c > self.n) {
            return Err(Error::Config("every C must satisfy 1 <= C <= N".into()));
        }
        if self.m_count == 0 || self.s_count == 0 {
            return Err(Error::Config("grid resolution must be >= 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.success_threshold <= 0.0 {
            return Err(Error::Config("success_threshold must be > 0".into()));
        }
        Ok(())
    }

    /// Shared m grid: multiples of lcm(c_values) spanning (0, N].
    pub fn m_grid(&self) -> Vec<usize> {
        let base = self.c_values.iter().fold(1usize, |acc, &c| lcm(acc, c));
        let cap = (self.n / base).max(1) * base;
        (1..=self.m_count)
            .map(|k| {
                let target = self.n as f64 * k as f64 / self.m_count as f64;
                let rounded = (target / base as f64).round() as usize * base;
                rounded.clamp(base, cap)
            })
            .collect()
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Bound-sweep experiment: level factors as a function of C.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundsSweepConfig {
    pub n: usize,
    pub c_values: Vec<usize>,
    pub scenarios: Vec<Scenario>,
    pub family: FamilyConfig,
    #[serde(default)]
    pub partition: PartitionChoice,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

/// Concentration experiment over a (t, m) grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcentrationConfig {
    pub n: usize,
    pub c: usize,
    pub m_values: Vec<usize>,
    pub t_values: Vec<f64>,
    #[serde(default = "ten_thousand")]
    pub trials: usize,
    #[serde(default = "gaussian_law")]
    pub law: RowLaw,
    pub family: FamilyConfig,
    #[serde(default)]
    pub partition: PartitionChoice,
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn ten_thousand() -> usize {
    10_000
}

fn gaussian_law() -> RowLaw {
    RowLaw::Gaussian
}

/// Single solve request.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveConfig {
    pub n: usize,
    pub c: usize,
    pub scenario: Scenario,
    pub law: RowLaw,
    pub m: usize,
    pub family: FamilyConfig,
    #[serde(default)]
    pub partition: PartitionChoice,
    pub signal: SignalConfig,
    #[serde(default)]
    pub eta: f64,
    /// l2 norm of the additive gaussian noise (0 disables noise).
    #[serde(default)]
    pub noise_norm: f64,
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignalConfig {
    pub s: usize,
    #[serde(default)]
    pub value_law: ValueLaw,
    /// Draw from the sparse-and-distributed model when set.
    #[serde(default)]
    pub lambda: Option<f64>,
}

/// Profile construction check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileCheckConfig {
    pub n: usize,
    pub c: usize,
    pub scenario: Scenario,
    pub family: FamilyConfig,
    #[serde(default)]
    pub partition: PartitionChoice,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn m_grid_is_lcm_aligned() {
        let config: PhaseConfig = serde_json::from_str(
            r#"{
                "n": 64,
                "c_values": [1, 2, 4],
                "scenarios": ["distinct"],
                "family": {"family": "banded"},
                "law": "subsampled_dft",
                "seed": 7
            }"#,
        )
        .unwrap();
        config.validate().unwrap();
        let grid = config.m_grid();
        assert_eq!(grid.len(), 16);
        assert_eq!(grid[0], 4);
        assert_eq!(grid[15], 64);
        assert!(grid.iter().all(|m| m % 4 == 0));
        assert_eq!(config.trials, 50);
        assert_eq!(config.success_threshold, 1e-3);
        assert_eq!(config.solver.max_iterations, Some(2000));
    }

    #[test]
    fn family_config_builds_profiles() {
        let family: FamilyConfig = serde_json::from_str(
            r#"{"family": "piecewise_constant", "v": "dft"}"#,
        )
        .unwrap();
        let partition = LevelPartition::contiguous(16, 4).unwrap();
        let set = family
            .build(4, 16, Scenario::Identical, Some(&partition), 0)
            .unwrap();
        assert!(set.verify_joint_isometry() <= 1e-10);

        let custom: FamilyConfig = serde_json::from_str(
            r#"{"family": "custom", "kind": "diagonal",
                "vectors": [[[1.0,0],[2.0,0]],[[2.0,0],[1.0,0]]]}"#,
        )
        .unwrap();
        let set = custom.build(2, 2, Scenario::Distinct, None, 0).unwrap();
        assert!(set.verify_joint_isometry() <= 1e-12);
    }
}
