//! Experiment harness: phase-transition sweeps, bound sweeps, concentration
//! grids, single solves, and profile checks, all JSON-configured with
//! CSV/JSON emission.

pub mod config;
pub mod output;
pub mod phase;
pub mod runner;
pub mod sweeps;

pub use config::{
    BoundsSweepConfig, ConcentrationConfig, FamilyConfig, PartitionChoice, PhaseConfig,
    ProfileCheckConfig, SignalConfig, SolveConfig, SolverSettings,
};
pub use output::{fnv1a_hex, output_paths};
pub use phase::{
    extract_half_curve, run_phase_transition, success_criterion, Crossing, HalfCurvePoint,
    PhaseGrid,
};
pub use runner::{run_profile_check, run_solve, ProfileCheckReport, SolveReport};
pub use sweeps::{run_bounds_sweep, run_concentration, ConcentrationRow, SweepRow};
