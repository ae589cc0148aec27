//! parcs — a numerical laboratory for compressed sensing with parallel
//! (multi-sensor) acquisition.
//!
//! The crate builds sensor-profile matrix families and stacked multi-sensor
//! measurement operators, solves basis pursuit for complex data, evaluates
//! the profile-dependent quantities entering the multi-sensor measurement
//! conditions, and runs phase-transition, bound-sweep, and concentration
//! experiments with seeded, reproducible output.
//!
//! Start with the `examples/` directory: each example exercises one
//! capability end to end (`cargo run --release -p parcs --example
//! basis_pursuit`, etc.). The `parcs` binary exposes the same experiments as
//! JSON-configured subcommands.

pub mod bounds;
pub mod dense;
pub mod error;
pub mod experiment;
pub mod fft;
pub mod operator;
pub mod partition;
pub mod profiles;
pub mod rng;
pub mod sampling;
pub mod signals;
pub mod solver;

pub use error::{Error, Result};
pub use operator::{DenseMatrixOperator, LinearOperator};
pub use partition::LevelPartition;
pub use profiles::{
    make_profiles, BandWindow, ProfileFamilySpec, ProfileKind, Scenario, SensorProfileSet,
};
pub use sampling::{
    assemble_distinct, assemble_identical, draw_rows, sparsify_in_transform, MeasurementOperator,
    OperatorSpec, OrthogonalTransform, RowDistribution, RowLaw,
};
pub use signals::{
    best_distributed_error, best_s_term_error, draw_sparse, draw_sparse_distributed, SignalModel,
    SparseSignal, ValueLaw,
};
pub use solver::{recovery_error, reference_solve, solve_bp, BpConfig, BpResult};
