//! Spectral Galerkin solver for the two-dimensional stochastic Navier–Stokes
//! equations with transport noise and Navier slip on the unit disk.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod bessel;
pub mod error;
pub mod field;
pub mod galerkin;
pub mod grid;
pub mod noise;
pub mod ops;
pub mod oracle;
pub mod quadrature;
pub mod vorticity;

pub use basis::{find_sigmas, stokes_spectrum, BasisSet, ModeId, Parity, StokesMode};
pub use error::{Error, Result};
pub use field::{BoundaryTrace, ScalarField, VectorField, VectorJet};
pub use galerkin::{
    ensemble, run_trajectory, run_with_path, CorrectorForm, EnsembleSummary, GalerkinModel,
    InitialCondition, Scheme, SimConfig, SolverState, SpectralSystem, TrajectoryOutput,
};
pub use grid::DiskGrid;
pub use noise::{refine, sample_path, BrownianPath, BumpParams, NoiseModel, XiField};
pub use ops::Operators;
pub use vorticity::{
    run_vorticity, run_vorticity_trajectory, viscosity_sweep, DirichletBasis, SweepReport,
    VorticityModel, VorticityOutput,
};

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
