//! Localized transverse eigenmodes, dispersion relations, and group
//! velocities of a weak probe field guided by a finite control beam in an
//! EIT medium, with an independent split-step propagation oracle.
//!
//! A negative probe detuning turns the transverse refractive-index profile
//! under a focused control beam into an effective waveguide. The solver
//! discretizes the resulting radial eigenproblem per orbital channel m,
//! differentiates the eigenvalues against detuning for per-mode group
//! velocities, expands arbitrary input fields in the mode basis, and
//! cross-validates stationarity and the dispersion relation with Fourier
//! split-step propagation that shares no machinery with the eigensolver.

pub mod bpm;
pub mod config;
pub mod decompose;
pub mod dispersion;
pub mod eigensolver;
pub mod error;
pub mod field;
pub mod grid;
pub mod output;
pub mod profile;
pub mod tridiag;

pub use config::{Detuning, MediumBeamConfig, SPEED_OF_LIGHT};
pub use decompose::{azimuthal_split, decompose, project, synthesize, ModeBasis, ModeExpansion};
pub use dispersion::{
    beam_size_asymptotics, group_velocity, hellmann_feynman_slope, sweep, DispersionTable,
};
pub use eigensolver::{
    assemble_operator, auto_truncation_radius, count_nodes, solve_spectrum, SpectrumRequest,
    SpectrumSolution, TransverseMode,
};
pub use error::{Result, SlowlightError};
pub use field::Field2D;
pub use grid::RadialGrid;
pub use profile::ControlProfile;
