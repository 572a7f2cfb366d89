//! Numerics for three-photon polarization ququarts.
//!
//! A ququart is a pure state of three indistinguishable photons sharing one
//! spatial mode, `(C₁, C₂, C₃, C₄)` over the configurations `3H`, `2H1V`,
//! `1H2V` and `3V`. The crate covers reduced density matrices and
//! entanglement measures, the one-photon / two-photon Schmidt decomposition,
//! polarization basis rotations, simulated coincidence measurements with
//! state reconstruction, and entropy maps over the faces of the amplitude
//! tetrahedron.

pub mod basis;
pub mod error;
pub mod geometry;
pub mod measurement;
pub mod optimize;
pub mod reductions;
pub mod schmidt;
pub mod state;
pub mod stokes;
pub mod sweep;

pub use basis::{basis_45, ctilde_23, ideal_reduce, rotate_state, BasisRotation, IdealReduction};
pub use error::{Error, Result};
pub use reductions::{density_matrix, metrics, partial_trace, spectrum, DensityMatrix, ReducedSpectrum};
pub use schmidt::{schmidt_decompose, SchmidtDecomposition, TwoPhotonMode};
pub use state::{make_state, QuquartState, SinglePhotonMode, WaveTensor};
pub use stokes::StokesVector;
