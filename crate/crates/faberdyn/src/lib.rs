//! Faber-polynomial propagation of non-unitary quantum lattice dynamics.
//!
//! This crate evolves states under `exp(-iHt)` for Hamiltonians `H` that need
//! not be Hermitian, using truncated Faber-polynomial expansions whose
//! coefficients are built from a bounding ellipse of the numerical range.
//! On top of that kernel it implements three application layers:
//!
//! * [`gaussian`] — free-fermion (Gaussian) states on non-reciprocal hopping
//!   chains, tracked through their single-particle orbital matrix;
//! * [`manybody`] — interacting non-reciprocal spin-1/2 chains in a fixed
//!   magnetization sector;
//! * [`trajectories`] — quantum-jump unravelling of Lindblad master equations
//!   with a non-Hermitian effective Hamiltonian between jumps.
//!
//! [`operators`] supplies the sparse operators and lattice models,
//! [`faber`] the expansion kernel, and [`oracles`] slow reference
//! implementations (dense exponentials, dense Lindblad integration, closed-form
//! spectra and hydrodynamic profiles) used to validate everything else.

pub mod faber;
pub mod gaussian;
pub mod manybody;
pub mod operators;
pub mod oracles;
pub mod trajectories;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An operator or state was given with inconsistent dimensions.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Spectral bounds were malformed (non-finite or inverted).
    #[error("invalid spectral bounds: {0}")]
    InvalidBounds(String),

    /// The spectral bounding box has zero extent in both directions, so no
    /// bounding ellipse can be built.
    #[error("spectral bounding box is a single point; nothing to expand")]
    ZeroSpectralBox,

    /// A parameter was outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A problem exceeded the size cap of a dense reference routine.
    #[error("dimension {dim} exceeds the cap {cap} for {routine}")]
    DimensionCap {
        routine: &'static str,
        dim: usize,
        cap: usize,
    },

    /// A numerical safety check failed (norm growth, trace drift, ...).
    #[error("numerical check failed: {0}")]
    Numerical(String),

    /// A dense linear-algebra backend call failed.
    #[error("linear algebra backend: {0}")]
    LinAlg(#[from] ndarray_linalg::error::LinalgError),

    /// File I/O while reading or writing operator files.
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    /// A stored operator file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
