//! s-parameterized phase-space quantization on a truncated Fock space.
//!
//! * [`fock`]: ladder operators, coherent states, displacement, density matrices.
//! * [`ordering`]: symbolic s-ordered Gaussian kernels, reordering and realization.
//! * [`quasiprob`]: s-symbols on phase-space grids and reconstruction of states.
//! * [`statespec`]: the state description language used by the CLI.
//! * [`verify`]: the identity checks bundled as a report.

pub mod error;
pub mod fock;
pub mod ordering;
pub mod quasiprob;
pub mod statespec;
pub mod verify;

pub use error::{Error, Result};
pub use fock::{DensityMatrix, FockOperator, FockVector, PhasePoint, DEFAULT_DIM};
pub use ordering::{OrderingParameter, SOrderedGaussian};
pub use quasiprob::{PhaseGrid, SymbolField};
pub use statespec::{parse, StateExpr};
