//! Matrix-product purifications of one-dimensional thermal states.
//!
//! This crate builds thermofield-double purifications of Gibbs states as
//! matrix product states over a doubled local space, evolves them in
//! imaginary time with truncated Trotter-gate sweeps, and measures Rényi
//! entanglement entropies and bond-dimension growth as functions of inverse
//! temperature. Closed-form scaling predictions and rigorous low-rank
//! approximation bounds live alongside the numerics so that runs can be
//! checked against theory, and small systems are cross-checked against
//! exact-diagonalization and free-fermion references.
//!
//! Module map:
//!
//! - [`tensor`]: dense multi-index tensors, contraction, truncated SVD.
//! - [`mps`]: the purification MPS, canonical forms, Schmidt spectra,
//!   entropies, truncation, dense conversion, expectation values.
//! - [`models`]: the four lattice Hamiltonians as sums of two-site terms.
//! - [`evolution`]: Trotter plans, gate exponentials, imaginary-time TEBD.
//! - [`theory`]: entropy scaling predictions and bond-dimension bounds.
//! - [`oracle`]: exact diagonalization and free-fermion references.
//! - [`fitting`]: scaling fits, truncation-dimension extraction,
//!   saturation detection.
//! - [`checkpoint`]: bit-exact state persistence.
//!
//! # Conventions
//!
//! All tensor data is stored row-major (last index fastest). The doubled
//! local index of a purification site fuses the physical index `s` and the
//! ancilla index `a` as `q = s * d + a` (physical major). Dense state
//! vectors order sites with site 1 most significant. Entropies use natural
//! logarithms throughout.

pub mod checkpoint;
mod error;
pub mod evolution;
pub mod fitting;
mod linalg;
pub mod models;
pub mod mps;
pub mod oracle;
pub mod tensor;
pub mod theory;

pub use error::{Error, Result};
pub use evolution::{EvolutionConfig, EvolutionSnapshot, TrotterPlan};
pub use fitting::{ScalingFit, Series};
pub use models::{BondTerm, ModelKind, ModelSpec};
pub use mps::{BondSpectrum, PurificationMPS};
pub use tensor::{DenseTensor, SvdResult};

/// Sets the number of threads used by the dense linear-algebra kernels.
///
/// `0` or `1` selects sequential execution. This is a process-global switch.
pub fn set_threads(n: usize) {
    if n <= 1 {
        faer::set_global_parallelism(faer::Par::Seq);
    } else {
        faer::set_global_parallelism(faer::Par::rayon(n));
    }
}
