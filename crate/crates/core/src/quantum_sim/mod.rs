//! Minimal exact state-vector backend.
//!
//! Only what the auction needs: GHZ-family preparation, phased Pauli strings,
//! projection onto a Pauli-encoded basis, and BB84 decoys.

mod basis;
mod pauli;
mod state;

pub use basis::{measure_in_encoded_basis, EncodedBasis};
pub use pauli::{equal_mod_phase, pauli_product, PauliLetter, Phase, PhasedPauliString};
pub use state::{apply_pauli, measure_decoy, prepare_ghz, Basis, DecoyQubit, StateVector};

/// Amplitude tolerance for normalization, orthogonality and matching.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuantumError {
    #[error("invalid dimension {0}")]
    InvalidDimension(usize),
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("qubit {target} out of range for {num_qubits}-qubit state")]
    TargetOutOfRange { target: usize, num_qubits: usize },
    #[error("qubit {0} targeted twice")]
    DuplicateTarget(usize),
    #[error("cannot parse Pauli string {0:?}")]
    ParsePauli(String),
    #[error("candidate list is empty")]
    EmptyCandidates,
    #[error("candidates {first} and {second} are not orthogonal (|overlap| = {overlap:.3e})")]
    NonOrthogonalCandidates { first: usize, second: usize, overlap: f64 },
    #[error("state matches no candidate (best |overlap| = {best_overlap:.6})")]
    NoMatchingCandidate { best_overlap: f64 },
}
