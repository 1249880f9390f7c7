//! Discrimination among a known family of Pauli-encoded states.

use std::collections::HashMap;

use num_complex::Complex64;

use super::state::PauliAction;
use super::{PhasedPauliString, QuantumError, StateVector, TOLERANCE};

type Sparse = Vec<(usize, Complex64)>;

/// The orthonormal family `{P_i|base⟩}` for a list of candidate encodings.
///
/// Construction verifies pairwise orthogonality once; [`EncodedBasis::measure`]
/// is then a cheap projection. Encoded states are kept sparse, which keeps
/// GHZ-family bases small even for wide registers.
#[derive(Clone, Debug)]
pub struct EncodedBasis {
    num_qubits: usize,
    candidates: Vec<PhasedPauliString>,
    vectors: Vec<Sparse>,
}

impl EncodedBasis {
    pub fn new(base: &StateVector, candidates: &[PhasedPauliString], targets: &[usize]) -> Result<Self, QuantumError> {
        if candidates.is_empty() {
            return Err(QuantumError::EmptyCandidates);
        }
        let support: Sparse = base
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > TOLERANCE)
            .map(|(i, a)| (i, *a))
            .collect();
        let vectors = candidates
            .iter()
            .map(|c| {
                let action = PauliAction::new(c, targets, base.num_qubits())?;
                Ok(support
                    .iter()
                    .map(|&(i, a)| (i ^ action.x_mask, action.coefficient(i) * a))
                    .collect())
            })
            .collect::<Result<Vec<Sparse>, QuantumError>>()?;
        let basis = Self {
            num_qubits: base.num_qubits(),
            candidates: candidates.to_vec(),
            vectors,
        };
        basis.check_orthogonal()?;
        Ok(basis)
    }

    fn check_orthogonal(&self) -> Result<(), QuantumError> {
        // only pairs sharing a basis index can overlap
        let mut by_index: HashMap<usize, Vec<(usize, Complex64)>> = HashMap::new();
        for (c, v) in self.vectors.iter().enumerate() {
            for &(i, a) in v {
                by_index.entry(i).or_default().push((c, a));
            }
        }
        let mut overlaps: HashMap<(usize, usize), Complex64> = HashMap::new();
        for entries in by_index.values() {
            for (x, &(ca, aa)) in entries.iter().enumerate() {
                for &(cb, ab) in &entries[x + 1..] {
                    let key = (ca.min(cb), ca.max(cb));
                    let term = if ca < cb { aa.conj() * ab } else { ab.conj() * aa };
                    *overlaps.entry(key).or_default() += term;
                }
            }
        }
        let worst = overlaps
            .into_iter()
            .filter(|(_, o)| o.norm() > TOLERANCE)
            .min_by_key(|(k, _)| *k);
        match worst {
            Some(((first, second), o)) => Err(QuantumError::NonOrthogonalCandidates {
                first,
                second,
                overlap: o.norm(),
            }),
            None => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn candidates(&self) -> &[PhasedPauliString] {
        &self.candidates
    }

    /// `|⟨candidate_index encoded base | state⟩|`
    pub fn overlap(&self, index: usize, state: &StateVector) -> f64 {
        let amps = state.amplitudes();
        self.vectors[index]
            .iter()
            .map(|&(i, a)| a.conj() * amps[i])
            .sum::<Complex64>()
            .norm()
    }

    /// Index of the unique candidate whose encoded state matches `state`
    /// up to a global phase.
    pub fn measure(&self, state: &StateVector) -> Result<usize, QuantumError> {
        if state.num_qubits() != self.num_qubits {
            return Err(QuantumError::LengthMismatch {
                left: state.num_qubits(),
                right: self.num_qubits,
            });
        }
        let mut best = 0.0f64;
        for idx in 0..self.len() {
            let o = self.overlap(idx, state);
            if (o - 1.0).abs() <= TOLERANCE {
                return Ok(idx);
            }
            best = best.max(o);
        }
        Err(QuantumError::NoMatchingCandidate { best_overlap: best })
    }
}

/// Identifies which candidate encoding turned `base_state` into `state`.
///
/// Checks that the encoded candidates are pairwise orthogonal first.
pub fn measure_in_encoded_basis(
    state: &StateVector,
    base_state: &StateVector,
    candidates: &[PhasedPauliString],
    targets: &[usize],
) -> Result<usize, QuantumError> {
    EncodedBasis::new(base_state, candidates, targets)?.measure(state)
}
