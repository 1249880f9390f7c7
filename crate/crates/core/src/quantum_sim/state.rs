use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{PhasedPauliString, QuantumError, TOLERANCE};

/// Measurement basis for single qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    /// `{|0⟩, |1⟩}`
    Computational,
    /// `{|+⟩, |−⟩}`
    Diagonal,
}

/// Normalized pure state over `num_qubits` qubits.
///
/// Qubit 0 is the most significant bit of the amplitude index, so `|q0 q1 …⟩`
/// reads left to right like ket notation.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `m` qubits.
    pub fn zero(m: usize) -> Result<Self, QuantumError> {
        if m == 0 || m > 24 {
            return Err(QuantumError::InvalidDimension(m));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << m];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits: m,
            amplitudes,
        })
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self, QuantumError> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(QuantumError::InvalidDimension(len));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > TOLERANCE {
            return Err(QuantumError::NotNormalized(norm));
        }
        Ok(Self {
            num_qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &StateVector) -> Result<Complex64, QuantumError> {
        if self.num_qubits != other.num_qubits {
            return Err(QuantumError::LengthMismatch {
                left: self.num_qubits,
                right: other.num_qubits,
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// True when the two states differ at most by a global phase.
    pub fn equal_up_to_phase(&self, other: &StateVector) -> bool {
        self.inner(other)
            .map(|o| (o.norm() - 1.0).abs() <= TOLERANCE)
            .unwrap_or(false)
    }

    pub(crate) fn bit_of(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    /// Applies `op` in place, letter `j` acting on `targets[j]`.
    pub fn apply_pauli_mut(&mut self, op: &PhasedPauliString, targets: &[usize]) -> Result<(), QuantumError> {
        let action = PauliAction::new(op, targets, self.num_qubits)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (i, amp) in self.amplitudes.iter().enumerate() {
            out[i ^ action.x_mask] = action.coefficient(i) * amp;
        }
        self.amplitudes = out;
        Ok(())
    }

    fn hadamard(&mut self, qubit: usize) {
        let bit = self.bit_of(qubit);
        for i in 0..self.dim() {
            if i & bit == 0 {
                let a = self.amplitudes[i];
                let b = self.amplitudes[i | bit];
                self.amplitudes[i] = (a + b) * FRAC_1_SQRT_2;
                self.amplitudes[i | bit] = (a - b) * FRAC_1_SQRT_2;
            }
        }
    }

    /// Probability of outcome 1 for `qubit` measured in `basis`.
    pub fn probability_one(&self, qubit: usize, basis: Basis) -> Result<f64, QuantumError> {
        self.check_qubit(qubit)?;
        let p = match basis {
            Basis::Computational => self.prob_one_computational(qubit),
            Basis::Diagonal => {
                let mut rotated = self.clone();
                rotated.hadamard(qubit);
                rotated.prob_one_computational(qubit)
            }
        };
        Ok(p.clamp(0.0, 1.0))
    }

    fn prob_one_computational(&self, qubit: usize) -> f64 {
        let bit = self.bit_of(qubit);
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Projective measurement of one qubit with collapse. Returns the outcome bit.
    pub fn measure_qubit<R: Rng + ?Sized>(
        &mut self,
        qubit: usize,
        basis: Basis,
        rng: &mut R,
    ) -> Result<u8, QuantumError> {
        self.check_qubit(qubit)?;
        if basis == Basis::Diagonal {
            self.hadamard(qubit);
        }
        let p1 = self.prob_one_computational(qubit).clamp(0.0, 1.0);
        let outcome = rng.random_bool(p1);
        let bit = self.bit_of(qubit);
        let keep_norm = if outcome { p1 } else { 1.0 - p1 }.sqrt();
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if (i & bit != 0) == outcome {
                *a /= keep_norm;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        if basis == Basis::Diagonal {
            self.hadamard(qubit);
        }
        Ok(outcome as u8)
    }

    fn check_qubit(&self, qubit: usize) -> Result<(), QuantumError> {
        if qubit >= self.num_qubits {
            return Err(QuantumError::TargetOutOfRange {
                target: qubit,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }
}

/// A Pauli string resolved against a concrete register: `P|i⟩ = c(i)·|i ⊕ x_mask⟩`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PauliAction {
    pub x_mask: usize,
    pub z_mask: usize,
    pub scalar: Complex64,
}

impl PauliAction {
    pub fn new(op: &PhasedPauliString, targets: &[usize], num_qubits: usize) -> Result<Self, QuantumError> {
        if op.len() != targets.len() {
            return Err(QuantumError::LengthMismatch {
                left: op.len(),
                right: targets.len(),
            });
        }
        let mut seen = 0usize;
        let mut x_mask = 0;
        let mut z_mask = 0;
        for (&letter, &t) in op.letters().iter().zip(targets) {
            if t >= num_qubits {
                return Err(QuantumError::TargetOutOfRange { target: t, num_qubits });
            }
            let bit = 1 << (num_qubits - 1 - t);
            if seen & bit != 0 {
                return Err(QuantumError::DuplicateTarget(t));
            }
            seen |= bit;
            let (x, z) = letter.xz();
            if x {
                x_mask |= bit;
            }
            if z {
                z_mask |= bit;
            }
        }
        // Y = i·X·Z, so each Y contributes a factor i on top of the string phase
        let phase = op.phase() * super::Phase::from_exponent(op.y_count() as u32);
        Ok(Self {
            x_mask,
            z_mask,
            scalar: phase.to_complex(),
        })
    }

    pub fn coefficient(&self, index: usize) -> Complex64 {
        if (index & self.z_mask).count_ones() % 2 == 1 {
            -self.scalar
        } else {
            self.scalar
        }
    }
}

/// `(|0…0⟩ + |1…1⟩)/√2` on `m` qubits; `m = 2` is the Bell state `|ψ+⟩`.
pub fn prepare_ghz(m: usize) -> Result<StateVector, QuantumError> {
    let mut s = StateVector::zero(m)?;
    let last = s.dim() - 1;
    s.amplitudes[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    s.amplitudes[last] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    Ok(s)
}

/// Returns `op` applied to `state`, letter `j` on qubit `targets[j]`.
pub fn apply_pauli(
    state: &StateVector,
    op: &PhasedPauliString,
    targets: &[usize],
) -> Result<StateVector, QuantumError> {
    let mut out = state.clone();
    out.apply_pauli_mut(op, targets)?;
    Ok(out)
}

/// One BB84 decoy: a random bit prepared in a random basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DecoyQubit {
    pub basis: Basis,
    pub bit: u8,
}

impl DecoyQubit {
    pub fn new(basis: Basis, bit: u8) -> Self {
        Self { basis, bit: bit & 1 }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let basis = if rng.random_bool(0.5) {
            Basis::Diagonal
        } else {
            Basis::Computational
        };
        Self::new(basis, rng.random_bool(0.5) as u8)
    }

    /// One of `|0⟩, |1⟩, |+⟩, |−⟩`.
    pub fn state(&self) -> StateVector {
        let h = FRAC_1_SQRT_2;
        let amps = match (self.basis, self.bit) {
            (Basis::Computational, 0) => [1.0, 0.0],
            (Basis::Computational, _) => [0.0, 1.0],
            (Basis::Diagonal, 0) => [h, h],
            (Basis::Diagonal, _) => [h, -h],
        };
        StateVector {
            num_qubits: 1,
            amplitudes: amps.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
        }
    }
}

/// Born-rule measurement of a single-qubit state; does not collapse the input.
pub fn measure_decoy<R: Rng + ?Sized>(
    decoy_state: &StateVector,
    basis: Basis,
    rng: &mut R,
) -> Result<u8, QuantumError> {
    if decoy_state.num_qubits() != 1 {
        return Err(QuantumError::InvalidDimension(decoy_state.num_qubits()));
    }
    let p1 = decoy_state.probability_one(0, basis)?;
    Ok(rng.random_bool(p1) as u8)
}
