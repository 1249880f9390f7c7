//! Pauli letters and phased Pauli strings.
//!
//! A [`PhasedPauliString`] keeps its global phase exactly (a power of `i`),
//! but protocol-level comparisons go through [`equal_mod_phase`], which
//! ignores it.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::QuantumError;

/// A single-qubit Pauli operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PauliLetter {
    I,
    X,
    Y,
    Z,
}

impl PauliLetter {
    pub const ALL: [PauliLetter; 4] = [PauliLetter::I, PauliLetter::X, PauliLetter::Y, PauliLetter::Z];

    /// Symplectic `(x, z)` bits; `Y` carries both.
    pub fn xz(self) -> (bool, bool) {
        match self {
            PauliLetter::I => (false, false),
            PauliLetter::X => (true, false),
            PauliLetter::Y => (true, true),
            PauliLetter::Z => (false, true),
        }
    }

    pub fn from_xz(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => PauliLetter::I,
            (true, false) => PauliLetter::X,
            (true, true) => PauliLetter::Y,
            (false, true) => PauliLetter::Z,
        }
    }

    /// Matrix product `self · rhs`, returned as a phase and a letter.
    pub fn times(self, rhs: PauliLetter) -> (Phase, PauliLetter) {
        use PauliLetter::*;
        match (self, rhs) {
            (I, p) | (p, I) => (Phase::ONE, p),
            (a, b) if a == b => (Phase::ONE, I),
            (X, Y) => (Phase::I, Z),
            (Y, Z) => (Phase::I, X),
            (Z, X) => (Phase::I, Y),
            (Y, X) => (Phase::MINUS_I, Z),
            (Z, Y) => (Phase::MINUS_I, X),
            (X, Z) => (Phase::MINUS_I, Y),
            _ => unreachable!(),
        }
    }

    fn symbol(self) -> char {
        match self {
            PauliLetter::I => 'I',
            PauliLetter::X => 'X',
            PauliLetter::Y => 'Y',
            PauliLetter::Z => 'Z',
        }
    }
}

/// A global phase `i^k`, `k` in `0..4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: u32) -> Self {
        Phase((k % 4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    fn prefix(self) -> &'static str {
        match self.0 {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;

    fn mul(self, other: Phase) -> Phase {
        Phase((self.0 + other.0) % 4)
    }
}

/// An n-fold tensor product of Pauli letters with a global phase.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhasedPauliString {
    phase: Phase,
    letters: Vec<PauliLetter>,
}

impl PhasedPauliString {
    pub fn new(phase: Phase, letters: Vec<PauliLetter>) -> Self {
        Self { phase, letters }
    }

    pub fn identity(len: usize) -> Self {
        Self::new(Phase::ONE, vec![PauliLetter::I; len])
    }

    /// Single-qubit string with phase +1.
    pub fn single(letter: PauliLetter) -> Self {
        Self::new(Phase::ONE, vec![letter])
    }

    /// Builds a width-`len` string with `letter` at `position` and identity elsewhere.
    pub fn at(len: usize, position: usize, letter: PauliLetter) -> Self {
        let mut letters = vec![PauliLetter::I; len];
        letters[position] = letter;
        Self::new(Phase::ONE, letters)
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn letters(&self) -> &[PauliLetter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity_mod_phase(&self) -> bool {
        self.letters.iter().all(|&l| l == PauliLetter::I)
    }

    /// Number of `Y` letters; `Y = i·X·Z` contributes a factor `i` each.
    pub(crate) fn y_count(&self) -> usize {
        self.letters.iter().filter(|&&l| l == PauliLetter::Y).count()
    }

    /// `self` applied twice. Always `±I`.
    pub fn square(&self) -> PhasedPauliString {
        PhasedPauliString::identity(self.len()).with_phase(self.phase * self.phase)
    }
}

impl fmt::Display for PhasedPauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.phase.prefix())?;
        for l in &self.letters {
            write!(f, "{}", l.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PhasedPauliString {
    type Err = QuantumError;

    /// Accepts an optional phase prefix (`+`, `-`, `i`, `+i`, `-i`) followed
    /// by one or more of `IXYZ`, e.g. `iY`, `-ZX`, `XIZ`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (phase, rest) = if let Some(r) = s.strip_prefix("-i") {
            (Phase::MINUS_I, r)
        } else if let Some(r) = s.strip_prefix("+i") {
            (Phase::I, r)
        } else if let Some(r) = s.strip_prefix('i') {
            (Phase::I, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (Phase::MINUS_ONE, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (Phase::ONE, r)
        } else {
            (Phase::ONE, s)
        };
        if rest.is_empty() {
            return Err(QuantumError::ParsePauli(s.to_string()));
        }
        let letters = rest
            .chars()
            .map(|c| match c {
                'I' => Ok(PauliLetter::I),
                'X' => Ok(PauliLetter::X),
                'Y' => Ok(PauliLetter::Y),
                'Z' => Ok(PauliLetter::Z),
                _ => Err(QuantumError::ParsePauli(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PhasedPauliString::new(phase, letters))
    }
}

fn check_lengths(a: &PhasedPauliString, b: &PhasedPauliString) -> Result<(), QuantumError> {
    if a.len() != b.len() {
        return Err(QuantumError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

/// Composition `b ∘ a`: `a` acts first, then `b`. The phase is tracked exactly.
pub fn pauli_product(a: &PhasedPauliString, b: &PhasedPauliString) -> Result<PhasedPauliString, QuantumError> {
    check_lengths(a, b)?;
    let mut phase = a.phase * b.phase;
    let letters = a
        .letters
        .iter()
        .zip(&b.letters)
        .map(|(&la, &lb)| {
            let (ph, l) = lb.times(la);
            phase = phase * ph;
            l
        })
        .collect();
    Ok(PhasedPauliString::new(phase, letters))
}

/// True iff the letters agree position by position; phases are ignored.
pub fn equal_mod_phase(a: &PhasedPauliString, b: &PhasedPauliString) -> Result<bool, QuantumError> {
    check_lengths(a, b)?;
    Ok(a.letters == b.letters)
}
