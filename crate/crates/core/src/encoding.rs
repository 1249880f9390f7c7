//! Order-two encoding subgroups `{I, U}`, their assignment to parties, and
//! the per-sub-circle bijective decoder.
//!
//! Bit convention is global: identity encodes 0, the generator encodes 1.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::Serialize;

use crate::quantum_sim::{
    equal_mod_phase, pauli_product, EncodedBasis, PauliLetter, Phase, PhasedPauliString, QuantumError, StateVector,
};
use crate::topology::{PartyId, Ring};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EncodingError {
    #[error("generator {0} is the identity up to phase")]
    IdentityGenerator(String),
    #[error("generator {0} does not square to the identity")]
    NotInvolution(String),
    #[error("subgroup widths differ: {0} vs {1}")]
    WidthMismatch(usize, usize),
    #[error("no cyclic assignment for {parties} parties with travel width {width} and window {window}: {reason}")]
    InsufficientAlphabet {
        parties: usize,
        width: usize,
        window: usize,
        reason: &'static str,
    },
    #[error("party {0} has no assigned subgroup")]
    MissingParty(PartyId),
    #[error("outcome index {index} out of range for {encoders} encoders")]
    IndexOutOfRange { index: usize, encoders: usize },
    #[error("encodings of {0} are not jointly decodable (colliding subset products)")]
    Collision(String),
    #[error(
        "internal inconsistency for encoders {encoders}: products distinct mod phase = {distinct}, encoded states orthogonal = {orthogonal}"
    )]
    CriteriaMismatch {
        encoders: String,
        distinct: bool,
        orthogonal: bool,
    },
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

/// `{I, U}` with `U² ~ I` and `U ≁ I`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct EncodingSubgroup {
    generator: PhasedPauliString,
}

impl EncodingSubgroup {
    pub fn generator(&self) -> &PhasedPauliString {
        &self.generator
    }

    /// Number of travel qubits the generator acts on.
    pub fn width(&self) -> usize {
        self.generator.len()
    }

    /// Operator applied to encode `bit`.
    pub fn operator(&self, bit: u8) -> PhasedPauliString {
        if bit & 1 == 1 {
            self.generator.clone()
        } else {
            PhasedPauliString::identity(self.width())
        }
    }
}

pub fn make_subgroup(generator: PhasedPauliString) -> Result<EncodingSubgroup, EncodingError> {
    if generator.is_empty() || generator.is_identity_mod_phase() {
        return Err(EncodingError::IdentityGenerator(generator.to_string()));
    }
    if !generator.square().is_identity_mod_phase() {
        return Err(EncodingError::NotInvolution(generator.to_string()));
    }
    Ok(EncodingSubgroup { generator })
}

/// `A ∩ B = {I}`, judged modulo global phase.
pub fn disjoint(a: &EncodingSubgroup, b: &EncodingSubgroup) -> Result<bool, EncodingError> {
    if a.width() != b.width() {
        return Err(EncodingError::WidthMismatch(a.width(), b.width()));
    }
    Ok(!equal_mod_phase(&a.generator, &b.generator)?)
}

/// Public map from party to encoding subgroup.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assignment {
    width: usize,
    subgroups: BTreeMap<PartyId, EncodingSubgroup>,
}

impl Assignment {
    pub fn from_subgroups(subgroups: BTreeMap<PartyId, EncodingSubgroup>) -> Result<Self, EncodingError> {
        let width = subgroups.values().next().map_or(0, |s| s.width());
        if let Some(bad) = subgroups.values().find(|s| s.width() != width) {
            return Err(EncodingError::WidthMismatch(width, bad.width()));
        }
        Ok(Self { width, subgroups })
    }

    /// Cyclic construction over `ring`.
    ///
    /// With `k = window`, bidders at ring positions `1, 2, …` cycle through
    /// `X₀, X₁, …, X_{k-2}, iY₀` and the party at position 0 gets the product
    /// of all `k`. On a GHZ state with one home qubit these generators map to
    /// independent vectors in the `(x-flips, z-parity)` label space, so every
    /// `window` ring-consecutive parties decode jointly as long as
    /// `window` divides `ring.len() - 1`.
    ///
    /// For `p = 1`, `window = 2` on `A, B1, …, B6` this gives `A: Z`,
    /// odd bidders `X`, even bidders `iY`.
    pub fn cyclic(ring: &Ring, width: usize, window: usize) -> Result<Self, EncodingError> {
        let parties = ring.len();
        let fail = |reason| EncodingError::InsufficientAlphabet {
            parties,
            width,
            window,
            reason,
        };
        if width == 0 {
            return Err(fail("travel width must be at least 1"));
        }
        if window == 0 || window > width + 1 {
            return Err(fail("window must be between 1 and width + 1"));
        }
        let tail = parties - 1;
        if tail >= window && !tail.is_multiple_of(window) {
            return Err(fail("window must divide the number of parties after the first"));
        }
        let basis: Vec<PhasedPauliString> = (0..window).map(|i| cyclic_generator(i, width, window)).collect();
        let mut anchor = PhasedPauliString::identity(width);
        for g in &basis {
            anchor = pauli_product(&anchor, g)?;
        }
        let mut subgroups = BTreeMap::new();
        for (pos, &party) in ring.parties().iter().enumerate() {
            let generator = if pos == 0 {
                anchor.clone()
            } else {
                basis[(pos - 1) % window].clone()
            };
            subgroups.insert(party, make_subgroup(generator)?);
        }
        Ok(Self { width, subgroups })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, party: PartyId) -> Result<&EncodingSubgroup, EncodingError> {
        self.subgroups.get(&party).ok_or(EncodingError::MissingParty(party))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PartyId, &EncodingSubgroup)> {
        self.subgroups.iter()
    }

    pub fn generators(&self, encoders: &[PartyId]) -> Result<Vec<PhasedPauliString>, EncodingError> {
        encoders.iter().map(|&p| Ok(self.get(p)?.generator().clone())).collect()
    }
}

fn cyclic_generator(i: usize, width: usize, window: usize) -> PhasedPauliString {
    if window >= 2 && i == window - 1 {
        PhasedPauliString::at(width, 0, PauliLetter::Y).with_phase(Phase::I)
    } else {
        PhasedPauliString::at(width, i, PauliLetter::X)
    }
}

/// Assignment on the standard ring `A, B1, …, Bn` for windows of `p + 1` parties.
pub fn default_assignment(n: u32, p: usize) -> Result<Assignment, EncodingError> {
    let ring = Ring::with_auctioneer(n).map_err(|_| EncodingError::InsufficientAlphabet {
        parties: 0,
        width: p,
        window: p + 1,
        reason: "need at least one bidder",
    })?;
    Assignment::cyclic(&ring, p, p + 1)
}

/// All `2^k` subset products in canonical order: candidate `v` has encoder
/// `i`'s bit at position `k-1-i` of `v`, so the first encoder is the most
/// significant bit. Encoders act in list order.
pub fn subset_products(generators: &[PhasedPauliString]) -> Result<Vec<PhasedPauliString>, EncodingError> {
    let k = generators.len();
    let width = generators.first().map_or(0, |g| g.len());
    (0..1usize << k)
        .map(|v| {
            let mut acc = PhasedPauliString::identity(width);
            for (i, g) in generators.iter().enumerate() {
                if (v >> (k - 1 - i)) & 1 == 1 {
                    acc = pauli_product(&acc, g)?;
                }
            }
            Ok(acc)
        })
        .collect()
}

/// Canonical candidate index of a bit vector (first encoder most significant).
pub fn bits_to_index(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | (b & 1) as usize)
}

/// Inverse of the canonical ordering: the bit each encoder applied.
pub fn decode_bits(outcome_index: usize, encoders: &[PartyId]) -> Result<Vec<(PartyId, u8)>, EncodingError> {
    let k = encoders.len();
    if outcome_index >= 1usize << k {
        return Err(EncodingError::IndexOutOfRange {
            index: outcome_index,
            encoders: k,
        });
    }
    Ok(encoders
        .iter()
        .enumerate()
        .map(|(i, &p)| (p, ((outcome_index >> (k - 1 - i)) & 1) as u8))
        .collect())
}

fn names(parties: &[PartyId]) -> String {
    parties.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",")
}

fn first_collision(products: &[PhasedPauliString]) -> Option<(usize, usize)> {
    let mut seen: HashMap<&[PauliLetter], usize> = HashMap::new();
    for (v, p) in products.iter().enumerate() {
        if let Some(&u) = seen.get(p.letters()) {
            return Some((u, v));
        }
        seen.insert(p.letters(), v);
    }
    None
}

/// Checks that the encoders of one sub-circle decode bijectively.
///
/// Two independent criteria are evaluated: the subset products are pairwise
/// distinct modulo phase, and the encoded base states are pairwise
/// orthogonal. Disagreement is reported as [`EncodingError::CriteriaMismatch`].
pub fn validate_subcircle(
    assignment: &Assignment,
    encoders: &[PartyId],
    base_state: &StateVector,
    targets: &[usize],
) -> Result<bool, EncodingError> {
    let products = subset_products(&assignment.generators(encoders)?)?;
    let distinct = first_collision(&products).is_none();
    let orthogonal = match EncodedBasis::new(base_state, &products, targets) {
        Ok(_) => true,
        Err(QuantumError::NonOrthogonalCandidates { .. }) => false,
        Err(e) => return Err(e.into()),
    };
    if distinct != orthogonal {
        return Err(EncodingError::CriteriaMismatch {
            encoders: names(encoders),
            distinct,
            orthogonal,
        });
    }
    Ok(distinct)
}

/// Precomputed decoder for one sub-circle configuration.
#[derive(Clone, Debug)]
pub struct SubcircleDecoder {
    encoders: Vec<PartyId>,
    basis: Arc<EncodedBasis>,
}

impl SubcircleDecoder {
    /// Validates the configuration and fails with the colliding parties named.
    pub fn new(
        assignment: &Assignment,
        encoders: &[PartyId],
        base_state: &StateVector,
        targets: &[usize],
    ) -> Result<Self, EncodingError> {
        let products = subset_products(&assignment.generators(encoders)?)?;
        if !validate_subcircle(assignment, encoders, base_state, targets)? {
            let (u, v) = first_collision(&products).unwrap_or((0, 0));
            let diff = u ^ v;
            let culprits: Vec<PartyId> = encoders
                .iter()
                .enumerate()
                .filter(|(i, _)| (diff >> (encoders.len() - 1 - i)) & 1 == 1)
                .map(|(_, &p)| p)
                .collect();
            return Err(EncodingError::Collision(names(&culprits)));
        }
        let basis = EncodedBasis::new(base_state, &products, targets)?;
        Ok(Self {
            encoders: encoders.to_vec(),
            basis: Arc::new(basis),
        })
    }

    /// Same measurement basis under different party labels; the caller
    /// guarantees the new encoders carry the same generators in order.
    pub fn relabel(&self, encoders: &[PartyId]) -> Self {
        assert_eq!(encoders.len(), self.encoders.len());
        Self {
            encoders: encoders.to_vec(),
            basis: Arc::clone(&self.basis),
        }
    }

    pub fn encoders(&self) -> &[PartyId] {
        &self.encoders
    }

    /// Measures `state` and returns `(outcome index, per-encoder bits)`.
    pub fn decode(&self, state: &StateVector) -> Result<(usize, Vec<(PartyId, u8)>), EncodingError> {
        let idx = self.basis.measure(state)?;
        Ok((idx, decode_bits(idx, &self.encoders)?))
    }
}
