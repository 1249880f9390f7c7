//! Simulated quantum channel, decoy insertion and checking, and the
//! authenticated classical broadcast channel.
//!
//! All qubits live in a [`QuantumRegister`]; sequences are ordered lists of
//! handles into it. Moving a sequence between parties moves handles, never
//! amplitudes.

use rand::seq::index::sample;
use rand::Rng;
use serde::ser::SerializeTuple;
use serde::{Serialize, Serializer};

use crate::quantum_sim::{Basis, DecoyQubit, PauliLetter, Phase, PhasedPauliString, QuantumError, StateVector};
use crate::topology::PartyId;
use crate::transcript::{Event, Transcript};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransportError {
    #[error("cannot insert decoys into an empty sequence")]
    EmptySequence,
    #[error("malformed decoy record: {0}")]
    MalformedRecord(String),
    #[error("sender and receiver are both {0}")]
    SelfSend(PartyId),
    #[error("unknown register state {0}")]
    UnknownState(u32),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

/// A qubit: state `state` in the register, qubit `qubit` within it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QubitHandle {
    pub state: u32,
    pub qubit: u16,
}

impl Serialize for QubitHandle {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut t = s.serialize_tuple(2)?;
        t.serialize_element(&self.state)?;
        t.serialize_element(&self.qubit)?;
        t.end()
    }
}

/// Owns every simulated state of a run.
#[derive(Clone, Debug, Default)]
pub struct QuantumRegister {
    states: Vec<StateVector>,
}

impl QuantumRegister {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, state: StateVector) -> u32 {
        self.states.push(state);
        (self.states.len() - 1) as u32
    }

    /// Handles for every qubit of state `id`, in qubit order.
    pub fn handles(&self, id: u32) -> Vec<QubitHandle> {
        let m = self.states[id as usize].num_qubits();
        (0..m)
            .map(|q| QubitHandle {
                state: id,
                qubit: q as u16,
            })
            .collect()
    }

    pub fn state(&self, id: u32) -> Result<&StateVector, TransportError> {
        self.states.get(id as usize).ok_or(TransportError::UnknownState(id))
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Applies `op` with letter `j` on `handles[j]`; handles may span several states.
    pub fn apply(&mut self, op: &PhasedPauliString, handles: &[QubitHandle]) -> Result<(), TransportError> {
        if op.len() != handles.len() {
            return Err(QuantumError::LengthMismatch {
                left: op.len(),
                right: handles.len(),
            }
            .into());
        }
        let mut groups: Vec<(u32, Vec<PauliLetter>, Vec<usize>)> = Vec::new();
        for (&letter, h) in op.letters().iter().zip(handles) {
            match groups.iter_mut().find(|g| g.0 == h.state) {
                Some(g) => {
                    g.1.push(letter);
                    g.2.push(h.qubit as usize);
                }
                None => groups.push((h.state, vec![letter], vec![h.qubit as usize])),
            }
        }
        for (i, (id, letters, targets)) in groups.into_iter().enumerate() {
            // the global phase rides on the first group only
            let phase = if i == 0 { op.phase() } else { Phase::ONE };
            let sub = PhasedPauliString::new(phase, letters);
            let state = self
                .states
                .get_mut(id as usize)
                .ok_or(TransportError::UnknownState(id))?;
            state.apply_pauli_mut(&sub, &targets)?;
        }
        Ok(())
    }

    pub fn apply_letter(&mut self, letter: PauliLetter, handle: QubitHandle) -> Result<(), TransportError> {
        self.apply(&PhasedPauliString::single(letter), &[handle])
    }

    /// Projective measurement with collapse.
    pub fn measure<R: Rng + ?Sized>(
        &mut self,
        handle: QubitHandle,
        basis: Basis,
        rng: &mut R,
    ) -> Result<u8, TransportError> {
        let state = self
            .states
            .get_mut(handle.state as usize)
            .ok_or(TransportError::UnknownState(handle.state))?;
        Ok(state.measure_qubit(handle.qubit as usize, basis, rng)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    Travel,
    Home,
    Enlarged,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QubitSequence {
    pub kind: SequenceKind,
    pub qubits: Vec<QubitHandle>,
}

impl QubitSequence {
    pub fn new(kind: SequenceKind, qubits: Vec<QubitHandle>) -> Self {
        Self { kind, qubits }
    }

    pub fn len(&self) -> usize {
        self.qubits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.qubits.is_empty()
    }
}

/// Identifies one transmission: hop `hop` of circle `circle` in `initiator`'s plan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct HopId {
    pub initiator: PartyId,
    pub circle: usize,
    pub hop: usize,
}

/// What the sender discloses after the receiver confirms receipt.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecoyRecord {
    pub owner: PartyId,
    pub positions: Vec<usize>,
    pub decoys: Vec<DecoyQubit>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Abort,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SecurityCheckResult {
    pub sampled: usize,
    pub errors: usize,
    pub error_rate: f64,
    pub verdict: Verdict,
}

/// Interleaves one fresh BB84 decoy per travel qubit at uniformly random positions.
pub fn insert_decoys<R: Rng + ?Sized>(
    travel: &QubitSequence,
    owner: PartyId,
    register: &mut QuantumRegister,
    rng: &mut R,
) -> Result<(QubitSequence, DecoyRecord), TransportError> {
    if travel.is_empty() {
        return Err(TransportError::EmptySequence);
    }
    let t = travel.len();
    let mut positions = sample(rng, 2 * t, t).into_vec();
    positions.sort_unstable();
    let decoys: Vec<DecoyQubit> = (0..t).map(|_| DecoyQubit::random(rng)).collect();
    let mut qubits = Vec::with_capacity(2 * t);
    let mut travel_iter = travel.qubits.iter();
    let mut next_decoy = 0;
    for idx in 0..2 * t {
        if next_decoy < t && positions[next_decoy] == idx {
            let id = register.add(decoys[next_decoy].state());
            qubits.push(QubitHandle { state: id, qubit: 0 });
            next_decoy += 1;
        } else {
            qubits.push(*travel_iter.next().expect("t travel qubits fill the rest"));
        }
    }
    Ok((
        QubitSequence::new(SequenceKind::Enlarged, qubits),
        DecoyRecord {
            owner,
            positions,
            decoys,
        },
    ))
}

fn validate_record(received: &QubitSequence, record: &DecoyRecord) -> Result<(), TransportError> {
    let d = record.positions.len();
    if d != record.decoys.len() {
        return Err(TransportError::MalformedRecord(
            "positions and decoys differ in length".into(),
        ));
    }
    if d == 0 || received.len() != 2 * d {
        return Err(TransportError::MalformedRecord(format!(
            "{d} decoys for a sequence of {}",
            received.len()
        )));
    }
    if record.positions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(TransportError::MalformedRecord(
            "positions not strictly increasing".into(),
        ));
    }
    if record.positions[d - 1] >= received.len() {
        return Err(TransportError::MalformedRecord("position out of bounds".into()));
    }
    Ok(())
}

/// Receiver measures each disclosed decoy in its declared basis; returns the
/// verdict and the sequence with decoys removed.
pub fn check_decoys<R: Rng + ?Sized>(
    received: &QubitSequence,
    record: &DecoyRecord,
    threshold: f64,
    register: &mut QuantumRegister,
    rng: &mut R,
) -> Result<(SecurityCheckResult, QubitSequence), TransportError> {
    validate_record(received, record)?;
    let mut errors = 0;
    for (&pos, decoy) in record.positions.iter().zip(&record.decoys) {
        let outcome = register.measure(received.qubits[pos], decoy.basis, rng)?;
        if outcome != decoy.bit {
            errors += 1;
        }
    }
    let sampled = record.positions.len();
    let error_rate = errors as f64 / sampled as f64;
    let verdict = if error_rate > threshold {
        Verdict::Abort
    } else {
        Verdict::Pass
    };
    let mut is_decoy = vec![false; received.len()];
    for &p in &record.positions {
        is_decoy[p] = true;
    }
    let stripped = received
        .qubits
        .iter()
        .zip(&is_decoy)
        .filter(|(_, &d)| !d)
        .map(|(q, _)| *q)
        .collect();
    Ok((
        SecurityCheckResult {
            sampled,
            errors,
            error_rate,
            verdict,
        },
        QubitSequence::new(SequenceKind::Travel, stripped),
    ))
}

/// Adversary hook on the quantum channel.
pub trait Tap {
    fn intercept(&mut self, hop: &HopId, in_flight: &mut QubitSequence, register: &mut QuantumRegister);
}

/// Independent random Pauli flips on every qubit in flight, for noisy-channel runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ChannelNoise {
    pub flip_probability: f64,
}

impl ChannelNoise {
    pub fn apply<R: Rng + ?Sized>(
        &self,
        seq: &QubitSequence,
        register: &mut QuantumRegister,
        rng: &mut R,
    ) -> Result<(), TransportError> {
        if self.flip_probability <= 0.0 {
            return Ok(());
        }
        for &q in &seq.qubits {
            if rng.random_bool(self.flip_probability.min(1.0)) {
                let letter = [PauliLetter::X, PauliLetter::Y, PauliLetter::Z][rng.random_range(0..3)];
                register.apply_letter(letter, q)?;
            }
        }
        Ok(())
    }
}

/// Lossless, ordered delivery. The tap, if any, sees the sequence in flight.
#[allow(clippy::too_many_arguments)]
pub fn send(
    sequence: QubitSequence,
    hop: HopId,
    from: PartyId,
    to: PartyId,
    tap: Option<&mut dyn Tap>,
    register: &mut QuantumRegister,
    transcript: &mut Transcript,
) -> Result<QubitSequence, TransportError> {
    if from == to {
        return Err(TransportError::SelfSend(from));
    }
    transcript.push(Event::Send {
        hop,
        from,
        to,
        qubits: sequence.qubits.clone(),
    });
    let mut in_flight = sequence;
    if let Some(tap) = tap {
        tap.intercept(&hop, &mut in_flight, register);
    }
    Ok(in_flight)
}

/// Messages on the authenticated classical channel.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassicalMessage {
    Empty,
    ReceiptConfirmation {
        hop: HopId,
    },
    DecoyDisclosure {
        hop: HopId,
        record: DecoyRecord,
    },
    WinnerAnnouncement {
        winner: Option<PartyId>,
        price: Option<u64>,
        bidders: u32,
    },
}

impl ClassicalMessage {
    /// Contribution to the classical-communication term of the efficiency;
    /// only the result announcement counts.
    pub fn protocol_bits(&self) -> f64 {
        match self {
            ClassicalMessage::WinnerAnnouncement { bidders, .. } => (*bidders as f64).log2(),
            _ => 0.0,
        }
    }
}

/// Authenticated broadcast to every party; logged, returns the bits charged.
pub fn classical_broadcast(msg: ClassicalMessage, from: PartyId, transcript: &mut Transcript) -> f64 {
    let bits = msg.protocol_bits();
    transcript.push(Event::Broadcast {
        from,
        message: msg,
        bits,
    });
    bits
}
