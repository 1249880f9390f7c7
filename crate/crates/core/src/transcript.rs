//! Append-only event log of one auction run.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::topology::PartyId;
use crate::transport::{ClassicalMessage, HopId, QubitHandle, Verdict};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Prepare {
        initiator: PartyId,
        circle: usize,
        bit_index: usize,
        state: u32,
        qubits: usize,
        travel: usize,
    },
    InsertDecoys {
        hop: HopId,
        owner: PartyId,
        decoys: usize,
        positions: Vec<usize>,
    },
    Send {
        hop: HopId,
        from: PartyId,
        to: PartyId,
        qubits: Vec<QubitHandle>,
    },
    Broadcast {
        from: PartyId,
        message: ClassicalMessage,
        bits: f64,
    },
    DecoyCheck {
        hop: HopId,
        sampled: usize,
        errors: usize,
        verdict: Verdict,
    },
    Encode {
        hop: HopId,
        party: PartyId,
        bit_index: usize,
        bit: u8,
        meaningful: bool,
    },
    Measure {
        initiator: PartyId,
        circle: usize,
        bit_index: usize,
        outcome: usize,
    },
    DecodeFailure {
        initiator: PartyId,
        circle: usize,
        bit_index: usize,
        reason: String,
    },
    Abort {
        stage: String,
        round: Option<usize>,
        hops: Vec<HopId>,
    },
    Tally {
        consistent: bool,
        winner: Option<PartyId>,
        tie: bool,
        price: Option<u64>,
    },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Transcript {
    events: Vec<Event>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, event: Event) {
        self.events.push(event);
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// One JSON object per line.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("events serialize"));
            out.push('\n');
        }
        out
    }

    /// SHA-256 over the JSON-lines rendering, hex encoded.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for e in &self.events {
            h.update(serde_json::to_vec(e).expect("events serialize"));
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }
}
