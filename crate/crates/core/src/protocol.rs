//! The auction itself: preparation, decoy-guarded hops, encoding, joint
//! measurement, post-confirmation tally and settlement.
//!
//! All plans run in lockstep rounds. Round `h` moves every circle's travel
//! sequence across its `h`-th hop, checks the decoys of every circle, and
//! only then lets the receivers encode. No tally happens before every
//! circle has been measured.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::adversary::{Adversary, Honest, HopContext};
use crate::encoding::{Assignment, EncodingError, SubcircleDecoder};
use crate::quantum_sim::{prepare_ghz, PhasedPauliString, QuantumError, StateVector};
use crate::topology::{PartyId, Ring, SubCircle, SubCirclePlan, TopologyError};
use crate::transcript::{Event, Transcript};
use crate::transport::{
    check_decoys, classical_broadcast, insert_decoys, send, ChannelNoise, ClassicalMessage, DecoyRecord, HopId,
    QuantumRegister, QubitHandle, QubitSequence, SequenceKind, Tap, TransportError, Verdict,
};

/// Largest supported bid width.
pub const MAX_BID_BITS: usize = 63;

/// Largest simulated entangled state, home qubit included.
pub const MAX_STATE_QUBITS: usize = 16;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProtocolError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("missing bid for {0}")]
    MissingBid(PartyId),
    #[error("{0} is not a bidder in this auction")]
    UnexpectedBid(PartyId),
    #[error("bid of {party} has {got} bits, expected {expected}")]
    BidLength {
        party: PartyId,
        expected: usize,
        got: usize,
    },
    #[error("bid value {value} does not fit in {bits} bits")]
    BidOverflow { value: u64, bits: usize },
    #[error("bid bits must be 0 or 1")]
    BadBit,
    #[error("no winner to settle")]
    NoWinner,
    #[error("second-price rule needs at least two bids")]
    NoSecondBid,
    #[error("adversary: {0}")]
    Adversary(String),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PaymentRule {
    First,
    Second,
}

impl FromStr for PaymentRule {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "first" | "first-price" => Ok(PaymentRule::First),
            "second" | "second-price" | "vickrey" => Ok(PaymentRule::Second),
            other => Err(ProtocolError::InvalidConfig(format!("unknown payment rule {other:?}"))),
        }
    }
}

impl fmt::Display for PaymentRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PaymentRule::First => "first",
            PaymentRule::Second => "second",
        })
    }
}

/// `Circular` runs every party's plan; `Tree` runs only the auctioneer's,
/// with one singleton circle per bidder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Structure {
    Circular,
    Tree,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuctionConfig {
    pub n: u32,
    pub l: usize,
    pub bid_bits: usize,
    /// Travel qubits per entangled state; `None` picks the smallest width
    /// that keeps every sub-circle decodable.
    pub travel_width: Option<usize>,
    pub threshold: f64,
    pub payment_rule: PaymentRule,
    pub seed: u64,
    pub auctioneer: bool,
    pub structure: Structure,
    pub noise: ChannelNoise,
}

impl AuctionConfig {
    pub fn new(n: u32, l: usize, bid_bits: usize) -> Self {
        Self {
            n,
            l,
            bid_bits,
            travel_width: None,
            threshold: 0.0,
            payment_rule: PaymentRule::Second,
            seed: 0,
            auctioneer: true,
            structure: Structure::Circular,
            noise: ChannelNoise::default(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_payment(mut self, rule: PaymentRule) -> Self {
        self.payment_rule = rule;
        self
    }

    pub fn with_travel_width(mut self, p: usize) -> Self {
        self.travel_width = Some(p);
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn without_auctioneer(mut self) -> Self {
        self.auctioneer = false;
        self
    }

    /// Only the auctioneer initiates; `l` becomes `n`.
    pub fn tree(mut self) -> Self {
        self.structure = Structure::Tree;
        self.l = self.n as usize;
        self
    }

    pub fn ring(&self) -> Result<Ring, ProtocolError> {
        Ok(if self.auctioneer {
            Ring::with_auctioneer(self.n)?
        } else {
            Ring::bidders_only(self.n)?
        })
    }

    /// Parties each initiator distributes over its sub-circles.
    fn others(&self) -> usize {
        if self.auctioneer {
            self.n as usize
        } else {
            self.n as usize - 1
        }
    }

    /// `k`, the number of encoders in each sub-circle.
    pub fn members_per_circle(&self) -> usize {
        match self.structure {
            Structure::Tree => 1,
            Structure::Circular => self.others() / self.l.max(1),
        }
    }

    /// Resolved travel width `p`.
    pub fn travel_width(&self) -> usize {
        self.travel_width
            .unwrap_or_else(|| self.members_per_circle().saturating_sub(1).max(1))
    }

    pub fn plans(&self) -> Result<Vec<SubCirclePlan>, ProtocolError> {
        let ring = self.ring()?;
        Ok(match self.structure {
            Structure::Circular => ring.all_plans(self.l)?,
            Structure::Tree => vec![ring.plan(PartyId::AUCTIONEER, self.n as usize)?],
        })
    }

    /// Checks everything the simulator needs, including its size limits.
    pub fn validate(&self) -> Result<(), ProtocolError> {
        self.validate_shape()?;
        let bad = |m: String| Err(ProtocolError::InvalidConfig(m));
        if self.bid_bits > MAX_BID_BITS {
            return bad(format!("bid bits must be between 1 and {MAX_BID_BITS}"));
        }
        let p = self.travel_width();
        if p + 1 > MAX_STATE_QUBITS {
            return bad(format!(
                "entangled states of {} qubits exceed the simulator limit of {MAX_STATE_QUBITS}",
                p + 1
            ));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return bad("threshold must be a fraction in [0, 1]".into());
        }
        if !(0.0..=1.0).contains(&self.noise.flip_probability) {
            return bad("noise probability must be in [0, 1]".into());
        }
        Ok(())
    }

    /// Structural checks only: party counts, divisibility and travel width.
    /// Resource counting needs no more than this.
    pub fn validate_shape(&self) -> Result<(), ProtocolError> {
        let bad = |m: String| Err(ProtocolError::InvalidConfig(m));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if !self.auctioneer && self.n < 2 {
            return bad("a run without auctioneer needs at least 2 bidders".into());
        }
        if self.structure == Structure::Tree && !self.auctioneer {
            return bad("the tree structure needs an auctioneer".into());
        }
        if self.l == 0 {
            return bad("l must be at least 1".into());
        }
        if self.structure == Structure::Circular && !self.others().is_multiple_of(self.l) {
            return if self.auctioneer {
                bad(format!("l must divide n (n = {}, l = {})", self.n, self.l))
            } else {
                bad(format!(
                    "l must divide n - 1 without an auctioneer (n = {}, l = {})",
                    self.n, self.l
                ))
            };
        }
        if self.bid_bits == 0 {
            return bad(format!("bid bits must be between 1 and {MAX_BID_BITS}"));
        }
        let k = self.members_per_circle();
        let p = self.travel_width();
        if p == 0 || p + 1 < k {
            return bad(format!(
                "travel width {p} is too small for {k} encoders per sub-circle (need at least {})",
                k.saturating_sub(1).max(1)
            ));
        }
        Ok(())
    }
}

/// An `N`-bit bid, most significant bit first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bid {
    owner: PartyId,
    bits: Vec<u8>,
}

impl Bid {
    pub fn from_value(owner: PartyId, value: u64, bits: usize) -> Result<Self, ProtocolError> {
        if bits == 0 || bits > MAX_BID_BITS || value >> bits != 0 {
            return Err(ProtocolError::BidOverflow { value, bits });
        }
        Ok(Self {
            owner,
            bits: (0..bits).map(|i| ((value >> (bits - 1 - i)) & 1) as u8).collect(),
        })
    }

    pub fn from_bits(owner: PartyId, bits: Vec<u8>) -> Result<Self, ProtocolError> {
        if bits.iter().any(|&b| b > 1) {
            return Err(ProtocolError::BadBit);
        }
        if bits.is_empty() || bits.len() > MAX_BID_BITS {
            return Err(ProtocolError::BidOverflow {
                value: 0,
                bits: bits.len(),
            });
        }
        Ok(Self { owner, bits })
    }

    pub fn owner(&self) -> PartyId {
        self.owner
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn bit(&self, i: usize) -> u8 {
        self.bits[i]
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn value(&self) -> u64 {
        self.bits.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
    }
}

impl Serialize for Bid {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let bits: String = self.bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect();
        let mut st = s.serialize_struct("Bid", 2)?;
        st.serialize_field("bits", &bits)?;
        st.serialize_field("value", &self.value())?;
        st.end()
    }
}

/// Bids from a list of values for `B1, B2, …`.
pub fn bids_from_values(values: &[u64], bits: usize) -> Result<BTreeMap<PartyId, Bid>, ProtocolError> {
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let owner = PartyId::bidder(i as u32 + 1);
            Ok((owner, Bid::from_value(owner, v, bits)?))
        })
        .collect()
}

/// Uniformly random bids for all `n` bidders.
pub fn random_bids<R: Rng + ?Sized>(n: u32, bits: usize, rng: &mut R) -> BTreeMap<PartyId, Bid> {
    (1..=n)
        .map(|i| {
            let owner = PartyId::bidder(i);
            let bits = (0..bits).map(|_| rng.random_range(0..2u8)).collect();
            (owner, Bid { owner, bits })
        })
        .collect()
}

/// What each initiator recovered: initiator → (bidder → bid).
pub type Views = BTreeMap<PartyId, BTreeMap<PartyId, Bid>>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tally {
    pub views: Views,
    pub consistent: bool,
    /// Bidders whose recovered value differs between views.
    pub disputed: Vec<PartyId>,
    /// Agreed bid values; empty when the views disagree.
    pub agreed: BTreeMap<PartyId, u64>,
    pub winner: Option<PartyId>,
    pub tie: bool,
    pub tied: Vec<PartyId>,
    pub price: Option<u64>,
    pub called_off: bool,
    pub settlement_error: Option<String>,
}

/// Cross-checks every view; picks the highest agreed bid, lowest index on ties.
pub fn tally_and_confirm(views: Views) -> Tally {
    let mut seen: BTreeMap<PartyId, BTreeSet<u64>> = BTreeMap::new();
    for view in views.values() {
        for (&party, bid) in view {
            seen.entry(party).or_default().insert(bid.value());
        }
    }
    let disputed: Vec<PartyId> = seen.iter().filter(|(_, v)| v.len() > 1).map(|(&p, _)| p).collect();
    let consistent = disputed.is_empty();
    let agreed: BTreeMap<PartyId, u64> = if consistent {
        seen.iter()
            .map(|(&p, v)| (p, *v.iter().next().expect("non-empty")))
            .collect()
    } else {
        BTreeMap::new()
    };
    let top = agreed.values().copied().max();
    let tied: Vec<PartyId> = match top {
        Some(m) => agreed.iter().filter(|(_, &v)| v == m).map(|(&p, _)| p).collect(),
        None => Vec::new(),
    };
    Tally {
        views,
        consistent,
        disputed,
        winner: tied.first().copied(),
        tie: tied.len() > 1,
        tied,
        agreed,
        price: None,
        called_off: !consistent,
        settlement_error: None,
    }
}

pub fn settle(tally: &Tally, rule: PaymentRule) -> Result<u64, ProtocolError> {
    let winner = tally.winner.ok_or(ProtocolError::NoWinner)?;
    let own = *tally.agreed.get(&winner).ok_or(ProtocolError::NoWinner)?;
    match rule {
        PaymentRule::First => Ok(own),
        PaymentRule::Second => tally
            .agreed
            .iter()
            .filter(|(&p, _)| p != winner)
            .map(|(_, &v)| v)
            .max()
            .ok_or(ProtocolError::NoSecondBid),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AbortStage {
    DecoyCheck,
    Decoding,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AbortInfo {
    pub stage: AbortStage,
    /// Hop round of a failed decoy check.
    pub round: Option<usize>,
    pub hops: Vec<HopId>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Completed(Tally),
    Aborted(AbortInfo),
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuctionRun {
    pub seed: u64,
    pub outcome: Outcome,
    pub transcript: Transcript,
}

impl AuctionRun {
    pub fn tally(&self) -> Option<&Tally> {
        match &self.outcome {
            Outcome::Completed(t) => Some(t),
            Outcome::Aborted(_) => None,
        }
    }

    pub fn abort(&self) -> Option<&AbortInfo> {
        match &self.outcome {
            Outcome::Completed(_) => None,
            Outcome::Aborted(a) => Some(a),
        }
    }

    pub fn is_aborted(&self) -> bool {
        self.abort().is_some()
    }

    /// Aborted because some decoy check failed.
    pub fn detected_by_decoys(&self) -> bool {
        matches!(self.abort(), Some(a) if a.stage == AbortStage::DecoyCheck)
    }
}

/// SplitMix64 finalizer; derives independent per-trial or per-role seeds.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Everything about a configuration that does not depend on bids or seed:
/// ring, plans, assignment and validated decoders. Build once, run many times.
#[derive(Clone, Debug)]
pub struct AuctionSetup {
    config: AuctionConfig,
    ring: Ring,
    plans: Vec<SubCirclePlan>,
    assignment: Assignment,
    base: StateVector,
    travel_targets: Vec<usize>,
    decoders: Vec<Vec<SubcircleDecoder>>,
}

impl AuctionSetup {
    pub fn new(config: AuctionConfig) -> Result<Self, ProtocolError> {
        config.validate()?;
        let ring = config.ring()?;
        let plans = config.plans()?;
        let p = config.travel_width();
        let k = config.members_per_circle();
        let assignment = Assignment::cyclic(&ring, p, k)?;
        let base = prepare_ghz(p + 1)?;
        let travel_targets: Vec<usize> = (1..=p).collect();
        let mut cache: HashMap<Vec<PhasedPauliString>, SubcircleDecoder> = HashMap::new();
        let mut decoders = Vec::with_capacity(plans.len());
        for plan in &plans {
            let mut row = Vec::with_capacity(plan.circles.len());
            for circle in &plan.circles {
                let key = assignment.generators(&circle.members)?;
                let dec = match cache.get(&key) {
                    Some(d) => d.relabel(&circle.members),
                    None => {
                        let d = SubcircleDecoder::new(&assignment, &circle.members, &base, &travel_targets)?;
                        cache.insert(key, d.clone());
                        d
                    }
                };
                row.push(dec);
            }
            decoders.push(row);
        }
        Ok(Self {
            config,
            ring,
            plans,
            assignment,
            base,
            travel_targets,
            decoders,
        })
    }

    pub fn config(&self) -> &AuctionConfig {
        &self.config
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn plans(&self) -> &[SubCirclePlan] {
        &self.plans
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    /// The GHZ state every initiator prepares; qubit 0 stays home.
    pub fn base_state(&self) -> &StateVector {
        &self.base
    }

    pub fn travel_targets(&self) -> &[usize] {
        &self.travel_targets
    }

    pub fn travel_width(&self) -> usize {
        self.travel_targets.len()
    }

    pub fn members_per_circle(&self) -> usize {
        self.config.members_per_circle()
    }

    /// A decoder for an arbitrary ordered encoder list.
    pub fn decoder_for(&self, encoders: &[PartyId]) -> Result<SubcircleDecoder, ProtocolError> {
        Ok(SubcircleDecoder::new(
            &self.assignment,
            encoders,
            &self.base,
            &self.travel_targets,
        )?)
    }

    fn check_bids(&self, bids: &BTreeMap<PartyId, Bid>) -> Result<(), ProtocolError> {
        for party in self.ring.bidders() {
            let bid = bids.get(&party).ok_or(ProtocolError::MissingBid(party))?;
            if bid.len() != self.config.bid_bits {
                return Err(ProtocolError::BidLength {
                    party,
                    expected: self.config.bid_bits,
                    got: bid.len(),
                });
            }
        }
        if let Some(&extra) = bids
            .keys()
            .find(|p| p.is_auctioneer() || self.ring.position(**p).is_err())
        {
            return Err(ProtocolError::UnexpectedBid(extra));
        }
        Ok(())
    }

    /// Honest run with the configured seed.
    pub fn run_honest(&self, bids: &BTreeMap<PartyId, Bid>) -> Result<AuctionRun, ProtocolError> {
        self.run(bids, &mut Honest, self.config.seed)
    }

    pub fn run(
        &self,
        bids: &BTreeMap<PartyId, Bid>,
        adversary: &mut dyn Adversary,
        seed: u64,
    ) -> Result<AuctionRun, ProtocolError> {
        self.check_bids(bids)?;
        Engine::new(self, seed).execute(bids, adversary)
    }
}

struct CircleRun {
    plan: usize,
    circle: usize,
    states: Vec<u32>,
    travel: QubitSequence,
}

struct Engine<'a> {
    setup: &'a AuctionSetup,
    seed: u64,
    rng: ChaCha8Rng,
    register: QuantumRegister,
    transcript: Transcript,
}

impl<'a> Engine<'a> {
    fn new(setup: &'a AuctionSetup, seed: u64) -> Self {
        Self {
            setup,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            register: QuantumRegister::new(),
            transcript: Transcript::new(),
        }
    }

    fn circle(&self, c: &CircleRun) -> &'a SubCircle {
        &self.setup.plans[c.plan].circles[c.circle]
    }

    fn hop_id(&self, c: &CircleRun, hop: usize) -> HopId {
        HopId {
            initiator: self.setup.plans[c.plan].initiator,
            circle: c.circle,
            hop,
        }
    }

    fn context(&self, c: &CircleRun, hop: usize) -> HopContext<'a> {
        let circle = self.circle(c);
        let (from, to) = circle.hop_endpoints(hop);
        HopContext {
            hop: self.hop_id(c, hop),
            from,
            to,
            circle,
            states: c.states.clone(),
            setup: self.setup,
        }
    }

    fn aborted(self, info: AbortInfo) -> AuctionRun {
        let mut transcript = self.transcript;
        transcript.push(Event::Abort {
            stage: match info.stage {
                AbortStage::DecoyCheck => "decoy_check".into(),
                AbortStage::Decoding => "decoding".into(),
            },
            round: info.round,
            hops: info.hops.clone(),
        });
        AuctionRun {
            seed: self.seed,
            outcome: Outcome::Aborted(info),
            transcript,
        }
    }

    fn prepare(&mut self) -> Vec<CircleRun> {
        let n_bits = self.setup.config.bid_bits;
        let p = self.setup.travel_width();
        let mut circles = Vec::new();
        for (pi, plan) in self.setup.plans.iter().enumerate() {
            for ci in 0..plan.circles.len() {
                let mut states = Vec::with_capacity(n_bits);
                let mut travel = Vec::with_capacity(n_bits * p);
                for t in 0..n_bits {
                    let id = self.register.add(self.setup.base.clone());
                    self.transcript.push(Event::Prepare {
                        initiator: plan.initiator,
                        circle: ci,
                        bit_index: t,
                        state: id,
                        qubits: p + 1,
                        travel: p,
                    });
                    states.push(id);
                    travel.extend(self.setup.travel_targets.iter().map(|&q| QubitHandle {
                        state: id,
                        qubit: q as u16,
                    }));
                }
                circles.push(CircleRun {
                    plan: pi,
                    circle: ci,
                    states,
                    travel: QubitSequence::new(SequenceKind::Travel, travel),
                });
            }
        }
        circles
    }

    /// One lockstep hop round; returns the hops whose decoy check failed.
    fn hop_round(
        &mut self,
        circles: &mut [CircleRun],
        h: usize,
        adversary: &mut dyn Adversary,
    ) -> Result<Vec<HopId>, ProtocolError> {
        let mut enlarged: Vec<(QubitSequence, DecoyRecord)> = Vec::with_capacity(circles.len());
        for c in circles.iter_mut() {
            let ctx = self.context(c, h);
            adversary.before_send(&ctx, &mut c.travel, &mut self.register)?;
            let (seq, record) = insert_decoys(&c.travel, ctx.from, &mut self.register, &mut self.rng)?;
            self.transcript.push(Event::InsertDecoys {
                hop: ctx.hop,
                owner: ctx.from,
                decoys: record.positions.len(),
                positions: record.positions.clone(),
            });
            enlarged.push((seq, record));
        }
        let mut delivered = Vec::with_capacity(circles.len());
        for (c, (seq, record)) in circles.iter().zip(enlarged) {
            let ctx = self.context(c, h);
            let tap: &mut dyn Tap = adversary;
            let got = send(
                seq,
                ctx.hop,
                ctx.from,
                ctx.to,
                Some(tap),
                &mut self.register,
                &mut self.transcript,
            )?;
            self.setup.config.noise.apply(&got, &mut self.register, &mut self.rng)?;
            delivered.push((got, record));
        }
        let mut failed = Vec::new();
        for (c, (got, record)) in circles.iter_mut().zip(delivered) {
            let ctx = self.context(c, h);
            classical_broadcast(
                ClassicalMessage::ReceiptConfirmation { hop: ctx.hop },
                ctx.to,
                &mut self.transcript,
            );
            classical_broadcast(
                ClassicalMessage::DecoyDisclosure {
                    hop: ctx.hop,
                    record: record.clone(),
                },
                ctx.from,
                &mut self.transcript,
            );
            let (res, stripped) = check_decoys(
                &got,
                &record,
                self.setup.config.threshold,
                &mut self.register,
                &mut self.rng,
            )?;
            self.transcript.push(Event::DecoyCheck {
                hop: ctx.hop,
                sampled: res.sampled,
                errors: res.errors,
                verdict: res.verdict,
            });
            if res.verdict == Verdict::Abort {
                failed.push(ctx.hop);
            }
            c.travel = stripped;
        }
        Ok(failed)
    }

    fn encode_round(
        &mut self,
        circles: &mut [CircleRun],
        h: usize,
        bids: &BTreeMap<PartyId, Bid>,
        adversary: &mut dyn Adversary,
    ) -> Result<(), ProtocolError> {
        let p = self.setup.travel_width();
        for c in circles.iter_mut() {
            let ctx = self.context(c, h);
            adversary.after_receive(&ctx, &mut c.travel, &mut self.register)?;
            let party = ctx.to;
            let subgroup = self.setup.assignment.get(party)?;
            for t in 0..self.setup.config.bid_bits {
                // the auctioneer has no bid; it encodes fresh random bits
                let (bit, meaningful) = if party.is_auctioneer() {
                    (self.rng.random_range(0..2u8), false)
                } else {
                    (adversary.encoding_bit(&ctx, party, t, bids[&party].bit(t)) & 1, true)
                };
                if bit == 1 {
                    let handles = c
                        .travel
                        .qubits
                        .get(t * p..(t + 1) * p)
                        .ok_or_else(|| ProtocolError::Adversary("travel sequence was shortened".into()))?;
                    self.register.apply(&subgroup.operator(1), handles)?;
                }
                self.transcript.push(Event::Encode {
                    hop: ctx.hop,
                    party,
                    bit_index: t,
                    bit,
                    meaningful,
                });
            }
        }
        Ok(())
    }

    /// Joint measurement by each initiator; `Err` lists circles that failed.
    fn measure(&mut self, circles: &[CircleRun]) -> Result<Views, Vec<HopId>> {
        let n_bits = self.setup.config.bid_bits;
        let p = self.setup.travel_width();
        let k = self.setup.members_per_circle();
        let mut views: Views = self
            .setup
            .plans
            .iter()
            .map(|pl| (pl.initiator, BTreeMap::new()))
            .collect();
        let mut raw: BTreeMap<(PartyId, PartyId), Vec<u8>> = BTreeMap::new();
        let mut failed = Vec::new();
        for c in circles {
            let initiator = self.setup.plans[c.plan].initiator;
            let decoder = &self.setup.decoders[c.plan][c.circle];
            let mut circle_failed = false;
            for (t, &id) in c.states.iter().enumerate() {
                let expected: Vec<QubitHandle> = self
                    .setup
                    .travel_targets
                    .iter()
                    .map(|&q| QubitHandle {
                        state: id,
                        qubit: q as u16,
                    })
                    .collect();
                let returned = c.travel.qubits.get(t * p..(t + 1) * p);
                let result = if returned != Some(&expected[..]) {
                    Err("returned qubits are not entangled with the home qubit".to_string())
                } else {
                    let state = self.register.state(id).map_err(|e| e.to_string());
                    state.and_then(|s| decoder.decode(s).map_err(|e| e.to_string()))
                };
                match result {
                    Ok((outcome, bits)) => {
                        self.transcript.push(Event::Measure {
                            initiator,
                            circle: c.circle,
                            bit_index: t,
                            outcome,
                        });
                        for (party, bit) in bits {
                            if !party.is_auctioneer() {
                                raw.entry((initiator, party)).or_insert_with(|| vec![0; n_bits])[t] = bit;
                            }
                        }
                    }
                    Err(reason) => {
                        self.transcript.push(Event::DecodeFailure {
                            initiator,
                            circle: c.circle,
                            bit_index: t,
                            reason,
                        });
                        circle_failed = true;
                    }
                }
            }
            if circle_failed {
                failed.push(self.hop_id(c, k));
            }
        }
        if !failed.is_empty() {
            return Err(failed);
        }
        for ((initiator, party), bits) in raw {
            views
                .get_mut(&initiator)
                .expect("every initiator has a view")
                .insert(party, Bid { owner: party, bits });
        }
        Ok(views)
    }

    fn execute(
        mut self,
        bids: &BTreeMap<PartyId, Bid>,
        adversary: &mut dyn Adversary,
    ) -> Result<AuctionRun, ProtocolError> {
        let mut circles = self.prepare();
        let k = self.setup.members_per_circle();
        for h in 0..=k {
            let failed = self.hop_round(&mut circles, h, adversary)?;
            if !failed.is_empty() {
                return Ok(self.aborted(AbortInfo {
                    stage: AbortStage::DecoyCheck,
                    round: Some(h),
                    hops: failed,
                }));
            }
            if h < k {
                self.encode_round(&mut circles, h, bids, adversary)?;
            }
        }
        let mut views = match self.measure(&circles) {
            Ok(v) => v,
            Err(hops) => {
                return Ok(self.aborted(AbortInfo {
                    stage: AbortStage::Decoding,
                    round: None,
                    hops,
                }))
            }
        };
        adversary.announce(&mut views);
        let mut tally = tally_and_confirm(views);
        if tally.winner.is_some() {
            match settle(&tally, self.setup.config.payment_rule) {
                Ok(price) => tally.price = Some(price),
                Err(e) => tally.settlement_error = Some(e.to_string()),
            }
        }
        if self.setup.config.auctioneer {
            classical_broadcast(
                ClassicalMessage::WinnerAnnouncement {
                    winner: tally.winner,
                    price: tally.price,
                    bidders: self.setup.config.n,
                },
                PartyId::AUCTIONEER,
                &mut self.transcript,
            );
        }
        self.transcript.push(Event::Tally {
            consistent: tally.consistent,
            winner: tally.winner,
            tie: tally.tie,
            price: tally.price,
        });
        Ok(AuctionRun {
            seed: self.seed,
            outcome: Outcome::Completed(tally),
            transcript: self.transcript,
        })
    }
}

/// Builds the setup and runs once with `config.seed`.
pub fn run_auction(
    config: &AuctionConfig,
    bids: &BTreeMap<PartyId, Bid>,
    adversary: Option<&mut dyn Adversary>,
) -> Result<AuctionRun, ProtocolError> {
    let setup = AuctionSetup::new(config.clone())?;
    match adversary {
        Some(a) => setup.run(bids, a, config.seed),
        None => setup.run(bids, &mut Honest, config.seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(i: u32) -> PartyId {
        PartyId::bidder(i)
    }

    fn view(values: &[(u32, u64)], bits: usize) -> BTreeMap<PartyId, Bid> {
        values
            .iter()
            .map(|&(i, v)| (b(i), Bid::from_value(b(i), v, bits).unwrap()))
            .collect()
    }

    #[test]
    fn bid_encoding_is_msb_first() {
        let bid = Bid::from_value(b(1), 9, 4).unwrap();
        assert_eq!(bid.bits(), &[1, 0, 0, 1]);
        assert_eq!(bid.value(), 9);
        assert!(Bid::from_value(b(1), 16, 4).is_err());
        assert!(Bid::from_bits(b(1), vec![0, 2]).is_err());
        assert_eq!(serde_json::to_string(&bid).unwrap(), r#"{"bits":"1001","value":9}"#);
    }

    #[test]
    fn settlement_rules() {
        let views: Views = [(PartyId::AUCTIONEER, view(&[(1, 5), (2, 3), (3, 9)], 4))].into();
        let tally = tally_and_confirm(views);
        assert_eq!(tally.winner, Some(b(3)));
        assert_eq!(settle(&tally, PaymentRule::Second).unwrap(), 5);
        assert_eq!(settle(&tally, PaymentRule::First).unwrap(), 9);
        let single = tally_and_confirm([(PartyId::AUCTIONEER, view(&[(1, 5)], 4))].into());
        assert_eq!(settle(&single, PaymentRule::Second), Err(ProtocolError::NoSecondBid));
        let empty = tally_and_confirm(Views::new());
        assert_eq!(settle(&empty, PaymentRule::First), Err(ProtocolError::NoWinner));
    }

    #[test]
    fn ties_pick_lowest_index() {
        let tally = tally_and_confirm([(PartyId::AUCTIONEER, view(&[(1, 2), (2, 7), (3, 7)], 3))].into());
        assert!(tally.tie);
        assert_eq!(tally.tied, vec![b(2), b(3)]);
        assert_eq!(tally.winner, Some(b(2)));
        assert_eq!(settle(&tally, PaymentRule::Second).unwrap(), 7);
    }

    #[test]
    fn disagreeing_views_call_the_auction_off() {
        let views: Views = [
            (PartyId::AUCTIONEER, view(&[(1, 1), (2, 7)], 3)),
            (b(1), view(&[(2, 3)], 3)),
        ]
        .into();
        let tally = tally_and_confirm(views);
        assert!(!tally.consistent);
        assert!(tally.called_off);
        assert_eq!(tally.disputed, vec![b(2)]);
        assert_eq!(tally.winner, None);
    }

    #[test]
    fn config_validation() {
        assert!(AuctionConfig::new(6, 3, 1).validate().is_ok());
        let err = AuctionConfig::new(5, 3, 1).validate().unwrap_err();
        assert!(err.to_string().contains("l must divide n"), "{err}");
        assert!(AuctionConfig::new(6, 3, 0).validate().is_err());
        assert!(AuctionConfig::new(6, 1, 1).with_travel_width(2).validate().is_err());
        assert!(AuctionConfig::new(6, 1, 1).with_travel_width(5).validate().is_ok());
        assert!(AuctionConfig::new(6, 1, 1).without_auctioneer().validate().is_ok());
        assert!(AuctionConfig::new(6, 2, 1).without_auctioneer().validate().is_err());
        assert_eq!(AuctionConfig::new(6, 6, 1).travel_width(), 1);
        assert_eq!(AuctionConfig::new(12, 1, 1).travel_width(), 11);
    }

    #[test]
    fn worked_example_recovers_bids_everywhere() {
        let bids = bids_from_values(&[1, 0, 1, 1, 0, 0], 1).unwrap();
        let run = run_auction(&AuctionConfig::new(6, 3, 1).with_seed(3), &bids, None).unwrap();
        let tally = run.tally().expect("honest run completes");
        assert_eq!(tally.views.len(), 7);
        for (initiator, view) in &tally.views {
            for (party, bid) in view {
                assert_eq!(bid, &bids[party], "{initiator} misread {party}");
            }
            let expected = if initiator.is_auctioneer() { 6 } else { 5 };
            assert_eq!(view.len(), expected);
        }
        assert!(tally.consistent);
        assert!(tally.tie);
        assert_eq!(tally.tied, vec![b(1), b(3), b(4)]);
        assert_eq!(tally.winner, Some(b(1)));
    }

    #[test]
    fn all_zero_bids_tie_everyone() {
        let bids = bids_from_values(&[0; 4], 2).unwrap();
        let run = run_auction(&AuctionConfig::new(4, 2, 2).with_seed(1), &bids, None).unwrap();
        let tally = run.tally().unwrap();
        assert_eq!(tally.tied.len(), 4);
        assert_eq!(tally.winner, Some(b(1)));
    }

    #[test]
    fn same_seed_same_transcript() {
        let bids = bids_from_values(&[3, 1, 2, 0], 2).unwrap();
        let cfg = AuctionConfig::new(4, 2, 2).with_seed(99);
        let a = run_auction(&cfg, &bids, None).unwrap();
        let b2 = run_auction(&cfg, &bids, None).unwrap();
        assert_eq!(a.transcript.to_json_lines(), b2.transcript.to_json_lines());
        let c = run_auction(&cfg.clone().with_seed(100), &bids, None).unwrap();
        assert_ne!(a.transcript.digest(), c.transcript.digest());
    }

    #[test]
    fn bid_checks() {
        let cfg = AuctionConfig::new(2, 1, 2);
        let short = bids_from_values(&[1], 2).unwrap();
        assert_eq!(
            run_auction(&cfg, &short, None).unwrap_err(),
            ProtocolError::MissingBid(b(2))
        );
        let wrong = bids_from_values(&[1, 1], 3).unwrap();
        assert!(matches!(
            run_auction(&cfg, &wrong, None).unwrap_err(),
            ProtocolError::BidLength { .. }
        ));
        let extra = bids_from_values(&[1, 1, 1], 2).unwrap();
        assert_eq!(
            run_auction(&cfg, &extra, None).unwrap_err(),
            ProtocolError::UnexpectedBid(b(3))
        );
    }

    #[test]
    fn tree_and_auctioneer_less_modes() {
        let bids = bids_from_values(&[2, 3, 1], 2).unwrap();
        let tree = run_auction(&AuctionConfig::new(3, 3, 2).tree(), &bids, None).unwrap();
        let t = tree.tally().unwrap();
        assert_eq!(t.views.keys().copied().collect::<Vec<_>>(), vec![PartyId::AUCTIONEER]);
        assert_eq!(t.winner, Some(b(2)));
        let free = run_auction(&AuctionConfig::new(3, 1, 2).without_auctioneer(), &bids, None).unwrap();
        let t = free.tally().unwrap();
        assert_eq!(t.views.len(), 3);
        assert!(t.consistent);
        assert_eq!(t.winner, Some(b(2)));
        assert!(!free
            .transcript
            .events()
            .iter()
            .any(|e| matches!(e, Event::Broadcast { bits, .. } if *bits > 0.0)));
    }

    #[test]
    fn derived_seeds_differ() {
        let s: BTreeSet<u64> = (0..1000).map(|i| derive_seed(7, i)).collect();
        assert_eq!(s.len(), 1000);
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
    }
}
