//! Attack models: intercept-resend, disturbance, two-party substitution
//! collusion, inconsistent bids, and auctioneer forgery.
//!
//! Each model plugs into the run loop through [`Adversary`] hooks and keeps
//! its own RNG stream, so attacks never perturb the honest parties' draws.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::encoding::SubcircleDecoder;
use crate::protocol::{derive_seed, AuctionConfig, AuctionRun, AuctionSetup, Bid, ProtocolError, Tally, Views};
use crate::quantum_sim::{Basis, PauliLetter};
use crate::topology::{PartyId, SubCircle};
use crate::transport::{HopId, QuantumRegister, QubitHandle, QubitSequence, SequenceKind, Tap};

/// What an adversary hook sees about the current hop.
#[derive(Clone, Debug)]
pub struct HopContext<'a> {
    pub hop: HopId,
    pub from: PartyId,
    pub to: PartyId,
    pub circle: &'a SubCircle,
    /// Register ids of the circle's entangled states, one per bit position.
    pub states: Vec<u32>,
    pub setup: &'a AuctionSetup,
}

/// Hooks called by the run loop. All default to honest behaviour.
pub trait Adversary: Tap {
    /// Sender side, before decoys are added.
    fn before_send(
        &mut self,
        _ctx: &HopContext<'_>,
        _travel: &mut QubitSequence,
        _register: &mut QuantumRegister,
    ) -> Result<(), ProtocolError> {
        Ok(())
    }

    /// Receiver side, after the decoy check and before the receiver encodes.
    fn after_receive(
        &mut self,
        _ctx: &HopContext<'_>,
        _travel: &mut QubitSequence,
        _register: &mut QuantumRegister,
    ) -> Result<(), ProtocolError> {
        Ok(())
    }

    /// The bit `party` actually encodes for `bit_index`.
    fn encoding_bit(&mut self, _ctx: &HopContext<'_>, _party: PartyId, _bit_index: usize, honest: u8) -> u8 {
        honest
    }

    /// Last chance to alter recovered views before the cross-check.
    fn announce(&mut self, _views: &mut Views) {}
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Honest;

impl Tap for Honest {
    fn intercept(&mut self, _hop: &HopId, _in_flight: &mut QubitSequence, _register: &mut QuantumRegister) {}
}

impl Adversary for Honest {}

/// Which hops a channel adversary touches.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TapTarget {
    All,
    Hops(BTreeSet<HopId>),
}

impl TapTarget {
    pub fn single(hop: HopId) -> Self {
        TapTarget::Hops([hop].into())
    }

    pub fn none() -> Self {
        TapTarget::Hops(BTreeSet::new())
    }

    pub fn contains(&self, hop: &HopId) -> bool {
        match self {
            TapTarget::All => true,
            TapTarget::Hops(h) => h.contains(hop),
        }
    }
}

/// Serializable description of an attack scenario.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum AdversaryModel {
    InterceptResend {
        hops: TapTarget,
    },
    Collusion {
        colluders: Vec<PartyId>,
    },
    InconsistentBid {
        party: PartyId,
        overrides: BTreeMap<PartyId, Bid>,
    },
    Disturbance {
        hops: TapTarget,
    },
    AuctioneerForgery {
        colluder: PartyId,
        forged: u64,
    },
}

/// Measures every tapped qubit in a uniformly random BB84 basis and
/// forwards the collapsed qubit.
#[derive(Clone, Debug)]
pub struct InterceptResend {
    target: TapTarget,
    rng: ChaCha8Rng,
    intercepted: usize,
}

impl InterceptResend {
    pub fn new(target: TapTarget, seed: u64) -> Self {
        Self {
            target,
            rng: ChaCha8Rng::seed_from_u64(seed),
            intercepted: 0,
        }
    }

    pub fn intercepted(&self) -> usize {
        self.intercepted
    }
}

impl Tap for InterceptResend {
    fn intercept(&mut self, hop: &HopId, in_flight: &mut QubitSequence, register: &mut QuantumRegister) {
        if !self.target.contains(hop) {
            return;
        }
        for &q in &in_flight.qubits {
            let basis = if self.rng.random_bool(0.5) {
                Basis::Diagonal
            } else {
                Basis::Computational
            };
            register
                .measure(q, basis, &mut self.rng)
                .expect("in-flight handles are valid");
            self.intercepted += 1;
        }
    }
}

impl Adversary for InterceptResend {}

/// Applies `Y` to every qubit in flight on the corrupted hops. `Y` maps each
/// BB84 state to its orthogonal partner, so every decoy on those hops fails.
#[derive(Clone, Debug)]
pub struct Disturbance {
    target: TapTarget,
}

impl Disturbance {
    pub fn new(target: TapTarget) -> Self {
        Self { target }
    }
}

impl Tap for Disturbance {
    fn intercept(&mut self, hop: &HopId, in_flight: &mut QubitSequence, register: &mut QuantumRegister) {
        if !self.target.contains(hop) {
            return;
        }
        for &q in &in_flight.qubits {
            register
                .apply_letter(PauliLetter::Y, q)
                .expect("in-flight handles are valid");
        }
    }
}

impl Adversary for Disturbance {}

/// A bidder who encodes a different bid inside different initiators' circles.
#[derive(Clone, Debug)]
pub struct InconsistentBid {
    party: PartyId,
    overrides: BTreeMap<PartyId, Bid>,
}

impl InconsistentBid {
    /// `overrides` maps an initiator to the bid encoded in its circles;
    /// other initiators see the honest bid.
    pub fn new(party: PartyId, overrides: BTreeMap<PartyId, Bid>) -> Self {
        Self { party, overrides }
    }
}

impl Tap for InconsistentBid {
    fn intercept(&mut self, _hop: &HopId, _in_flight: &mut QubitSequence, _register: &mut QuantumRegister) {}
}

impl Adversary for InconsistentBid {
    fn encoding_bit(&mut self, ctx: &HopContext<'_>, party: PartyId, bit_index: usize, honest: u8) -> u8 {
        if party != self.party {
            return honest;
        }
        self.overrides
            .get(&ctx.hop.initiator)
            .map_or(honest, |bid| bid.bit(bit_index))
    }
}

/// The auctioneer rewrites its own view of a colluding bidder's bid.
#[derive(Clone, Debug)]
pub struct AuctioneerForgery {
    colluder: PartyId,
    forged: u64,
}

impl AuctioneerForgery {
    pub fn new(colluder: PartyId, forged: u64) -> Self {
        Self { colluder, forged }
    }
}

impl Tap for AuctioneerForgery {
    fn intercept(&mut self, _hop: &HopId, _in_flight: &mut QubitSequence, _register: &mut QuantumRegister) {}
}

impl Adversary for AuctioneerForgery {
    fn announce(&mut self, views: &mut Views) {
        if let Some(view) = views.get_mut(&PartyId::AUCTIONEER) {
            if let Some(bid) = view.get(&self.colluder) {
                let bits = bid.len();
                let value = self.forged & (u64::MAX >> (64 - bits));
                let forged = Bid::from_value(self.colluder, value, bits).expect("masked to width");
                view.insert(self.colluder, forged);
            }
        }
    }
}

/// Genuine travel qubits a source colluder held back, keyed by circle.
#[derive(Clone, Debug)]
struct Held {
    genuine: Vec<QubitHandle>,
    fake_states: Vec<u32>,
}

/// Substitution strategy of a bidder coalition.
///
/// Along each circle's path, whenever two colluders have honest parties
/// between them, the earlier one reads those parties' bits before the
/// initiator does. If the earlier colluder is the initiator it simply ships
/// its home qubits to the later one. Otherwise it swaps the travel qubits for
/// a fresh GHZ state of its own and passes the genuine qubits on privately;
/// the later colluder measures the substitute, then re-applies the observed
/// encodings to the genuine qubits and forwards those, leaving no trace.
#[derive(Clone, Debug)]
pub struct Collusion {
    colluders: BTreeSet<PartyId>,
    held: HashMap<(PartyId, usize), Held>,
    decoders: HashMap<Vec<PartyId>, SubcircleDecoder>,
    recovered: BTreeMap<(PartyId, usize), u8>,
}

impl Collusion {
    pub fn new(colluders: impl IntoIterator<Item = PartyId>) -> Result<Self, ProtocolError> {
        let colluders: BTreeSet<PartyId> = colluders.into_iter().collect();
        if colluders.len() < 2 {
            return Err(ProtocolError::Adversary(
                "a coalition needs two distinct colluders".into(),
            ));
        }
        if colluders.contains(&PartyId::AUCTIONEER) {
            return Err(ProtocolError::Adversary("colluders must be bidders".into()));
        }
        Ok(Self {
            colluders,
            held: HashMap::new(),
            decoders: HashMap::new(),
            recovered: BTreeMap::new(),
        })
    }

    pub fn colluders(&self) -> &BTreeSet<PartyId> {
        &self.colluders
    }

    /// Honest bidders' bits the coalition read before the final measurement.
    pub fn recovered(&self) -> &BTreeMap<(PartyId, usize), u8> {
        &self.recovered
    }

    /// Path position of the next colluder after `pos` among the members.
    fn next_colluder(&self, path: &[PartyId], pos: usize) -> Option<usize> {
        (pos + 1..path.len()).find(|&i| self.colluders.contains(&path[i]))
    }

    fn previous_colluder(&self, path: &[PartyId], pos: usize) -> Option<usize> {
        (0..pos).rev().find(|&i| self.colluders.contains(&path[i]))
    }

    fn read(
        &mut self,
        ctx: &HopContext<'_>,
        intermediates: &[PartyId],
        states: &[u32],
        register: &QuantumRegister,
    ) -> Result<Vec<Vec<(PartyId, u8)>>, ProtocolError> {
        if !self.decoders.contains_key(intermediates) {
            let d = ctx.setup.decoder_for(intermediates)?;
            self.decoders.insert(intermediates.to_vec(), d);
        }
        let dec = &self.decoders[intermediates];
        let mut out = Vec::with_capacity(states.len());
        for &id in states {
            let (_, bits) = dec.decode(register.state(id)?)?;
            out.push(bits);
        }
        Ok(out)
    }

    fn record(&mut self, bits: &[Vec<(PartyId, u8)>]) {
        for (t, row) in bits.iter().enumerate() {
            for &(party, bit) in row {
                if !party.is_auctioneer() && !self.colluders.contains(&party) {
                    self.recovered.insert((party, t), bit);
                }
            }
        }
    }
}

impl Tap for Collusion {
    fn intercept(&mut self, _hop: &HopId, _in_flight: &mut QubitSequence, _register: &mut QuantumRegister) {}
}

impl Adversary for Collusion {
    fn before_send(
        &mut self,
        ctx: &HopContext<'_>,
        travel: &mut QubitSequence,
        register: &mut QuantumRegister,
    ) -> Result<(), ProtocolError> {
        let path = ctx.circle.path();
        let pos = ctx.hop.hop;
        if pos == 0 || pos >= path.len() || !self.colluders.contains(&path[pos]) {
            return Ok(());
        }
        match self.next_colluder(&path, pos) {
            Some(next) if next > pos + 1 => {}
            _ => return Ok(()),
        }
        let p = ctx.setup.travel_width();
        let mut fake_states = Vec::with_capacity(ctx.states.len());
        let mut fake = Vec::with_capacity(travel.len());
        for _ in 0..ctx.states.len() {
            let id = register.add(ctx.setup.base_state().clone());
            fake_states.push(id);
            fake.extend(ctx.setup.travel_targets().iter().map(|&q| QubitHandle {
                state: id,
                qubit: q as u16,
            }));
        }
        debug_assert_eq!(fake.len(), ctx.states.len() * p);
        let genuine = std::mem::replace(&mut travel.qubits, fake);
        travel.kind = SequenceKind::Travel;
        self.held
            .insert((ctx.hop.initiator, ctx.hop.circle), Held { genuine, fake_states });
        Ok(())
    }

    fn after_receive(
        &mut self,
        ctx: &HopContext<'_>,
        travel: &mut QubitSequence,
        register: &mut QuantumRegister,
    ) -> Result<(), ProtocolError> {
        let path = ctx.circle.path();
        let pos = ctx.hop.hop + 1;
        if pos >= path.len() || !self.colluders.contains(&path[pos]) {
            return Ok(());
        }
        let prev = match self.previous_colluder(&path, pos) {
            Some(prev) if prev + 1 < pos => prev,
            _ => return Ok(()),
        };
        let intermediates = path[prev + 1..pos].to_vec();
        if prev == 0 {
            // the initiator's home qubits arrived out of band
            let bits = self.read(ctx, &intermediates, &ctx.states, register)?;
            self.record(&bits);
            return Ok(());
        }
        let held = self
            .held
            .remove(&(ctx.hop.initiator, ctx.hop.circle))
            .ok_or_else(|| ProtocolError::Adversary("no substituted qubits to read".into()))?;
        let bits = self.read(ctx, &intermediates, &held.fake_states, register)?;
        let p = ctx.setup.travel_width();
        for (t, row) in bits.iter().enumerate() {
            for &(party, bit) in row {
                if bit == 1 {
                    let op = ctx.setup.assignment().get(party)?.operator(1);
                    register.apply(&op, &held.genuine[t * p..(t + 1) * p])?;
                }
            }
        }
        travel.qubits = held.genuine;
        self.record(&bits);
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LeakedBit {
    pub party: PartyId,
    pub bit_index: usize,
    pub value: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeakageReport {
    pub colluders: Vec<PartyId>,
    /// Honest bidders' bits known to the coalition before the final measurement.
    pub leaked: Vec<LeakedBit>,
    /// Honest bidders whose every bit leaked.
    pub fully_leaked: Vec<PartyId>,
    /// Honest bidders with at least one bit kept secret.
    pub protected: Vec<PartyId>,
    pub honest_bits: usize,
    pub detected: bool,
    pub detection_round: Option<usize>,
    pub completed: bool,
}

impl LeakageReport {
    pub fn leaked_fraction(&self) -> f64 {
        if self.honest_bits == 0 {
            0.0
        } else {
            self.leaked.len() as f64 / self.honest_bits as f64
        }
    }

    /// Every leaked value agrees with the submitted bid.
    pub fn is_sound(&self, bids: &BTreeMap<PartyId, Bid>) -> bool {
        self.leaked
            .iter()
            .all(|l| bids.get(&l.party).is_some_and(|b| b.bit(l.bit_index) == l.value))
    }
}

fn adversary_seed(seed: u64) -> u64 {
    derive_seed(seed, 0xAD)
}

pub fn run_collusion(
    setup: &AuctionSetup,
    bids: &BTreeMap<PartyId, Bid>,
    colluders: &[PartyId],
    seed: u64,
) -> Result<(LeakageReport, AuctionRun), ProtocolError> {
    let mut coalition = Collusion::new(colluders.iter().copied())?;
    for c in coalition.colluders() {
        if setup.ring().position(*c).is_err() {
            return Err(ProtocolError::Adversary(format!("{c} is not on the ring")));
        }
    }
    let run = setup.run(bids, &mut coalition, seed)?;
    let n_bits = setup.config().bid_bits;
    let honest: Vec<PartyId> = setup
        .ring()
        .bidders()
        .filter(|p| !coalition.colluders().contains(p))
        .collect();
    let leaked: Vec<LeakedBit> = coalition
        .recovered()
        .iter()
        .map(|(&(party, bit_index), &value)| LeakedBit {
            party,
            bit_index,
            value,
        })
        .collect();
    let (fully_leaked, protected): (Vec<PartyId>, Vec<PartyId>) = honest
        .iter()
        .partition(|&&p| (0..n_bits).all(|t| coalition.recovered().contains_key(&(p, t))));
    let abort = run.abort();
    let report = LeakageReport {
        colluders: coalition.colluders().iter().copied().collect(),
        leaked,
        fully_leaked,
        protected,
        honest_bits: honest.len() * n_bits,
        detected: run.detected_by_decoys(),
        detection_round: abort.and_then(|a| a.round),
        completed: !run.is_aborted(),
    };
    Ok((report, run))
}

pub fn run_participant_attack(
    setup: &AuctionSetup,
    bids: &BTreeMap<PartyId, Bid>,
    cheater: PartyId,
    overrides: BTreeMap<PartyId, Bid>,
    seed: u64,
) -> Result<Tally, ProtocolError> {
    let n_bits = setup.config().bid_bits;
    if let Some(bad) = overrides.values().find(|b| b.len() != n_bits) {
        return Err(ProtocolError::BidLength {
            party: cheater,
            expected: n_bits,
            got: bad.len(),
        });
    }
    let mut adv = InconsistentBid::new(cheater, overrides);
    let run = setup.run(bids, &mut adv, seed)?;
    run.tally()
        .cloned()
        .ok_or_else(|| ProtocolError::Adversary("run aborted before the tally".into()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetectionStats {
    pub trials: usize,
    pub detected: usize,
    /// Trials that passed every decoy check but failed the final measurement.
    pub decode_failures: usize,
    pub rate: f64,
    /// Wilson 95% interval for `rate`.
    pub ci_low: f64,
    pub ci_high: f64,
}

impl DetectionStats {
    fn from_counts(trials: usize, detected: usize, decode_failures: usize) -> Self {
        let n = trials as f64;
        let rate = if trials == 0 { 0.0 } else { detected as f64 / n };
        let (ci_low, ci_high) = wilson(rate, n);
        Self {
            trials,
            detected,
            decode_failures,
            rate,
            ci_low,
            ci_high,
        }
    }
}

fn wilson(p: f64, n: f64) -> (f64, f64) {
    if n == 0.0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Independent seeded trials, run in parallel. Trial `i` uses
/// `derive_seed(seed, i)` for the protocol and a derived stream for the tap.
pub fn run_intercept_resend(
    setup: &AuctionSetup,
    bids: &BTreeMap<PartyId, Bid>,
    target: &TapTarget,
    trials: usize,
    seed: u64,
) -> Result<DetectionStats, ProtocolError> {
    if trials == 0 {
        return Err(ProtocolError::Adversary("at least one trial is required".into()));
    }
    let outcomes: Vec<(bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let s = derive_seed(seed, i as u64);
            let mut eve = InterceptResend::new(target.clone(), adversary_seed(s));
            let run = setup.run(bids, &mut eve, s)?;
            Ok((run.detected_by_decoys(), run.is_aborted() && !run.detected_by_decoys()))
        })
        .collect::<Result<_, ProtocolError>>()?;
    let detected = outcomes.iter().filter(|o| o.0).count();
    let failures = outcomes.iter().filter(|o| o.1).count();
    Ok(DetectionStats::from_counts(trials, detected, failures))
}

pub fn run_disturbance(
    setup: &AuctionSetup,
    bids: &BTreeMap<PartyId, Bid>,
    target: &TapTarget,
    seed: u64,
) -> Result<AuctionRun, ProtocolError> {
    setup.run(bids, &mut Disturbance::new(target.clone()), seed)
}

/// Repeats the disturbed auction `retries` times with fresh seeds; true where it aborted.
pub fn run_disturbance_retries(
    setup: &AuctionSetup,
    bids: &BTreeMap<PartyId, Bid>,
    target: &TapTarget,
    retries: usize,
    seed: u64,
) -> Result<Vec<bool>, ProtocolError> {
    (0..retries)
        .map(|i| Ok(run_disturbance(setup, bids, target, derive_seed(seed, i as u64))?.is_aborted()))
        .collect()
}

pub fn run_forgery(
    config: &AuctionConfig,
    bids: &BTreeMap<PartyId, Bid>,
    colluder: PartyId,
    forged: u64,
) -> Result<AuctionRun, ProtocolError> {
    let setup = AuctionSetup::new(config.clone())?;
    setup.run(bids, &mut AuctioneerForgery::new(colluder, forged), config.seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::bids_from_values;

    const A: PartyId = PartyId::AUCTIONEER;

    fn b(i: u32) -> PartyId {
        PartyId::bidder(i)
    }

    fn setup(n: u32, l: usize, bits: usize) -> AuctionSetup {
        AuctionSetup::new(AuctionConfig::new(n, l, bits)).unwrap()
    }

    #[test]
    fn collusion_leaks_everything_with_one_circle() {
        let s = setup(6, 1, 2);
        let bids = bids_from_values(&[3, 1, 2, 0, 1, 3], 2).unwrap();
        let (report, run) = run_collusion(&s, &bids, &[b(1), b(4)], 5).unwrap();
        assert!(!report.detected);
        assert!(report.completed);
        assert_eq!(report.fully_leaked, vec![b(2), b(3), b(5), b(6)]);
        assert!(report.protected.is_empty());
        assert!(report.is_sound(&bids));
        // the attack leaves the auction result intact
        let tally = run.tally().unwrap();
        assert!(tally.consistent);
        assert_eq!(tally.winner, Some(b(1)));
    }

    #[test]
    fn adjacent_colluders_learn_nothing() {
        let s = setup(6, 1, 1);
        let bids = bids_from_values(&[1, 0, 1, 1, 0, 0], 1).unwrap();
        // B1 and B2 are adjacent on every path except through the wrap, where
        // the others sit between them
        let (report, _) = run_collusion(&s, &bids, &[b(1), b(2)], 1).unwrap();
        assert!(report.is_sound(&bids));
        let s3 = setup(6, 3, 1);
        let (report, _) = run_collusion(&s3, &bids, &[b(1), b(2)], 1).unwrap();
        assert!(report.leaked.is_empty());
    }

    #[test]
    fn collusion_argument_errors() {
        let s = setup(6, 1, 1);
        let bids = bids_from_values(&[0; 6], 1).unwrap();
        assert!(run_collusion(&s, &bids, &[b(1), b(1)], 0).is_err());
        assert!(run_collusion(&s, &bids, &[], 0).is_err());
        assert!(run_collusion(&s, &bids, &[A, b(1)], 0).is_err());
    }

    #[test]
    fn inconsistent_bid_is_caught() {
        let s = setup(6, 3, 1);
        let bids = bids_from_values(&[0, 0, 0, 0, 0, 0], 1).unwrap();
        let overrides = [(A, Bid::from_value(b(3), 1, 1).unwrap())].into();
        let tally = run_participant_attack(&s, &bids, b(3), overrides, 2).unwrap();
        assert!(!tally.consistent);
        assert_eq!(tally.winner, None);
        assert_eq!(tally.disputed, vec![b(3)]);
        let same: BTreeMap<PartyId, Bid> = [A, b(1), b(2)]
            .into_iter()
            .map(|i| (i, Bid::from_value(b(3), 0, 1).unwrap()))
            .collect();
        assert!(run_participant_attack(&s, &bids, b(3), same, 2).unwrap().consistent);
    }

    #[test]
    fn forgery_depends_on_structure() {
        let bids = bids_from_values(&[5, 2, 7], 3).unwrap();
        let tree = run_forgery(&AuctionConfig::new(3, 3, 3).tree(), &bids, b(2), 7).unwrap();
        let t = tree.tally().unwrap();
        assert!(t.consistent);
        assert_eq!(t.winner, Some(b(2)));
        let circ = run_forgery(&AuctionConfig::new(3, 3, 3), &bids, b(2), 7).unwrap();
        let t = circ.tally().unwrap();
        assert!(!t.consistent);
        assert_eq!(t.winner, None);
    }

    #[test]
    fn disturbance_always_aborts() {
        let s = setup(4, 2, 1);
        let bids = bids_from_values(&[1, 0, 1, 0], 1).unwrap();
        let hop = HopId {
            initiator: b(2),
            circle: 1,
            hop: 2,
        };
        let run = run_disturbance(&s, &bids, &TapTarget::single(hop), 0).unwrap();
        assert!(run.detected_by_decoys());
        assert_eq!(run.abort().unwrap().hops, vec![hop]);
        assert!(run_disturbance_retries(&s, &bids, &TapTarget::single(hop), 20, 9)
            .unwrap()
            .iter()
            .all(|&a| a));
        let beyond = HopId { hop: 9, ..hop };
        assert!(!run_disturbance(&s, &bids, &TapTarget::single(beyond), 0)
            .unwrap()
            .is_aborted());
    }

    #[test]
    fn no_tapped_hops_no_detection() {
        let s = setup(4, 2, 1);
        let bids = bids_from_values(&[1, 0, 1, 0], 1).unwrap();
        let stats = run_intercept_resend(&s, &bids, &TapTarget::none(), 50, 3).unwrap();
        assert_eq!(stats.detected, 0);
        assert_eq!(stats.rate, 0.0);
    }

    #[test]
    fn tapping_everything_is_caught() {
        let s = setup(6, 3, 3);
        let bids = bids_from_values(&[1, 0, 7, 3, 0, 2], 3).unwrap();
        let stats = run_intercept_resend(&s, &bids, &TapTarget::All, 200, 4).unwrap();
        assert_eq!(stats.detected, 200);
    }

    #[test]
    fn wilson_interval_brackets_rate() {
        let s = DetectionStats::from_counts(1000, 250, 0);
        assert!(s.ci_low < 0.25 && 0.25 < s.ci_high);
        assert!(s.ci_high - s.ci_low < 0.06);
    }
}
