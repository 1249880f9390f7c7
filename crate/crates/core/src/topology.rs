//! The ring of parties and each initiator's partition into sub-circles.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TopologyError {
    #[error("l must divide the number of non-initiator parties ({others} is not divisible by {l})")]
    NotDivisible { others: usize, l: usize },
    #[error("at least one sub-circle is required")]
    ZeroCircles,
    #[error("need at least one bidder")]
    NoBidders,
    #[error("party {0} is not on the ring")]
    UnknownParty(PartyId),
    #[error("circles do not partition the other parties: {0}")]
    NotAPartition(String),
    #[error("cannot parse party id {0:?}")]
    Parse(String),
}

/// `A` (index 0) or bidder `B_i` (index `i ≥ 1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartyId(u32);

impl PartyId {
    pub const AUCTIONEER: PartyId = PartyId(0);

    pub fn bidder(i: u32) -> Self {
        assert!(i >= 1, "bidders are numbered from 1");
        PartyId(i)
    }

    pub fn from_index(i: u32) -> Self {
        PartyId(i)
    }

    pub fn index(self) -> u32 {
        self.0
    }

    pub fn is_auctioneer(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_auctioneer() {
            f.write_str("A")
        } else {
            write!(f, "B{}", self.0)
        }
    }
}

impl FromStr for PartyId {
    type Err = TopologyError;

    /// `A`, `B3` or a bare bidder number `3`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "A" || s == "a" {
            return Ok(PartyId::AUCTIONEER);
        }
        let digits = s.strip_prefix(['B', 'b']).unwrap_or(s);
        match digits.parse::<u32>() {
            Ok(i) if i >= 1 => Ok(PartyId(i)),
            _ => Err(TopologyError::Parse(s.to_string())),
        }
    }
}

impl Serialize for PartyId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PartyId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parties in circular order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Ring {
    parties: Vec<PartyId>,
}

impl Ring {
    /// `A, B1, …, Bn`.
    pub fn with_auctioneer(n: u32) -> Result<Self, TopologyError> {
        if n == 0 {
            return Err(TopologyError::NoBidders);
        }
        Ok(Self {
            parties: (0..=n).map(PartyId).collect(),
        })
    }

    /// `B1, …, Bn`, for runs without an auctioneer.
    pub fn bidders_only(n: u32) -> Result<Self, TopologyError> {
        if n < 2 {
            return Err(TopologyError::NoBidders);
        }
        Ok(Self {
            parties: (1..=n).map(PartyId).collect(),
        })
    }

    pub fn parties(&self) -> &[PartyId] {
        &self.parties
    }

    pub fn len(&self) -> usize {
        self.parties.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parties.is_empty()
    }

    pub fn has_auctioneer(&self) -> bool {
        self.parties.first() == Some(&PartyId::AUCTIONEER)
    }

    pub fn bidders(&self) -> impl Iterator<Item = PartyId> + '_ {
        self.parties.iter().copied().filter(|p| !p.is_auctioneer())
    }

    pub fn position(&self, party: PartyId) -> Result<usize, TopologyError> {
        self.parties
            .iter()
            .position(|&p| p == party)
            .ok_or(TopologyError::UnknownParty(party))
    }

    /// Everyone except `initiator`, in ring order starting just after it.
    pub fn others_after(&self, initiator: PartyId) -> Result<Vec<PartyId>, TopologyError> {
        let pos = self.position(initiator)?;
        let len = self.len();
        Ok((1..len).map(|k| self.parties[(pos + k) % len]).collect())
    }

    /// Consecutive-arc partition of the other parties into `l` sub-circles.
    pub fn plan(&self, initiator: PartyId, l: usize) -> Result<SubCirclePlan, TopologyError> {
        if l == 0 {
            return Err(TopologyError::ZeroCircles);
        }
        let others = self.others_after(initiator)?;
        if others.len() % l != 0 {
            return Err(TopologyError::NotDivisible {
                others: others.len(),
                l,
            });
        }
        let k = others.len() / l;
        let circles = others
            .chunks(k)
            .map(|c| SubCircle {
                initiator,
                members: c.to_vec(),
            })
            .collect();
        Ok(SubCirclePlan { initiator, circles })
    }

    /// One plan per party, in ring order.
    pub fn all_plans(&self, l: usize) -> Result<Vec<SubCirclePlan>, TopologyError> {
        self.parties.iter().map(|&p| self.plan(p, l)).collect()
    }
}

/// One initiator's sub-circle: `initiator → members[0] → … → members[k-1] → initiator`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubCircle {
    pub initiator: PartyId,
    pub members: Vec<PartyId>,
}

impl SubCircle {
    /// Number of hops a travel sequence makes, including the return to the initiator.
    pub fn hops(&self) -> usize {
        self.members.len() + 1
    }

    /// `(from, to)` for hop `h` in `0..=members.len()`.
    pub fn hop_endpoints(&self, h: usize) -> (PartyId, PartyId) {
        let k = self.members.len();
        let from = if h == 0 { self.initiator } else { self.members[h - 1] };
        let to = if h == k { self.initiator } else { self.members[h] };
        (from, to)
    }

    /// `initiator, members…` (the path without the closing return).
    pub fn path(&self) -> Vec<PartyId> {
        std::iter::once(self.initiator)
            .chain(self.members.iter().copied())
            .collect()
    }
}

impl fmt::Display for SubCircle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.path().iter().map(|p| p.to_string()).collect();
        f.write_str(&names.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubCirclePlan {
    pub initiator: PartyId,
    pub circles: Vec<SubCircle>,
}

impl SubCirclePlan {
    /// Accepts a caller-chosen partition, checking that the circles are equal
    /// in size and partition every party on `ring` other than the initiator.
    pub fn from_explicit(ring: &Ring, initiator: PartyId, circles: Vec<Vec<PartyId>>) -> Result<Self, TopologyError> {
        if circles.is_empty() {
            return Err(TopologyError::ZeroCircles);
        }
        ring.position(initiator)?;
        let k = circles[0].len();
        if k == 0 || circles.iter().any(|c| c.len() != k) {
            return Err(TopologyError::NotAPartition(
                "circles must be non-empty and equal in size".into(),
            ));
        }
        let expected: BTreeSet<PartyId> = ring.others_after(initiator)?.into_iter().collect();
        let mut seen = BTreeSet::new();
        for &p in circles.iter().flatten() {
            if !expected.contains(&p) {
                return Err(TopologyError::NotAPartition(format!("{p} cannot be a member")));
            }
            if !seen.insert(p) {
                return Err(TopologyError::NotAPartition(format!("{p} appears twice")));
            }
        }
        if seen != expected {
            return Err(TopologyError::NotAPartition("some parties are not covered".into()));
        }
        Ok(Self {
            initiator,
            circles: circles
                .into_iter()
                .map(|members| SubCircle { initiator, members })
                .collect(),
        })
    }

    pub fn members_per_circle(&self) -> usize {
        self.circles.first().map_or(0, |c| c.members.len())
    }

    /// Concatenated member lists in circle order.
    pub fn member_order(&self) -> Vec<PartyId> {
        self.circles.iter().flat_map(|c| c.members.iter().copied()).collect()
    }
}

/// Plan of `initiator` on the standard ring `A, B1, …, Bn`.
pub fn build_plan(initiator: PartyId, n: u32, l: usize) -> Result<SubCirclePlan, TopologyError> {
    Ring::with_auctioneer(n)?.plan(initiator, l)
}

/// Plans of all `n + 1` parties on the standard ring.
pub fn all_plans(n: u32, l: usize) -> Result<Vec<SubCirclePlan>, TopologyError> {
    Ring::with_auctioneer(n)?.all_plans(l)
}

/// Tree-type limit: only the auctioneer initiates, with one singleton circle per bidder.
pub fn tree_plan(n: u32) -> Result<SubCirclePlan, TopologyError> {
    build_plan(PartyId::AUCTIONEER, n, n as usize)
}

/// Who encodes at encoding round `round` (0-based), row per plan and column per circle.
pub fn encoding_round_matrix(plans: &[SubCirclePlan], round: usize) -> Vec<Vec<PartyId>> {
    plans
        .iter()
        .map(|plan| plan.circles.iter().map(|c| c.members[round]).collect())
        .collect()
}
