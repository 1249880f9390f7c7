//! Resource accounting and qubit efficiency `η = c / (q + b)`.

use serde::Serialize;

use crate::protocol::{AuctionConfig, Structure};
use crate::transcript::{Event, Transcript};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EfficiencyError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("efficiency undefined: q + b = 0")]
    ZeroDenominator,
}

/// `c` meaningful classical bits carried by `q` qubits plus `b` classical bits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResourceCount {
    pub c: u64,
    pub q: u64,
    pub b: f64,
}

pub fn efficiency(rc: &ResourceCount) -> Result<f64, EfficiencyError> {
    let denom = rc.q as f64 + rc.b;
    if denom <= 0.0 {
        return Err(EfficiencyError::ZeroDenominator);
    }
    Ok(rc.c as f64 / denom)
}

/// Closed-form counts for any valid configuration.
///
/// Per sub-circle and bit position: one `(p+1)`-qubit state plus `p` decoys
/// on each of the `k+1` hops. Every bidder's encoding is meaningful, the
/// auctioneer's random bits are not. Only the winner announcement adds to `b`.
pub fn count_for(config: &AuctionConfig) -> Result<ResourceCount, EfficiencyError> {
    config
        .validate_shape()
        .map_err(|e| EfficiencyError::InvalidParameters(e.to_string()))?;
    let n = config.n as u64;
    let bits = config.bid_bits as u64;
    let k = config.members_per_circle() as u64;
    let p = config.travel_width() as u64;
    let (plans, circles) = match config.structure {
        Structure::Tree => (1, n),
        Structure::Circular if config.auctioneer => (n + 1, config.l as u64),
        Structure::Circular => (n, config.l as u64),
    };
    let q = plans * circles * ((p + 1) + (k + 1) * p) * bits;
    let meaningful_per_bit = match config.structure {
        Structure::Tree => n,
        // the auctioneer's plan reads all n bids, each bidder's plan the other n-1
        Structure::Circular if config.auctioneer => n + n * (n - 1),
        Structure::Circular => n * (n - 1),
    };
    let b = if config.auctioneer { (n as f64).log2() } else { 0.0 };
    Ok(ResourceCount {
        c: meaningful_per_bit * bits,
        q,
        b,
    })
}

/// Counts for the circular scheme with an auctioneer: `n` bidders, `l`
/// sub-circles, travel width `p`, `bits` per bid.
pub fn count_proposed(n: u32, l: usize, p: usize, bits: usize) -> Result<ResourceCount, EfficiencyError> {
    count_for(&AuctionConfig::new(n, l, bits).with_travel_width(p))
}

/// Entangled and decoy qubits one sub-circle uses per bit position.
pub fn subcircle_share(k: usize, p: usize) -> (u64, u64) {
    ((p + 1) as u64, ((k + 1) * p) as u64)
}

/// The same counts, tallied from what actually happened in a run.
pub fn count_transcript(transcript: &Transcript) -> ResourceCount {
    let mut rc = ResourceCount { c: 0, q: 0, b: 0.0 };
    for e in transcript.events() {
        match e {
            Event::Prepare { qubits, .. } => rc.q += *qubits as u64,
            Event::InsertDecoys { decoys, .. } => rc.q += *decoys as u64,
            Event::Encode { meaningful: true, .. } => rc.c += 1,
            Event::Broadcast { bits, .. } => rc.b += bits,
            _ => {}
        }
    }
    rc
}

/// One row of the six-bidder comparison. `c` and `q` scale with the bid
/// width; `b` does not.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchemeRow {
    pub scheme: &'static str,
    pub c_per_bit: u64,
    pub q_per_bit: u64,
    pub b: f64,
    /// `None` means the large-bid limit.
    pub bits: Option<u64>,
    pub efficiency: f64,
}

const LOG2_6: f64 = 2.584_962_500_721_156;

const SCHEMES: [(&str, u64, u64, f64); 8] = [
    ("circular sub-circle (n=6, l=3)", 36, 105, LOG2_6),
    ("tree-type", 6, 20, LOG2_6),
    ("circular sub-circle, bid transfer only", 6, 105, LOG2_6),
    ("complete graph, single photons", 6, 83, LOG2_6),
    ("complete graph, single photons with decoys", 6, 89, LOG2_6),
    ("complete graph, 7-qubit GHZ", 6, 92, LOG2_6),
    ("complete graph, 7-qubit GHZ with decoys", 6, 98, LOG2_6),
    ("circular sub-circle, no auctioneer", 6, 90, 0.0),
];

/// Reference efficiencies for six bidders. With `bits = None` each row is
/// the limit `c/q` as the bid width grows; otherwise `cN / (qN + b)`.
pub fn comparison_table(bits: Option<u64>) -> Vec<SchemeRow> {
    SCHEMES
        .iter()
        .map(|&(scheme, c, q, b)| {
            let efficiency = match bits {
                None => c as f64 / q as f64,
                Some(n) => (c * n) as f64 / ((q * n) as f64 + b),
            };
            SchemeRow {
                scheme,
                c_per_bit: c,
                q_per_bit: q,
                b,
                bits,
                efficiency,
            }
        })
        .collect()
}

/// Plain-text table with aligned columns.
pub fn render_table(rows: &[SchemeRow]) -> String {
    let width = rows.iter().map(|r| r.scheme.len()).max().unwrap_or(6).max(6);
    let mut out = format!(
        "{:<width$}  {:>5}  {:>5}  {:>7}  {:>9}\n",
        "scheme", "c/N", "q/N", "b", "eta"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<width$}  {:>5}  {:>5}  {:>7.3}  {:>8.3}%\n",
            r.scheme,
            r.c_per_bit,
            r.q_per_bit,
            r.b,
            100.0 * r.efficiency
        ));
    }
    out
}
