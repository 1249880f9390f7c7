//! Run reports: line-delimited JSON records or a human-readable summary.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use crate::adversary::{DetectionStats, LeakageReport};
use crate::efficiency::{render_table, ResourceCount, SchemeRow};
use crate::protocol::{AuctionConfig, AuctionRun, Bid, Outcome, Tally};
use crate::topology::PartyId;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Records,
    Text,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "records" => Ok(Format::Records),
            "text" => Ok(Format::Text),
            other => Err(format!("unknown format {other:?} (expected records or text)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Audit {
    pub closed_form: ResourceCount,
    pub transcript: ResourceCount,
    pub equal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttackSummary {
    Intercept {
        decoys_per_hop: usize,
        tapped_hops: usize,
        stats: DetectionStats,
    },
    Collusion {
        runs: usize,
        detected_runs: usize,
        full_leak_runs: usize,
        sound: bool,
        first: LeakageReport,
    },
    Inconsistent {
        party: PartyId,
        overrides: BTreeMap<PartyId, Bid>,
        consistent: bool,
        winner: Option<PartyId>,
    },
    Disturbance {
        retries: usize,
        aborted: usize,
    },
    Forgery {
        colluder: PartyId,
        forged: u64,
        consistent: bool,
        winner: Option<PartyId>,
    },
}

/// Everything a command produced. Identical inputs give identical reports.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub seed: Option<u64>,
    pub config: Option<AuctionConfig>,
    pub bids: Option<BTreeMap<PartyId, Bid>>,
    pub outcome: Option<Outcome>,
    pub transcript_digest: Option<String>,
    pub transcript_events: Option<usize>,
    pub attack: Option<AttackSummary>,
    pub resources: Option<ResourceCount>,
    pub efficiency: Vec<SchemeRow>,
    pub audit: Option<Audit>,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            ..Self::default()
        }
    }

    /// Attaches the outcome and transcript summary of a run.
    pub fn with_run(mut self, run: &AuctionRun) -> Self {
        self.seed = Some(run.seed);
        self.outcome = Some(run.outcome.clone());
        self.transcript_digest = Some(run.transcript.digest());
        self.transcript_events = Some(run.transcript.len());
        self
    }

    /// JSON lines: transcript events (if given), then one `report` record.
    pub fn to_records(&self, run: Option<&AuctionRun>) -> String {
        let mut out = String::new();
        if let Some(run) = run {
            out.push_str(&run.transcript.to_json_lines());
        }
        let mut summary = serde_json::to_value(self).expect("report serializes");
        if let Value::Object(map) = &mut summary {
            map.insert("record".into(), json!("report"));
        }
        out.push_str(&serde_json::to_string(&summary).expect("report serializes"));
        out.push('\n');
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command: {}", self.command);
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "seed: {seed}");
        }
        if let Some(c) = &self.config {
            let _ = writeln!(
                out,
                "config: n={} l={} bits={} p={} threshold={} payment={} auctioneer={} structure={:?}",
                c.n,
                c.l,
                c.bid_bits,
                c.travel_width(),
                c.threshold,
                c.payment_rule,
                c.auctioneer,
                c.structure
            );
        }
        if let Some(bids) = &self.bids {
            let list: Vec<String> = bids.iter().map(|(p, b)| format!("{p}={}", b.value())).collect();
            let _ = writeln!(out, "bids: {}", list.join(" "));
        }
        match &self.outcome {
            Some(Outcome::Completed(t)) => text_tally(&mut out, t),
            Some(Outcome::Aborted(a)) => {
                let hops: Vec<String> = a
                    .hops
                    .iter()
                    .map(|h| format!("{}/{}/{}", h.initiator, h.circle, h.hop))
                    .collect();
                let _ = writeln!(
                    out,
                    "outcome: ABORTED at {:?}{} on hops {}",
                    a.stage,
                    a.round.map(|r| format!(" round {r}")).unwrap_or_default(),
                    hops.join(", ")
                );
            }
            None => {}
        }
        if let Some(d) = &self.transcript_digest {
            let _ = writeln!(
                out,
                "transcript: {} events, sha256 {d}",
                self.transcript_events.unwrap_or(0)
            );
        }
        if let Some(a) = &self.attack {
            text_attack(&mut out, a);
        }
        if let Some(rc) = &self.resources {
            let eta = crate::efficiency::efficiency(rc)
                .map(|e| format!("{:.3}%", 100.0 * e))
                .unwrap_or_else(|_| "undefined".into());
            let _ = writeln!(out, "resources: c={} q={} b={:.3} eta={eta}", rc.c, rc.q, rc.b);
        }
        if let Some(a) = &self.audit {
            let _ = writeln!(
                out,
                "audit: closed form c={} q={} b={:.3}; transcript c={} q={} b={:.3}; equal={}",
                a.closed_form.c,
                a.closed_form.q,
                a.closed_form.b,
                a.transcript.c,
                a.transcript.q,
                a.transcript.b,
                a.equal
            );
        }
        if !self.efficiency.is_empty() {
            out.push_str(&render_table(&self.efficiency));
        }
        out
    }
}

fn text_tally(out: &mut String, t: &Tally) {
    if !t.consistent {
        let d: Vec<String> = t.disputed.iter().map(|p| p.to_string()).collect();
        let _ = writeln!(
            out,
            "outcome: CHEATING DETECTED, auction called off (views disagree on {})",
            d.join(", ")
        );
        return;
    }
    let _ = writeln!(out, "outcome: completed, all {} views agree", t.views.len());
    match t.winner {
        Some(w) => {
            let tie = if t.tie {
                let names: Vec<String> = t.tied.iter().map(|p| p.to_string()).collect();
                format!(" (tie among {}, lowest index wins)", names.join(", "))
            } else {
                String::new()
            };
            let _ = writeln!(out, "winner: {w}{tie}");
        }
        None => {
            let _ = writeln!(out, "winner: none");
        }
    }
    if let Some(p) = t.price {
        let _ = writeln!(out, "price: {p}");
    }
    if let Some(e) = &t.settlement_error {
        let _ = writeln!(out, "settlement: {e}");
    }
}

fn text_attack(out: &mut String, a: &AttackSummary) {
    match a {
        AttackSummary::Intercept {
            decoys_per_hop,
            tapped_hops,
            stats,
        } => {
            let _ = writeln!(
                out,
                "intercept-resend: {} decoys per hop on {} hop(s); detected {}/{} = {:.4} (95% CI {:.4}..{:.4})",
                decoys_per_hop, tapped_hops, stats.detected, stats.trials, stats.rate, stats.ci_low, stats.ci_high
            );
        }
        AttackSummary::Collusion {
            runs,
            detected_runs,
            full_leak_runs,
            sound,
            first,
        } => {
            let c: Vec<String> = first.colluders.iter().map(|p| p.to_string()).collect();
            let leaked: Vec<String> = first.fully_leaked.iter().map(|p| p.to_string()).collect();
            let kept: Vec<String> = first.protected.iter().map(|p| p.to_string()).collect();
            let _ = writeln!(
                out,
                "collusion {{{}}}: {runs} run(s), detected in {detected_runs}, full leak in {full_leak_runs}, leaked values sound: {sound}",
                c.join(",")
            );
            let _ = writeln!(
                out,
                "  fully leaked: [{}]  protected: [{}]  leaked fraction {:.3}",
                leaked.join(","),
                kept.join(","),
                first.leaked_fraction()
            );
        }
        AttackSummary::Inconsistent {
            party,
            consistent,
            winner,
            ..
        } => {
            let _ = writeln!(
                out,
                "inconsistent bid by {party}: consistent={consistent} winner={}",
                winner.map_or("none".into(), |w| w.to_string())
            );
        }
        AttackSummary::Disturbance { retries, aborted } => {
            let _ = writeln!(out, "disturbance: aborted {aborted}/{retries} attempt(s)");
        }
        AttackSummary::Forgery {
            colluder,
            forged,
            consistent,
            winner,
        } => {
            let _ = writeln!(
                out,
                "auctioneer forgery for {colluder} (value {forged}): consistent={consistent} winner={}",
                winner.map_or("none".into(), |w| w.to_string())
            );
        }
    }
}
