//! `qsba`: run, attack and analyze the sub-circle sealed-bid auction.
//!
//! Exit status: 0 on success (a called-off auction still counts as
//! completed), 1 when an efficiency audit finds a mismatch, 2 on usage or
//! configuration errors, 3 when `run` ends in a protocol abort.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qsba::adversary::{
    run_collusion, run_disturbance_retries, run_forgery, run_intercept_resend, run_participant_attack, TapTarget,
};
use qsba::efficiency::{comparison_table, count_for, count_transcript};
use qsba::protocol::{
    bids_from_values, derive_seed, random_bids, AuctionConfig, AuctionRun, AuctionSetup, Bid, PaymentRule,
};
use qsba::report::{AttackSummary, Audit, Format, RunReport};
use qsba::topology::PartyId;
use qsba::transport::{ChannelNoise, HopId};

const EXIT_AUDIT: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_ABORT: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "qsba",
    version,
    about = "Simulator for a circular sub-circle quantum sealed-bid auction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one honest auction.
    Run(Common),
    /// Run an attack scenario and report detection or leakage.
    Attack(AttackArgs),
    /// Print closed-form resource counts and the comparison table.
    Efficiency(EfficiencyArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Number of bidders.
    #[arg(long)]
    n: Option<u32>,
    /// Sub-circles per initiator.
    #[arg(long)]
    l: Option<usize>,
    /// Bits per bid.
    #[arg(long)]
    bits: Option<usize>,
    /// Travel qubits per entangled state.
    #[arg(long)]
    p: Option<usize>,
    /// Seed for all randomness; sampled and printed when omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated bid values for B1..Bn; random when omitted.
    #[arg(long)]
    bids: Option<String>,
    /// Decoy error fraction above which a hop aborts.
    #[arg(long)]
    threshold: Option<f64>,
    /// Per-qubit depolarizing probability on every hop.
    #[arg(long)]
    noise: Option<f64>,
    /// first | second
    #[arg(long)]
    payment: Option<String>,
    /// All parties are bidders.
    #[arg(long)]
    no_auctioneer: bool,
    /// Only the auctioneer initiates, one circle per bidder.
    #[arg(long)]
    tree: bool,
    /// records | text
    #[arg(long)]
    format: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// File of `key = value` lines mirroring the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AttackArgs {
    #[command(flatten)]
    common: Common,
    /// intercept | collusion | inconsistent | disturbance | forgery
    #[arg(long)]
    model: Option<String>,
    /// Independent seeded trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated colluding bidders, e.g. `1,4`.
    #[arg(long)]
    colluders: Option<String>,
    /// Cheating bidder (inconsistent) or the auctioneer's accomplice (forgery).
    #[arg(long)]
    party: Option<String>,
    /// Decoys on the tapped hop; sets the bid width to d / p.
    #[arg(long)]
    d: Option<usize>,
    /// Hop to attack as `initiator:circle:hop`, e.g. `A:0:0`.
    #[arg(long)]
    hop: Option<String>,
    /// Attack every hop.
    #[arg(long)]
    all_hops: bool,
    /// Bid value the cheater or forger substitutes.
    #[arg(long)]
    forged: Option<u64>,
}

#[derive(Args, Debug)]
struct EfficiencyArgs {
    #[command(flatten)]
    common: Common,
    /// Print the eight-row comparison table.
    #[arg(long)]
    compare: bool,
    /// Run an honest auction and compare its transcript counts with the closed form.
    #[arg(long)]
    audit: bool,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::usage(e.to_string())
    }
}

/// Flags layered over an optional config file.
struct Settings {
    flags: Common,
    file: HashMap<String, String>,
}

impl Settings {
    fn load(flags: Common) -> Result<Self, Failure> {
        let mut file = HashMap::new();
        if let Some(path) = &flags.config {
            let text =
                fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| Failure::usage(format!("{}:{}: expected key = value", path.display(), i + 1)))?;
                let v = v.trim().trim_matches('"');
                file.insert(k.trim().replace('_', "-"), v.to_string());
            }
        }
        Ok(Self { flags, file })
    }

    fn get<T: std::str::FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, Failure>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| Failure::usage(format!("config key {key}: {e}"))),
            None => Ok(None),
        }
    }

    fn flag(&self, set: bool, key: &str) -> Result<bool, Failure> {
        if set {
            return Ok(true);
        }
        match self.file.get(key).map(String::as_str) {
            None | Some("false") => Ok(false),
            Some("true") => Ok(true),
            Some(v) => Err(Failure::usage(format!(
                "config key {key}: expected true or false, got {v:?}"
            ))),
        }
    }

    fn text(&self, flag: &Option<String>, key: &str) -> Option<String> {
        flag.clone().or_else(|| self.file.get(key).cloned())
    }

    fn format(&self) -> Result<Format, Failure> {
        match self.text(&self.flags.format, "format") {
            Some(f) => f.parse().map_err(Failure::usage),
            None => Ok(Format::Text),
        }
    }

    fn seed(&self) -> Result<u64, Failure> {
        match self.get(self.flags.seed, "seed")? {
            Some(s) => Ok(s),
            None => {
                let s: u64 = rand::rng().random();
                eprintln!("seed: {s}");
                Ok(s)
            }
        }
    }

    fn config(&self, bits_override: Option<usize>) -> Result<AuctionConfig, Failure> {
        let n = self.get(self.flags.n, "n")?.unwrap_or(6);
        let l = self.get(self.flags.l, "l")?.unwrap_or(3);
        let bits = match bits_override {
            Some(b) => b,
            None => self.get(self.flags.bits, "bits")?.unwrap_or(1),
        };
        let mut cfg = AuctionConfig::new(n, l, bits);
        if let Some(p) = self.get(self.flags.p, "p")? {
            cfg = cfg.with_travel_width(p);
        }
        if let Some(t) = self.get(self.flags.threshold, "threshold")? {
            cfg = cfg.with_threshold(t);
        }
        if let Some(p) = self.get(self.flags.noise, "noise")? {
            cfg.noise = ChannelNoise { flip_probability: p };
        }
        if let Some(rule) = self.text(&self.flags.payment, "payment") {
            cfg = cfg.with_payment(rule.parse::<PaymentRule>()?);
        }
        if self.flag(self.flags.no_auctioneer, "no-auctioneer")? {
            cfg = cfg.without_auctioneer();
        }
        if self.flag(self.flags.tree, "tree")? {
            cfg = cfg.tree();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn bids(&self, cfg: &AuctionConfig, seed: u64) -> Result<BTreeMap<PartyId, Bid>, Failure> {
        match self.text(&self.flags.bids, "bids") {
            Some(list) => {
                let values = parse_list::<u64>(&list, "bids")?;
                if values.len() != cfg.n as usize {
                    return Err(Failure::usage(format!("expected {} bids, got {}", cfg.n, values.len())));
                }
                Ok(bids_from_values(&values, cfg.bid_bits)?)
            }
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xB1D));
                Ok(random_bids(cfg.n, cfg.bid_bits, &mut rng))
            }
        }
    }

    fn emit(&self, report: &RunReport, run: Option<&AuctionRun>) -> Result<(), Failure> {
        let body = match self.format()? {
            Format::Records => report.to_records(run),
            Format::Text => report.to_text(),
        };
        match &self.flags.out {
            Some(path) => {
                fs::write(path, body).map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))
            }
            None => {
                print!("{body}");
                Ok(())
            }
        }
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, Failure>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|e| Failure::usage(format!("bad {what} entry {x:?}: {e}")))
        })
        .collect()
}

fn parse_hop(s: &str) -> Result<HopId, Failure> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Failure::usage(format!("hop {s:?} must look like A:0:0")));
    }
    Ok(HopId {
        initiator: parts[0].parse()?,
        circle: parts[1].parse()?,
        hop: parts[2].parse()?,
    })
}

fn cmd_run(flags: Common) -> Result<(), Failure> {
    let settings = Settings::load(flags)?;
    settings.format()?;
    let seed = settings.seed()?;
    let cfg = settings.config(None)?.with_seed(seed);
    let bids = settings.bids(&cfg, seed)?;
    let setup = AuctionSetup::new(cfg.clone())?;
    let run = setup.run_honest(&bids)?;
    let mut report = RunReport::new("run").with_run(&run);
    report.config = Some(cfg);
    report.bids = Some(bids);
    settings.emit(&report, Some(&run))?;
    if run.is_aborted() {
        return Err(Failure {
            code: EXIT_ABORT,
            message: "protocol aborted".into(),
        });
    }
    Ok(())
}

fn default_hop(setup: &AuctionSetup) -> HopId {
    HopId {
        initiator: setup.plans()[0].initiator,
        circle: 0,
        hop: 0,
    }
}

fn cmd_attack(args: AttackArgs) -> Result<(), Failure> {
    let settings = Settings::load(args.common)?;
    settings.format()?;
    let model = settings
        .text(&args.model, "model")
        .ok_or_else(|| Failure::usage("--model is required"))?;
    let trials = settings.get(args.trials, "trials")?;
    let seed = settings.seed()?;
    let d = settings.get(args.d, "d")?;
    let bits_override = match d {
        Some(d) => {
            let p = settings.config(Some(1))?.travel_width();
            if d == 0 || d % p != 0 {
                return Err(Failure::usage(format!(
                    "--d must be a positive multiple of the travel width {p}"
                )));
            }
            Some(d / p)
        }
        None => None,
    };
    let cfg = settings.config(bits_override)?.with_seed(seed);
    let bids = settings.bids(&cfg, seed)?;
    let setup = AuctionSetup::new(cfg.clone())?;
    let party = match settings.text(&args.party, "party") {
        Some(p) => Some(p.parse::<PartyId>()?),
        None => None,
    };
    let forged = settings.get(args.forged, "forged")?;
    let target = if settings.flag(args.all_hops, "all-hops")? {
        TapTarget::All
    } else {
        match settings.text(&args.hop, "hop") {
            Some(h) => TapTarget::single(parse_hop(&h)?),
            None => TapTarget::single(default_hop(&setup)),
        }
    };
    let mask = u64::MAX >> (64 - cfg.bid_bits);
    let attack = match model.as_str() {
        "intercept" | "intercept-resend" => {
            let trials = trials.unwrap_or(1000);
            let stats = run_intercept_resend(&setup, &bids, &target, trials, seed)?;
            let tapped_hops = match &target {
                TapTarget::All => {
                    setup.plans().iter().map(|p| p.circles.len()).sum::<usize>() * (setup.members_per_circle() + 1)
                }
                TapTarget::Hops(h) => h.len(),
            };
            AttackSummary::Intercept {
                decoys_per_hop: cfg.bid_bits * setup.travel_width(),
                tapped_hops,
                stats,
            }
        }
        "collusion" => {
            let colluders: Vec<PartyId> = match settings.text(&args.colluders, "colluders") {
                Some(list) => parse_list::<PartyId>(&list, "colluders")?,
                None => vec![PartyId::bidder(1), PartyId::bidder(1 + cfg.n / 2)],
            };
            let runs = trials.unwrap_or(1);
            let mut reports = Vec::with_capacity(runs);
            for i in 0..runs {
                let s = if i == 0 { seed } else { derive_seed(seed, i as u64) };
                reports.push(run_collusion(&setup, &bids, &colluders, s)?.0);
            }
            AttackSummary::Collusion {
                runs,
                detected_runs: reports.iter().filter(|r| r.detected).count(),
                full_leak_runs: reports.iter().filter(|r| r.protected.is_empty()).count(),
                sound: reports.iter().all(|r| r.is_sound(&bids)),
                first: reports.swap_remove(0),
            }
        }
        "inconsistent" | "participant" => {
            let party = party.unwrap_or(PartyId::bidder(1));
            let honest = bids
                .get(&party)
                .ok_or_else(|| Failure::usage(format!("{party} is not a bidder")))?;
            let value = forged.unwrap_or(!honest.value()) & mask;
            // send the altered bid only to the first other initiator
            let target_initiator = setup
                .plans()
                .iter()
                .map(|p| p.initiator)
                .find(|&i| i != party)
                .expect("at least two initiators");
            let overrides: BTreeMap<PartyId, Bid> =
                [(target_initiator, Bid::from_value(party, value, cfg.bid_bits)?)].into();
            let tally = run_participant_attack(&setup, &bids, party, overrides.clone(), seed)?;
            AttackSummary::Inconsistent {
                party,
                overrides,
                consistent: tally.consistent,
                winner: tally.winner,
            }
        }
        "disturbance" | "dos" => {
            let retries = trials.unwrap_or(1);
            let aborted = run_disturbance_retries(&setup, &bids, &target, retries, seed)?
                .into_iter()
                .filter(|&a| a)
                .count();
            AttackSummary::Disturbance { retries, aborted }
        }
        "forgery" => {
            let colluder = party.unwrap_or(PartyId::bidder(1));
            let value = forged.unwrap_or(mask);
            let run = run_forgery(&cfg, &bids, colluder, value)?;
            let tally = run.tally().ok_or_else(|| Failure::usage("forgery run aborted"))?;
            AttackSummary::Forgery {
                colluder,
                forged: value,
                consistent: tally.consistent,
                winner: tally.winner,
            }
        }
        other => {
            return Err(Failure::usage(format!(
                "unknown model {other:?} (expected intercept, collusion, inconsistent, disturbance or forgery)"
            )))
        }
    };
    let mut report = RunReport::new("attack");
    report.seed = Some(seed);
    report.config = Some(cfg);
    report.bids = Some(bids);
    report.attack = Some(attack);
    settings.emit(&report, None)
}

fn cmd_efficiency(args: EfficiencyArgs) -> Result<(), Failure> {
    let settings = Settings::load(args.common)?;
    settings.format()?;
    let mut cfg = settings.config(None)?;
    let mut report = RunReport::new("efficiency");
    report.resources = Some(count_for(&cfg)?);
    if settings.flag(args.compare, "compare")? {
        let bits = settings.get(settings.flags.bits, "bits")?.map(|b: usize| b as u64);
        report.efficiency = comparison_table(bits);
    }
    let mut mismatch = false;
    if settings.flag(args.audit, "audit")? {
        let seed = settings.seed()?;
        cfg.seed = seed;
        let bids = settings.bids(&cfg, seed)?;
        let run = AuctionSetup::new(cfg.clone())?.run_honest(&bids)?;
        let closed_form = count_for(&cfg)?;
        let transcript = count_transcript(&run.transcript);
        let equal = closed_form.c == transcript.c
            && closed_form.q == transcript.q
            && (closed_form.b - transcript.b).abs() < 1e-9;
        mismatch = !equal;
        report.seed = Some(seed);
        report.audit = Some(Audit {
            closed_form,
            transcript,
            equal,
        });
    }
    report.config = Some(cfg);
    settings.emit(&report, None)?;
    if mismatch {
        return Err(Failure {
            code: EXIT_AUDIT,
            message: "transcript counts differ from the closed form".into(),
        });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(c) => cmd_run(c),
        Command::Attack(a) => cmd_attack(a),
        Command::Efficiency(e) => cmd_efficiency(e),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
