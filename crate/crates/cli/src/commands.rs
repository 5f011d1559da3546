//! One function per subcommand. Each returns a seed-stamped report whose
//! `config` is the subcommand's resolved arguments.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{ArgGroup, Args, ValueEnum};
use serde::Serialize;
use serde_json::json;
use tamperlab_core::adversaries::{
    audit_family, detect_classical, detect_replacement, lift_classical, replacement_channel, AdversarialFamily,
    ClassicalFunction, ConstraintProfile,
};
use tamperlab_core::channels::{validate_kraus, ChoiMatrix, QuantumChannel};
use tamperlab_core::experiments::beta::beta_law_test;
use tamperlab_core::experiments::continuity::{continuity_check, continuity_sweep};
use tamperlab_core::experiments::moments::{
    empirical_tail, estimate_first_moment, estimate_higher_moment, eval_deviation_bound, ChannelParams, PairKind,
};
use tamperlab_core::experiments::net::{build_delta_net, NetConfig};
use tamperlab_core::experiments::soundness::{soundness_sweep, TrialsMode};
use tamperlab_core::experiments::{CsvRow, ExperimentReport, Verdict};
use tamperlab_core::io::{self, ChannelFile, KrausFile, LoadedScheme};
use tamperlab_core::qmath::{
    combinatorics_suite, random_unit_vector, sample_haar_unitary, swap_trick_check, SeededRng, StreamTag,
    UnitVector, DEFAULT_MOMENT_CONSTANT,
};
use tamperlab_core::schemes::{break_classical_scheme, ClassicalSchemeTable, HadamardScheme};
use tamperlab_core::{Error, HaarScheme, QuantumMessageScheme};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 1;

/// Tolerance for exact-probability checks.
const EXACT_TOL: f64 = 1e-12;

fn fixture_rng(seed: u64) -> SeededRng {
    SeededRng::for_purpose(seed, StreamTag::Fixture, 0)
}

fn log2_dim(d: usize) -> Result<u32> {
    if d.is_power_of_two() {
        Ok(d.trailing_zeros())
    } else {
        bail!("--d: {d} is not a power of two")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyPreset {
    Depolarizing,
    TracelessUnitaries,
    HaarUnitaries,
    Replacement,
    Paulis,
    Classical,
    Identity,
}

fn preset_family(preset: FamilyPreset, d: usize, count: usize, seed: u64) -> Result<AdversarialFamily> {
    Ok(match preset {
        FamilyPreset::Depolarizing => AdversarialFamily::depolarizing(d)?,
        FamilyPreset::TracelessUnitaries => AdversarialFamily::traceless_unitaries(d, count, seed)?,
        FamilyPreset::HaarUnitaries => AdversarialFamily::haar_unitaries(d, count, seed)?,
        FamilyPreset::Replacement => AdversarialFamily::replacement(d, count, seed)?,
        FamilyPreset::Paulis => AdversarialFamily::paulis(log2_dim(d)?)?,
        FamilyPreset::Classical => AdversarialFamily::random_classical(log2_dim(d)?, count, seed)?,
        FamilyPreset::Identity => AdversarialFamily::new("identity", vec![QuantumChannel::identity(d)?])?,
    })
}

fn load_family(file: &Option<PathBuf>, preset: Option<FamilyPreset>, d: usize, count: usize, seed: u64) -> Result<AdversarialFamily> {
    match (file, preset) {
        (Some(path), None) => io::load_family(path).with_context(|| format!("--family {}", path.display())),
        (None, Some(p)) => preset_family(p, d, count, seed),
        _ => bail!("give exactly one of --family or --preset"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelPreset {
    Identity,
    Depolarizing,
    HaarUnitary,
    TracelessUnitary,
    Random,
    Classical,
    Replacement,
}

fn preset_channel(preset: ChannelPreset, d: usize, rank: usize, seed: u64) -> Result<QuantumChannel> {
    let mut rng = fixture_rng(seed);
    Ok(match preset {
        ChannelPreset::Identity => QuantumChannel::identity(d)?,
        ChannelPreset::Depolarizing => QuantumChannel::depolarizing(d)?,
        ChannelPreset::HaarUnitary => QuantumChannel::unitary(sample_haar_unitary(d, &mut rng)?)?,
        ChannelPreset::TracelessUnitary => AdversarialFamily::traceless_unitaries(d, 1, seed)?.channels()[0].clone(),
        ChannelPreset::Random => QuantumChannel::random(d, rank, &mut rng)?,
        ChannelPreset::Classical => lift_classical(&ClassicalFunction::random(log2_dim(d)?, &mut rng)?)?,
        ChannelPreset::Replacement => replacement_channel(&random_unit_vector(d, &mut rng)?)?,
    })
}

// ---------------------------------------------------------------- audit-family

#[derive(Args, Debug, Serialize)]
#[command(group(ArgGroup::new("source").required(true).args(["family", "preset"])))]
pub struct AuditArgs {
    /// Family file.
    #[arg(long)]
    pub family: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<FamilyPreset>,
    /// Dimension for presets.
    #[arg(long, default_value_t = 16)]
    pub d: usize,
    /// Number of members for random presets.
    #[arg(long, default_value_t = 8)]
    pub count: usize,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

pub fn audit(args: &AuditArgs) -> Result<ExperimentReport> {
    let profile = ConstraintProfile::new(args.alpha, args.delta).context("--alpha/--delta")?;
    let fam = load_family(&args.family, args.preset, args.d, args.count, args.seed)?;
    let audit = audit_family(&fam, &profile)?;
    let mut conditions = vec![&audit.size, &audit.rank, &audit.entanglement_fidelity];
    conditions.extend([&audit.unitary_trace, &audit.classical_min_entropy, &audit.classical_fixed_points].into_iter().flatten());
    let rows = conditions
        .iter()
        .map(|c| CsvRow {
            seed: args.seed,
            trial: None,
            s: Some(c.rule.clone()),
            t: Some(if c.pass { "pass" } else { "fail" }.into()),
            value: c.observed,
        })
        .collect();
    let verdict = Verdict::from_bool(audit.pass);
    Ok(ExperimentReport::new("audit-family", args.seed, args, &audit, verdict)?.with_rows(rows))
}

// --------------------------------------------------------------------- moments

#[derive(Args, Debug, Serialize)]
#[command(group(ArgGroup::new("source").required(true).args(["channel", "preset"])))]
pub struct MomentsArgs {
    /// Channel file.
    #[arg(long)]
    pub channel: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<ChannelPreset>,
    /// Kraus rank of the `random` preset.
    #[arg(long, default_value_t = 2)]
    pub rank: usize,
    #[arg(long)]
    pub d: usize,
    /// Message bits.
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    /// `diagonal` (s = t) or `off-diagonal` (s != t).
    #[arg(long, default_value = "off-diagonal")]
    pub pair: PairKind,
    /// Moment order n (1..=4).
    #[arg(long, default_value_t = 1)]
    pub order: u32,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Constant C standing in for the bounds' O(1) factors.
    #[arg(long, default_value_t = DEFAULT_MOMENT_CONSTANT)]
    pub constant: f64,
    /// Also evaluate the tail bound Pr[X >= epsilon].
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub theta: u32,
    #[arg(long, default_value_t = 1)]
    pub theta0: u32,
}

pub fn moments(args: &MomentsArgs) -> Result<ExperimentReport> {
    let (ch, label) = match (&args.channel, args.preset) {
        (Some(path), None) => (
            io::load_channel(path).with_context(|| format!("--channel {}", path.display()))?,
            path.display().to_string(),
        ),
        (None, Some(p)) => (
            preset_channel(p, args.d, args.rank, args.seed)?,
            serde_json::to_value(p)?.as_str().unwrap_or_default().to_string(),
        ),
        _ => bail!("give exactly one of --channel or --preset"),
    };
    let report = if args.order == 1 {
        estimate_first_moment(&ch, &label, args.d, args.k, args.pair, args.trials, args.seed)?
    } else {
        estimate_higher_moment(&ch, &label, args.d, args.k, args.pair, args.order, args.trials, args.seed, args.constant)?
    };
    let deviation = match args.epsilon {
        None => None,
        Some(eps) => {
            let params = ChannelParams {
                r: ch.min_kraus_rank()?,
                fe: report.entanglement_fidelity,
                d: args.d,
            };
            let tail = empirical_tail(&report.samples, eps);
            Some(match eval_deviation_bound(params, eps, args.theta, args.theta0, args.pair, args.constant) {
                Ok(b) => json!({"epsilon": eps, "bound": b, "empirical_tail": tail, "verdict": Verdict::Heuristic}),
                Err(Error::Domain(msg)) => {
                    json!({"epsilon": eps, "empirical_tail": tail, "verdict": Verdict::Skipped, "note": msg})
                }
                Err(e) => return Err(e.into()),
            })
        }
    };
    let (s, t) = (report.s.to_string(), report.t.to_string());
    let rows = report
        .samples
        .iter()
        .enumerate()
        .map(|(i, &x)| CsvRow::trial(args.seed, i as u64, Some(s.clone()), Some(t.clone()), x))
        .collect();
    let verdict = report.verdict;
    let results = json!({"moment": report, "deviation": deviation});
    Ok(ExperimentReport::new("moments", args.seed, args, results, verdict)?.with_rows(rows))
}

// ------------------------------------------------------------------- soundness

#[derive(Args, Debug, Serialize)]
#[command(group(ArgGroup::new("source").required(true).args(["family", "preset"])))]
pub struct SoundnessArgs {
    #[arg(long)]
    pub family: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<FamilyPreset>,
    #[arg(long, default_value_t = 64)]
    pub d: usize,
    /// Number of members for random presets.
    #[arg(long, default_value_t = 20)]
    pub count: usize,
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    /// Number of Haar encoders sampled.
    #[arg(long, default_value_t = 50)]
    pub unitaries: usize,
    /// Simulate this many measurements instead of computing exact probabilities.
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

pub fn soundness(args: &SoundnessArgs) -> Result<ExperimentReport> {
    let fam = load_family(&args.family, args.preset, args.d, args.count, args.seed)?;
    let mode = args.shots.map_or(TrialsMode::Exact, |shots| TrialsMode::Sampled { shots });
    let report = soundness_sweep(&fam, args.k, args.unitaries, mode, args.seed)?;
    // The depolarizing channel is caught with probability exactly 1 − 2^k/d.
    let exactness = (args.preset == Some(FamilyPreset::Depolarizing) && mode == TrialsMode::Exact).then(|| {
        let level = (1u64 << args.k) as f64 / fam.d() as f64;
        let deviation = report
            .samples
            .iter()
            .flat_map(|s| [s.max_non_bottom, s.min_non_bottom])
            .map(|p| (p - level).abs())
            .fold(0.0, f64::max);
        json!({"level": level, "max_deviation": deviation, "tolerance": EXACT_TOL, "pass": deviation <= EXACT_TOL})
    });
    let verdict = match &exactness {
        Some(e) => Verdict::from_bool(e["pass"].as_bool().unwrap_or(false)),
        None => report.verdict,
    };
    let rows = report
        .samples
        .iter()
        .map(|s| CsvRow::trial(args.seed, s.encoder as u64, Some(s.worst_message.to_string()), None, s.max_non_bottom))
        .collect();
    let results = json!({"sweep": report, "depolarizing_exactness": exactness});
    Ok(ExperimentReport::new("soundness", args.seed, args, results, verdict)?.with_rows(rows))
}

// ------------------------------------------------------------------ beta-check

#[derive(Args, Debug, Serialize)]
pub struct BetaArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Comma-separated thresholds t in [0, 1].
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.25,0.5,0.75")]
    pub thresholds: Vec<f64>,
}

pub fn beta(args: &BetaArgs) -> Result<ExperimentReport> {
    let report = beta_law_test(args.d, args.trials, args.seed, &args.thresholds)?;
    let rows = report
        .samples
        .iter()
        .enumerate()
        .map(|(i, &x)| CsvRow::trial(args.seed, i as u64, None, None, x))
        .collect();
    let verdict = report.verdict;
    Ok(ExperimentReport::new("beta-check", args.seed, args, &report, verdict)?.with_rows(rows))
}

// ------------------------------------------------------ combinatorics-selftest

#[derive(Args, Debug, Serialize)]
pub struct CombinatoricsArgs {
    /// Enumerate S_n for n up to this value (at most 6).
    #[arg(long, default_value_t = 6)]
    pub n_max: usize,
    /// Random instances of the cycle-wise trace identity.
    #[arg(long, default_value_t = 100)]
    pub instances: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

pub fn combinatorics(args: &CombinatoricsArgs) -> Result<ExperimentReport> {
    let combi = combinatorics_suite(args.n_max)?;
    let swap = swap_trick_check(args.instances, args.seed)?;
    let mut rows: Vec<CsvRow> = Vec::new();
    let row = |s: &str, t: String, value: f64| CsvRow {
        seed: args.seed,
        trial: None,
        s: Some(s.to_string()),
        t: Some(t),
        value,
    };
    for c in &combi.fixed_points {
        rows.push(row("fixed_point_min_slack", format!("n={}", c.n), c.min_slack as f64));
    }
    for c in &combi.parity_alternating {
        rows.push(row("parity_alternating_holds", format!("n={},x={}", c.n, c.x), c.holds as u8 as f64));
    }
    for c in &combi.stirling {
        rows.push(row("stirling_holds", format!("n={},x={}", c.n, c.x), c.holds as u8 as f64));
    }
    rows.push(row("swap_trick_max_relative_error", format!("instances={}", swap.instances), swap.max_relative_error));
    let verdict = Verdict::from_bool(combi.passed && swap.passed);
    let results = json!({"combinatorics": combi, "swap_trick": swap});
    Ok(ExperimentReport::new("combinatorics-selftest", args.seed, args, results, verdict)?.with_rows(rows))
}

// ------------------------------------------------------------- break-classical

#[derive(Args, Debug, Serialize)]
#[command(group(ArgGroup::new("source").required(true).args(["scheme", "n"])))]
pub struct BreakArgs {
    /// Scheme file of type `classical_table`.
    #[arg(long)]
    pub scheme: Option<PathBuf>,
    /// Codeword bits of random tables.
    #[arg(long, requires = "k")]
    pub n: Option<u32>,
    /// Message bits of random tables.
    #[arg(long)]
    pub k: Option<u32>,
    /// Number of random tables.
    #[arg(long, default_value_t = 1)]
    pub tables: usize,
    /// Codewords per message in random tables; 0 picks a random count per table.
    #[arg(long, default_value_t = 1)]
    pub support: usize,
    /// Spread each message over its codewords with random weights.
    #[arg(long)]
    pub randomized: bool,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

pub fn break_classical(args: &BreakArgs) -> Result<ExperimentReport> {
    let schemes: Vec<ClassicalSchemeTable> = match (&args.scheme, args.n, args.k) {
        (Some(path), None, _) => match io::load_scheme(path).with_context(|| format!("--scheme {}", path.display()))? {
            LoadedScheme::ClassicalTable(t) => vec![t],
            _ => bail!("--scheme: break-classical needs a `classical_table` scheme"),
        },
        (None, Some(n), Some(k)) => (0..args.tables)
            .map(|i| {
                let mut rng = SeededRng::for_purpose(args.seed, StreamTag::Fixture, i as u64);
                let capacity = (1usize << n.min(63)) >> k.min(63);
                let support = if args.support == 0 { 1 + rng.below(capacity.max(1)) } else { args.support };
                ClassicalSchemeTable::random(n, k, support, args.randomized, &mut rng).map_err(anyhow::Error::from)
            })
            .collect::<Result<_>>()?,
        _ => bail!("give either --scheme or both --n and --k"),
    };
    let mut results = Vec::new();
    let mut rows = Vec::new();
    let mut ok = true;
    for (i, scheme) in schemes.iter().enumerate() {
        let cert = break_classical_scheme(scheme)?;
        let replay = cert.replay(scheme);
        let pass = replay == cert.wrong_decode_prob && (cert.wrong_decode_prob - 1.0).abs() <= EXACT_TOL;
        ok &= pass;
        rows.push(CsvRow::trial(
            args.seed,
            i as u64,
            Some(cert.constant_bits.clone()),
            Some(cert.victim_message.to_string()),
            cert.wrong_decode_prob,
        ));
        results.push(json!({
            "table": i,
            "n": scheme.n(),
            "k": scheme.k(),
            "certificate": cert,
            "replayed_wrong_decode_prob": replay,
            "pass": pass,
        }));
    }
    let verdict = Verdict::from_bool(ok);
    Ok(ExperimentReport::new("break-classical", args.seed, args, results, verdict)?.with_rows(rows))
}

// --------------------------------------------------------------- hadamard-demo

#[derive(Args, Debug, Serialize)]
pub struct HadamardArgs {
    /// Qubits.
    #[arg(long)]
    pub n: u32,
    /// Message bits; all of 0..=n when omitted.
    #[arg(long)]
    pub k: Option<u32>,
    /// Constant written by the adversary; every n-bit string when omitted.
    #[arg(long)]
    pub y: Option<usize>,
    /// Message sent.
    #[arg(long, default_value_t = 0)]
    pub m: usize,
}

#[derive(Debug, Serialize)]
struct HadamardSummary {
    k: u32,
    constants: usize,
    per_message_exact: f64,
    max_per_message_deviation: f64,
    wrong_message_exact: f64,
    max_wrong_message_deviation: f64,
    bound: f64,
    within_bound: bool,
    pass: bool,
}

pub fn hadamard(args: &HadamardArgs) -> Result<ExperimentReport> {
    let ks: Vec<u32> = match args.k {
        Some(k) => vec![k],
        None => (0..=args.n).collect(),
    };
    let mut summaries = Vec::new();
    let mut rows = Vec::new();
    for k in ks {
        let scheme = HadamardScheme::new(args.n, k)?;
        let ys: Vec<usize> = match args.y {
            Some(y) => vec![y],
            None => (0..1usize << args.n).collect(),
        };
        let p = 2f64.powi(-(args.n as i32));
        let mut max_dev: f64 = 0.0;
        let mut max_wrong_dev: f64 = 0.0;
        let mut last = None;
        for &y in &ys {
            let out = scheme.constant_tampering(y, args.m.min((1 << k) - 1))?;
            max_dev = out.distribution.messages.iter().map(|q| (q - p).abs()).fold(max_dev, f64::max);
            max_wrong_dev = max_wrong_dev.max((out.wrong_message_prob - out.wrong_message_exact).abs());
            rows.push(CsvRow::trial(0, y as u64, Some(k.to_string()), None, out.wrong_message_prob));
            last = Some(out);
        }
        let last = last.ok_or_else(|| anyhow!("no constants to test"))?;
        let within_bound = last.wrong_message_exact <= last.bound;
        summaries.push(HadamardSummary {
            k,
            constants: ys.len(),
            per_message_exact: p,
            max_per_message_deviation: max_dev,
            wrong_message_exact: last.wrong_message_exact,
            max_wrong_message_deviation: max_wrong_dev,
            bound: last.bound,
            within_bound,
            pass: max_dev <= EXACT_TOL && max_wrong_dev <= EXACT_TOL && within_bound,
        });
    }
    let verdict = Verdict::from_bool(summaries.iter().all(|s| s.pass));
    Ok(ExperimentReport::new("hadamard-demo", 0, args, &summaries, verdict)?.with_rows(rows))
}

// ------------------------------------------------------------------------- net

#[derive(Args, Debug, Serialize)]
pub struct NetArgs {
    /// Dimension K of the state space (1..=8).
    #[arg(long)]
    pub dim: usize,
    /// Covering radius in trace distance, in (0, 1).
    #[arg(long)]
    pub delta: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = NetConfig::default().rejection_streak)]
    pub rejection_streak: usize,
    #[arg(long, default_value_t = NetConfig::default().probes_per_round)]
    pub probes: usize,
    #[arg(long, default_value_t = NetConfig::default().max_rounds)]
    pub max_rounds: usize,
    #[arg(long, default_value_t = NetConfig::default().max_points)]
    pub max_points: usize,
}

pub fn net(args: &NetArgs) -> Result<ExperimentReport> {
    let config = NetConfig {
        rejection_streak: args.rejection_streak,
        probes_per_round: args.probes,
        max_rounds: args.max_rounds,
        max_points: args.max_points,
    };
    match build_delta_net(args.dim, args.delta, args.seed, config) {
        Ok(net) => {
            let separation = |i: usize| {
                net.points
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, p)| net.points[i].trace_distance(p))
                    .fold(f64::INFINITY, f64::min)
            };
            let rows = (0..net.points.len())
                .map(|i| CsvRow::trial(args.seed, i as u64, None, None, separation(i)))
                .collect();
            let points: Vec<Vec<[f64; 2]>> = net
                .points
                .iter()
                .map(|p| p.as_slice().iter().map(|z| [z.re, z.im]).collect())
                .collect();
            let verdict = Verdict::from_bool(net.coverage_confidence == 1.0 && net.num_points as f64 <= net.size_ceiling);
            let results = json!({"net": net, "points": points});
            Ok(ExperimentReport::new("net", args.seed, args, results, verdict)?.with_rows(rows))
        }
        Err(Error::NetConstruction(msg)) => {
            let results = json!({"error": msg});
            Ok(ExperimentReport::new("net", args.seed, args, results, Verdict::Fail)?)
        }
        Err(e) => Err(e.into()),
    }
}

// ------------------------------------------------------------ continuity-check

#[derive(Args, Debug, Serialize)]
pub struct ContinuityArgs {
    #[arg(long, default_value_t = 16)]
    pub d: usize,
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    /// Number of (state pair, channel) instances.
    #[arg(long, default_value_t = 1000)]
    pub instances: usize,
    /// Use this channel for every instance instead of random ones.
    #[arg(long)]
    pub channel: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

pub fn continuity(args: &ContinuityArgs) -> Result<ExperimentReport> {
    let report = match &args.channel {
        None => continuity_sweep(args.d, args.k, args.instances, args.seed)?,
        Some(path) => {
            let ch = io::load_channel(path).with_context(|| format!("--channel {}", path.display()))?;
            let scheme = QuantumMessageScheme::new(HaarScheme::from_seed(args.d, args.k, args.seed)?);
            let pairs = (0..args.instances)
                .map(|i| {
                    let mut rng = SeededRng::for_purpose(args.seed, StreamTag::StatePair, i as u64);
                    let a = random_unit_vector(args.d, &mut rng)?;
                    let b = random_unit_vector(args.d, &mut rng)?;
                    Ok((a, b))
                })
                .collect::<Result<Vec<(UnitVector, UnitVector)>>>()?;
            continuity_check(&scheme, &ch, &pairs)?
        }
    };
    let rows = report
        .checks
        .iter()
        .map(|c| CsvRow::trial(args.seed, c.index as u64, None, None, c.lhs - c.rhs))
        .collect();
    let verdict = report.verdict;
    Ok(ExperimentReport::new("continuity-check", args.seed, args, &report, verdict)?.with_rows(rows))
}

// ------------------------------------------------------------ validate-channel

#[derive(Args, Debug, Serialize)]
pub struct ValidateArgs {
    /// Channel file.
    #[arg(long)]
    pub channel: PathBuf,
}

pub fn validate(args: &ValidateArgs) -> Result<ExperimentReport> {
    let text = std::fs::read_to_string(&args.channel).with_context(|| format!("--channel {}", args.channel.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("--channel {}", args.channel.display()))?;
    let file: ChannelFile = if value.get("choi").is_some() {
        ChannelFile::Choi(serde_json::from_value(value).context("choi channel file")?)
    } else {
        ChannelFile::Kraus(serde_json::from_value(value).context("kraus channel file")?)
    };
    let (verdict_json, channel, problem) = match file {
        ChannelFile::Kraus(KrausFile { dim_in, dim_out, kraus }) => {
            let v = validate_kraus(dim_in, dim_out, &kraus)?;
            let ch = if v.ok() { Some(QuantumChannel::new(dim_in, dim_out, kraus)?) } else { None };
            let problem = (!v.ok()).then(|| "Kraus operators do not form a CPTP map".to_string());
            (serde_json::to_value(&v)?, ch, problem)
        }
        ChannelFile::Choi(c) => {
            let n = c.choi.rows();
            let (din, dout) = match (c.dim_in, c.dim_out) {
                (Some(a), Some(b)) => (a, b),
                (Some(a), None) if a > 0 => (a, n / a),
                (None, Some(b)) if b > 0 => (n / b, b),
                _ => {
                    let d = (n as f64).sqrt().round() as usize;
                    (d, d)
                }
            };
            match ChoiMatrix::new(din, dout, c.choi).and_then(|j| j.to_channel()) {
                Ok(ch) => (json!({"cp_ok": true, "tp_ok": true}), Some(ch), None),
                Err(e @ (Error::InvalidChannel(_) | Error::Shape(_))) => {
                    (json!({"cp_ok": false, "tp_ok": false}), None, Some(e.to_string()))
                }
                Err(e) => return Err(e.into()),
            }
        }
    };
    let mut results = json!({"validation": verdict_json, "problem": problem});
    if let Some(ch) = &channel {
        results["dim_in"] = json!(ch.dim_in());
        results["dim_out"] = json!(ch.dim_out());
        results["num_kraus"] = json!(ch.num_kraus());
        results["min_kraus_rank"] = json!(ch.min_kraus_rank()?);
        if ch.is_square() {
            results["entanglement_fidelity"] = json!(ch.entanglement_fidelity()?);
            results["unitary"] = json!(ch.as_unitary().is_some());
            results["classical_function"] = json!(detect_classical(ch).map(|f| f.table().to_vec()));
            results["replacement"] = json!(detect_replacement(ch).is_some());
        }
    }
    let verdict = Verdict::from_bool(channel.is_some());
    Ok(ExperimentReport::new("validate-channel", 0, args, results, verdict)?)
}
