//! Command-line front end: config-driven runs of the simulator, estimators
//! and diagnostics, with reproducible, atomically written outputs.
//!
//! Exit codes: 0 success, 2 config or usage error, 3 runtime error, 4 failed
//! self-check in `report`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::analysis::diagnostics::{decay_curves, fit_decay, flag_defective, write_curves_csv};
use crate::analysis::drift::drift_experiment;
use crate::analysis::oracle::{target_level_probability, Oracle, MAX_SEQUENCE_BITS};
use crate::analysis::{bootstrap_stderr, extrapolate};
use crate::bits::BitString;
use crate::config::{ExperimentConfig, FormatSpec, HybridInverse};
use crate::error::{Error, Result};
use crate::matrix::MAX_DENSE_QUBITS;
use crate::mitigation::{
    amplified_distribution, feedforward_expectation, hybrid_inverse, hybrid_inverse_local, mitigate,
    mitigate_scalar, mitigate_shared, post_select, single_level, AmplifiedDistribution, MitigationEstimate,
    ScalarLevel,
};
use crate::sim::drift::NoiseState;
use crate::sim::engine::Simulator;
use crate::sim::plan::{ExecutionOrder, Layout, Scheme};
use crate::sim::record::{RecordFormat, RecordSet};
use crate::taylor::TaylorCoefficients;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Shipped presets: name, config, expected results.
pub const PRESETS: &[(&str, &str, &str)] = &[
    (
        "table1",
        include_str!("../presets/table1.toml"),
        include_str!("../presets/table1.expected.json"),
    ),
    (
        "table2",
        include_str!("../presets/table2.toml"),
        include_str!("../presets/table2.expected.json"),
    ),
    (
        "fez20-desk",
        include_str!("../presets/fez20-desk.toml"),
        include_str!("../presets/fez20-desk.expected.json"),
    ),
    (
        "reset-h1-desk",
        include_str!("../presets/reset-h1-desk.toml"),
        include_str!("../presets/reset-h1-desk.expected.json"),
    ),
    (
        "drift-ramp",
        include_str!("../presets/drift-ramp.toml"),
        include_str!("../presets/drift-ramp.expected.json"),
    ),
    (
        "majority-bias",
        include_str!("../presets/majority-bias.toml"),
        include_str!("../presets/majority-bias.expected.json"),
    ),
];

pub fn preset(name: &str) -> Option<(&'static str, &'static str)> {
    PRESETS.iter().find(|p| p.0 == name).map(|p| (p.1, p.2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Jsonl,
    Bin,
}

impl From<FormatArg> for FormatSpec {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => FormatSpec::Csv,
            FormatArg::Jsonl => FormatSpec::Jsonl,
            FormatArg::Bin => FormatSpec::Bin,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "parmit",
    version,
    about = "Parity-based readout and preparation error mitigation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment config (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Shipped preset instead of a config file.
    #[arg(long, global = true, value_name = "NAME")]
    pub preset: Option<String>,
    /// Overrides `run.seed`.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Record format, overriding `output.formats`.
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate shot records.
    Simulate,
    /// Mitigate records written by `simulate`.
    Mitigate {
        /// Directory holding the records; defaults to the output directory.
        #[arg(long, value_name = "DIR")]
        input: Option<PathBuf>,
    },
    /// Exact outcome tables.
    Oracle,
    /// Decay curves and defective-qubit flags from records.
    Diagnose {
        #[arg(long, value_name = "DIR")]
        input: Option<PathBuf>,
    },
    /// Interleaved against blocked level order under the configured drift.
    Drift,
    /// Oracle and Monte Carlo metrics, checked against expected results.
    Report,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Mitigate { .. } => "mitigate",
            Command::Oracle => "oracle",
            Command::Diagnose { .. } => "diagnose",
            Command::Drift => "drift",
            Command::Report => "report",
        }
    }
}

#[derive(Debug)]
enum Failure {
    Schema(String),
    Runtime(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(m) => Failure::Schema(m),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.threads {
        Some(0) => Err(Failure::Schema("--threads must be positive".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&cli)),
            Err(e) => Err(Failure::Runtime(e.to_string())),
        },
        None => execute(&cli),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Schema(m)) => {
            eprintln!("parmit: config error: {m}");
            2
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("parmit: {m}");
            3
        }
        Err(Failure::Check(m)) => {
            eprintln!("parmit: self-check failed: {m}");
            4
        }
    }
}

/// Everything a command needs: the resolved config and where to write.
struct Context {
    cfg: ExperimentConfig,
    /// Directory relative to which config paths resolve.
    base: PathBuf,
    out: PathBuf,
    expected: Option<String>,
    command: &'static str,
    files: BTreeMap<String, String>,
}

fn load(cli: &Cli) -> std::result::Result<Context, Failure> {
    let (text, base, expected) = match (&cli.config, &cli.preset) {
        (Some(_), Some(_)) => return Err(Failure::Schema("give --config or --preset, not both".into())),
        (None, None) => return Err(Failure::Schema("one of --config, --preset is required".into())),
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Schema(format!("{}: {e}", path.display())))?;
            let sibling = path.with_extension("expected.json");
            let expected = std::fs::read_to_string(sibling).ok();
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (text, base, expected)
        }
        (None, Some(name)) => {
            let (text, expected) = preset(name).ok_or_else(|| {
                let names: Vec<&str> = PRESETS.iter().map(|p| p.0).collect();
                Failure::Schema(format!(
                    "unknown preset {name:?}; available: {}",
                    names.join(", ")
                ))
            })?;
            (text.to_string(), PathBuf::from("."), Some(expected.to_string()))
        }
    };
    let mut cfg = ExperimentConfig::from_toml(&text)?;
    if let Some(seed) = cli.seed {
        cfg.run.seed = seed;
    }
    if let Some(f) = cli.format {
        cfg.output.formats = vec![f.into()];
    }
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(|d| base.join(d)))
        .unwrap_or_else(|| PathBuf::from("parmit-out"));
    Ok(Context {
        cfg,
        base,
        out,
        expected,
        command: cli.command.name(),
        files: BTreeMap::new(),
    })
}

fn execute(cli: &Cli) -> std::result::Result<(), Failure> {
    let mut ctx = load(cli)?;
    std::fs::create_dir_all(&ctx.out).map_err(|e| Failure::Runtime(format!("{}: {e}", ctx.out.display())))?;
    let outcome = match &cli.command {
        Command::Simulate => cmd_simulate(&mut ctx).map_err(Failure::from),
        Command::Mitigate { input } => {
            let dir = input.clone().unwrap_or_else(|| ctx.out.clone());
            cmd_mitigate(&mut ctx, &dir, input.is_some()).map_err(Failure::from)
        }
        Command::Oracle => cmd_oracle(&mut ctx).map_err(Failure::from),
        Command::Diagnose { input } => {
            let dir = input.clone().unwrap_or_else(|| ctx.out.clone());
            cmd_diagnose(&mut ctx, &dir, input.is_some()).map_err(Failure::from)
        }
        Command::Drift => cmd_drift(&mut ctx).map_err(Failure::from),
        Command::Report => cmd_report(&mut ctx),
    };
    // The manifest is written even when a self-check fails.
    write_manifest(&ctx).map_err(Failure::from)?;
    outcome
}

// ---------------------------------------------------------------- output

impl Context {
    fn meta(&self) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("tool".into(), json!("parmit"));
        m.insert("version".into(), json!(VERSION));
        m.insert("command".into(), json!(self.command));
        m.insert("config_hash".into(), json!(self.cfg.hash()));
        m.insert("seed".into(), json!(self.cfg.run.seed));
        m
    }

    fn csv_preamble(&self) -> String {
        format!(
            "# parmit {VERSION} command={} config={} seed={}\n",
            self.command,
            self.cfg.hash(),
            self.cfg.run.seed
        )
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.out.join(name), bytes)?;
        self.files
            .insert(name.to_string(), hex::encode(Sha256::digest(bytes)));
        Ok(())
    }

    fn write_json(&mut self, name: &str, body: Value) -> Result<()> {
        let mut doc = Map::new();
        doc.insert("meta".into(), Value::Object(self.meta()));
        if let Value::Object(fields) = body {
            doc.extend(fields);
        }
        let mut text = serde_json::to_vec_pretty(&Value::Object(doc))?;
        text.push(b'\n');
        self.write(name, &text)
    }

    fn write_csv(&mut self, name: &str, body: &str) -> Result<()> {
        let text = self.csv_preamble() + body;
        self.write(name, text.as_bytes())
    }
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn write_manifest(ctx: &Context) -> Result<()> {
    let body = json!({
        "tool": "parmit",
        "version": VERSION,
        "command": ctx.command,
        "config_hash": ctx.cfg.hash(),
        "seed": ctx.cfg.run.seed,
        "config": ctx.cfg,
        "files": ctx.files,
    });
    let mut text = serde_json::to_vec_pretty(&body)?;
    text.push(b'\n');
    write_atomic(&ctx.out.join(format!("{}.manifest.json", ctx.command)), &text)
}

// ---------------------------------------------------------------- records

fn record_names(cfg: &ExperimentConfig, format: RecordFormat) -> Vec<String> {
    let ext = format.extension();
    match cfg.run.order.execution() {
        None => vec![format!("records.{ext}")],
        Some(_) => (0..=cfg.plan.j_max)
            .map(|j| format!("records_j{j}.{ext}"))
            .collect(),
    }
}

/// Record sets for the config: one shared set, or one per level.
fn simulate_sets(cfg: &ExperimentConfig) -> Result<Vec<RecordSet>> {
    let sim = Simulator::new(cfg.sim_config()?, cfg.plan())?;
    match cfg.run.order.execution() {
        None => Ok(vec![sim.run(Layout::Shared, cfg.run.n_shots, cfg.run.seed)?]),
        Some(order) => sim.run_levels(order, cfg.run.n_shots, cfg.run.seed),
    }
}

fn encode(set: &RecordSet, format: RecordFormat, meta: &Map<String, Value>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        RecordFormat::Jsonl => set.write_jsonl(&mut buf, meta)?,
        RecordFormat::Csv => set.write_csv(&mut buf, meta)?,
        RecordFormat::Bin => set.write_bin(&mut buf)?,
    }
    Ok(buf)
}

fn read_records(path: &Path, format: RecordFormat) -> Result<(RecordSet, Option<Map<String, Value>>)> {
    let file =
        std::fs::File::open(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
    let r = BufReader::new(file);
    Ok(match format {
        RecordFormat::Jsonl => {
            let (s, h) = RecordSet::read_jsonl(r)?;
            (s, Some(h))
        }
        RecordFormat::Csv => {
            let (s, h) = RecordSet::read_csv(r)?;
            (s, Some(h))
        }
        RecordFormat::Bin => (RecordSet::read_bin(r)?, None),
    })
}

/// Reads the records in `dir`, trying the configured formats first and then
/// any other format present. Without an explicit input directory and with no
/// records on disk, the records are simulated in-process.
fn load_sets(ctx: &Context, dir: &Path, explicit: bool) -> Result<Vec<RecordSet>> {
    let mut formats: Vec<RecordFormat> = ctx.cfg.output.formats.iter().map(|&f| f.into()).collect();
    for f in [RecordFormat::Jsonl, RecordFormat::Csv, RecordFormat::Bin] {
        if !formats.contains(&f) {
            formats.push(f);
        }
    }
    let found = formats
        .into_iter()
        .find(|&f| record_names(&ctx.cfg, f).iter().all(|n| dir.join(n).is_file()));
    let Some(format) = found else {
        if explicit {
            return Err(Error::InvalidArgument(format!(
                "{}: no complete record set ({})",
                dir.display(),
                record_names(&ctx.cfg, ctx.cfg.output.formats[0].into()).join(", ")
            )));
        }
        eprintln!("parmit: no records in {}; simulating", dir.display());
        return simulate_sets(&ctx.cfg);
    };
    let hash = ctx.cfg.hash();
    record_names(&ctx.cfg, format)
        .iter()
        .map(|name| {
            let (set, header) = read_records(&dir.join(name), format)?;
            if let Some(h) = header {
                if h.get("config_hash").and_then(Value::as_str) != Some(hash.as_str()) {
                    eprintln!("parmit: warning: {name} was written under a different config");
                }
            }
            Ok(set)
        })
        .collect()
}

fn cmd_simulate(ctx: &mut Context) -> Result<()> {
    let sets = simulate_sets(&ctx.cfg)?;
    let meta = ctx.meta();
    for spec in ctx.cfg.output.formats.clone() {
        let format: RecordFormat = spec.into();
        for (set, name) in sets.iter().zip(record_names(&ctx.cfg, format)) {
            let bytes = encode(set, format, &meta)?;
            ctx.write(&name, &bytes)?;
        }
    }
    let shots: usize = sets.iter().map(RecordSet::len).sum();
    println!("simulated {shots} shots into {}", ctx.out.display());
    Ok(())
}

// ---------------------------------------------------------------- mitigation

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub m: usize,
    pub value: f64,
    pub stderr: f64,
}

/// Result of mitigating one config's records.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MitigationRun {
    pub target: BitString,
    pub estimate: MitigationEstimate,
    /// Target probability at every order up to `m`.
    pub series: Vec<SeriesPoint>,
    /// Tallied target probability and its stderr per level.
    pub levels: Vec<SeriesPoint>,
    pub hybrid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub postselect_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feedforward: Option<MitigationEstimate>,
    /// Exponential extrapolation of `series` to order `2m+1`, when it has
    /// at least three points.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extrapolated: Option<crate::analysis::Extrapolation>,
}

fn apply_hybrid(
    d: AmplifiedDistribution,
    inv: &HybridInverse,
    target: &BitString,
) -> Result<AmplifiedDistribution> {
    let j = d.j;
    match inv {
        HybridInverse::Channel(c) => hybrid_inverse(&d, c, j),
        HybridInverse::Local(l) => hybrid_inverse_local(&d, l, j, std::slice::from_ref(target)),
    }
}

fn level_tallies(
    cfg: &ExperimentConfig,
    sets: &[RecordSet],
    hybrid: Option<&HybridInverse>,
) -> Result<Vec<AmplifiedDistribution>> {
    let plan = cfg.plan();
    let target = cfg.target()?;
    (0..=cfg.plan.j_max)
        .map(|j| {
            let set = if sets.len() == 1 { &sets[0] } else { &sets[j] };
            let d = amplified_distribution(set, &plan, j)?;
            match hybrid {
                Some(inv) => apply_hybrid(d, inv, &target),
                None => Ok(d),
            }
        })
        .collect()
}

/// Estimate of order `m` from the tallies, with stderr appropriate to the
/// record layout.
fn estimate_at(
    cfg: &ExperimentConfig,
    sets: &[RecordSet],
    tallies: &[AmplifiedDistribution],
    hybrid: Option<&HybridInverse>,
    m: usize,
) -> Result<MitigationEstimate> {
    if cfg.plan.scheme == Scheme::Majority {
        return Ok(single_level(&tallies[m]));
    }
    if sets.len() > 1 {
        return mitigate(tallies, m);
    }
    let seed = cfg.run.seed;
    let Some(inv) = hybrid else {
        return mitigate_shared(&sets[0], &cfg.plan(), m, cfg.run.resamples, seed);
    };
    // Shared records with a hybrid correction: levels are correlated, so the
    // target's stderr comes from a shot bootstrap of the whole pipeline.
    let mut est = mitigate(tallies, m)?;
    let target = cfg.target()?;
    let plan = cfg.plan();
    let coeffs = TaylorCoefficients::new(m)?.as_f64();
    let value_of = |s: &RecordSet| -> Result<f64> {
        let mut v = 0.0;
        for (j, a) in coeffs.iter().enumerate() {
            let d = apply_hybrid(amplified_distribution(s, &plan, j)?, inv, &target)?;
            v += a * d.prob(&target);
        }
        Ok(v)
    };
    let sd = bootstrap_stderr(&sets[0], value_of, cfg.run.resamples.max(100), seed)?;
    if let crate::mitigation::Quantity::Distribution(map) = &mut est.stderr {
        map.insert(target, sd);
    }
    Ok(est)
}

pub fn mitigate_sets(cfg: &ExperimentConfig, sets: &[RecordSet], base: &Path) -> Result<MitigationRun> {
    let target = cfg.target()?;
    let hybrid = cfg.hybrid_inverse(base)?;
    let k = cfg.plan.postselect_k;
    let (sets, postselect_rate) = if k > 0 {
        let mut kept = Vec::with_capacity(sets.len());
        let (mut total, mut survived) = (0usize, 0usize);
        for s in sets {
            let (p, _) = post_select(s, k)?;
            total += s.len();
            survived += p.len();
            kept.push(p);
        }
        (kept, Some(survived as f64 / total as f64))
    } else {
        (sets.to_vec(), None)
    };
    let tallies = level_tallies(cfg, &sets, hybrid.as_ref())?;
    let m = cfg.m();
    let mut series = Vec::with_capacity(m + 1);
    let mut last = None;
    for mm in 0..=m {
        let e = estimate_at(cfg, &sets, &tallies, hybrid.as_ref(), mm)?;
        series.push(SeriesPoint {
            m: mm,
            value: e.value.at(&target),
            stderr: e.stderr.at(&target),
        });
        last = Some(e);
    }
    let mut estimate = last.expect("order 0 always present");
    estimate.discarded_fraction = postselect_rate.map_or(0.0, |r| 1.0 - r);
    let levels = tallies
        .iter()
        .map(|d| SeriesPoint {
            m: d.j,
            value: d.prob(&target),
            stderr: d.variance(&target).sqrt(),
        })
        .collect();
    let feedforward = match &cfg.plan.feedforward {
        None => None,
        Some(ff) => {
            let plan = cfg.plan();
            let weighted = cfg.plan.scheme == Scheme::Weighted;
            let inputs = (0..=m)
                .map(|j| {
                    let set = if sets.len() == 1 { &sets[0] } else { &sets[j] };
                    feedforward_expectation(set, &plan, ff.qubit, ff.a0, ff.a1, j, weighted)
                })
                .collect::<Result<Vec<ScalarLevel>>>()?;
            Some(mitigate_scalar(cfg.plan.scheme.as_str(), &inputs, m)?)
        }
    };
    let extrapolated = if series.len() >= 3 && cfg.plan.scheme != Scheme::Majority {
        let ms: Vec<f64> = series.iter().map(|p| p.m as f64).collect();
        let vs: Vec<f64> = series.iter().map(|p| p.value).collect();
        let sds: Vec<f64> = series.iter().map(|p| p.stderr.max(1e-12)).collect();
        extrapolate(&ms, &vs, Some(&sds), (2 * m + 1) as f64).ok()
    } else {
        None
    };
    Ok(MitigationRun {
        target,
        estimate,
        series,
        levels,
        hybrid: hybrid.is_some(),
        postselect_rate,
        feedforward,
        extrapolated,
    })
}

fn series_csv(run: &MitigationRun) -> String {
    let mut s = String::from("m,value,stderr\n");
    for p in &run.series {
        let _ = writeln!(s, "{},{},{}", p.m, p.value, p.stderr);
    }
    s
}

fn cmd_mitigate(ctx: &mut Context, dir: &Path, explicit: bool) -> Result<()> {
    let sets = load_sets(ctx, dir, explicit)?;
    let run = mitigate_sets(&ctx.cfg, &sets, &ctx.base)?;
    ctx.write_json("estimate.json", serde_json::to_value(&run)?)?;
    ctx.write_csv("series.csv", &series_csv(&run))?;
    let last = run.series.last().expect("order 0 always present");
    println!(
        "P({}) at m={}: {:.6} ± {:.6}",
        run.target, last.m, last.value, last.stderr
    );
    Ok(())
}

// ---------------------------------------------------------------- oracle

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleTables {
    pub target: BitString,
    /// Target probability per level, and the mitigated value at order `m`.
    pub levels: Vec<f64>,
    pub mitigated: f64,
    /// Full tallied distributions per level, when the register is small.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distributions: Option<Vec<Vec<f64>>>,
    /// Probability of every raw sequence at level `j_max`, keyed by
    /// per-qubit bit strings joined with `|` (post-selection slots first).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequences: Option<BTreeMap<String, f64>>,
}

/// Largest register for which raw sequences are listed.
const MAX_LISTED_BITS: usize = 12;

pub fn oracle_tables(cfg: &ExperimentConfig) -> Result<OracleTables> {
    let sim = cfg.sim_config()?;
    let base = NoiseState {
        readout: sim.readout.clone(),
        noise: sim.noise.clone(),
    };
    let state = sim.drift.resolve(0, &base);
    let scheme = cfg.plan.scheme;
    let n = cfg.n_qubits();
    let levels = (0..=cfg.plan.j_max)
        .map(|j| target_level_probability(&sim, &state, scheme, j))
        .collect::<Result<Vec<_>>>()?;
    let m = cfg.m();
    let mitigated = if scheme == Scheme::Majority {
        levels[m]
    } else {
        TaylorCoefficients::new(m)?.combine(&levels[..=m])?
    };
    let bits = n * (cfg.plan.postselect_k + scheme.slots(cfg.plan.j_max));
    let dense = n <= MAX_DENSE_QUBITS && bits <= MAX_SEQUENCE_BITS;
    let (distributions, sequences) = match Oracle::for_config(&sim, &state, scheme) {
        Ok(oracle) if dense => {
            let dists = (0..=cfg.plan.j_max)
                .map(|j| oracle.level_distribution::<f64>(scheme, j))
                .collect::<Result<Vec<_>>>()?;
            let seqs = if bits <= MAX_LISTED_BITS {
                let table = oracle.enumerate::<f64>(scheme.slots(cfg.plan.j_max))?;
                let slots = table.total_slots();
                Some(
                    table
                        .table
                        .iter()
                        .enumerate()
                        .map(|(idx, p)| {
                            let per_qubit: Vec<String> = (0..n)
                                .map(|q| {
                                    (0..slots)
                                        .map(|t| if idx >> (n * t + q) & 1 == 1 { '1' } else { '0' })
                                        .collect()
                                })
                                .collect();
                            (per_qubit.join("|"), *p)
                        })
                        .collect(),
                )
            } else {
                None
            };
            (Some(dists), seqs)
        }
        _ => (None, None),
    };
    Ok(OracleTables {
        target: cfg.target()?,
        levels,
        mitigated,
        distributions,
        sequences,
    })
}

fn cmd_oracle(ctx: &mut Context) -> Result<()> {
    let t = oracle_tables(&ctx.cfg)?;
    let n = ctx.cfg.n_qubits();
    let mut levels = String::from("level,outcome,probability\n");
    match &t.distributions {
        Some(d) => {
            for (j, dist) in d.iter().enumerate() {
                for (o, p) in dist.iter().enumerate() {
                    let _ = writeln!(levels, "{j},{},{p}", BitString::from_index(o as u64, n));
                }
            }
        }
        None => {
            for (j, p) in t.levels.iter().enumerate() {
                let _ = writeln!(levels, "{j},{},{p}", t.target);
            }
        }
    }
    let _ = writeln!(levels, "mitigated,{},{}", t.target, t.mitigated);
    ctx.write_csv("oracle_levels.csv", &levels)?;
    if let Some(seqs) = &t.sequences {
        let mut s = String::from("sequence,probability\n");
        for (k, p) in seqs {
            let _ = writeln!(s, "{k},{p}");
        }
        ctx.write_csv("oracle_sequences.csv", &s)?;
    }
    ctx.write_json("oracle.json", serde_json::to_value(&t)?)?;
    println!(
        "exact P({}) mitigated at m={}: {:.12}",
        t.target,
        ctx.cfg.m(),
        t.mitigated
    );
    Ok(())
}

// ---------------------------------------------------------------- diagnose

fn cmd_diagnose(ctx: &mut Context, dir: &Path, explicit: bool) -> Result<()> {
    let sets = load_sets(ctx, dir, explicit)?;
    // The longest records carry the most slots.
    let set = sets.iter().max_by_key(|s| s.slots).expect("at least one level");
    let bit = ctx.cfg.diagnose.post_select_bit == 1;
    let curves = decay_curves(set, bit)?;
    let fits = curves.iter().map(fit_decay).collect::<Result<Vec<_>>>()?;
    let flagged = flag_defective(&fits, ctx.cfg.diagnose.flag_factor);
    let mut buf = Vec::new();
    write_curves_csv(&mut buf, &curves)?;
    ctx.write_csv("decay_curves.csv", std::str::from_utf8(&buf).expect("ascii"))?;
    let mut f = String::from("qubit,a,b,lambda,rate,slope,residual,flagged\n");
    for fit in &fits {
        let _ = writeln!(
            f,
            "{},{},{},{},{},{},{},{}",
            fit.qubit,
            fit.a,
            fit.b,
            fit.lambda,
            fit.rate,
            fit.slope,
            fit.residual,
            flagged.contains(&fit.qubit) as u8
        );
    }
    ctx.write_csv("decay_fits.csv", &f)?;
    ctx.write_json("diagnose.json", json!({ "fits": fits, "flagged": flagged }))?;
    println!("flagged qubits: {flagged:?}");
    Ok(())
}

// ---------------------------------------------------------------- drift

fn drift_reports(cfg: &ExperimentConfig) -> Result<Vec<crate::analysis::DriftReport>> {
    let sim = cfg.sim_config()?;
    [ExecutionOrder::Interleaved, ExecutionOrder::Blocked]
        .into_iter()
        .map(|order| {
            drift_experiment(
                &sim,
                cfg.plan.scheme,
                cfg.m(),
                cfg.run.n_shots,
                order,
                cfg.run.seed,
            )
        })
        .collect()
}

fn cmd_drift(ctx: &mut Context) -> Result<()> {
    let reports = drift_reports(&ctx.cfg)?;
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    let mut s = String::from("order,estimate,stderr,bias,reference,drift_bias,expected\n");
    for r in &reports {
        let order = serde_json::to_value(r.order)?;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            order.as_str().unwrap_or_default(),
            r.estimate,
            r.stderr,
            r.bias,
            opt(r.reference),
            opt(r.drift_bias),
            opt(r.expected)
        );
    }
    ctx.write_csv("drift_report.csv", &s)?;
    ctx.write_json("drift.json", json!({ "reports": reports }))?;
    print!("{s}");
    Ok(())
}

// ---------------------------------------------------------------- report

/// Expected value of one metric: an absolute tolerance, a multiple of the
/// metric's `.stderr` companion, or both (added).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub value: f64,
    #[serde(default)]
    pub tol: f64,
    #[serde(default)]
    pub sigmas: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    pub checks: BTreeMap<String, Check>,
}

/// All metrics `report` computes for a config.
pub fn report_metrics(cfg: &ExperimentConfig, base: &Path) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    if let Ok(t) = oracle_tables(cfg) {
        for (j, p) in t.levels.iter().enumerate() {
            out.insert(format!("oracle.level{j}"), *p);
        }
        out.insert("oracle.mitigated".into(), t.mitigated);
        for (k, p) in t.sequences.iter().flatten() {
            out.insert(format!("oracle.seq.{k}"), *p);
        }
    }
    let sets = simulate_sets(cfg)?;
    let run = mitigate_sets(cfg, &sets, base)?;
    for p in &run.levels {
        out.insert(format!("mc.level{}", p.m), p.value);
        out.insert(format!("mc.level{}.stderr", p.m), p.stderr);
    }
    for p in &run.series {
        out.insert(format!("mc.series{}", p.m), p.value);
        out.insert(format!("mc.series{}.stderr", p.m), p.stderr);
    }
    let last = run.series.last().expect("order 0");
    out.insert("mc.mitigated".into(), last.value);
    out.insert("mc.mitigated.stderr".into(), last.stderr);
    if let Some(r) = run.postselect_rate {
        out.insert("mc.postselect_rate".into(), r);
    }
    if let Some(ff) = &run.feedforward {
        let v = ff.value.scalar().unwrap_or(f64::NAN);
        out.insert("mc.feedforward".into(), v);
        out.insert(
            "mc.feedforward.stderr".into(),
            ff.stderr.scalar().unwrap_or(f64::NAN),
        );
    }
    let drifting = cfg.noise.drift.as_ref().is_some_and(|d| !d.segments.is_empty());
    if drifting {
        for r in drift_reports(cfg)? {
            let key = match r.order {
                ExecutionOrder::Interleaved => "interleaved",
                ExecutionOrder::Blocked => "blocked",
            };
            out.insert(format!("drift.{key}.estimate"), r.estimate);
            out.insert(format!("drift.{key}.estimate.stderr"), r.stderr);
            if let Some(b) = r.drift_bias {
                out.insert(format!("drift.{key}.drift_bias"), b);
                out.insert(format!("drift.{key}.drift_bias.stderr"), r.stderr);
            }
            if let Some(e) = r.expected {
                out.insert(format!("drift.{key}.expected"), e);
            }
            if let Some(rf) = r.reference {
                out.insert("drift.reference".into(), rf);
            }
        }
    }
    Ok(out)
}

/// Evaluates `expected` against `metrics`; returns one line per check and
/// whether all passed.
pub fn evaluate(metrics: &BTreeMap<String, f64>, expected: &Expectations) -> (Vec<String>, bool) {
    let mut all = true;
    let lines = expected
        .checks
        .iter()
        .map(|(name, c)| {
            let got = metrics.get(name).copied();
            let sd = metrics.get(&format!("{name}.stderr")).copied().unwrap_or(0.0);
            let tol = c.tol + c.sigmas * sd;
            let ok = got.is_some_and(|g| (g - c.value).abs() <= tol);
            all &= ok;
            match got {
                Some(g) => format!(
                    "{} {name}: got {g:.12e}, expected {:.12e} ± {tol:.3e}",
                    if ok { "PASS" } else { "FAIL" },
                    c.value
                ),
                None => format!("FAIL {name}: metric not computed"),
            }
        })
        .collect();
    (lines, all)
}

fn cmd_report(ctx: &mut Context) -> std::result::Result<(), Failure> {
    let metrics = report_metrics(&ctx.cfg, &ctx.base)?;
    let expected = match &ctx.expected {
        Some(text) => Some(
            serde_json::from_str::<Expectations>(text)
                .map_err(|e| Failure::Schema(format!("expected-results file: {e}")))?,
        ),
        None => None,
    };
    let (lines, ok) = match &expected {
        Some(e) => evaluate(&metrics, e),
        None => (Vec::new(), true),
    };
    let mut csv = String::from("metric,value\n");
    for (k, v) in &metrics {
        let _ = writeln!(csv, "{k},{v}");
    }
    ctx.write_csv("metrics.csv", &csv)?;
    ctx.write_json(
        "report.json",
        json!({ "metrics": metrics, "checks": lines, "passed": ok }),
    )?;
    for l in &lines {
        println!("{l}");
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "{} of {} checks failed",
            lines.iter().filter(|l| l.starts_with("FAIL")).count(),
            lines.len()
        )))
    }
}
