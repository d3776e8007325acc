//! The `horizon` command line.
//!
//! One subcommand per experiment plus `suite`, which runs all of them.
//! Reports go to `--out` as `<kind>.json`, or as `<kind>_*.csv` tables with a
//! `<kind>_provenance.csv` sidecar. Identical inputs give byte-identical
//! files: every random choice flows from `--seed` through [`ChaCha8Rng`], and
//! exact quantities are printed as integer pairs.
//!
//! A config file holds flat `key = value` lines. Global keys are `seed`,
//! `out` and `format`; subcommand keys are written `<subcommand>.<param>`,
//! e.g. `omega.max-bits = 9`. Flags given on the command line win.
//!
//! Every parameter that has a default shows it in `--help`:
//!
//! ```
//! use clap::{ArgAction, CommandFactory};
//! use horizon_lab::cli::{Cli, SUBCOMMANDS};
//!
//! let mut cmd = Cli::command();
//! for name in SUBCOMMANDS {
//!     let sub = cmd.find_subcommand_mut(name).unwrap();
//!     let help = sub.render_long_help().to_string();
//!     for arg in sub.get_arguments() {
//!         let Some(long) = arg.get_long() else { continue };
//!         if arg.get_default_values().is_empty() || matches!(arg.get_action(), ArgAction::SetTrue) {
//!             continue;
//!         }
//!         let line = help.lines().find(|l| l.contains(&format!("--{long}"))).unwrap();
//!         let block = help.split(line).nth(1).unwrap().split("\n  -").next().unwrap();
//!         let documented = line.contains("[default:") || block.contains("[default:");
//!         assert!(documented, "--{long} of {name} lacks a default in help");
//!     }
//! }
//! ```

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::parser::ValueSource;
use clap::{ArgAction, ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bits::BitString;
use crate::complexity::edis::{self, ListedOracle};
use crate::complexity::sigma::{self, BitStreamPoint, HiddenPoint, SigmaEncoding};
use crate::complexity::{self, KBound, KStatus, ProducerTable, MAX_CENSUS_N, ZERO_GENERATOR};
use crate::diagonal::{self, AlphabetMap, OutcomeTable};
use crate::hvm::{self, MachineConfig, Program};
use crate::omega::{self, Verdict};
use crate::toybit::{
    self, Axis, Disturbance, EpistemicState, MeasurementSequence, OnticState, TargetPrediction, ToyMeasurement, ToySystem,
};

/// Seed used when neither `--seed` nor the config file sets one.
pub const DEFAULT_SEED: u64 = 0x5EED_2017;
/// Generator behind every random choice, pinned in report provenance.
pub const RNG_NAME: &str = "ChaCha8Rng";
pub const RNG_CRATE: &str = "rand_chacha 0.3";
pub const SUBCOMMANDS: [&str; 6] = ["toy", "omega", "kolmo", "diag", "edis", "localize"];

const GLOBAL_KEYS: [&str; 3] = ["seed", "out", "format"];
const SAMPLING_TOLERANCE: f64 = 0.02;
const QUANTUM_TOLERANCE: f64 = 1e-12;
const QUANTUM_STATES: usize = 100;
const GENERATOR_CAP: u64 = 10_000;

#[derive(Parser, Debug, Clone)]
#[command(
    name = "horizon",
    version,
    about = "Desk-scale experiments on halting probability, program-size complexity, diagonal arguments and the toy bit"
)]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Directory that receives the report files.
    #[arg(long, global = true, default_value = "reports")]
    pub out: PathBuf,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Flat `key = value` config file; flags on the command line take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Toy-bit statistics: exact and sampled outcome laws, complementarity, classicality.
    Toy(ToyArgs),
    /// Lower bound on the halting probability and halting decisions from it.
    Omega(OmegaArgs),
    /// Program-size complexity: single targets, censuses, compressible prefixes.
    Kolmo(KolmoArgs),
    /// Diagonal constructions over program outcome tables.
    Diag(DiagArgs),
    /// Rule-plus-oracle sequence and its decomposition.
    Edis(EdisArgs),
    /// Bisection localization and the complexity of the resulting strings.
    Localize(LocalizeArgs),
    /// Runs every subcommand with its defaults (config keys still apply).
    Suite,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Toy(_) => "toy",
            Command::Omega(_) => "omega",
            Command::Kolmo(_) => "kolmo",
            Command::Diag(_) => "diag",
            Command::Edis(_) => "edis",
            Command::Localize(_) => "localize",
            Command::Suite => "suite",
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ToyArgs {
    /// Seeded trials for the sampled estimate; 0 reports exact values only.
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Comma-separated measurements, e.g. `mz,mx,mz'`.
    #[arg(long, default_value = "mz,mx,mz")]
    pub sequence: String,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OmegaArgs {
    /// Longest program length, in bits.
    #[arg(long, default_value_t = 12)]
    pub max_bits: usize,
    /// Steps each program may run.
    #[arg(long, default_value_t = 1000)]
    pub step_cap: u64,
    /// Also emit the convergence grid over lengths and caps.
    #[arg(long, action = ArgAction::SetTrue, default_value_t = false)]
    pub series: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct KolmoArgs {
    /// Bitstring to search for; unset by default, which skips the single-target record.
    #[arg(long, default_missing_value = "", num_args = 0..=1)]
    pub target: Option<String>,
    /// Longest candidate program, in bits.
    #[arg(long, default_value_t = 39)]
    pub max_bits: usize,
    /// Steps each candidate may run.
    #[arg(long, default_value_t = 1000)]
    pub step_cap: u64,
    /// Length of the strings in the census.
    #[arg(long, default_value_t = 8)]
    pub census_n: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DiagArgs {
    /// Table size: programs by input states.
    #[arg(long, default_value_t = 8)]
    pub rows: usize,
    /// Map applied to the diagonal: not, id or succ.
    #[arg(long, default_value = "not")]
    pub alpha: String,
    /// Steps each program may run per state.
    #[arg(long, default_value_t = 1000)]
    pub step_cap: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EdisArgs {
    /// Evaluate the sequence on 1..=count.
    #[arg(long, default_value_t = 300)]
    pub count: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct LocalizeArgs {
    /// Bisection depth.
    #[arg(long, default_value_t = 10)]
    pub bits: usize,
    /// Longest program tried when measuring complexity, in bits.
    #[arg(long, default_value_t = 36)]
    pub max_bits: usize,
    /// Steps each candidate may run.
    #[arg(long, default_value_t = 1000)]
    pub step_cap: u64,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Usage(#[from] clap::Error),
    #[error("config line {line}, field {field}: {message}")]
    Config { line: usize, field: String, message: String },
    #[error("parameter {field}: {message}")]
    Parameter { field: String, message: String },
    #[error("{0}")]
    Compute(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config { .. } => "config",
            CliError::Parameter { .. } => "parameter_range",
            CliError::Compute(_) => "compute",
            CliError::Io(_) => "io",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } | CliError::Parameter { .. } => 2,
            CliError::Compute(_) | CliError::Io(_) => 1,
        }
    }

    /// `{"error": kind, "message": ...}` on one line.
    pub fn to_json(&self) -> String {
        json!({"error": self.kind(), "message": self.to_string().trim_end()}).to_string()
    }
}

fn compute<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Compute(e.to_string())
}

fn param(field: &str, message: impl Into<String>) -> CliError {
    CliError::Parameter {
        field: field.to_string(),
        message: message.into(),
    }
}

fn in_range<T: PartialOrd + std::fmt::Display>(field: &str, v: T, lo: T, hi: T) -> Result<(), CliError> {
    if v < lo || v > hi {
        return Err(param(field, format!("{v} is outside {lo}..={hi}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    /// SHA-256 of the canonical JSON of `inputs`.
    pub config_hash: String,
    pub rng: &'static str,
    pub rng_crate: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    /// File suffix; empty for the main table.
    pub name: String,
    pub header: String,
    pub rows: Vec<String>,
}

impl Table {
    fn new(name: &str, header: &str, rows: Vec<String>) -> Self {
        Self {
            name: name.to_string(),
            header: header.to_string(),
            rows,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub kind: String,
    pub inputs: Value,
    pub provenance: Provenance,
    pub body: Value,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

impl Report {
    /// File names and contents for `format`.
    pub fn render(&self, format: Format) -> Vec<(String, String)> {
        match format {
            Format::Json => {
                let text = serde_json::to_string_pretty(self).expect("report serializes");
                vec![(format!("{}.json", self.kind), text + "\n")]
            }
            Format::Csv => {
                let mut files: Vec<(String, String)> = self
                    .tables
                    .iter()
                    .map(|t| {
                        let name = if t.name.is_empty() {
                            format!("{}.csv", self.kind)
                        } else {
                            format!("{}_{}.csv", self.kind, t.name)
                        };
                        let mut text = t.header.clone();
                        text.push('\n');
                        for r in &t.rows {
                            text.push_str(r);
                            text.push('\n');
                        }
                        (name, text)
                    })
                    .collect();
                let p = &self.provenance;
                let seed = self.inputs.get("seed").cloned().unwrap_or(Value::Null);
                files.push((
                    format!("{}_provenance.csv", self.kind),
                    format!(
                        "key,value\nkind,{}\ntool,{}\nversion,{}\nconfig_hash,{}\nrng,{}\nrng_crate,{}\nseed,{}\n",
                        self.kind, p.tool, p.version, p.config_hash, p.rng, p.rng_crate, seed
                    ),
                ));
                files
            }
        }
    }
}

/// Parses `argv`, validates every job, runs them and writes the reports.
/// Returns the written paths.
pub fn run<I, T>(argv: I) -> Result<Vec<PathBuf>, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let jobs = resolve(argv)?;
    let mut written = Vec::new();
    for (cli, report) in jobs.iter().zip(build_reports_for(&jobs)?) {
        fs::create_dir_all(&cli.out)?;
        for (name, text) in report.render(cli.format) {
            let path = cli.out.join(name);
            fs::write(&path, text)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Like [`run`] without touching the file system.
pub fn build_reports<I, T>(argv: I) -> Result<Vec<Report>, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    build_reports_for(&resolve(argv)?)
}

fn build_reports_for(jobs: &[Cli]) -> Result<Vec<Report>, CliError> {
    for cli in jobs {
        validate(&cli.command)?;
    }
    jobs.iter().map(execute).collect()
}

/// One fully resolved invocation per job: `suite` expands to all
/// subcommands, and config values fill whatever the command line left
/// unset.
pub fn resolve<I, T>(argv: I) -> Result<Vec<Cli>, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let matches = Cli::command().try_get_matches_from(&argv)?;
    let (sub, sub_matches) = matches.subcommand().expect("a subcommand is required");
    let entries = match matches.get_one::<PathBuf>("config") {
        Some(path) => parse_config(path)?,
        None => Vec::new(),
    };

    let pos = subcommand_position(&argv, sub);
    let (pre, post) = (&argv[1..pos], &argv[pos + 1..]);
    let targets: Vec<&str> = if sub == "suite" { SUBCOMMANDS.to_vec() } else { vec![sub] };

    let on_command_line = |m: &ArgMatches, id: &str| {
        m.try_get_raw(id).ok().flatten().is_some() && m.value_source(id) == Some(ValueSource::CommandLine)
    };

    let mut jobs = Vec::with_capacity(targets.len());
    for target in targets {
        let mut args: Vec<OsString> = vec![argv[0].clone()];
        for e in entries.iter().filter(|e| e.section.is_none()) {
            let id = e.param.replace('-', "_");
            if !on_command_line(&matches, &id) && !on_command_line(sub_matches, &id) {
                args.extend(e.as_args());
            }
        }
        args.extend(pre.iter().cloned());
        args.push(target.into());
        for e in entries.iter().filter(|e| e.section.as_deref() == Some(target)) {
            let id = e.param.replace('-', "_");
            if sub == "suite" || !on_command_line(sub_matches, &id) {
                args.extend(e.as_args());
            }
        }
        args.extend(post.iter().cloned());
        let m = Cli::command().try_get_matches_from(args)?;
        jobs.push(Cli::from_arg_matches(&m)?);
    }
    Ok(jobs)
}

fn subcommand_position(argv: &[OsString], sub: &str) -> usize {
    let mut i = 1;
    while i < argv.len() {
        let t = argv[i].to_string_lossy();
        if t == sub {
            return i;
        }
        let takes_value = ["--seed", "--out", "--format", "--config"].contains(&t.as_ref());
        i += if takes_value { 2 } else { 1 };
    }
    unreachable!("clap found the subcommand in argv")
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct ConfigEntry {
    section: Option<String>,
    /// Long flag name, kebab case.
    param: String,
    value: String,
    is_flag: bool,
}

impl ConfigEntry {
    fn as_args(&self) -> Vec<OsString> {
        if self.is_flag {
            if self.value == "true" {
                vec![format!("--{}", self.param).into()]
            } else {
                Vec::new()
            }
        } else {
            vec![format!("--{}={}", self.param, self.value).into()]
        }
    }
}

fn parse_config(path: &Path) -> Result<Vec<ConfigEntry>, CliError> {
    let text = fs::read_to_string(path)?;
    parse_config_text(&text)
}

fn parse_config_text(text: &str) -> Result<Vec<ConfigEntry>, CliError> {
    let cmd = Cli::command();
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |field: &str, message: String| CliError::Config {
            line,
            field: field.to_string(),
            message,
        };
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(content, "expected `key = value`".into()))?;
        let key = key.trim();
        let mut value = value.trim();
        if value.len() >= 2 && value.starts_with('"') && value.ends_with('"') {
            value = &value[1..value.len() - 1];
        }
        let (section, param) = match key.split_once('.') {
            Some((s, p)) => (Some(s.trim()), p.trim().replace('_', "-")),
            None => (None, key.replace('_', "-")),
        };
        let owner = match section {
            None if GLOBAL_KEYS.contains(&param.as_str()) => &cmd,
            None => return Err(err(key, "unknown global key; subcommand keys look like `omega.max-bits`".into())),
            Some(s) if SUBCOMMANDS.contains(&s) => cmd.find_subcommand(s).expect("listed subcommand exists"),
            Some(s) => return Err(err(key, format!("unknown subcommand {s:?}"))),
        };
        let arg = owner
            .get_arguments()
            .find(|a| a.get_long() == Some(param.as_str()))
            .ok_or_else(|| err(key, "unknown parameter".into()))?;
        let is_flag = matches!(arg.get_action(), ArgAction::SetTrue);
        if is_flag {
            if value != "true" && value != "false" {
                return Err(err(key, format!("expected true or false, got {value:?}")));
            }
        } else {
            // Let clap's own parser judge the value in a throwaway invocation.
            let flag = format!("--{param}={value}");
            let probe: Vec<&str> = match section {
                Some(s) => vec!["horizon", s, &flag],
                None => vec!["horizon", &flag, "edis"],
            };
            Cli::command().try_get_matches_from(probe).map_err(|e| {
                let msg = e.to_string();
                err(key, msg.lines().next().unwrap_or("invalid value").trim_start_matches("error: ").to_string())
            })?;
        }
        entries.push(ConfigEntry {
            section: section.map(str::to_string),
            param,
            value: value.to_string(),
            is_flag,
        });
    }
    Ok(entries)
}

/// Range checks, run for every job before any computation starts.
pub fn validate(cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::Toy(a) => {
            in_range("trials", a.trials, 0, 10_000_000)?;
            a.sequence
                .parse::<MeasurementSequence>()
                .map_err(|e| param("sequence", e.to_string()))?;
        }
        Command::Omega(a) => {
            in_range("max-bits", a.max_bits, 3, 27)?;
            in_range("step-cap", a.step_cap, 1, 10_000_000)?;
        }
        Command::Kolmo(a) => {
            in_range("max-bits", a.max_bits, 3, 45)?;
            in_range("step-cap", a.step_cap, 1, 1_000_000)?;
            in_range("census-n", a.census_n, 0, MAX_CENSUS_N)?;
            if let Some(t) = &a.target {
                let bits: BitString = t.parse().map_err(|e| param("target", format!("{e}")))?;
                in_range("target length", bits.len(), 0, 4096)?;
            }
        }
        Command::Diag(a) => {
            in_range("rows", a.rows, 1, 64)?;
            in_range("step-cap", a.step_cap, 1, 1_000_000)?;
            a.alpha.parse::<AlphabetMap>().map_err(|e| param("alpha", e.to_string()))?;
        }
        Command::Edis(a) => in_range("count", a.count, 1, 1_000_000)?,
        Command::Localize(a) => {
            in_range("bits", a.bits, 1, 127)?;
            in_range("max-bits", a.max_bits, 3, 45)?;
            in_range("step-cap", a.step_cap, 1, 1_000_000)?;
        }
        Command::Suite => unreachable!("suite is expanded during resolution"),
    }
    Ok(())
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn execute(cli: &Cli) -> Result<Report, CliError> {
    let params = match &cli.command {
        Command::Toy(a) => serde_json::to_value(a),
        Command::Omega(a) => serde_json::to_value(a),
        Command::Kolmo(a) => serde_json::to_value(a),
        Command::Diag(a) => serde_json::to_value(a),
        Command::Edis(a) => serde_json::to_value(a),
        Command::Localize(a) => serde_json::to_value(a),
        Command::Suite => unreachable!("suite is expanded during resolution"),
    }
    .expect("parameters serialize");
    let inputs = json!({"seed": cli.seed, "format": cli.format, "params": params});
    let (body, tables) = match &cli.command {
        Command::Toy(a) => cmd_toy(a, cli.seed)?,
        Command::Omega(a) => cmd_omega(a)?,
        Command::Kolmo(a) => cmd_kolmo(a)?,
        Command::Diag(a) => cmd_diag(a, cli.seed)?,
        Command::Edis(a) => cmd_edis(a, cli.seed)?,
        Command::Localize(a) => cmd_localize(a, cli.seed)?,
        Command::Suite => unreachable!(),
    };
    let config_hash = sha256_hex(inputs.to_string().as_bytes());
    Ok(Report {
        kind: cli.command.name().to_string(),
        inputs,
        provenance: Provenance {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            config_hash,
            rng: RNG_NAME,
            rng_crate: RNG_CRATE,
        },
        body,
        tables,
    })
}

type Output = (Value, Vec<Table>);

fn cmd_toy(a: &ToyArgs, seed: u64) -> Result<Output, CliError> {
    let seq: MeasurementSequence = a.sequence.parse().map_err(compute)?;
    let exact = toybit::run_sequence_exact(&seq, &EpistemicState::ignorance(), Disturbance::Resample);
    let law = exact.outcomes();

    let mut counts = std::collections::BTreeMap::new();
    if a.trials > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..a.trials {
            let start = ToySystem::unknown(OnticState::ALL[rng.gen_range(0..4)]);
            let run = toybit::run_sequence_sampled(&seq, &start, Disturbance::Resample, &mut rng);
            *counts.entry(run.outcomes).or_insert(0u64) += 1;
        }
    }
    let mut max_dev: f64 = 0.0;
    let mut dist_rows = Vec::new();
    let mut dist_json = Vec::new();
    for (bits, p) in &law {
        let count = counts.get(bits).copied().unwrap_or(0);
        let freq = if a.trials > 0 { count as f64 / a.trials as f64 } else { 0.0 };
        let p_f = p.to_f64().expect("probabilities are finite");
        if a.trials > 0 {
            max_dev = max_dev.max((freq - p_f).abs());
        }
        dist_rows.push(format!("{bits},{},{count},{freq:.6}", toybit::format_ratio(p)));
        dist_json.push(json!({"outcomes": bits, "exact": toybit::format_ratio(p), "count": count}));
    }

    let items = seq.items();
    let mut repeats = Vec::new();
    for i in 0..items.len() {
        for j in i + 1..items.len() {
            if items[i] == items[j] {
                repeats.push(json!({"first": i, "second": j, "measurement": items[i],
                    "p_agree": toybit::format_ratio(&exact.agreement(i, j))}));
            }
        }
    }

    let mut comp_rows = Vec::new();
    for a_axis in Axis::ALL {
        for b_axis in Axis::ALL {
            if a_axis == b_axis {
                continue;
            }
            let (ma, mb) = (ToyMeasurement::new(a_axis, false), ToyMeasurement::new(b_axis, false));
            let s = MeasurementSequence::new(vec![ma, mb, ma]).expect("nonempty");
            let d = toybit::run_sequence_exact(&s, &EpistemicState::ignorance(), Disturbance::Resample);
            comp_rows.push(format!("{s},{}", toybit::format_ratio(&d.agreement(0, 2))));
        }
    }

    let class_rows = classicality_rows();
    let body = json!({
        "sequence": seq.to_string(),
        "exact": dist_json,
        "repeat_agreement": repeats,
        "trials": a.trials,
        "max_abs_deviation": max_dev,
        "tolerance": SAMPLING_TOLERANCE,
        "within_tolerance": a.trials == 0 || max_dev <= SAMPLING_TOLERANCE,
        "complementarity": comp_rows,
        "classicality": class_rows,
    });
    let tables = vec![
        Table::new("distribution", "outcomes,exact,count,frequency", dist_rows),
        Table::new("complementarity", "sequence,p_agree_first_third", comp_rows),
        Table::new("classicality", "known,disturbance,target,prediction,epistemic,ontic", class_rows),
    ];
    Ok((body, tables))
}

fn classicality_rows() -> Vec<String> {
    let axes = [ToyMeasurement::MX, ToyMeasurement::MY, ToyMeasurement::MZ];
    let mut knowns: Vec<Vec<(ToyMeasurement, u8)>> = Vec::new();
    for m in axes {
        for b in 0..2 {
            knowns.push(vec![(m, b)]);
        }
    }
    for (i, &m1) in axes.iter().enumerate() {
        for &m2 in &axes[i + 1..] {
            for b1 in 0..2 {
                for b2 in 0..2 {
                    knowns.push(vec![(m1, b1), (m2, b2)]);
                }
            }
        }
    }
    let mut rows = Vec::new();
    for known in &knowns {
        let label: Vec<String> = known.iter().map(|(m, b)| format!("{m}={b}")).collect();
        for (mode, d) in [("resample", Disturbance::Resample), ("none", Disturbance::None)] {
            for target in axes {
                let row = match toybit::classicality_experiment(known, target, d) {
                    Ok(p) => {
                        let pred = match &p.prediction {
                            TargetPrediction::Determined { bit } => format!("determined({bit})"),
                            TargetPrediction::Undetermined { p_one } => {
                                format!("undetermined({})", toybit::format_ratio(p_one))
                            }
                        };
                        let ontic = p.ontic.map_or("-".to_string(), |t| t.to_string());
                        format!("{},{mode},{target},{pred},\"{}\",{ontic}", label.join(";"), p.epistemic)
                    }
                    Err(_) => format!("{},{mode},{target},inconsistent,-,-", label.join(";")),
                };
                rows.push(row);
            }
        }
    }
    rows
}

fn cmd_omega(a: &OmegaArgs) -> Result<Output, CliError> {
    let est = omega::estimate_omega(a.max_bits, a.step_cap).map_err(compute)?;
    let census_rows = est
        .halting_census
        .iter()
        .map(|e| format!("{},{},{}", e.program, e.steps, e.output))
        .collect();

    let mut verdicts = Vec::new();
    let mut verdict_rows = Vec::new();
    for t in ["111", "000111", "101110111", "000101110111"] {
        let p: Program = t.parse().expect("fixed programs are valid");
        if p.length_bits() > a.max_bits {
            continue;
        }
        let v = omega::decide_by_prefix(&p, &est).map_err(compute)?;
        let text = match v.verdict {
            Verdict::HaltsWithin(s) => format!("halts_within({s})"),
            Verdict::NotDecidedWithinBudget => "not_halting_within_budget".to_string(),
        };
        verdict_rows.push(format!("{t},{text},{}", v.decided_at));
        verdicts.push(json!({"program": t, "verdict": text, "decided_at": v.decided_at}));
    }

    let mut tables = vec![
        Table::new("", omega::CSV_HEADER, vec![est.csv_row()]),
        Table::new("census", "program,steps,output", census_rows),
        Table::new("verdicts", "program,verdict,decided_at", verdict_rows),
    ];
    let mut series_json = Value::Null;
    if a.series {
        let mut bits: Vec<usize> = (3..=a.max_bits).step_by(3).collect();
        if bits.last() != Some(&a.max_bits) {
            bits.push(a.max_bits);
        }
        let mut caps: Vec<u64> = [1, 10, 100, 1000, a.step_cap].into_iter().filter(|&c| c <= a.step_cap).collect();
        caps.sort_unstable();
        caps.dedup();
        let grid = omega::convergence_series(&bits, &caps).map_err(compute)?;
        let rows: Vec<String> = grid.iter().map(|e| e.csv_row()).collect();
        series_json = json!(rows);
        tables.push(Table::new("series", omega::CSV_HEADER, rows));
    }
    let body = json!({
        "lower_bound": est.lower_bound.to_string(),
        "numerator": est.lower_bound.numerator().to_string(),
        "log2_denominator": est.lower_bound.log2_denominator(),
        "max_bits": est.max_bits,
        "step_cap": est.step_cap,
        "census_size": est.census_size(),
        "census": est.halting_census,
        "verdicts": verdicts,
        "series": series_json,
    });
    Ok((body, tables))
}

fn bound_text(b: KBound) -> String {
    b.to_string()
}

fn cmd_kolmo(a: &KolmoArgs) -> Result<Output, CliError> {
    let target: Option<BitString> = a.target.as_deref().map(|t| t.parse().map_err(compute)).transpose()?;
    let target_len = target.as_ref().map_or(0, BitString::len);
    let sweep_len = if target_len <= MAX_CENSUS_N {
        a.census_n.max(target_len)
    } else {
        a.census_n
    };
    let table = ProducerTable::sweep(sweep_len, a.max_bits, a.step_cap).map_err(compute)?;

    let record = match &target {
        Some(t) => Some(match table.record(t) {
            Some(r) => r,
            None => complexity::k_complexity(t, a.max_bits, a.step_cap).map_err(compute)?,
        }),
        None => None,
    };
    let census = table.census(a.census_n);

    let generator: Program = ZERO_GENERATOR.parse().expect("generator is valid");
    let mut lengths: Vec<usize> = (0..=a.census_n).collect();
    lengths.push(127);
    let growth = complexity::compressibility_growth(&generator, &lengths, a.max_bits, GENERATOR_CAP.max(a.step_cap))
        .map_err(compute)?;

    let zeros = BitString::zeros(a.census_n);
    let zeros_bound = census.bound_of(&zeros);
    let median = census.median();

    let mut tables = Vec::new();
    if let Some(r) = &record {
        let (k, witness) = match &r.status {
            KStatus::Exact { k_bits, witness } => (k_bits.to_string(), witness.to_string()),
            KStatus::LowerBoundOnly { k_exceeds } => (format!(">{k_exceeds}"), String::new()),
        };
        tables.push(Table::new(
            "",
            "target,K,witness,search_max_bits,step_cap",
            vec![format!("{},{k},{witness},{},{}", r.target, r.search_max_bits, r.step_cap)],
        ));
    }
    tables.push(Table::new("census", "n,K,count", census.csv_rows()));
    tables.push(Table::new("growth", "n,K,status", growth.csv_rows()));

    let body = json!({
        "record": record,
        "census": census,
        "census_summary": {
            "total": census.total(),
            "median": bound_text(median),
            "min_resolved": census.min_resolved(),
            "counting_bound_holds": census.counting_bound_holds(),
        },
        "growth": growth,
        "contrast": {
            "n": a.census_n,
            "zeros_k": bound_text(zeros_bound),
            "median_k": bound_text(median),
            "zeros_strictly_smaller": zeros_bound < median,
        },
    });
    Ok((body, tables))
}

fn cmd_diag(a: &DiagArgs, seed: u64) -> Result<Output, CliError> {
    let alpha: AlphabetMap = a.alpha.parse().map_err(compute)?;
    let programs: Vec<Program> = hvm::enumerate_valid(15).collect();
    let states: Vec<u8> = (0..a.rows as u8).collect();
    let built = diagonal::build_outcome_table(&programs, &states, a.step_cap).map_err(compute)?;
    if built.table.n_rows() < a.rows {
        return Err(CliError::Compute(format!(
            "only {} programs up to 15 bits give output on every state",
            built.table.n_rows()
        )));
    }
    let table = built.table.truncate_square();
    let report = diagonal::diagonalize(&table, &alpha).map_err(compute)?;
    let valid = diagonal::witnesses_hold(&table, &report);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beta = diagonal::random_permutation(a.rows, &mut rng);
    let beta_report = if diagonal::fixed_point_scan(&alpha).is_empty() {
        Some(diagonal::diagonalize_beta(&table, &beta, &alpha).map_err(compute)?)
    } else {
        None
    };
    let seq = diagonal::measurement_sequence_diagonal(&table).map_err(compute)?;

    let three = OutcomeTable::random(a.rows, 3, &mut rng).map_err(compute)?;
    let succ3 = AlphabetMap::cyclic_successor(3).map_err(compute)?;
    let three_report = diagonal::diagonalize(&three, &succ3).map_err(compute)?;

    let quantum = diagonal::quantum_negation_check(QUANTUM_TOLERANCE, seed, QUANTUM_STATES).map_err(compute)?;

    let fixed_points = json!({
        "not": diagonal::fixed_point_scan(&AlphabetMap::negation()),
        "id": diagonal::fixed_point_scan(&AlphabetMap::identity(2).map_err(compute)?),
        "succ3": diagonal::fixed_point_scan(&succ3),
    });
    let witness_rows = |r: &diagonal::DiagonalReport| {
        r.witnesses
            .iter()
            .map(|w| format!("{},{},{},{}", w.row, w.column, w.expected, w.got))
            .collect::<Vec<_>>()
    };
    let mut tables = vec![
        Table::new("table", "", Vec::new()),
        Table::new("witnesses", "row,column,expected,got", witness_rows(&report)),
    ];
    let csv = table.to_csv();
    let mut lines = csv.lines();
    tables[0].header = lines.next().unwrap_or("").to_string();
    tables[0].rows = lines.map(str::to_string).collect();
    if let Some(b) = &beta_report {
        tables.push(Table::new("beta_witnesses", "row,column,expected,got", witness_rows(b)));
    }
    tables.push(Table::new(
        "excluded",
        "program,state,reason",
        built
            .excluded
            .iter()
            .map(|e| format!("{},{},{:?}", e.program, e.state, e.reason))
            .collect(),
    ));

    let body = json!({
        "table": table,
        "excluded_count": built.excluded.len(),
        "alpha": alpha.name(),
        "diagonal": report,
        "witnesses_valid": valid,
        "every_row_refuted": report.is_complete(),
        "beta": beta,
        "beta_diagonal": beta_report.as_ref(),
        "beta_witnesses_valid": beta_report.as_ref().map(|b| diagonal::witnesses_hold(&table, b)),
        "sequence_diagonal": seq,
        "fixed_points": fixed_points,
        "three_outcome": {
            "table": three,
            "diagonal": three_report,
            "every_row_refuted": three_report.is_complete(),
        },
        "quantum": quantum,
        "quantum_passed": quantum.passed(),
    });
    Ok((body, tables))
}

fn cmd_edis(a: &EdisArgs, seed: u64) -> Result<Output, CliError> {
    let rho = ListedOracle::seeded(seed, a.count as usize);
    let inputs: Vec<u64> = (1..=a.count).collect();
    let trace = edis::edis_trace(&inputs, &rho).map_err(compute)?;
    let back = edis::edis_decompose(&trace.observations()).map_err(compute)?;
    let listed = ListedOracle::listed();
    let examples: Vec<Value> = [0u64, 3, 4, 6]
        .iter()
        .map(|&n| json!({"n": n, "value": edis::edis_eval(n, &listed).ok()}))
        .collect();
    let rows = trace
        .observations()
        .iter()
        .enumerate()
        .map(|(i, (n, v))| {
            let kind = if trace.random_positions.contains(&i) { "random" } else { "algorithmic" };
            format!("{n},{v},{kind}")
        })
        .collect();
    let body = json!({
        "count": a.count,
        "oracle_bits_consumed": trace.oracle_bits_consumed,
        "algorithmic_count": trace.algorithmic_positions.len(),
        "random_count": trace.random_positions.len(),
        "round_trip_exact": back == trace,
        "listed_oracle": edis::LISTED_RHO,
        "listed_examples": examples,
    });
    Ok((body, vec![Table::new("", "n,value,kind", rows)]))
}

fn cmd_localize(a: &LocalizeArgs, seed: u64) -> Result<Output, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random_bits: BitString = (0..a.bits).map(|_| rng.gen::<bool>() as u8).collect();
    let generator: Program = ZERO_GENERATOR.parse().expect("generator is valid");
    let cfg = MachineConfig::with_cap(GENERATOR_CAP).expect("positive cap");
    let zeros = hvm::run(&generator, &cfg).output.prefix(a.bits);

    let mut rows = Vec::new();
    let mut sources = Vec::new();
    let mut bounds = Vec::new();
    for (name, stream) in [("seeded_random", random_bits), ("zero_generator", zeros)] {
        let by_stream = sigma::localize(&mut BitStreamPoint(stream.clone()), a.bits).map_err(compute)?;
        let x = SigmaEncoding::from_bits(stream).interval.low;
        let by_point = sigma::localize(&mut HiddenPoint(x.clone()), a.bits).map_err(compute)?;
        let direct = sigma::sigma_encode(&x, a.bits).map_err(compute)?;
        let k = complexity::k_complexity(&by_stream.bits, a.max_bits, a.step_cap).map_err(compute)?;
        let status = match k.status {
            KStatus::Exact { .. } => "exact",
            KStatus::LowerBoundOnly { .. } => "lower_bound",
        };
        rows.push(format!(
            "{name},{},{},{},{},{status}",
            by_stream.bits,
            by_stream.interval.low,
            by_stream.interval.log2_inv_width,
            k.bound()
        ));
        bounds.push(k.bound());
        sources.push(json!({
            "source": name,
            "point": x.to_string(),
            "sigma": by_stream.bits,
            "interval": by_stream.interval.to_string(),
            "paths_agree": by_stream == by_point && by_point == direct,
            "k": k,
        }));
    }
    let body = json!({
        "bits": a.bits,
        "sources": sources,
        "zeros_more_compressible": bounds[1] < bounds[0],
    });
    Ok((
        body,
        vec![Table::new("", "source,sigma,interval_low,log2_inv_width,K,status", rows)],
    ))
}
