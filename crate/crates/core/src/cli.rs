//! Command-line front end.
//!
//! Every command accepts the same flags; a flat `key=value` config file
//! given with `--config` supplies values for flags that are not on the
//! command line. Keys are the long flag names without the leading dashes.
//!
//! Exit statuses: 0 success, 1 computation error, 2 usage error, 3 I/O error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::cascade::cascade_grid;
use crate::dimer::{classify, energy_levels, is_separable_point, DimerParams};
use crate::entanglement::{entropy_sweep, spectrum_of_params, EntropySource, SweepAxis};
use crate::error::{IoError, ModelError};
use crate::grid::{Axis, FrequencyGrid, Normalization};
use crate::io::{write_grid, OutputFormat, Table};
use crate::scattering::{scatter_output_grid, ScatterInput, ScatterQuantity};

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Tolerance used by `levels` when reporting whether `2J = U`.
const LEVELS_SEPARABLE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Levels,
    Cascade,
    Scatter,
    Entropy,
    Sweep,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Levels => "levels",
            Command::Cascade => "cascade",
            Command::Scatter => "scatter",
            Command::Entropy => "entropy",
            Command::Sweep => "sweep",
        }
    }
}

/// `min:max:count`, shared by frequency windows and sweep axes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RangeSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl FromStr for RangeSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, count] = parts.as_slice() else {
            return Err(format!("expected min:max:count, got '{s}'"));
        };
        let min: f64 = min
            .parse()
            .map_err(|_| format!("bad range minimum '{min}'"))?;
        let max: f64 = max
            .parse()
            .map_err(|_| format!("bad range maximum '{max}'"))?;
        let count: usize = count
            .parse()
            .map_err(|_| format!("bad range count '{count}'"))?;
        Ok(Self { min, max, count })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeArg {
    Resonant,
    OffResonant,
    Free,
}

impl FromStr for ModeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "resonant" => Ok(ModeArg::Resonant),
            "off_resonant" | "off-resonant" => Ok(ModeArg::OffResonant),
            "free" => Ok(ModeArg::Free),
            other => Err(format!(
                "unknown mode '{other}' (expected resonant, off_resonant or free)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceArg {
    Cascade,
    Scatter,
}

impl FromStr for SourceArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cascade" => Ok(SourceArg::Cascade),
            "scatter" => Ok(SourceArg::Scatter),
            other => Err(format!(
                "unknown source '{other}' (expected cascade or scatter)"
            )),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "bds",
    version,
    about = "Biphoton emission and scattering from an excitonic dimer"
)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Subcommand, Debug)]
enum CliCommand {
    /// Print the dimer energy levels
    Levels(Flags),
    /// Cascade emission intensity over a frequency window
    Cascade(Flags),
    /// Two-photon scattering map, input ω₁ by output ω₁'
    Scatter(Flags),
    /// Schmidt entropy for one parameter set
    Entropy(Flags),
    /// Schmidt entropy over a (J, U) rectangle
    Sweep(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// key=value file supplying defaults for any flag below
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    ex: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    j: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    u: Option<f64>,
    /// Linewidth; defaults to 0.6, or 0.1 for scatter
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    #[arg(long = "mu-0b", allow_hyphen_values = true)]
    mu_0b: Option<f64>,
    #[arg(long = "mu-bc", allow_hyphen_values = true)]
    mu_bc: Option<f64>,
    /// ω₁ window as min:max:count
    #[arg(long, allow_hyphen_values = true)]
    omega1: Option<RangeSpec>,
    /// ω₂ window as min:max:count
    #[arg(long, allow_hyphen_values = true)]
    omega2: Option<RangeSpec>,
    /// resonant, off_resonant or free
    #[arg(long)]
    mode: Option<ModeArg>,
    /// Fixed input ω₂ for --mode free
    #[arg(long = "omega2-in", allow_hyphen_values = true)]
    omega2_in: Option<f64>,
    /// intensity (|S|²) or modulus (|S|)
    #[arg(long)]
    quantity: Option<ScatterQuantity>,
    /// cascade or scatter
    #[arg(long)]
    source: Option<SourceArg>,
    /// raw or unit_sum
    #[arg(long)]
    normalization: Option<Normalization>,
    /// J axis as min:max:count
    #[arg(long = "j-range", allow_hyphen_values = true)]
    j_range: Option<RangeSpec>,
    /// U axis as min:max:count
    #[arg(long = "u-range", allow_hyphen_values = true)]
    u_range: Option<RangeSpec>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// csv, json or pgm; defaults to the output extension, then csv
    #[arg(long)]
    format: Option<OutputFormat>,
    /// Worker threads [env: BDS_WORKERS]
    #[arg(long)]
    workers: Option<usize>,
}

const CONFIG_KEYS: &[&str] = &[
    "ex",
    "j",
    "u",
    "gamma",
    "mu-0b",
    "mu-bc",
    "omega1",
    "omega2",
    "mode",
    "omega2-in",
    "quantity",
    "source",
    "normalization",
    "j-range",
    "u-range",
    "output",
    "format",
    "workers",
];

/// Fully resolved settings for one invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub params: DimerParams,
    pub grid: FrequencyGrid,
    pub scatter_input: ScatterInput,
    pub quantity: ScatterQuantity,
    pub source: EntropySource,
    pub j_axis: SweepAxis,
    pub u_axis: SweepAxis,
    pub normalization: Normalization,
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
    pub workers: usize,
}

#[derive(Debug)]
pub enum CliError {
    /// Raised by the argument parser; also covers `--help` and `--version`.
    Clap(clap::Error),
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Clap(e) => e.exit_code(),
            CliError::Usage(_) => EXIT_USAGE,
        }
    }

    /// Prints the message to the appropriate stream.
    pub fn report(&self) {
        match self {
            CliError::Clap(e) => {
                let _ = e.print();
            }
            CliError::Usage(msg) => eprintln!("error: {msg}"),
        }
    }
}

/// Parses `key=value` lines, skipping blanks and `#` comments.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value", n + 1))?;
        let key = k.trim().replace('_', "-");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(format!("line {}: unknown key '{}'", n + 1, k.trim()));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

struct Merged {
    file: BTreeMap<String, String>,
    origin: String,
}

impl Merged {
    fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|e| {
                CliError::Usage(format!(
                    "{}: invalid value '{raw}' for '{key}': {e}",
                    self.origin
                ))
            }),
        }
    }
}

fn workers_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("BDS_WORKERS") {
        Err(_) => Ok(None),
        Ok(v) => v
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("invalid BDS_WORKERS value '{v}'"))),
    }
}

fn usage(e: ModelError, what: &str) -> CliError {
    CliError::Usage(format!("{what}: {e}"))
}

/// Parses the command line (program name first) into a [`RunConfig`].
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(CliError::Clap)?;
    let (command, flags) = match cli.command {
        CliCommand::Levels(f) => (Command::Levels, f),
        CliCommand::Cascade(f) => (Command::Cascade, f),
        CliCommand::Scatter(f) => (Command::Scatter, f),
        CliCommand::Entropy(f) => (Command::Entropy, f),
        CliCommand::Sweep(f) => (Command::Sweep, f),
    };
    let merged = match &flags.config {
        None => Merged {
            file: BTreeMap::new(),
            origin: String::new(),
        },
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("--config {}: {e}", path.display())))?;
            let file = parse_config_file(&text)
                .map_err(|e| CliError::Usage(format!("--config {}: {e}", path.display())))?;
            Merged {
                file,
                origin: format!("--config {}", path.display()),
            }
        }
    };
    resolve(command, flags, &merged)
}

fn resolve(command: Command, f: Flags, m: &Merged) -> Result<RunConfig, CliError> {
    let default_gamma = if command == Command::Scatter {
        0.1
    } else {
        0.6
    };
    let params = DimerParams {
        ex: m.pick(f.ex, "ex")?.unwrap_or(1.0),
        j: m.pick(f.j, "j")?.unwrap_or(0.0),
        u: m.pick(f.u, "u")?.unwrap_or(0.0),
        gamma: m.pick(f.gamma, "gamma")?.unwrap_or(default_gamma),
        mu_0b: m.pick(f.mu_0b, "mu-0b")?.unwrap_or(1.0),
        mu_bc: m.pick(f.mu_bc, "mu-bc")?.unwrap_or(1.0),
    };
    params.validate().map_err(|e| usage(e, "parameters"))?;

    let default_window = if command == Command::Sweep {
        RangeSpec {
            min: 0.0,
            max: 4.0,
            count: 161,
        }
    } else {
        RangeSpec {
            min: 0.0,
            max: 3.0,
            count: 201,
        }
    };
    let axis =
        |r: RangeSpec, flag: &str| Axis::new(r.min, r.max, r.count).map_err(|e| usage(e, flag));
    let w1 = m.pick(f.omega1, "omega1")?.unwrap_or(default_window);
    let w2 = m.pick(f.omega2, "omega2")?.unwrap_or(w1);
    let grid = FrequencyGrid {
        omega1: axis(w1, "--omega1")?,
        omega2: axis(w2, "--omega2")?,
    };

    let omega2_in = m.pick(f.omega2_in, "omega2-in")?;
    let scatter_input = match m.pick(f.mode, "mode")?.unwrap_or(ModeArg::Resonant) {
        ModeArg::Resonant => ScatterInput::Resonant,
        ModeArg::OffResonant => ScatterInput::OffResonant,
        ModeArg::Free => ScatterInput::Free {
            omega2_in: omega2_in
                .ok_or_else(|| CliError::Usage("--mode free requires --omega2-in".into()))?,
        },
    };
    let quantity = m.pick(f.quantity, "quantity")?.unwrap_or_default();
    let source = match m.pick(f.source, "source")?.unwrap_or(SourceArg::Cascade) {
        SourceArg::Cascade => EntropySource::Cascade,
        SourceArg::Scatter => EntropySource::Scatter {
            input: scatter_input,
        },
    };
    let sweep_axis = |r: RangeSpec, flag: &str| {
        SweepAxis::new(r.min, r.max, r.count).map_err(|e| usage(e, flag))
    };
    let full = RangeSpec {
        min: -1.0,
        max: 1.0,
        count: 81,
    };
    let j_axis = sweep_axis(m.pick(f.j_range, "j-range")?.unwrap_or(full), "--j-range")?;
    let u_axis = sweep_axis(m.pick(f.u_range, "u-range")?.unwrap_or(full), "--u-range")?;
    let normalization = m
        .pick(f.normalization, "normalization")?
        .unwrap_or_default();
    let output_path = m.pick(f.output, "output")?;
    let output_format = match m.pick(f.format, "format")? {
        Some(fmt) => fmt,
        None => output_path
            .as_deref()
            .and_then(OutputFormat::from_extension)
            .unwrap_or_default(),
    };
    let workers = match m.pick(f.workers, "workers")? {
        Some(w) => w,
        None => workers_from_env()?
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
    };
    if workers == 0 {
        return Err(CliError::Usage("--workers must be >= 1".into()));
    }
    Ok(RunConfig {
        command,
        params,
        grid,
        scatter_input,
        quantity,
        source,
        j_axis,
        u_axis,
        normalization,
        output_path,
        output_format,
        workers,
    })
}

enum RunError {
    Compute(ModelError),
    Io(IoError),
}

impl From<ModelError> for RunError {
    fn from(e: ModelError) -> Self {
        RunError::Compute(e)
    }
}

impl From<IoError> for RunError {
    fn from(e: IoError) -> Self {
        RunError::Io(e)
    }
}

fn describe(p: &DimerParams) -> String {
    format!("ex={} j={} u={} gamma={}", p.ex, p.j, p.u, p.gamma)
}

fn emit(table: &Table, cfg: &RunConfig) -> Result<String, RunError> {
    match &cfg.output_path {
        Some(path) => {
            write_grid(table, cfg.output_format, path)?;
            Ok(path.display().to_string())
        }
        None => Ok("-".into()),
    }
}

fn execute(cfg: &RunConfig) -> Result<String, RunError> {
    let p = &cfg.params;
    let (n1, n2) = cfg.grid.shape();
    match cfg.command {
        Command::Levels => {
            let l = energy_levels(p)?;
            Ok(format!(
                "levels {} e_a={} e_b={} e_d={} e_c={} omega_b={} omega_c={} regime={} separable={}",
                describe(p),
                l.e_a,
                l.e_b,
                l.e_d,
                l.e_c,
                l.omega_b,
                l.omega_c,
                classify(p),
                is_separable_point(p, LEVELS_SEPARABLE_TOL)
            ))
        }
        Command::Cascade => {
            let l = energy_levels(p)?;
            let g = cascade_grid(&l, p.dipoles(), &cfg.grid, cfg.normalization)?;
            let out = emit(&Table::from_intensity("cascade", &g, p), cfg)?;
            Ok(format!(
                "cascade {} grid={n1}x{n2} output={out}",
                describe(p)
            ))
        }
        Command::Scatter => {
            let l = energy_levels(p)?;
            let g =
                scatter_output_grid(&l, p.dipoles(), cfg.scatter_input, &cfg.grid, cfg.quantity)?;
            let out = emit(&Table::from_scatter(&g, p), cfg)?;
            Ok(format!(
                "scatter {} mode={} omega2_in={} grid={n1}x{n2} output={out}",
                describe(p),
                cfg.scatter_input.name(),
                g.omega2_in
            ))
        }
        Command::Entropy => {
            let s = spectrum_of_params(p, &cfg.grid, cfg.source)?;
            Ok(format!(
                "entropy {} source={} grid={n1}x{n2} entropy={} rank={}",
                describe(p),
                cfg.source.name(),
                s.entropy,
                s.effective_rank
            ))
        }
        Command::Sweep => {
            let sweep = entropy_sweep(cfg.j_axis, cfg.u_axis, &cfg.grid, p, cfg.source)?;
            let out = emit(&Table::from_sweep(&sweep), cfg)?;
            Ok(format!(
                "sweep ex={} gamma={} source={} points={}x{} failed={} grid={n1}x{n2} output={out}",
                p.ex,
                p.gamma,
                cfg.source.name(),
                cfg.j_axis.count,
                cfg.u_axis.count,
                sweep.failures()
            ))
        }
    }
}

/// Runs one command on a pool of `cfg.workers` threads and prints a
/// one-line summary. Returns the process exit status.
pub fn run(cfg: &RunConfig) -> i32 {
    let start = Instant::now();
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start {} workers: {e}", cfg.workers);
            return EXIT_COMPUTE;
        }
    };
    match pool.install(|| execute(cfg)) {
        Ok(summary) => {
            println!("{summary} wall={:.3}s", start.elapsed().as_secs_f64());
            EXIT_OK
        }
        Err(RunError::Compute(e)) => {
            eprintln!("error: {} failed: {e}", cfg.command.name());
            EXIT_COMPUTE
        }
        Err(RunError::Io(e)) => {
            eprintln!("error: {e}");
            EXIT_IO
        }
    }
}

/// Parses `argv` and runs it, returning the exit status.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match parse_config(argv) {
        Ok(cfg) => run(&cfg),
        Err(e) => {
            e.report();
            e.exit_code()
        }
    }
}
