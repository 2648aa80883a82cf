//! The `shelf` command line: argument parsing, subcommands and exit codes.
//!
//! Exit status 0 means success, 1 an invalid invocation (bad flags, bad
//! values, I/O trouble) and 2 a failed mathematical assertion.

pub mod cache;
pub mod output;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use shelf_core::guessing::{
    clay_counterexample, optimal_no_feedback, strategy_g, strategy_score, Backend, ScoreReport,
    Strategy, DEFAULT_SLACK, EXACT_AUTO_LIMIT,
};
use shelf_core::matrices::{basis_b, basis_b_inverse, flip_p, lower_l, position_matrix, t_matrix};
use shelf_core::numerics::{format_rational, rational_str, Rational};
use shelf_core::simulator::{
    estimate_position_matrix, simulate_guessing, ShuffleConfig, SimulationReport, Tally,
};
use shelf_core::spectral::{linf_norms_of, NormReport};
use shelf_core::verify::verify;
use shelf_core::RationalMatrix;

use cache::{load_or_compute, Cache};
use output::{emit, render_csv, render_json, write_atomic, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_ASSERTION: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "shelf",
    version,
    about = "Exact spectral analysis of the single-shelf shuffle"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Write output to this file (atomically) instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Cache directory for eigen systems [env: SHELF_CACHE_DIR].
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Do not read or write the cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emit M or one of its factors as a matrix of rationals.
    Matrix(MatrixArgs),
    /// Emit the full eigen system with a verification block.
    Spectrum(SpectrumArgs),
    /// Score a no-feedback guessing strategy after k shuffles.
    Guess(GuessArgs),
    /// Monte Carlo simulation of the m-shelf shuffle.
    Simulate(SimulateArgs),
    /// Run the exact invariant suite; exits 2 if any check fails.
    Verify(VerifyArgs),
    /// Show that card 19 is not the best guess at position 10 for n = 24.
    Counterexample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    /// The position matrix M.
    M,
    /// Lower triangular factor L.
    L,
    /// Reversal permutation P.
    P,
    /// Falling-factorial basis B.
    B,
    /// Inverse basis B^-1.
    BInv,
    /// M in the falling-factorial basis.
    T,
}

#[derive(Debug, Args)]
pub struct MatrixArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Which::M)]
    pub which: Which,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendChoice {
    Auto,
    Exact,
    Float,
}

#[derive(Debug, Args)]
pub struct GuessArgs {
    #[arg(long)]
    pub n: usize,
    /// Number of shuffles.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// optimal | G | constant:<card> | file:<path>
    #[arg(long, default_value = "optimal")]
    pub strategy: String,
    #[arg(long, value_enum, default_value_t = BackendChoice::Auto)]
    pub backend: BackendChoice,
    /// Force exact arithmetic regardless of n.
    #[arg(long)]
    pub exact: bool,
    /// Constant c in the c/sqrt(n) slack of the upper envelope.
    #[arg(long, default_value_t = DEFAULT_SLACK)]
    pub slack: f64,
    /// Also write the per-position table (j, g_j, M^k(g_j, j)) as CSV.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Matrix,
    Game,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: usize,
    /// Number of shelves.
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, default_value_t = 1)]
    pub rounds: usize,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::Matrix)]
    pub mode: Mode,
    /// Strategy for game mode, as in `guess`; `optimal` means optimal for `rounds` shuffles.
    #[arg(long, default_value = "optimal")]
    pub strategy: String,
    /// Worker threads (results do not depend on this).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub n: usize,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(shelf_core::Error),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<shelf_core::Error> for CliError {
    fn from(e: shelf_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult<T> = Result<T, CliError>;

/// What a subcommand produced: a JSON document, an optional CSV view, and
/// whether its assertions held.
struct Rendered {
    json: String,
    csv: Option<Table>,
    passed: bool,
}

impl Rendered {
    fn new<T: Serialize>(value: &T, csv: Option<Table>, passed: bool) -> CliResult<Self> {
        Ok(Self {
            json: render_json(value)?,
            csv,
            passed,
        })
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_ASSERTION,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn execute(cli: &Cli) -> CliResult<bool> {
    let cache = if cli.no_cache {
        None
    } else {
        Cache::locate(cli.cache_dir.as_deref())
    };
    let rendered = match &cli.command {
        Command::Matrix(args) => matrix_cmd(args)?,
        Command::Spectrum(args) => spectrum_cmd(args, cache.as_ref())?,
        Command::Guess(args) => guess_cmd(args)?,
        Command::Simulate(args) => simulate_cmd(args)?,
        Command::Verify(args) => verify_cmd(args, cache.as_ref())?,
        Command::Counterexample => counterexample_cmd()?,
    };
    let text = match cli.format {
        Format::Json => rendered.json,
        Format::Csv => {
            let table = rendered
                .csv
                .ok_or_else(|| CliError::Usage("this subcommand has no CSV form".into()))?;
            render_csv(&table)?
        }
    };
    emit(&text, cli.out.as_deref())?;
    Ok(rendered.passed)
}

fn matrix_table(m: &RationalMatrix) -> Table {
    let mut table =
        Table::new(std::iter::once("i".to_string()).chain((1..=m.cols()).map(|j| j.to_string())));
    for r in 0..m.rows() {
        let mut row = vec![(r + 1).to_string()];
        row.extend(m.row(r).iter().map(format_rational));
        table.push(row);
    }
    table
}

#[derive(Serialize)]
struct MatrixJson(#[serde(with = "rational_str::nested")] Vec<Vec<Rational>>);

fn matrix_cmd(args: &MatrixArgs) -> CliResult<Rendered> {
    let n = args.n;
    let m = match args.which {
        Which::M => position_matrix(n)?,
        Which::L => lower_l(n)?,
        Which::P => flip_p(n)?,
        Which::B => basis_b(n)?,
        Which::BInv => basis_b_inverse(n)?,
        Which::T => t_matrix(n)?,
    };
    Rendered::new(&MatrixJson(m.to_rows()), Some(matrix_table(&m)), true)
}

#[derive(Serialize)]
struct SpectrumJson<'a> {
    n: usize,
    #[serde(with = "rational_str::vec")]
    eigenvalues: Vec<Rational>,
    kernel_dimension: usize,
    modes: &'a [shelf_core::spectral::EigenMode],
    #[serde(with = "rational_str::nested")]
    kernel: &'a Vec<Vec<Rational>>,
    norms: Vec<NormReport>,
    verification: BTreeMap<&'static str, bool>,
    verified: bool,
}

fn spectrum_cmd(args: &SpectrumArgs, cache: Option<&Cache>) -> CliResult<Rendered> {
    let system = load_or_compute(cache, args.n)?;
    let checks = system.check()?;
    let norms = linf_norms_of(&system)?;
    let mut verification: BTreeMap<&'static str, bool> = checks.named().into_iter().collect();
    verification.insert("right_linf_bound", norms.iter().all(|r| r.right_ok));
    verification.insert("left_linf_bound", norms.iter().all(|r| r.left_ok));
    let verified = verification.values().all(|&ok| ok);

    let mut table = Table::new(["index", "eigenvalue", "vector", "coordinate", "value"]);
    for md in &system.modes {
        let lam = format_rational(&md.eigenvalue);
        for (name, v) in [
            ("right_m", &md.right_m),
            ("left_m", &md.left_m),
            ("right_t", &md.right_t),
            ("left_t", &md.left_t),
        ] {
            for (c, x) in v.iter().enumerate() {
                table.push(vec![
                    md.index.to_string(),
                    lam.clone(),
                    name.into(),
                    (c + 1).to_string(),
                    format_rational(x),
                ]);
            }
        }
    }
    let doc = SpectrumJson {
        n: system.n,
        eigenvalues: system.eigenvalues(),
        kernel_dimension: system.kernel.len(),
        modes: &system.modes,
        kernel: &system.kernel,
        norms,
        verification,
        verified,
    };
    Rendered::new(&doc, Some(table), verified)
}

/// Reads guesses separated by whitespace or commas; `#` starts a comment.
pub fn read_strategy_file(path: &Path, n: usize) -> CliResult<Strategy> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::Usage(format!("cannot read strategy file {}: {e}", path.display()))
    })?;
    let guesses = text
        .lines()
        .map(|line| line.split('#').next().unwrap_or(""))
        .flat_map(|line| line.split(|c: char| c == ',' || c.is_whitespace()))
        .filter(|tok| !tok.is_empty())
        .map(|tok| {
            tok.parse::<usize>().map_err(|_| {
                CliError::Usage(format!("bad card label {tok:?} in {}", path.display()))
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Strategy::new(n, guesses)?)
}

/// A parsed `--strategy` value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StrategySpec {
    Optimal,
    G,
    Constant(usize),
    File(PathBuf),
}

impl std::str::FromStr for StrategySpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        if s.eq_ignore_ascii_case("optimal") {
            return Ok(Self::Optimal);
        }
        if s.eq_ignore_ascii_case("g") {
            return Ok(Self::G);
        }
        if let Some(card) = s.strip_prefix("constant:") {
            return card
                .parse()
                .map(Self::Constant)
                .map_err(|_| CliError::Usage(format!("bad constant strategy {s:?}")));
        }
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(Self::File(path.into()));
        }
        Err(CliError::Usage(format!(
            "unknown strategy {s:?}; expected optimal, G, constant:<card> or file:<path>"
        )))
    }
}

fn fixed_strategy(spec: &StrategySpec, n: usize) -> CliResult<Option<Strategy>> {
    Ok(match spec {
        StrategySpec::Optimal => None,
        StrategySpec::G => Some(strategy_g(n)?),
        StrategySpec::Constant(c) => Some(Strategy::constant(n, *c)?),
        StrategySpec::File(path) => Some(read_strategy_file(path, n)?),
    })
}

fn resolve_backend(n: usize, choice: BackendChoice, force_exact: bool) -> Backend {
    let backend = match (force_exact, choice) {
        (true, _) | (false, BackendChoice::Exact) => Backend::Exact,
        (false, BackendChoice::Float) => Backend::Float,
        (false, BackendChoice::Auto) => Backend::auto(n),
    };
    if backend == Backend::Exact && n > EXACT_AUTO_LIMIT {
        eprintln!("warning: exact arithmetic for n = {n} (> {EXACT_AUTO_LIMIT}) may be slow");
    }
    backend
}

fn position_table(report: &ScoreReport) -> Table {
    let mut table = Table::new([
        "position",
        "guess",
        "value",
        "exact",
        "error_bound",
        "ambiguous",
    ]);
    for p in &report.positions {
        table.push(vec![
            p.position.to_string(),
            p.guess.to_string(),
            p.value.to_string(),
            p.exact.as_ref().map(format_rational).unwrap_or_default(),
            p.error_bound.to_string(),
            p.ambiguous.to_string(),
        ]);
    }
    table
}

fn guess_cmd(args: &GuessArgs) -> CliResult<Rendered> {
    if !(args.slack.is_finite() && args.slack >= 0.0) {
        return Err(CliError::Usage(format!(
            "slack must be a nonnegative number, got {}",
            args.slack
        )));
    }
    let spec: StrategySpec = args.strategy.parse()?;
    let strategy = fixed_strategy(&spec, args.n)?;
    let backend = resolve_backend(args.n, args.backend, args.exact);
    let report = match strategy {
        None => optimal_no_feedback(args.n, args.k, backend, args.slack)?.1,
        Some(s) => strategy_score(args.n, args.k, &s, backend, args.slack)?,
    };
    let table = position_table(&report);
    if let Some(path) = &args.table {
        write_atomic(path, render_csv(&table)?.as_bytes())?;
    }
    Rendered::new(&report, Some(table), true)
}

fn simulation_table(report: &SimulationReport) -> Table {
    match &report.tally {
        Tally::Matrix { counts, .. } => {
            let n = counts.len();
            let mut table = Table::new(
                std::iter::once("card".to_string()).chain((1..=n).map(|j| j.to_string())),
            );
            for (i, row) in counts.iter().enumerate() {
                let mut cells = vec![(i + 1).to_string()];
                cells.extend(row.iter().map(u64::to_string));
                table.push(cells);
            }
            table
        }
        Tally::Game { histogram, .. } => {
            let mut table = Table::new(["score", "count"]);
            for (s, c) in histogram.iter().enumerate() {
                table.push(vec![s.to_string(), c.to_string()]);
            }
            table
        }
    }
}

fn simulate_cmd(args: &SimulateArgs) -> CliResult<Rendered> {
    let config = ShuffleConfig {
        n: args.n,
        shelves: args.m,
        rounds: args.rounds,
        samples: args.samples,
        seed: args.seed,
    };
    config.validate()?;
    let report = match args.mode {
        Mode::Matrix => estimate_position_matrix(&config, args.threads)?,
        Mode::Game => {
            let spec: StrategySpec = args.strategy.parse()?;
            let strategy = match fixed_strategy(&spec, args.n)? {
                Some(s) => s,
                None => {
                    optimal_no_feedback(args.n, args.rounds, Backend::auto(args.n), DEFAULT_SLACK)?
                        .0
                }
            };
            simulate_guessing(&config, &strategy, args.threads)?
        }
    };
    Rendered::new(&report, Some(simulation_table(&report)), true)
}

fn verify_cmd(args: &VerifyArgs, cache: Option<&Cache>) -> CliResult<Rendered> {
    let system = load_or_compute(cache, args.n)?;
    let report = verify(args.n, Some(system))?;
    for failed in report.failures() {
        eprintln!("FAILED {}: {}", failed.name, failed.detail);
    }
    let mut table = Table::new(["name", "passed", "detail"]);
    for c in &report.checks {
        table.push(vec![c.name.clone(), c.passed.to_string(), c.detail.clone()]);
    }
    Rendered::new(&report, Some(table), report.passed)
}

fn counterexample_cmd() -> CliResult<Rendered> {
    let report = clay_counterexample();
    if !report.chain_holds {
        eprintln!(
            "note: M(19,10) = {} is not below {}; card 20 still beats card 19",
            format_rational(&report.entry_19),
            format_rational(&report.below)
        );
    }
    let mut table = Table::new(["card", "entry"]);
    for (i, v) in report.column.iter().enumerate() {
        table.push(vec![(i + 1).to_string(), format_rational(v)]);
    }
    let passed = report.card_19_beaten;
    Rendered::new(&report, Some(table), passed)
}
