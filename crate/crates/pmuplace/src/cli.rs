//! Command-line front end. [`run`] returns the process exit code:
//! 0 on success (for `solve`, only with a proven optimum), 1 on any error,
//! 2 when `solve` stopped at the iteration limit and 3 when `oracle` would
//! exceed its enumeration cap.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use pmuplace_core::detection::NoiseModel;
use pmuplace_core::optimizer::{BnbConfig, DEFAULT_ENUMERATION_CAP};
use pmuplace_core::Selection;

use crate::error::{Error, Result};
use crate::run::{self, RefPolicy};
use crate::study::{Study, StudyOptions};
use crate::{cases, matpower, native, output};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_PROVEN: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "pmuplace",
    version,
    about = "PMU placement maximizing the minimum outage-signature distance"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal selection for one M by branch and bound.
    Solve(SolveArgs),
    /// Optimal and greedy minimum distance over a range of M.
    Sweep(SweepArgs),
    /// Dump the outage signatures.
    Signatures(SignaturesArgs),
    /// Monte-Carlo detection rate of a selection.
    Detect(DetectArgs),
    /// Exhaustive search, for verification.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Matpower,
    Native,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Csv,
    Report,
}

#[derive(Debug, Args)]
pub struct CaseArgs {
    /// Case file, or a bundled case name (case14, case24, case30).
    #[arg(long)]
    pub case: String,
    /// Input format; inferred from the extension when omitted (.json is native).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Norm parameter p ≥ 1.
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Uniform noise scale, or @FILE with `bus_id,sigma` lines.
    #[arg(long)]
    pub sigma: Option<String>,
    /// Treat outages of identical parallel circuits as one event.
    #[arg(long)]
    pub merge_parallel: bool,
    /// Write output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Reference bus id, or `all` to traverse every bus.
    #[arg(long = "ref", default_value = "all")]
    pub reference: String,
    /// Relative gap at which branch and bound stops.
    #[arg(long, default_value_t = 1e-9)]
    pub eps: f64,
    /// Branch and bound iteration limit.
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub case: CaseArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Number of PMUs, including the reference bus.
    #[arg(long)]
    pub m: usize,
    /// `report` (JSON) or `csv` (trace of the best reference bus).
    #[arg(long, value_enum, default_value = "report")]
    pub emit: Emit,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub case: CaseArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    /// `A..B` (inclusive) or a single M; defaults to 2..N.
    #[arg(long)]
    pub m: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    pub emit: Emit,
}

#[derive(Debug, Args)]
pub struct SignaturesArgs {
    #[command(flatten)]
    pub case: CaseArgs,
    /// Reference bus id; defaults to the slack bus.
    #[arg(long = "ref")]
    pub reference: Option<u64>,
    /// `csv` (signatures) or `report` (event list as JSON).
    #[arg(long, value_enum, default_value = "csv")]
    pub emit: Emit,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub case: CaseArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Explicit bus ids to measure (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub buses: Option<Vec<u64>>,
    /// Solve for the optimal selection of this size first; defaults to N.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "report")]
    pub emit: Emit,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub case: CaseArgs,
    #[arg(long)]
    pub m: usize,
    /// Reference bus id, or `all`.
    #[arg(long = "ref", default_value = "all")]
    pub reference: String,
    /// Largest number of selections enumerated per reference bus.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub cap: u128,
    #[arg(long, value_enum, default_value = "report")]
    pub emit: Emit,
}

/// Parses `args` (including the program name) and runs the command,
/// printing diagnostics to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let pool = match thread_pool() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    match pool.install(|| execute(cli.command)) {
        Ok(code) => code,
        Err(Error::Model(pmuplace_core::Error::EnumerationCapExceeded { count, cap })) => {
            eprintln!("error: {count} selections exceed the enumeration cap {cap}");
            EXIT_CAP
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("PMUPLACE_THREADS") {
        let n: usize = v.parse().ok().filter(|n| *n > 0).ok_or_else(|| {
            Error::Usage(format!(
                "PMUPLACE_THREADS must be a positive integer, got `{v}`"
            ))
        })?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::Usage(e.to_string()))
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Solve(a) => {
            let study = load(&a.case)?;
            let policy = ref_policy(&study, &a.search.reference)?;
            let outcome = run::solve(&study, a.m, policy, bnb_config(&a.search))?;
            let text = match a.emit {
                Emit::Report => json(&outcome.report)?,
                Emit::Csv => output::trace_csv(&study, &outcome.theta, &outcome.best.trace),
            };
            emit(a.case.out.as_deref(), &text)?;
            Ok(if outcome.report.proven {
                EXIT_OK
            } else {
                EXIT_NOT_PROVEN
            })
        }
        Command::Sweep(a) => {
            let study = load(&a.case)?;
            let policy = ref_policy(&study, &a.search.reference)?;
            let ms = m_range(a.m.as_deref(), study.n_buses())?;
            let report = run::sweep(&study, &ms, policy, bnb_config(&a.search))?;
            for row in &report.rows {
                if let Some(e) = &row.error {
                    eprintln!("warning: M = {}: {e}", row.m);
                }
            }
            let text = match a.emit {
                Emit::Report => json(&report)?,
                Emit::Csv => output::sweep_csv(&report),
            };
            emit(a.case.out.as_deref(), &text)?;
            Ok(EXIT_OK)
        }
        Command::Signatures(a) => {
            let study = load(&a.case)?;
            let r = match a.reference {
                Some(id) => study.index_of(id)?,
                None => study.network().slack(),
            };
            let sigs = study.signatures(r);
            for (i, j) in sigs.collisions(1e-9) {
                eprintln!("warning: events {i} and {j} have identical signatures");
            }
            let text = match a.emit {
                Emit::Csv => output::signatures_csv(&study, r),
                Emit::Report => output::events_csv(&study),
            };
            emit(a.case.out.as_deref(), &text)?;
            Ok(EXIT_OK)
        }
        Command::Detect(a) => {
            if a.case.sigma.is_none() {
                return Err(Error::Usage(
                    "detect needs --sigma (noise standard deviation in radians)".into(),
                ));
            }
            let study = load(&a.case)?;
            let noise = NoiseModel::per_bus(study.sigma())?;
            let sel = match (&a.buses, a.m) {
                (Some(_), Some(_)) => {
                    return Err(Error::Usage("give either --buses or --m, not both".into()))
                }
                (Some(ids), None) => {
                    let r = match a.search.reference.as_str() {
                        "all" => study.index_of(ids[0])?,
                        id => study.index_of(parse_id(id)?)?,
                    };
                    study.selection(r, ids)?
                }
                (None, m) => {
                    let m = m.unwrap_or(study.n_buses());
                    let policy = ref_policy(&study, &a.search.reference)?;
                    let outcome = run::solve(&study, m, policy, bnb_config(&a.search))?;
                    outcome.best.selection
                }
            };
            let report = run::detect(&study, &sel, &noise, a.trials, a.seed)?;
            let text = match a.emit {
                Emit::Report => json(&DetectJson::new(&study, &sel, &report))?,
                Emit::Csv => output::confusion_csv(&report),
            };
            emit(a.case.out.as_deref(), &text)?;
            Ok(EXIT_OK)
        }
        Command::Oracle(a) => {
            let study = load(&a.case)?;
            let policy = ref_policy(&study, &a.reference)?;
            let report = run::oracle(&study, a.m, policy, a.cap)?;
            let text = match a.emit {
                Emit::Report => json(&report)?,
                Emit::Csv => output::oracle_csv(&report),
            };
            emit(a.case.out.as_deref(), &text)?;
            Ok(EXIT_OK)
        }
    }
}

#[derive(serde::Serialize)]
struct DetectJson<'a> {
    selection: Vec<u64>,
    ref_bus: u64,
    rng: &'static str,
    seed: u64,
    trials_per_event: u64,
    success_rate: f64,
    standard_error: f64,
    collisions: &'a [(usize, usize)],
    confusion: &'a [Vec<u64>],
}

impl<'a> DetectJson<'a> {
    fn new(
        study: &Study,
        sel: &Selection,
        r: &'a pmuplace_core::detection::DetectionReport,
    ) -> Self {
        DetectJson {
            selection: study.ids(sel.buses()),
            ref_bus: study.network().bus_id(sel.ref_bus()),
            rng: r.rng,
            seed: r.seed,
            trials_per_event: r.trials_per_event,
            success_rate: r.success_rate(),
            standard_error: r.standard_error(),
            collisions: &r.collisions,
            confusion: &r.confusion,
        }
    }
}

fn json<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn bnb_config(a: &SearchArgs) -> BnbConfig {
    BnbConfig {
        eps: a.eps,
        max_iters: a.max_iters,
    }
}

fn parse_id(s: &str) -> Result<u64> {
    s.parse()
        .map_err(|_| Error::Usage(format!("invalid bus id `{s}`")))
}

fn ref_policy(study: &Study, s: &str) -> Result<RefPolicy> {
    if s == "all" {
        Ok(RefPolicy::All)
    } else {
        Ok(RefPolicy::Fixed(study.index_of(parse_id(s)?)?))
    }
}

/// `A..B` (inclusive) or a single value; `None` means `2..=n`.
pub fn m_range(spec: Option<&str>, n: usize) -> Result<Vec<usize>> {
    let bad = || Error::Usage(format!("invalid M range `{}`", spec.unwrap_or_default()));
    let (lo, hi) = match spec {
        None => (2, n),
        Some(s) => match s.split_once("..") {
            Some((a, b)) => (
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            ),
            None => {
                let m = s.trim().parse().map_err(|_| bad())?;
                (m, m)
            }
        },
    };
    if lo < 2 || hi > n || lo > hi {
        return Err(Error::Usage(format!(
            "M range {lo}..{hi} must lie within 2..{n}"
        )));
    }
    Ok((lo..=hi).collect())
}

/// Reads a network from a file path or bundled case name.
pub fn load_network(case: &str, format: Option<Format>) -> Result<pmuplace_core::PowerNetwork> {
    let path = Path::new(case);
    if !path.exists() {
        if let Some(net) = cases::bundled(case) {
            return net;
        }
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let format = format.unwrap_or_else(|| {
        if path.extension().is_some_and(|e| e == "json") {
            Format::Native
        } else {
            Format::Matpower
        }
    });
    match format {
        Format::Matpower => matpower::parse_network(&text),
        Format::Native => native::parse_network(&text),
    }
}

/// Per-bus sigma from `FLOAT` or `@FILE` (`bus_id,sigma` lines).
pub fn parse_sigma(spec: &str, net: &pmuplace_core::PowerNetwork) -> Result<Vec<f64>> {
    let Some(file) = spec.strip_prefix('@') else {
        let v: f64 = spec
            .parse()
            .map_err(|_| Error::Usage(format!("invalid sigma `{spec}`")))?;
        return Ok(vec![v; net.n_buses()]);
    };
    let text = std::fs::read_to_string(file).map_err(|e| Error::io(file, e))?;
    let mut sigma = vec![None; net.n_buses()];
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, v) = line
            .split_once(',')
            .ok_or_else(|| Error::parse(idx + 1, "expected `bus_id,sigma`"))?;
        let id: u64 = id
            .trim()
            .parse()
            .map_err(|_| Error::parse(idx + 1, format!("invalid bus id `{id}`")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::parse(idx + 1, format!("invalid sigma `{v}`")))?;
        let at = net.index_of(id).ok_or(Error::UnknownBusId(id))?;
        sigma[at] = Some(v);
    }
    sigma
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            s.ok_or_else(|| {
                Error::Usage(format!("sigma file has no entry for bus {}", net.bus_id(i)))
            })
        })
        .collect()
}

fn load(a: &CaseArgs) -> Result<Study> {
    let net = load_network(&a.case, a.format)?;
    let sigma = a
        .sigma
        .as_deref()
        .map(|s| parse_sigma(s, &net))
        .transpose()?;
    Study::new(
        net,
        StudyOptions {
            p: a.p,
            sigma,
            merge_parallel: a.merge_parallel,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(m_range(None, 4).unwrap(), vec![2, 3, 4]);
        assert_eq!(m_range(Some("3..5"), 14).unwrap(), vec![3, 4, 5]);
        assert_eq!(m_range(Some("2"), 14).unwrap(), vec![2]);
        assert!(m_range(Some("1..3"), 14).is_err());
        assert!(m_range(Some("5..3"), 14).is_err());
        assert!(m_range(Some("2..15"), 14).is_err());
        assert!(m_range(Some("x"), 14).is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
