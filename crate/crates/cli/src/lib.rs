//! `diskarm` command line. [`run_command`] does all the work and returns the
//! exit code with the text that would go to the terminal, so tests can drive
//! it without spawning a process.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use diskarm_core::faults::savings_report;
use diskarm_core::metrics::{totals_csv, trace_csv};
use diskarm_core::modsbsm::{RunResult, VisitOutcome};
use diskarm_core::oracle::{optimal_order_capped, OracleError, DEFAULT_MAX_REQUESTS};
use diskarm_core::report::{compare, compare_builtin, ComparisonReport};
use diskarm_core::schedulers::{simulate, SimError, BASELINE_MAX_ATTEMPTS};
use diskarm_core::workload::{builtin_case, generate, parse_scenario, render};
use diskarm_core::{Algorithm, DiskGeometry, EnergyModel, GeneratorParams, MetricsTotals, Scenario, TrackOrder};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_SCENARIO: i32 = 2;
pub const EXIT_ORACLE: i32 = 3;

/// An error that carries its own exit code.
#[derive(Debug)]
struct Exit {
    code: i32,
    message: String,
}

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Exit {}

fn fail(code: i32, message: impl Into<String>) -> anyhow::Error {
    Exit { code, message: message.into() }.into()
}

#[derive(Debug, Parser)]
#[command(name = "diskarm", version, about = "Multi-platter disk scheduling simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Price one scheduler on one scenario and print its trace.
    Run(RunArgs),
    /// Price several schedulers and print a totals table.
    Compare(CompareArgs),
    /// Write a seeded random scenario file.
    Gen(GenArgs),
    /// Exhaustive optimum for a small scenario.
    Oracle(OracleArgs),
    /// Write the six reference scenarios to a directory.
    Cases(CasesArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Table,
    Csv,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Input {
    /// Scenario file
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Built-in reference case 1..6
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=6))]
    case: Option<u32>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    alg: String,
    /// Annotate each step with pass-through tracks and bad-sector outcomes
    #[arg(long)]
    trace: bool,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    /// Use the scenario's direction lines for sweep schedulers
    #[arg(long)]
    paper_directions: bool,
    /// Write the bad-sector table as CSV
    #[arg(long, value_name = "FILE")]
    bad_sectors: Option<PathBuf>,
    /// Projected reads per resolved bad address for the savings estimate
    #[arg(long, default_value_t = 5)]
    projected_accesses: u64,
    /// Energy per one-bit access in femtojoules
    #[arg(long, default_value_t = 100.0)]
    energy_fj: f64,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long, conflicts_with_all = ["case", "builtin_cases"])]
    scenario: Option<PathBuf>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=6), conflicts_with = "builtin_cases")]
    case: Option<u32>,
    /// Aggregate over all six reference cases and list differences from the published tables
    #[arg(long)]
    builtin_cases: bool,
    #[arg(long, conflicts_with = "algs")]
    all: bool,
    /// Comma-separated scheduler names
    #[arg(long, value_delimiter = ',')]
    algs: Vec<String>,
    #[arg(long)]
    paper_directions: bool,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OrderArg {
    Asc,
    Desc,
    Random,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    requests: usize,
    #[arg(long, default_value_t = 1)]
    platters: u32,
    #[arg(long, default_value_t = 200)]
    tracks: u32,
    #[arg(long, default_value_t = 8)]
    sectors: u32,
    #[arg(long, value_enum, default_value = "random")]
    order: OrderArg,
    #[arg(long)]
    seed: u64,
    /// Number of distinct request addresses to mark bad
    #[arg(long, default_value_t = 0)]
    bad: usize,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    input: Input,
    /// Largest queue to search exhaustively
    #[arg(long, default_value_t = DEFAULT_MAX_REQUESTS)]
    max: usize,
}

#[derive(Debug, Args)]
struct CasesArgs {
    #[arg(long)]
    out: PathBuf,
}

/// Parses `argv` (including the program name) and executes it.
pub fn run_command<I, T>(argv: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            return (code, e.render().to_string());
        }
    };
    match dispatch(cli.command) {
        Ok(out) => (EXIT_OK, out),
        Err(e) => {
            let code = e.downcast_ref::<Exit>().map_or(EXIT_USAGE, |x| x.code);
            (code, format!("error: {e:#}\n"))
        }
    }
}

fn dispatch(command: Command) -> Result<String> {
    match command {
        Command::Run(a) => cmd_run(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Cases(a) => cmd_cases(a),
    }
}

fn parse_alg(name: &str) -> Result<Algorithm> {
    name.parse::<Algorithm>().map_err(|e| fail(EXIT_USAGE, e.to_string()))
}

fn load_file(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(|e| fail(EXIT_SCENARIO, format!("{e:#}")))?;
    parse_scenario(&text).map_err(|e| fail(EXIT_SCENARIO, format!("{}: {e}", path.display())))
}

fn load(scenario: Option<&Path>, case: Option<u32>) -> Result<Scenario> {
    match (scenario, case) {
        (Some(p), _) => load_file(p),
        (None, Some(id)) => Ok(builtin_case(id)?),
        (None, None) => Err(fail(EXIT_USAGE, "one of --scenario or --case is required")),
    }
}

fn sim_error(e: SimError) -> anyhow::Error {
    fail(EXIT_SCENARIO, e.to_string())
}

fn totals_line(t: &MetricsTotals) -> String {
    format!("totals {} {} {} {}\nadat {}\n", t.tskt, t.trl, t.tdtt, t.tdat, t.adat_display())
}

fn outcome_note(outcome: VisitOutcome) -> String {
    match outcome {
        VisitOutcome::Served => String::new(),
        VisitOutcome::Failed { bsi } => format!("unreadable bsi={bsi}"),
        VisitOutcome::Resolved(o) if o.probed => {
            format!("bsm probe bit={}{}", o.bit, if o.flipped { " flipped" } else { "" })
        }
        VisitOutcome::Resolved(o) => format!("bsm table bit={}", o.bit),
    }
}

fn cmd_run(a: RunArgs) -> Result<String> {
    let alg = parse_alg(&a.alg)?;
    let scenario = load(a.input.scenario.as_deref(), a.input.case)?;
    let energy = EnergyModel::new(a.energy_fj, 1.0).map_err(|e| fail(EXIT_USAGE, e.to_string()))?;
    let run = simulate(&scenario, alg, a.paper_directions).map_err(sim_error)?;
    let mut out = String::new();

    if a.format == Format::Csv {
        out.push_str(&trace_csv(&run.steps));
        out.push('\n');
        out.push_str(&totals_csv([(alg.name(), &run.totals)]));
    } else {
        let _ = writeln!(out, "scheduler {alg}, head {}, {} requests", scenario.initial_head, scenario.requests.len());
        let _ = writeln!(out, "{:>4} {:>4} {:>2} {:>2} {:>4} {:>3} {:>3} {:>4}", "#", "T", "S", "P", "ST", "RL", "DTT", "DAT");
        for (i, s) in run.steps.iter().enumerate() {
            let a_ = s.address;
            let _ = write!(
                out,
                "{:>4} {:>4} {:>2} {:>2} {:>4} {:>3} {:>3} {:>4}",
                i + 1,
                a_.track,
                a_.sector,
                a_.platter,
                s.seek,
                s.latency,
                s.transfer,
                s.access
            );
            if a.trace {
                let mut notes = Vec::new();
                if !s.via.is_empty() {
                    let via: Vec<String> = s.via.iter().map(|t| t.to_string()).collect();
                    notes.push(format!("via {}", via.join(",")));
                }
                if let Some(m) = &run.modsbsm {
                    let v = m.visits[i];
                    notes.push(format!("pass {}", v.pass));
                    let o = outcome_note(v.outcome);
                    if !o.is_empty() {
                        notes.push(o);
                    }
                }
                if !notes.is_empty() {
                    let _ = write!(out, "  {}", notes.join("; "));
                }
            }
            out.push('\n');
        }
        out.push_str(&totals_line(&run.totals));
    }

    if let Some(m) = &run.modsbsm {
        if a.format == Format::Table {
            let _ = writeln!(out, "passes {}", m.passes);
        }
        if !m.bad_sector_table.is_empty() {
            if a.format == Format::Table {
                out.push_str(&modsbsm_faults(m, &energy, a.projected_accesses)?);
            }
            if let Some(path) = &a.bad_sectors {
                fs::write(path, m.bad_sector_table.to_csv()).with_context(|| format!("writing {}", path.display()))?;
            }
        }
    } else if !scenario.faults.is_empty() && a.format == Format::Table {
        let _ = writeln!(
            out,
            "note: no bad-sector table; unreadable requests were retried at the queue tail, {BASELINE_MAX_ATTEMPTS} attempts each"
        );
        for &i in &run.unresolved {
            let _ = writeln!(out, "unresolved {}", scenario.requests[i].address);
        }
        for (addr, _) in scenario.faults.bad_entries() {
            let _ = writeln!(out, "probes {addr} {}", run.faults.probe_count(addr));
        }
    }
    Ok(out)
}

fn modsbsm_faults(m: &RunResult, energy: &EnergyModel, n: u64) -> Result<String> {
    let mut out = String::from("bad-sector table\n");
    out.push_str(&m.bad_sector_table.to_csv());
    let resolved: BTreeSet<_> =
        m.bad_sector_table.entries().iter().filter(|e| e.finalized).map(|e| e.index).collect();
    let rows = savings_report(&m.faults, &resolved, energy, n).map_err(|e| fail(EXIT_USAGE, e.to_string()))?;
    for r in rows {
        let _ = writeln!(
            out,
            "savings {} probes {} energy {} fJ heat {} over {n} reads",
            r.address, r.probes, r.savings.energy_fj, r.savings.heat
        );
    }
    Ok(out)
}

fn percent(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |p| format!("{p:.2}%"))
}

fn report_text(report: &ComparisonReport, format: Format) -> String {
    let rows = report.rows.iter().map(|(a, t)| (a.name(), t));
    if format == Format::Csv {
        return totals_csv(rows);
    }
    let mut out = String::from("algorithm tskt trl tdtt tdat adat\n");
    for (name, t) in rows {
        let _ = writeln!(out, "{name} {} {} {} {} {}", t.tskt, t.trl, t.tdtt, t.tdat, t.adat_display());
    }
    let _ = writeln!(out, "improvement vs traditional {}", percent(report.improvement_vs_traditional));
    let _ = writeln!(out, "improvement vs referred {}", percent(report.improvement_vs_referred));
    for d in &report.discrepancies {
        let _ = writeln!(
            out,
            "discrepancy {} {} {} published {} computed {}{}",
            d.source,
            d.algorithm,
            d.metric,
            d.published,
            d.computed,
            if d.published_consistent { "" } else { " (published row does not add up)" }
        );
    }
    for n in &report.notes {
        let _ = writeln!(out, "note {n}");
    }
    out
}

fn cmd_compare(a: CompareArgs) -> Result<String> {
    let algs: Vec<Algorithm> = if a.all {
        Algorithm::ALL.to_vec()
    } else if a.algs.is_empty() {
        return Err(fail(EXIT_USAGE, "one of --all or --algs is required"));
    } else {
        a.algs.iter().map(|n| parse_alg(n)).collect::<Result<_>>()?
    };
    let report = if a.builtin_cases {
        compare_builtin(&algs, a.paper_directions).map_err(sim_error)?
    } else {
        let scenario = load(a.scenario.as_deref(), a.case)?;
        compare(&scenario, &algs, a.paper_directions).map_err(sim_error)?
    };
    Ok(report_text(&report, a.format))
}

fn cmd_gen(a: GenArgs) -> Result<String> {
    let geometry = DiskGeometry::new(a.platters, a.tracks, a.sectors).map_err(|e| fail(EXIT_USAGE, e.to_string()))?;
    let order = match a.order {
        OrderArg::Asc => TrackOrder::Ascending,
        OrderArg::Desc => TrackOrder::Descending,
        OrderArg::Random => TrackOrder::Random,
    };
    let params = GeneratorParams { request_count: a.requests, order, bad_count: a.bad, seed: a.seed };
    let scenario = generate(geometry, params).map_err(|e| fail(EXIT_USAGE, e.to_string()))?;
    fs::write(&a.out, render(&scenario)).with_context(|| format!("writing {}", a.out.display()))?;
    Ok(format!("wrote {} requests to {}\n", scenario.requests.len(), a.out.display()))
}

fn cmd_oracle(a: OracleArgs) -> Result<String> {
    let scenario = load(a.input.scenario.as_deref(), a.input.case)?;
    let result = optimal_order_capped(&scenario, a.max).map_err(|e| match e {
        OracleError::TooLarge { .. } | OracleError::Faulty => fail(EXIT_ORACLE, e.to_string()),
        other => fail(EXIT_SCENARIO, other.to_string()),
    })?;
    let order: Vec<String> = result.best_order.iter().map(|&i| scenario.requests[i].address.to_string()).collect();
    let mut out = format!("orders examined {}\norder {}\n", result.orders_examined, order.join(" "));
    out.push_str(&totals_line(&result.best_totals));
    Ok(out)
}

fn cmd_cases(a: CasesArgs) -> Result<String> {
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut out = String::new();
    for id in 1..=6 {
        let path = a.out.join(format!("case{id}.dss"));
        let s = builtin_case(id)?;
        fs::write(&path, render(&s)).with_context(|| format!("writing {}", path.display()))?;
        let _ = writeln!(out, "{}", path.display());
    }
    Ok(out)
}
