//! `dcsit` — command-line front end for the dcsit library.
//!
//! Four subcommands cover the artifact's surface:
//!
//! * `dof` — tabulate exact sum-DoF values (`scheme,L,C,theta,dof_num,
//!   dof_den,dof_float` rows) for the single-cell scheme, the uncoupled
//!   multi-cell scheme, the order-2-based baseline, and the full-cooperation
//!   bound.
//! * `schedule` — emit the exact schedule constants for a configuration: a
//!   summary record (`L,C,theta,lambda,b,tau`) followed by per-phase records
//!   (`p,R_p,S_p,nu_p,tau_p`).
//! * `simulate` — run the linear-precoding simulation over explicit seeds
//!   and emit per-user rank results (`seed,user,rank_I,rank_joint,lcs,
//!   decodable`) plus a human-readable per-seed report.
//! * `figures` — write the three CSV data sets behind the library's
//!   headline comparisons (`fig3.csv`, `fig4.csv`, `fig5.csv`).
//!
//! Exit codes: 0 on success (including the *expected* failure of the
//! negative-control variant), 1 for usage problems (bad flags, unsupported
//! scheme/parameter combinations, unwritable paths), 2 when a consistency
//! or decodability check fails, 3 for numeric failures.
//!
//! All CSV output is deterministic: the same invocation produces
//! byte-identical bytes (LF line endings, fixed 12-decimal floats, exact
//! numerator/denominator columns alongside every float).

use std::collections::HashSet;
use std::fmt::Display;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;

use dcsit::dofmath::{
    dof_coop, dof_hc, dof_mat, dof_mat_truncated, dof_umat, dof_umat_truncated, gap_epsilon,
    timeshare,
};
use dcsit::exactnum::{to_f64, BigRational};
use dcsit::schedule::schedule_params;
use dcsit::simengine::{simulate, SimConfig, Variant};
use dcsit::Error;

// ---------------------------------------------------------------------------
// argument types

/// Inclusive integer range written `a..b`, or a single value `n` (= `n..n`).
#[derive(Clone, Debug)]
struct IncRange {
    start: u64,
    end: u64,
}

impl IncRange {
    fn iter(&self) -> std::ops::RangeInclusive<u64> {
        self.start..=self.end
    }
}

impl FromStr for IncRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| {
            t.parse::<u64>()
                .map_err(|_| format!("`{t}` is not a nonnegative integer"))
        };
        let (start, end) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b)?),
            None => {
                let n = parse(s)?;
                (n, n)
            }
        };
        if start > end {
            return Err(format!("empty range `{s}` (start exceeds end)"));
        }
        Ok(IncRange { start, end })
    }
}

/// Number of phases: an explicit count, or `max` for the full-length scheme.
#[derive(Clone, Copy, Debug)]
enum ThetaArg {
    Max,
    At(u64),
}

impl FromStr for ThetaArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("max") {
            return Ok(ThetaArg::Max);
        }
        match s.parse::<u64>() {
            Ok(n) if n >= 1 => Ok(ThetaArg::At(n)),
            _ => Err(format!("`{s}` is neither `max` nor a positive integer")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DofScheme {
    /// Single-cell retransmission scheme (requires C = 1).
    Mat,
    /// Uncoupled multi-cell scheme.
    Umat,
    /// Order-2-based baseline on the equivalent K = L*C single-user cells.
    Hc,
    /// Full-cooperation bound: single-cell scheme over all K = L*C users.
    Coop,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SimScheme {
    /// Single-cell broadcast protocol (C = 1).
    #[value(name = "mat_bc")]
    MatBc,
    /// Uncoupled two-cell protocol (C = 2).
    #[value(name = "umat_ibc")]
    UmatIbc,
    /// Negative control: coupled single-cell protocol forced onto two cells.
    #[value(name = "naive_mat_ibc")]
    NaiveMatIbc,
}

impl SimScheme {
    fn variant(self) -> Variant {
        match self {
            SimScheme::MatBc => Variant::MatBc,
            SimScheme::UmatIbc => Variant::UmatIbc,
            SimScheme::NaiveMatIbc => Variant::NaiveMatIbc,
        }
    }
}

// ---------------------------------------------------------------------------
// CLI surface

#[derive(Parser)]
#[command(
    name = "dcsit",
    version,
    about = "Exact DoF tables, transmission schedules, and linear-precoding \
             simulations for multi-cell broadcast with delayed CSIT"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate exact sum-DoF values as CSV.
    Dof(DofArgs),
    /// Emit exact schedule constants (summary + per-phase records) as CSV.
    Schedule(ScheduleArgs),
    /// Run seeded linear-precoding simulations and report rank tests.
    Simulate(SimulateArgs),
    /// Write the fig3/fig4/fig5 CSV data sets into a directory.
    Figures(FiguresArgs),
}

#[derive(Args)]
struct DofArgs {
    /// Schemes to tabulate (comma-separated: mat,umat,hc,coop).
    #[arg(long, value_delimiter = ',', required = true)]
    scheme: Vec<DofScheme>,

    /// Users per cell: inclusive range `a..b` or a single `n`.
    #[arg(long = "L", value_name = "RANGE")]
    l: IncRange,

    /// Number of cells: inclusive range `a..b` or a single `n`.
    #[arg(long = "C", value_name = "RANGE", default_value = "1")]
    c: IncRange,

    /// Number of phases: positive integer or `max` (full-length scheme).
    #[arg(long, default_value = "max")]
    theta: ThetaArg,

    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScheduleArgs {
    /// Users per cell: inclusive range `a..b` or a single `n`.
    #[arg(long = "L", value_name = "RANGE")]
    l: IncRange,

    /// Number of cells: inclusive range `a..b` or a single `n`.
    #[arg(long = "C", value_name = "RANGE", default_value = "1")]
    c: IncRange,

    /// Number of phases: positive integer or `max`.
    #[arg(long, default_value = "max")]
    theta: ThetaArg,

    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Protocol to simulate.
    #[arg(long)]
    scheme: SimScheme,

    /// Users per cell.
    #[arg(long = "L")]
    l: u64,

    /// Number of cells (defaults to the scheme's canonical cell count).
    #[arg(long = "C")]
    c: Option<u64>,

    /// Number of phases: positive integer or `max`.
    #[arg(long, default_value = "max")]
    theta: ThetaArg,

    /// Seeds to run (comma-separated, distinct).
    #[arg(long, value_delimiter = ',', default_values_t = 0..20u64)]
    seeds: Vec<u64>,

    /// Rank-test tolerance scale multiplying machine epsilon.
    #[arg(long, default_value_t = 1e3)]
    tol_scale: f64,

    /// CSV output path. When set, the per-seed report goes to stdout;
    /// otherwise the CSV goes to stdout and the report to stderr.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FiguresArgs {
    /// Directory receiving fig3.csv, fig4.csv, fig5.csv.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

// ---------------------------------------------------------------------------
// failure plumbing

struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidArgument(_) => 1,
            Error::Consistency(_) | Error::Protocol(_) | Error::Audit(_) => 2,
            Error::Numeric(_) => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        usage(format!("i/o failure: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        usage(format!("csv output failure: {e}"))
    }
}

// ---------------------------------------------------------------------------
// helpers

fn float_col(v: &BigRational) -> String {
    format!("{:.12}", to_f64(v))
}

fn csv_writer(
    out: Option<&Path>,
    flexible: bool,
) -> Result<csv::Writer<Box<dyn Write>>, Failure> {
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(fs::File::create(path).map_err(|e| {
            usage(format!("cannot create `{}`: {e}", path.display()))
        })?),
        None => Box::new(io::stdout().lock()),
    };
    Ok(csv::WriterBuilder::new()
        .flexible(flexible)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink))
}

fn csv_file(path: &Path) -> Result<csv::Writer<fs::File>, Failure> {
    let file = fs::File::create(path)
        .map_err(|e| usage(format!("cannot create `{}`: {e}", path.display())))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

fn record<I, S>(wtr: &mut csv::Writer<impl Write>, fields: I) -> Result<(), Failure>
where
    I: IntoIterator<Item = S>,
    S: Display,
{
    let fields: Vec<String> = fields.into_iter().map(|f| f.to_string()).collect();
    wtr.write_record(&fields)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// dof

fn cmd_dof(args: DofArgs) -> Result<(), Failure> {
    // Validate every (scheme, parameter) combination before emitting a single
    // byte, so a usage error never leaves partial output behind.
    if args.l.start < 1 || args.c.start < 1 {
        return Err(usage("--L and --C must be at least 1"));
    }
    for scheme in &args.scheme {
        match scheme {
            DofScheme::Mat => {
                if args.c.iter().any(|c| c != 1) {
                    return Err(usage(format!(
                        "scheme `mat` is the single-cell curve and requires C = 1 (got C = {}..{}); \
                         use `umat` or `coop` for multi-cell values",
                        args.c.start, args.c.end
                    )));
                }
                if let ThetaArg::At(t) = args.theta {
                    if t > args.l.start {
                        return Err(usage(format!(
                            "--theta {t} exceeds the smallest requested L = {}",
                            args.l.start
                        )));
                    }
                }
            }
            DofScheme::Umat => {
                if let ThetaArg::At(t) = args.theta {
                    if t > args.l.start {
                        return Err(usage(format!(
                            "--theta {t} exceeds the smallest requested L = {}",
                            args.l.start
                        )));
                    }
                }
            }
            DofScheme::Hc => {
                if matches!(args.theta, ThetaArg::At(_)) {
                    return Err(usage(
                        "scheme `hc` has no phase parameter; omit --theta or pass `max`",
                    ));
                }
            }
            DofScheme::Coop => {
                if matches!(args.theta, ThetaArg::At(_)) {
                    return Err(usage(
                        "scheme `coop` is the full-length cooperative bound; omit --theta or pass `max`",
                    ));
                }
            }
        }
    }
    let mut wtr = csv_writer(args.out.as_deref(), false)?;
    record(
        &mut wtr,
        ["scheme", "L", "C", "theta", "dof_num", "dof_den", "dof_float"],
    )?;
    for scheme in &args.scheme {
        for c in args.c.iter() {
            for l in args.l.iter() {
                let (label, theta_col, dof) = match scheme {
                    DofScheme::Mat => {
                        let theta = match args.theta {
                            ThetaArg::Max => l,
                            ThetaArg::At(t) => t,
                        };
                        ("mat", theta, dof_mat_truncated(l, theta)?)
                    }
                    DofScheme::Umat => {
                        let theta = match args.theta {
                            ThetaArg::Max => l,
                            ThetaArg::At(t) => t,
                        };
                        ("umat", theta, dof_umat_truncated(l, c, theta)?)
                    }
                    DofScheme::Hc => ("hc", 0, dof_hc(l * c)?),
                    DofScheme::Coop => ("coop", l * c, dof_coop(l, c)?),
                };
                record(
                    &mut wtr,
                    [
                        label.to_string(),
                        l.to_string(),
                        c.to_string(),
                        theta_col.to_string(),
                        dof.numer().to_string(),
                        dof.denom().to_string(),
                        float_col(&dof),
                    ],
                )?;
            }
        }
    }
    wtr.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// schedule

fn cmd_schedule(args: ScheduleArgs) -> Result<(), Failure> {
    if args.l.start < 1 || args.c.start < 1 {
        return Err(usage("--L and --C must be at least 1"));
    }
    if let ThetaArg::At(t) = args.theta {
        if t > args.l.start {
            return Err(usage(format!(
                "--theta {t} exceeds the smallest requested L = {}",
                args.l.start
            )));
        }
    }
    let mut wtr = csv_writer(args.out.as_deref(), true)?;
    for c in args.c.iter() {
        for l in args.l.iter() {
            let theta = match args.theta {
                ThetaArg::Max => l,
                ThetaArg::At(t) => t,
            };
            let params = schedule_params(l, c, theta)?;
            record(&mut wtr, ["L", "C", "theta", "lambda", "b", "tau"])?;
            record(
                &mut wtr,
                [
                    l.to_string(),
                    c.to_string(),
                    theta.to_string(),
                    params.lambda.to_string(),
                    params.b.to_string(),
                    params.tau.to_string(),
                ],
            )?;
            record(&mut wtr, ["p", "R_p", "S_p", "nu_p", "tau_p"])?;
            for p in 1..=theta as usize {
                record(
                    &mut wtr,
                    [
                        p.to_string(),
                        params.r[p - 1].to_string(),
                        params.s[p - 1].to_string(),
                        params.nu[p - 1].to_string(),
                        params.tau_p[p - 1].to_string(),
                    ],
                )?;
            }
        }
    }
    wtr.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// simulate

fn cmd_simulate(args: SimulateArgs) -> Result<(), Failure> {
    let variant = args.scheme.variant();
    let c = args.c.unwrap_or(match variant {
        Variant::MatBc => 1,
        Variant::UmatIbc | Variant::NaiveMatIbc => 2,
    });
    let theta = match args.theta {
        ThetaArg::Max => match variant {
            // The negative control replays the K-user single-cell protocol,
            // so its full length is K phases; the positive schemes cap at L.
            Variant::NaiveMatIbc => args.l * c,
            Variant::MatBc | Variant::UmatIbc => args.l,
        },
        ThetaArg::At(t) => t,
    };
    if args.seeds.is_empty() {
        return Err(usage("at least one seed is required"));
    }
    let mut seen = HashSet::new();
    for s in &args.seeds {
        if !seen.insert(*s) {
            return Err(usage(format!("duplicate seed {s}")));
        }
    }
    if !(args.tol_scale.is_finite() && args.tol_scale > 0.0) {
        return Err(usage("--tol-scale must be a positive finite number"));
    }
    // Validate the configuration for every seed before emitting anything.
    let configs = args
        .seeds
        .iter()
        .map(|&seed| {
            Ok(SimConfig::new(variant, args.l, c, theta, seed)?.with_tol_scale(args.tol_scale))
        })
        .collect::<Result<Vec<_>, Failure>>()?;

    let mut wtr = csv_writer(args.out.as_deref(), false)?;
    // Report lines go wherever the CSV is not.
    let report_to_stdout = args.out.is_some();
    let report = |line: String| {
        if report_to_stdout {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    };

    record(
        &mut wtr,
        ["seed", "user", "rank_I", "rank_joint", "lcs", "decodable"],
    )?;
    let mut broken_runs = 0usize;
    let mut audit_violations = 0usize;
    let mut misaligned_runs = 0usize;
    for (config, &seed) in configs.iter().zip(&args.seeds) {
        let run = simulate(config)?;
        for user in &run.users {
            record(
                &mut wtr,
                [
                    seed.to_string(),
                    user.user.to_string(),
                    user.rank_interference.to_string(),
                    user.rank_joint.to_string(),
                    user.lcs_recovered.to_string(),
                    user.decodable.to_string(),
                ],
            )?;
        }
        let decodable = run.users.iter().filter(|u| u.decodable).count();
        if !run.all_decodable() {
            broken_runs += 1;
        }
        if !run.csit_audit_clean {
            audit_violations += 1;
        }
        if !run.all_aligned() {
            misaligned_runs += 1;
        }
        report(format!(
            "seed={seed} variant={variant} L={} C={c} theta={theta} tau={} b={} \
             decodable={decodable}/{} dof={} ({}) audit={} aligned={}",
            args.l,
            run.tau,
            run.b,
            run.users.len(),
            run.achieved_dof,
            float_col(&run.achieved_dof),
            if run.csit_audit_clean { "clean" } else { "VIOLATED" },
            run.all_aligned(),
        ));
    }
    wtr.flush()?;

    let runs = args.seeds.len();
    match variant {
        Variant::MatBc | Variant::UmatIbc => {
            report(format!(
                "aggregate: runs={runs} decodable_runs={} audit_violations={audit_violations}",
                runs - broken_runs
            ));
            if broken_runs > 0 || audit_violations > 0 || misaligned_runs > 0 {
                return Err(Failure {
                    code: 2,
                    message: format!(
                        "{broken_runs} run(s) failed decodability, {audit_violations} failed the \
                         channel-knowledge audit, {misaligned_runs} had misaligned retransmissions"
                    ),
                });
            }
        }
        Variant::NaiveMatIbc => {
            report(format!(
                "aggregate: runs={runs} broken_runs={broken_runs} (breakage is the expected \
                 outcome for this control variant)"
            ));
            if broken_runs < runs {
                return Err(Failure {
                    code: 2,
                    message: format!(
                        "negative control decoded cleanly in {} of {runs} run(s); coupling \
                         should break decodability in every run",
                        runs - broken_runs
                    ),
                });
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// figures

fn write_dof_like_row(
    wtr: &mut csv::Writer<fs::File>,
    scheme: &str,
    l: u64,
    c: u64,
    theta: u64,
    dof: &BigRational,
) -> Result<(), Failure> {
    record(
        wtr,
        [
            scheme.to_string(),
            l.to_string(),
            c.to_string(),
            theta.to_string(),
            dof.numer().to_string(),
            dof.denom().to_string(),
            float_col(dof),
        ],
    )
}

fn cmd_figures(args: FiguresArgs) -> Result<(), Failure> {
    fs::create_dir_all(&args.out)
        .map_err(|e| usage(format!("cannot create `{}`: {e}", args.out.display())))?;

    // fig3: sum DoF vs users per cell for every closed-form scheme.
    let mut fig3 = csv_file(&args.out.join("fig3.csv"))?;
    record(
        &mut fig3,
        ["scheme", "L", "C", "theta", "dof_num", "dof_den", "dof_float"],
    )?;
    for l in 3..=40u64 {
        write_dof_like_row(&mut fig3, "mat", l, 1, l, &dof_mat(l)?)?;
    }
    for c in [2u64, 3, 5] {
        for l in 3..=40u64 {
            write_dof_like_row(&mut fig3, "umat", l, c, l, &dof_umat(l, c)?)?;
        }
    }
    for c in [2u64, 3] {
        for l in 3..=40u64 {
            write_dof_like_row(&mut fig3, "coop", l, c, l * c, &dof_coop(l, c)?)?;
        }
    }
    for c in [2u64, 5] {
        for l in 3..=40u64 {
            write_dof_like_row(&mut fig3, "hc", l, c, 0, &dof_hc(l * c)?)?;
        }
    }
    fig3.flush()?;

    // fig4: exact gap to the single-cell scheme.
    let mut fig4 = csv_file(&args.out.join("fig4.csv"))?;
    record(&mut fig4, ["L", "C", "eps_num", "eps_den", "eps_float"])?;
    for c in 2..=5u64 {
        for l in 2..=40u64 {
            let eps = gap_epsilon(l, c)?;
            record(
                &mut fig4,
                [
                    l.to_string(),
                    c.to_string(),
                    eps.numer().to_string(),
                    eps.denom().to_string(),
                    float_col(&eps),
                ],
            )?;
        }
    }
    fig4.flush()?;

    // fig5: DoF-delay trade-off at L = 6, sweeping the truncation length,
    // with embedded schemes time-shared across the ambient cells (tau
    // multiplied by C(C,Q), DoF unchanged).
    let mut fig5 = csv_file(&args.out.join("fig5.csv"))?;
    record(
        &mut fig5,
        [
            "series", "L", "C", "Q", "theta", "tau", "dof_num", "dof_den", "dof_float",
        ],
    )?;
    let l = 6u64;
    for (series, ambient_c, q) in [
        ("uMAT_C2", 2u64, 2u64),
        ("MATinC2", 2, 1),
        ("uMAT_C3inC4", 4, 3),
        ("uMAT_C2inC4", 4, 2),
        ("MATinC4", 4, 1),
    ] {
        for theta in 1..=l {
            let params = schedule_params(l, q, theta)?;
            let dof = if q == 1 {
                dof_mat_truncated(l, theta)?
            } else {
                dof_umat_truncated(l, q, theta)?
            };
            let tau = params.tau.to_u64().ok_or_else(|| Failure {
                code: 3,
                message: format!("tau overflows u64 at (L={l}, Q={q}, theta={theta})"),
            })?;
            let (shared_dof, shared_tau) = timeshare(&dof, tau, ambient_c, q)?;
            record(
                &mut fig5,
                [
                    series.to_string(),
                    l.to_string(),
                    ambient_c.to_string(),
                    q.to_string(),
                    theta.to_string(),
                    shared_tau.to_string(),
                    shared_dof.numer().to_string(),
                    shared_dof.denom().to_string(),
                    float_col(&shared_dof),
                ],
            )?;
        }
    }
    fig5.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Dof(args) => cmd_dof(args),
        Command::Schedule(args) => cmd_schedule(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Figures(args) => cmd_figures(args),
    }
}

fn main() -> std::process::ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return std::process::ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            std::process::ExitCode::from(f.code)
        }
    }
}
