//! `duality-lab`: single evaluations, seeded campaigns, overlap sweeps and
//! fringe scans.
//!
//! Exit status: 0 when every evaluated relation holds, 1 on a relation
//! violation, 2 on invalid input or I/O failure.

mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use duality_lab::duality::{
    evaluate_mixed, evaluate_pure, run_campaign, sweep_overlap, write_records_csv, CampaignConfig,
    DualityReport, Quanton, Scenario, Tolerances,
};
use duality_lab::interference::{scan_visibility, DEFAULT_GRID_POINTS, MIN_GRID_POINTS};
use duality_lab::random::{
    random_density, random_pure, sample_detectors, uniform_overlap_detectors, Seed,
};
use duality_lab::states::{joint_mixed, reduce_quanton, DetectorSet, MixedQuanton, PureQuanton};
use serde::Serialize;

use config::{Format, Options, DEFAULT_TRIALS};

const THREADS_ENV: &str = "DUALITY_LAB_THREADS";

#[derive(Parser)]
#[command(
    name = "duality-lab",
    version,
    about = "Coherence versus path-distinguishability duality checks"
)]
struct Cli {
    /// TOML file with default options; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one instance and report every relation verdict.
    Verify(Options),
    /// Run seeded random instances of one scenario.
    Campaign(Options),
    /// Evaluate a quanton against uniform-overlap detectors over a range of gamma.
    Sweep(Options),
    /// Write the interference pattern of one instance.
    Fringe(Options),
}

enum Status {
    Pass,
    Violation,
}

impl Status {
    fn from_pass(passed: bool) -> Self {
        if passed {
            Status::Pass
        } else {
            Status::Violation
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Violation) => ExitCode::from(1),
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain()
        .filter_map(|c| c.downcast_ref::<io::Error>())
        .any(|io| io.kind() == io::ErrorKind::BrokenPipe)
}

fn run(cli: Cli) -> Result<Status> {
    let file = match &cli.config {
        Some(path) => Options::load(path)?,
        None => Options::default(),
    };
    match cli.command {
        Command::Verify(o) => cmd_verify(&o.over(file)),
        Command::Campaign(o) => cmd_campaign(&o.over(file)),
        Command::Sweep(o) => cmd_sweep(&o.over(file)),
        Command::Fringe(o) => cmd_fringe(&o.over(file)),
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize + ?Sized>(value: &T, out: &mut dyn Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn grid_points(o: &Options) -> Result<usize> {
    let grid = o.grid_points.unwrap_or(DEFAULT_GRID_POINTS);
    if grid < MIN_GRID_POINTS {
        bail!("grid_points must be at least {MIN_GRID_POINTS}, got {grid}");
    }
    Ok(grid)
}

fn rank(o: &Options, n: usize) -> Result<usize> {
    let rank = o.rank.unwrap_or(2.min(n));
    if rank == 0 || rank > n {
        bail!("rank must lie in 1..={n}, got {rank}");
    }
    Ok(rank)
}

/// Quanton from explicit amplitudes, a seed, or the equal superposition.
fn build_quanton(o: &Options, n: usize) -> Result<Quanton> {
    let amps = o.amplitudes()?;
    let pure = match (&amps, o.seed) {
        (Some(a), _) => PureQuanton::new(a.clone())?,
        (None, Some(seed)) if o.scenario() == Scenario::PurePure => random_pure(n, Seed(seed))?,
        _ => PureQuanton::equal(n)?,
    };
    Ok(match o.scenario() {
        Scenario::PurePure => Quanton::Pure(pure),
        Scenario::MixedPure => match (amps, o.seed) {
            (None, Some(seed)) => Quanton::Mixed(random_density(n, rank(o, n)?, Seed(seed))?),
            _ => Quanton::Mixed(MixedQuanton::from_pure(&pure)),
        },
        Scenario::MixedMixed => {
            bail!("mixed_mixed supports only seeded instances without --gamma or --amplitudes")
        }
    })
}

fn mixed(q: &Quanton) -> MixedQuanton {
    match q {
        Quanton::Pure(p) => MixedQuanton::from_pure(p),
        Quanton::Mixed(m) => m.clone(),
    }
}

fn evaluate(q: &Quanton, d: &DetectorSet, tol: &Tolerances) -> Result<DualityReport> {
    Ok(match q {
        Quanton::Pure(p) => evaluate_pure(p, d, tol)?,
        Quanton::Mixed(m) => evaluate_mixed(m, d, tol)?,
    })
}

fn reduced(q: &Quanton, d: &DetectorSet) -> Result<MixedQuanton> {
    Ok(reduce_quanton(&joint_mixed(&mixed(q), d)?, q.n(), d.dim())?)
}

fn detector_dim(o: &Options, n: usize) -> Result<usize> {
    let dim = o.detector_dim.unwrap_or(n);
    if dim == 0 {
        bail!("detector_dim must be positive");
    }
    Ok(dim)
}

/// Uniform-overlap detectors: canonical when unseeded, Haar-rotated into
/// `detector_dim` dimensions when a seed is given.
fn overlap_detectors(o: &Options, n: usize, gamma: f64) -> Result<DetectorSet> {
    Ok(match o.seed {
        Some(seed) => uniform_overlap_detectors(n, gamma, detector_dim(o, n)?, Seed(seed))?,
        None if o.detector_dim.is_some_and(|d| d != n) => {
            bail!("--detector-dim with --gamma needs --seed for the random embedding")
        }
        None => DetectorSet::uniform_overlap(n, gamma)?,
    })
}

fn cmd_verify(o: &Options) -> Result<Status> {
    let tol = o.tolerances()?;
    let n = o.paths()?;
    let grid = grid_points(o)?;
    let scenario = o.scenario();
    let report = match (o.gamma()?, o.amplitudes.is_some()) {
        (Some(_), _) | (None, true) if scenario == Scenario::MixedMixed => {
            bail!("mixed_mixed verify takes a --seed, not --gamma or --amplitudes")
        }
        (Some(gamma), _) => {
            let q = build_quanton(o, n)?;
            let d = overlap_detectors(o, n, gamma)?;
            with_scanned_visibility(evaluate(&q, &d, &tol)?, &q, &d, grid)?
        }
        (None, true) => {
            let Some(seed) = o.seed else {
                bail!("verify with --amplitudes needs --gamma or --seed for the detectors");
            };
            let q = build_quanton(o, n)?;
            let d = sample_detectors(n, detector_dim(o, n)?, &mut Seed(seed).rng())?;
            with_scanned_visibility(evaluate(&q, &d, &tol)?, &q, &d, grid)?
        }
        (None, false) => {
            let Some(seed) = o.seed else {
                bail!("verify needs --gamma, --amplitudes or --seed");
            };
            // the instance is trial 0 of the campaign with the same seed and shape
            let mut cfg = CampaignConfig::new(scenario, 1, Seed(seed));
            cfg.n = Some(n);
            cfg.detector_dim = Some(detector_dim(o, n)?);
            cfg.rank = o.rank;
            cfg.tolerances = tol;
            let campaign = run_campaign(&cfg)?;
            campaign
                .records
                .into_iter()
                .next()
                .expect("one trial")
                .report
        }
    };
    let mut out = sink(o.output.as_deref())?;
    match o.format.unwrap_or(Format::Json) {
        Format::Json => write_json(&report, &mut *out)?,
        Format::Csv => {
            writeln!(
                out,
                "scenario,n,coherence,distinguishability,slack,duality_sum,passed"
            )?;
            writeln!(
                out,
                "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                report.scenario,
                report.n,
                report.coherence,
                report.distinguishability,
                report.slack,
                report.relation_residuals.duality_sum,
                report.passed()
            )?;
        }
    }
    out.flush()?;
    Ok(Status::from_pass(report.passed()))
}

fn with_scanned_visibility(
    report: DualityReport,
    q: &Quanton,
    d: &DetectorSet,
    grid: usize,
) -> Result<DualityReport> {
    if q.n() > 3 {
        return Ok(report);
    }
    let v = scan_visibility(&reduced(q, d)?, grid)?.visibility;
    Ok(report.with_visibility(v))
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let threads: usize = value
            .trim()
            .parse()
            .ok()
            .filter(|&t| t > 0)
            .with_context(|| format!("{THREADS_ENV} must be a positive integer, got '{value}'"))?;
        builder = builder.num_threads(threads);
    }
    Ok(builder.build()?)
}

/// `out` is a stem: `runs/a` and `runs/a.csv` both give `runs/a.csv` and `runs/a.json`.
fn campaign_paths(out: &Path) -> (PathBuf, PathBuf) {
    let stem = match out.extension().and_then(|e| e.to_str()) {
        Some("csv" | "json") => out.with_extension(""),
        _ => out.to_path_buf(),
    };
    let mut csv = stem.clone().into_os_string();
    csv.push(".csv");
    let mut json = stem.into_os_string();
    json.push(".json");
    (csv.into(), json.into())
}

fn cmd_campaign(o: &Options) -> Result<Status> {
    if o.gamma.is_some() || o.gammas.is_some() || o.amplitudes.is_some() {
        bail!("campaign draws every instance from the seed; --gamma, --gammas and --amplitudes do not apply");
    }
    let Some(seed) = o.seed else {
        bail!("campaign needs an explicit --seed");
    };
    let trials = o.trials.unwrap_or(DEFAULT_TRIALS);
    if trials == 0 {
        bail!("trials must be at least 1");
    }
    let mut cfg = CampaignConfig::new(o.scenario(), trials, Seed(seed));
    cfg.n = o.n;
    cfg.detector_dim = o.detector_dim;
    cfg.rank = o.rank;
    cfg.tolerances = o.tolerances()?;
    let campaign = thread_pool()?.install(|| run_campaign(&cfg))?;
    match &o.output {
        Some(out) => {
            let (csv_path, json_path) = campaign_paths(out);
            let mut csv = sink(Some(&csv_path))?;
            write_records_csv(&campaign.records, &mut csv)?;
            csv.flush()?;
            let mut json = sink(Some(&json_path))?;
            write_json(&campaign.summary, &mut *json)?;
            json.flush()?;
        }
        None => {
            let mut csv = sink(None)?;
            write_records_csv(&campaign.records, &mut csv)?;
            csv.flush()?;
            write_json(&campaign.summary, &mut io::stderr().lock())?;
        }
    }
    Ok(Status::from_pass(campaign.summary.violations == 0))
}

#[derive(Serialize)]
struct SweepRow<'a> {
    gamma: f64,
    report: &'a DualityReport,
}

fn cmd_sweep(o: &Options) -> Result<Status> {
    if o.scenario() == Scenario::MixedMixed {
        bail!("sweep supports pure_pure and mixed_pure");
    }
    let tol = o.tolerances()?;
    let n = o.paths()?;
    let gammas = o.gamma_values()?;
    let q = build_quanton(o, n)?;
    let reports = sweep_overlap(&q, &gammas, &tol)?;
    let mut out = sink(o.output.as_deref())?;
    match o.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            writeln!(out, "gamma,coherence,distinguishability,slack,visibility")?;
            for (g, r) in gammas.iter().zip(&reports) {
                let v = r
                    .visibility
                    .map(|v| format!("{v:.16e}"))
                    .unwrap_or_default();
                writeln!(
                    out,
                    "{g:.16e},{:.16e},{:.16e},{:.16e},{v}",
                    r.coherence, r.distinguishability, r.slack
                )?;
            }
        }
        Format::Json => {
            let rows: Vec<SweepRow> = gammas
                .iter()
                .zip(&reports)
                .map(|(&gamma, report)| SweepRow { gamma, report })
                .collect();
            write_json(&rows, &mut *out)?;
        }
    }
    out.flush()?;
    Ok(Status::from_pass(reports.iter().all(DualityReport::passed)))
}

#[derive(Serialize)]
struct FringeOutput<'a> {
    visibility: f64,
    coherence: f64,
    distinguishability: f64,
    i_max: f64,
    i_min: f64,
    theta: &'a [f64],
    intensity: &'a [f64],
}

fn cmd_fringe(o: &Options) -> Result<Status> {
    if o.scenario() == Scenario::MixedMixed {
        bail!("fringe supports pure_pure and mixed_pure");
    }
    let Some(gamma) = o.gamma()? else {
        bail!("fringe needs --gamma");
    };
    let tol = o.tolerances()?;
    let n = o.paths()?;
    let grid = grid_points(o)?;
    let q = build_quanton(o, n)?;
    let d = overlap_detectors(o, n, gamma)?;
    let report = evaluate(&q, &d, &tol)?;
    let scan = scan_visibility(&reduced(&q, &d)?, grid)?;
    let mut out = sink(o.output.as_deref())?;
    match o.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            writeln!(
                out,
                "# visibility={:.16e},coherence={:.16e},distinguishability={:.16e}",
                scan.visibility, report.coherence, report.distinguishability
            )?;
            scan.write_csv(&mut out)?;
        }
        Format::Json => write_json(
            &FringeOutput {
                visibility: scan.visibility,
                coherence: report.coherence,
                distinguishability: report.distinguishability,
                i_max: scan.i_max,
                i_min: scan.i_min,
                theta: &scan.phases,
                intensity: &scan.intensities,
            },
            &mut *out,
        )?,
    }
    out.flush()?;
    Ok(Status::from_pass(report.passed()))
}
