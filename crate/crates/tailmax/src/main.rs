//! `tailmax` — tail orders of maximal and diagonal dependence from the
//! command line.
//!
//! Subcommands:
//! - `simulate`: reproduce the generalized-Clayton replication study;
//! - `estimate`: TOMD/TODD estimation on a CSV of price series;
//! - `gof`: one-sided bound tests with resampled critical values;
//! - `whitenoise`: portmanteau diagnostics on the extreme-pair subseries.
//!
//! Exit codes: 0 success, 2 flag validation (clap), 3 domain/parameter
//! error, 4 data error, 5 empty/degenerate selection, 6 I/O error.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use tailmax::data::{align_and_log_diff, load_csv};
use tailmax::empirical::{diagonal_selection, mtd_maximizer, pseudo_observations, PseudoSample, RectangleSelection};
use tailmax::estimators::{relative_difference, todd_estimate, tomd_estimate};
use tailmax::gof::{gof_test_with_scheme, Direction, GofResult, ResampleScheme, StatKind};
use tailmax::portmanteau::{portmanteau_suite, retention_summary};
use tailmax::report::{
    histogram, write_histogram_csv, write_histogram_svg, write_json, write_replications_csv,
    write_scatter_csv, RunReport,
};
use tailmax::simulation::{simulation_study, SimConfig};
use tailmax::Error;

#[derive(Parser)]
#[command(name = "tailmax", version, about = "Tail orders of maximal and diagonal dependence")]
struct Cli {
    /// Worker thread cap (default: TAILMAX_THREADS or all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the generalized-Clayton replication study.
    Simulate(SimulateArgs),
    /// Estimate TOMD and TODD from a CSV of price series.
    Estimate(EstimateArgs),
    /// Test the bound F*_q >= uv with resampled critical values.
    Gof(GofArgs),
    /// Portmanteau white-noise diagnostics on the extreme-pair subseries.
    Whitenoise(WhitenoiseArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    gamma0: f64,
    #[arg(long)]
    gamma1: f64,
    #[arg(long, default_value_t = 0.6)]
    phi: f64,
    #[arg(long, default_value_t = 500_000)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long)]
    q: f64,
    #[arg(long, default_value_t = 5)]
    m: usize,
    #[arg(long, default_value_t = 1e-6)]
    theta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Skip the SVG histogram.
    #[arg(long)]
    no_svg: bool,
}

#[derive(Args)]
struct InputArgs {
    /// CSV with a `date` column plus named price columns.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    col_x: String,
    #[arg(long)]
    col_y: String,
    /// Analyze gains instead of losses (negates the returns).
    #[arg(long)]
    negate_returns: bool,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    q: f64,
    #[arg(long, default_value_t = 5)]
    m: usize,
    #[arg(long, default_value_t = 1e-6)]
    theta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Extra block sizes for a sensitivity sweep, e.g. --m-sweep 2,5,10.
    #[arg(long, value_delimiter = ',')]
    m_sweep: Vec<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GofArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    q: f64,
    /// below | above | both
    #[arg(long, default_value = "both")]
    direction: String,
    #[arg(long, default_value_t = 10_000)]
    resamples: usize,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Null scheme: independence-grid | iid-uniform | pair-bootstrap.
    #[arg(long, default_value = "independence-grid")]
    scheme: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct WhitenoiseArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    q: f64,
    #[arg(long, default_value_t = 20)]
    max_lag: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct EstimateReport {
    q: f64,
    m: usize,
    theta: f64,
    m_q: usize,
    n_q: usize,
    phi_star_n: f64,
    tomd: f64,
    todd: f64,
    rd_percent: f64,
    m_sweep: Vec<MSweepEntry>,
}

#[derive(Serialize)]
struct MSweepEntry {
    m: usize,
    tomd: f64,
}

#[derive(Serialize)]
struct GofReport {
    q: f64,
    m_q: usize,
    phi_star_n: f64,
    level: f64,
    n_resamples: usize,
    scheme: String,
    rows: Vec<GofResult>,
}

#[derive(Serialize)]
struct WhitenoiseReport {
    q: f64,
    m_q: usize,
    max_lag: usize,
    rows: Vec<tailmax::portmanteau::PortmanteauResult>,
    retained_percent_pooled: f64,
    retained_percent_per_test: Vec<(tailmax::portmanteau::PortmanteauKind, f64)>,
}

fn main() {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(|| {
        std::env::var("TAILMAX_THREADS").ok().and_then(|v| v.parse().ok())
    });
    if let Some(t) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("tailmax: cannot configure thread pool: {e}");
            std::process::exit(3);
        }
    }
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Gof(args) => cmd_gof(args),
        Command::Whitenoise(args) => cmd_whitenoise(args),
    };
    match result {
        Ok(()) => {}
        Err(e) => {
            eprintln!("tailmax: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::InvalidParameter(_) => 3,
        Error::Data(_) => 4,
        Error::EmptySelection(_) | Error::Degenerate(_) => 5,
        Error::Io(_) => 6,
    }
}

fn finish_report(
    out: &PathBuf,
    command: &str,
    parameters: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
    seed: u64,
    started: Instant,
) -> Result<(), Error> {
    let report = RunReport {
        command: command.to_string(),
        parameters,
        outputs,
        timing_seconds: started.elapsed().as_secs_f64(),
        seed,
    };
    write_json(out.join("run_report.json"), &report)
}

/// Load the two requested return columns as a pseudo-observation sample.
fn load_sample(input: &InputArgs) -> Result<PseudoSample, Error> {
    let cols = vec![input.col_x.clone(), input.col_y.clone()];
    let series = load_csv(&input.input, &cols)?;
    let panel = align_and_log_diff(&series)?;
    let mut x = panel
        .column(&input.col_x)
        .ok_or_else(|| Error::Data(format!("column `{}` missing after alignment", input.col_x)))?
        .to_vec();
    let mut y = panel
        .column(&input.col_y)
        .ok_or_else(|| Error::Data(format!("column `{}` missing after alignment", input.col_y)))?
        .to_vec();
    if input.negate_returns {
        for v in x.iter_mut().chain(y.iter_mut()) {
            *v = -*v;
        }
    }
    let label = format!("{}:{},{}", input.input.display(), input.col_x, input.col_y);
    pseudo_observations(&x, &y, &label)
}

fn select_rectangle(sample: &PseudoSample, q: f64) -> Result<RectangleSelection, Error> {
    let sel = mtd_maximizer(sample, q)?;
    if sel.m_q() == 0 {
        return Err(Error::EmptySelection(format!(
            "no pairs fall in the MTD rectangle at q={q} (n={}); increase q",
            sample.n()
        )));
    }
    Ok(sel)
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Error> {
    let started = Instant::now();
    let config = SimConfig {
        gamma0: args.gamma0,
        gamma1: args.gamma1,
        phi: args.phi,
        n: args.n,
        replications: args.reps,
        q: args.q,
        m: args.m,
        theta: args.theta,
        seed: args.seed,
    };
    config.validate()?;
    std::fs::create_dir_all(&args.out)?;
    let row = simulation_study(&config)?;
    let mut outputs = BTreeMap::new();
    let study_path = args.out.join("study_row.json");
    write_json(&study_path, &row)?;
    outputs.insert("study_row".into(), study_path.display().to_string());
    let reps_path = args.out.join("replications.csv");
    write_replications_csv(&reps_path, &row.replication_estimates)?;
    outputs.insert("replications".into(), reps_path.display().to_string());
    let bins = histogram(&row.replication_estimates, 30)?;
    let hist_path = args.out.join("histogram.csv");
    write_histogram_csv(&hist_path, &bins)?;
    outputs.insert("histogram".into(), hist_path.display().to_string());
    if !args.no_svg {
        let svg_path = args.out.join("histogram.svg");
        let title = format!(
            "TOMD estimates, GC({}, {}), q={}",
            args.gamma0, args.gamma1, args.q
        );
        write_histogram_svg(&svg_path, &bins, row.mean, row.stdev, &title)?;
        outputs.insert("histogram_svg".into(), svg_path.display().to_string());
    }
    println!(
        "mean {:.4}  sd {}  (true kappa* {:.4}, {} replications)",
        row.mean,
        row.stdev.map_or("n/a".into(), |s| format!("{s:.4}")),
        row.kappa_star_true,
        args.reps
    );
    let parameters = BTreeMap::from([
        ("gamma0".into(), args.gamma0.to_string()),
        ("gamma1".into(), args.gamma1.to_string()),
        ("phi".into(), args.phi.to_string()),
        ("n".into(), args.n.to_string()),
        ("reps".into(), args.reps.to_string()),
        ("q".into(), args.q.to_string()),
        ("m".into(), args.m.to_string()),
        ("theta".into(), args.theta.to_string()),
    ]);
    finish_report(&args.out, "simulate", parameters, outputs, args.seed, started)
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), Error> {
    let started = Instant::now();
    if !(args.q > 0.0 && args.q <= 1.0) {
        return Err(Error::InvalidParameter(format!("q must lie in (0,1], got {}", args.q)));
    }
    std::fs::create_dir_all(&args.out)?;
    let sample = load_sample(&args.input)?;
    let sel = select_rectangle(&sample, args.q)?;
    let diag = diagonal_selection(&sample, args.q)?;
    let n_q = diag.w_values.len();
    if n_q < 3 {
        return Err(Error::EmptySelection(format!(
            "only {n_q} pairs in the diagonal square at q={} (n={}); increase q",
            args.q,
            sample.n()
        )));
    }
    let tomd = tomd_estimate(&sel, args.m, args.theta, args.seed)?;
    let todd = todd_estimate(&diag)?;
    let rd = relative_difference(tomd.value, todd.value)?;
    let mut m_sweep = Vec::new();
    for &m in &args.m_sweep {
        let e = tomd_estimate(&sel, m, args.theta, args.seed)?;
        m_sweep.push(MSweepEntry { m, tomd: e.value });
    }
    let report = EstimateReport {
        q: args.q,
        m: args.m,
        theta: args.theta,
        m_q: sel.m_q(),
        n_q,
        phi_star_n: sel.phi_star_n,
        tomd: tomd.value,
        todd: todd.value,
        rd_percent: rd,
        m_sweep,
    };
    let mut outputs = BTreeMap::new();
    let est_path = args.out.join("estimate.json");
    write_json(&est_path, &report)?;
    outputs.insert("estimate".into(), est_path.display().to_string());
    let scatter_path = args.out.join("extreme_pairs.csv");
    write_scatter_csv(&scatter_path, &sel.scaled_pairs)?;
    outputs.insert("extreme_pairs".into(), scatter_path.display().to_string());
    println!(
        "q={}  m_q={}  n_q={}  phi*_n={:.6}  tomd={:.4}  todd={:.4}  rd={:.2}%",
        args.q,
        report.m_q,
        report.n_q,
        report.phi_star_n,
        report.tomd,
        report.todd,
        report.rd_percent
    );
    let parameters = BTreeMap::from([
        ("input".into(), args.input.input.display().to_string()),
        ("col_x".into(), args.input.col_x.clone()),
        ("col_y".into(), args.input.col_y.clone()),
        ("negate_returns".into(), args.input.negate_returns.to_string()),
        ("q".into(), args.q.to_string()),
        ("m".into(), args.m.to_string()),
        ("theta".into(), args.theta.to_string()),
    ]);
    finish_report(&args.out, "estimate", parameters, outputs, args.seed, started)
}

fn cmd_gof(args: GofArgs) -> Result<(), Error> {
    let started = Instant::now();
    if !(args.q > 0.0 && args.q <= 1.0) {
        return Err(Error::InvalidParameter(format!("q must lie in (0,1], got {}", args.q)));
    }
    let directions: Vec<Direction> = match args.direction.as_str() {
        "below" => vec![Direction::BelowIndependence],
        "above" => vec![Direction::AboveIndependence],
        "both" => vec![Direction::BelowIndependence, Direction::AboveIndependence],
        other => {
            return Err(Error::InvalidParameter(format!(
                "--direction must be below, above or both, got `{other}`"
            )))
        }
    };
    let scheme = match args.scheme.as_str() {
        "independence-grid" => ResampleScheme::IndependenceGrid,
        "iid-uniform" => ResampleScheme::IidUniform,
        "pair-bootstrap" => ResampleScheme::PairBootstrap,
        other => {
            return Err(Error::InvalidParameter(format!(
                "--scheme must be independence-grid, iid-uniform or pair-bootstrap, got `{other}`"
            )))
        }
    };
    std::fs::create_dir_all(&args.out)?;
    let sample = load_sample(&args.input)?;
    let sel = select_rectangle(&sample, args.q)?;
    let mut rows = Vec::new();
    for &direction in &directions {
        for kind in [StatKind::Ks, StatKind::CvM, StatKind::Ad] {
            rows.push(gof_test_with_scheme(
                &sel,
                kind,
                direction,
                args.resamples,
                args.level,
                args.seed,
                scheme,
            )?);
        }
    }
    for r in &rows {
        println!(
            "{:?} {:?}: stat {:.4}  crit {:.4}  {:?}",
            r.statistic_kind, r.direction, r.statistic, r.critical_value, r.decision
        );
    }
    let report = GofReport {
        q: args.q,
        m_q: sel.m_q(),
        phi_star_n: sel.phi_star_n,
        level: args.level,
        n_resamples: args.resamples,
        scheme: args.scheme.clone(),
        rows,
    };
    let mut outputs = BTreeMap::new();
    let path = args.out.join("gof.json");
    write_json(&path, &report)?;
    outputs.insert("gof".into(), path.display().to_string());
    let parameters = BTreeMap::from([
        ("input".into(), args.input.input.display().to_string()),
        ("col_x".into(), args.input.col_x.clone()),
        ("col_y".into(), args.input.col_y.clone()),
        ("q".into(), args.q.to_string()),
        ("direction".into(), args.direction.clone()),
        ("resamples".into(), args.resamples.to_string()),
        ("level".into(), args.level.to_string()),
        ("scheme".into(), args.scheme.clone()),
    ]);
    finish_report(&args.out, "gof", parameters, outputs, args.seed, started)
}

fn cmd_whitenoise(args: WhitenoiseArgs) -> Result<(), Error> {
    let started = Instant::now();
    if !(args.q > 0.0 && args.q <= 1.0) {
        return Err(Error::InvalidParameter(format!("q must lie in (0,1], got {}", args.q)));
    }
    std::fs::create_dir_all(&args.out)?;
    let cols = vec![args.input.col_x.clone(), args.input.col_y.clone()];
    let series = load_csv(&args.input.input, &cols)?;
    let panel = align_and_log_diff(&series)?;
    let x = panel
        .column(&args.input.col_x)
        .ok_or_else(|| Error::Data("missing x column".into()))?;
    let y = panel
        .column(&args.input.col_y)
        .ok_or_else(|| Error::Data("missing y column".into()))?;
    let sample = load_sample(&args.input)?;
    let sel = select_rectangle(&sample, args.q)?;
    if sel.m_q() < 5 * args.max_lag {
        return Err(Error::Data(format!(
            "extreme-pair subseries has m_q={} members; need at least {} for max_lag={}",
            sel.m_q(),
            5 * args.max_lag,
            args.max_lag
        )));
    }
    // extreme-pair subseries: the raw returns at the rectangle members,
    // kept in time order
    let sub_x: Vec<f64> = sel.member_indices.iter().map(|&i| x[i]).collect();
    let sub_y: Vec<f64> = sel.member_indices.iter().map(|&i| y[i]).collect();
    let rows = portmanteau_suite(&sub_x, &sub_y, args.max_lag)?;
    let (pooled, per_test) = retention_summary(&rows, 0.05);
    println!(
        "m_q={}  retained {pooled:.1}% of {} (test, lag) combinations at 5%",
        sel.m_q(),
        rows.len()
    );
    let report = WhitenoiseReport {
        q: args.q,
        m_q: sel.m_q(),
        max_lag: args.max_lag,
        rows,
        retained_percent_pooled: pooled,
        retained_percent_per_test: per_test,
    };
    let mut outputs = BTreeMap::new();
    let path = args.out.join("whitenoise.json");
    write_json(&path, &report)?;
    outputs.insert("whitenoise".into(), path.display().to_string());
    let parameters = BTreeMap::from([
        ("input".into(), args.input.input.display().to_string()),
        ("col_x".into(), args.input.col_x.clone()),
        ("col_y".into(), args.input.col_y.clone()),
        ("q".into(), args.q.to_string()),
        ("max_lag".into(), args.max_lag.to_string()),
    ]);
    finish_report(&args.out, "whitenoise", parameters, outputs, 0, started)
}
