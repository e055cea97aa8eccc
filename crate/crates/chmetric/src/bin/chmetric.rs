//! Command-line front end: constructs conservative peakon-antipeakon
//! solutions, transforms and rescales them, evaluates the metric, and runs
//! the verification suites. Human-readable summaries go to stdout, machine
//! output (JSON, CSV) to the directory named by --out.
//!
//! Exit codes: 0 on success, 1 when a verification suite reports failure or
//! the computation breaks down, 2 on usage errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use chmetric::experiments::{
    self, format_sig, FigureConfig, FigureId, LipschitzConfig, SuiteConfig,
};
use chmetric::{metric, transform, Error, PeakonParams, Result};

#[derive(Parser)]
#[command(
    name = "chmetric",
    version,
    about = "Conservative Camassa-Holm solutions, pseudo-inverse coordinates, and the rescaled Lipschitz metric"
)]
struct Cli {
    /// Cap on worker threads (falls back to the CHMETRIC_THREADS
    /// environment variable; 0 or unset picks the rayon default).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the closed-form Eulerian fields (u, energy density, atoms).
    Fields(FieldsArgs),
    /// Transform a sampled snapshot to (Y, U, P^(1/2)) and rescale it.
    Transform(TransformArgs),
    /// Evolve Lagrangian data through wave breaking and compare against the
    /// closed form.
    Evolve(EvolveArgs),
    /// Residual of the exact solution in the rescaled evolution system over
    /// an N-doubling ladder.
    Residual(ResidualArgs),
    /// Distance between two rescaled solutions at one time.
    Metric(MetricArgs),
    /// Distance evolution for solution pairs plus the zero-solution
    /// contrast.
    Lipschitz(LipschitzArgs),
    /// Inequality catalog over the (energy, time) grid.
    Invariants(InvariantsArgs),
    /// Emit figure CSVs for one curve family.
    Figures(FiguresArgs),
}

#[derive(Args)]
struct FieldsArgs {
    /// Energy parameter E; the conserved energy is C = E^2.
    #[arg(long = "E", default_value_t = 2.0)]
    e: f64,
    /// Wave-breaking time.
    #[arg(long = "t0", default_value_t = 2.0)]
    t0: f64,
    /// Evaluation time (default: t0 + 1).
    #[arg(long = "t")]
    t: Option<f64>,
    /// Number of grid cells.
    #[arg(long = "N", default_value_t = 4096)]
    n: usize,
    /// Directory for machine-readable output.
    #[arg(long = "out")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TransformArgs {
    #[arg(long = "E", default_value_t = 2.0)]
    e: f64,
    #[arg(long = "t0", default_value_t = 2.0)]
    t0: f64,
    /// Evaluation time (default: t0 + 1).
    #[arg(long = "t")]
    t: Option<f64>,
    /// Number of energy-grid cells.
    #[arg(long = "N", default_value_t = 4096)]
    n: usize,
    #[arg(long = "out")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvolveArgs {
    #[arg(long = "E", default_value_t = 2.0)]
    e: f64,
    #[arg(long = "t0", default_value_t = 2.0)]
    t0: f64,
    /// Start time (default: t0 - 1).
    #[arg(long = "t")]
    t: Option<f64>,
    /// End time (default: t0 + 1).
    #[arg(long = "tmax")]
    tmax: Option<f64>,
    /// Time step.
    #[arg(long = "dt", default_value_t = 1e-3)]
    dt: f64,
    /// Number of Lagrangian labels.
    #[arg(long = "N", default_value_t = 1024)]
    n: usize,
    #[arg(long = "out")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ResidualArgs {
    #[arg(long = "E", default_value_t = 2.0)]
    e: f64,
    #[arg(long = "t0", default_value_t = 2.0)]
    t0: f64,
    /// Evaluation time (default: t0 + 1).
    #[arg(long = "t")]
    t: Option<f64>,
    /// Central-difference time step.
    #[arg(long = "dt", default_value_t = 1e-4)]
    dt: f64,
    /// Finest grid; the study runs the ladder N/4, N/2, N.
    #[arg(long = "N", default_value_t = 4096)]
    n: usize,
    #[arg(long = "out")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MetricArgs {
    /// Energy parameter of the first solution.
    #[arg(long = "E", default_value_t = 2.0)]
    e: f64,
    /// Breaking time of the first solution.
    #[arg(long = "t0", default_value_t = 2.0)]
    t0: f64,
    /// Energy parameter of the second solution.
    #[arg(long = "E2", default_value_t = 2.0)]
    e2: f64,
    /// Breaking time of the second solution (default: same as --t0).
    #[arg(long = "t02")]
    t02: Option<f64>,
    /// Evaluation time.
    #[arg(long = "t")]
    t: f64,
    /// Number of energy-grid cells (shared by both states).
    #[arg(long = "N", default_value_t = 4096)]
    n: usize,
    #[arg(long = "out")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LipschitzArgs {
    /// Number of energy-grid cells.
    #[arg(long = "N", default_value_t = 4096)]
    n: usize,
    /// Breaking time shared by the study pairs.
    #[arg(long = "t0", default_value_t = 2.0)]
    t0: f64,
    /// End of the sampled time window [0, tmax].
    #[arg(long = "tmax", default_value_t = 4.0)]
    tmax: f64,
    /// Number of time samples on the window.
    #[arg(long = "samples", default_value_t = 33)]
    samples: usize,
    #[arg(long = "out")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InvariantsArgs {
    /// Suite configuration: the literal "default" or a path to a key=value
    /// file with keys energies, offsets, t0, N.
    #[arg(long = "config", default_value = "default")]
    config: String,
    #[arg(long = "out")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FiguresArgs {
    /// Curve family: u, G, p, psqrt, Y, U, P, Psqrt, tY, tU, tP, tPsqrt,
    /// resc.
    #[arg(long = "id")]
    id: String,
    #[arg(long = "E", default_value_t = 2.0)]
    e: f64,
    #[arg(long = "t0", default_value_t = 2.0)]
    t0: f64,
    /// Evaluation times; repeat the flag for several (default: 0 1.5 2 4).
    #[arg(long = "t")]
    times: Vec<f64>,
    /// Points per curve.
    #[arg(long = "N", default_value_t = 512)]
    n: usize,
    /// Directory the CSV files are written to.
    #[arg(long = "out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = setup_threads(cli.threads) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}

/// Usage-class errors (bad parameters, malformed config) exit 2; breakdowns
/// during an otherwise well-posed computation exit 1.
fn exit_for(err: &Error) -> u8 {
    match err {
        Error::InvalidInput(_)
        | Error::UnknownFigure { .. }
        | Error::ZeroSolution
        | Error::ZeroEnergy
        | Error::BetaUndefinedAtBreaking { .. }
        | Error::EtaOutOfRange { .. }
        | Error::TargetOutOfRange { .. }
        | Error::GridMismatch { .. } => 2,
        _ => 1,
    }
}

fn setup_threads(flag: Option<usize>) -> Result<()> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("CHMETRIC_THREADS") {
            Ok(s) => Some(s.trim().parse::<usize>().map_err(|_| {
                Error::InvalidInput(format!(
                    "CHMETRIC_THREADS must be a nonnegative integer, got {s:?}"
                ))
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = n.filter(|&n| n > 0) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Fields(a) => run_fields(a),
        Command::Transform(a) => run_transform_cmd(a),
        Command::Evolve(a) => run_evolve_cmd(a),
        Command::Residual(a) => run_residual_cmd(a),
        Command::Metric(a) => run_metric(a),
        Command::Lipschitz(a) => run_lipschitz_cmd(a),
        Command::Invariants(a) => run_invariants_cmd(a),
        Command::Figures(a) => run_figures(a),
    }
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidInput(format!("serialize {name}: {e}")))?;
    text.push('\n');
    let path = dir.join(name);
    fs::write(&path, text)?;
    Ok(path)
}

fn note_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn run_fields(a: FieldsArgs) -> Result<u8> {
    let pk = PeakonParams::new(a.e, a.t0)?;
    let t = a.t.unwrap_or(a.t0 + 1.0);
    let snap = pk.sample_eulerian(t, a.n);
    snap.validate()?;
    let sup_u = snap.u.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let atom_mass: f64 = snap.atoms.iter().map(|&(_, m)| m).sum();
    println!(
        "Eulerian snapshot: E = {}, t0 = {}, t = {}, {} nodes",
        format_sig(a.e),
        format_sig(a.t0),
        format_sig(t),
        snap.x.len()
    );
    println!(
        "  C = {}, sup|u| = {}, atoms: {} carrying mass {}",
        format_sig(snap.c),
        format_sig(sup_u),
        snap.atoms.len(),
        format_sig(atom_mass)
    );
    if let Some(dir) = a.out {
        note_written(&[write_json(&dir, "snapshot.json", &snap)?]);
    }
    Ok(0)
}

fn run_transform_cmd(a: TransformArgs) -> Result<u8> {
    let pk = PeakonParams::new(a.e, a.t0)?;
    let t = a.t.unwrap_or(a.t0 + 1.0);
    let snap = pk.sample_eulerian(t, 4 * a.n);
    let ts = transform::build_transformed(&snap, a.n)?;
    ts.validate()?;
    let sc = transform::rescale(&ts);
    sc.validate()?;
    let exact = pk.scaled_snapshot_exact(t, a.n)?;
    let mut gap = 0.0f64;
    for k in 0..a.n {
        gap = gap.max((sc.y[k] - exact.y[k]).abs());
        gap = gap.max((sc.u[k] - exact.u[k]).abs());
        gap = gap.max((sc.psqrt[k] - exact.psqrt[k]).abs());
    }
    println!(
        "transformed state: E = {}, t0 = {}, t = {}, N = {}",
        format_sig(a.e),
        format_sig(a.t0),
        format_sig(t),
        a.n
    );
    println!(
        "  amplitude A = {}, relation residual = {}, sup gap to closed form = {}",
        format_sig(sc.a),
        format_sig(sc.relation_residual()),
        format_sig(gap)
    );
    if let Some(dir) = a.out {
        let mut written = vec![write_json(&dir, "transformed.json", &ts)?];
        written.push(write_json(&dir, "scaled.json", &sc)?);
        note_written(&written);
    }
    Ok(0)
}

fn run_evolve_cmd(a: EvolveArgs) -> Result<u8> {
    let t_start = a.t.unwrap_or(a.t0 - 1.0);
    let t_end = a.tmax.unwrap_or(a.t0 + 1.0);
    let report = experiments::run_evolve(a.e, a.t0, t_start, t_end, a.dt, a.n)?;
    print!("{}", report.render());
    if let Some(dir) = a.out {
        note_written(&[write_json(&dir, "evolve.json", &report)?]);
    }
    Ok(if report.pass { 0 } else { 1 })
}

fn run_residual_cmd(a: ResidualArgs) -> Result<u8> {
    let t = a.t.unwrap_or(a.t0 + 1.0);
    if a.n < 64 {
        return Err(Error::InvalidInput("residual ladder needs N >= 64".into()));
    }
    let ns = [a.n / 4, a.n / 2, a.n];
    let study = experiments::run_residual(a.e, a.t0, t, a.dt, &ns)?;
    print!("{}", study.render());
    if let Some(dir) = a.out {
        note_written(&[write_json(&dir, "residual.json", &study)?]);
    }
    Ok(if study.pass { 0 } else { 1 })
}

fn run_metric(a: MetricArgs) -> Result<u8> {
    let pk1 = PeakonParams::new(a.e, a.t0)?;
    let pk2 = PeakonParams::new(a.e2, a.t02.unwrap_or(a.t0))?;
    let s1 = pk1.scaled_snapshot_exact(a.t, a.n)?;
    let s2 = pk2.scaled_snapshot_exact(a.t, a.n)?;
    let d = metric::distance(&s1, &s2)?;
    println!(
        "d at t = {} between (E = {}, t0 = {}) and (E = {}, t0 = {}), N = {}:",
        format_sig(a.t),
        format_sig(pk1.e),
        format_sig(pk1.t0),
        format_sig(pk2.e),
        format_sig(pk2.t0),
        a.n
    );
    println!(
        "  dY = {}, dU = {}, dP = {}, dA = {}",
        format_sig(d.d_y),
        format_sig(d.d_u),
        format_sig(d.d_p),
        format_sig(d.d_a)
    );
    println!("  total = {}", format_sig(d.total));
    if let Some(dir) = a.out {
        note_written(&[write_json(&dir, "metric.json", &d)?]);
    }
    Ok(0)
}

fn run_lipschitz_cmd(a: LipschitzArgs) -> Result<u8> {
    if a.samples < 2 {
        return Err(Error::InvalidInput("need at least 2 time samples".into()));
    }
    let cfg = LipschitzConfig {
        n: a.n,
        t0: a.t0,
        t_max: a.tmax,
        samples: a.samples,
    };
    let study = experiments::run_lipschitz(&cfg)?;
    print!("{}", study.render());
    if let Some(dir) = a.out {
        let mut written = vec![write_json(&dir, "lipschitz.json", &study)?];
        for pair in &study.pairs {
            let mut text = String::from("t,dY,dU,dP,dA,total\n");
            for entry in &pair.series {
                text.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    format_sig(entry.t),
                    format_sig(entry.d.d_y),
                    format_sig(entry.d.d_u),
                    format_sig(entry.d.d_p),
                    format_sig(entry.d.d_a),
                    format_sig(entry.d.total)
                ));
            }
            let name = format!("series_{}.csv", pair.label.replace(' ', "_"));
            let path = dir.join(&name);
            fs::write(&path, text)?;
            written.push(path);
        }
        note_written(&written);
    }
    Ok(if study.pass { 0 } else { 1 })
}

fn run_invariants_cmd(a: InvariantsArgs) -> Result<u8> {
    let cfg = if a.config == "default" {
        SuiteConfig::default()
    } else {
        let text = fs::read_to_string(&a.config)
            .map_err(|e| Error::InvalidInput(format!("config {}: {e}", a.config)))?;
        experiments::parse_config(&text)?
    };
    let report = experiments::run_invariants(&cfg)?;
    print!("{}", report.render());
    if let Some(dir) = a.out {
        note_written(&[write_json(&dir, "invariants.json", &report)?]);
    }
    Ok(if report.pass { 0 } else { 1 })
}

fn run_figures(a: FiguresArgs) -> Result<u8> {
    let id = FigureId::parse(&a.id)?;
    let mut cfg = FigureConfig {
        e: a.e,
        t0: a.t0,
        n: a.n,
        ..FigureConfig::default()
    };
    if !a.times.is_empty() {
        cfg.times = a.times;
    }
    let written = experiments::emit_figures(id, &cfg, &a.out)?;
    note_written(&written);
    Ok(0)
}
