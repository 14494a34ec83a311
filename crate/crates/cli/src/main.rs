use clap::{Args, Parser, Subcommand};
use hillfila_core::config::{parse_config_with, serialize_config};
use hillfila_core::diagnostics::{read_diagnostics_csv, DiagnosticsObserver, DiagnosticsParams};
use hillfila_core::flow_map::{advect, classify_axis_fate, Interpolation};
use hillfila_core::snapshot::{
    history_from_snapshots, parse_snapshot, Every, Snapshot, SnapshotWriter,
};
use hillfila_core::validation::oracle_suite;
use hillfila_core::{make_scenario, run, HalfPlanePoint, ScenarioConfig, ScenarioKind};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Axisymmetric Euler simulator for perturbations of Hill's spherical vortex.
#[derive(Parser)]
#[command(name = "hillfila", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write diagnostics, snapshots and the resolved config.
    Run(RunArgs),
    /// Advect seed points through a stored run and classify axis fates.
    Trace(TraceArgs),
    /// Check the build against analytic oracles.
    Validate,
    /// Write a gnuplot script for the outputs of a run.
    Plot(PlotArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    #[arg(long = "h-quad")]
    h_quad: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "snapshot-every")]
    snapshot_every: Option<usize>,
    #[arg(long = "match-volume")]
    match_volume: bool,
}

#[derive(Args)]
struct TraceArgs {
    /// Directory of a finished run.
    #[arg(long)]
    out: PathBuf,
    /// File of `r,z` seed lines.
    #[arg(long = "seed-points")]
    seed_points: PathBuf,
    /// Half-width of the front band used for fate classification.
    #[arg(long)]
    margin: Option<f64>,
    /// Advection step (defaults to the run's dt).
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Usage(String),
    Failed(String),
}

impl From<hillfila_core::Error> for Failure {
    fn from(e: hillfila_core::Error) -> Self {
        Failure::Failed(e.to_string())
    }
}

fn resolve_config(a: &RunArgs) -> Result<ScenarioConfig, Failure> {
    let kind = match &a.scenario {
        Some(s) => Some(
            s.parse::<ScenarioKind>()
                .map_err(|e| Failure::Usage(e.to_string()))?,
        ),
        None => None,
    };
    let mut cfg = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", p.display())))?;
            parse_config_with(&text, kind).map_err(|e| Failure::Usage(e.to_string()))?
        }
        None => ScenarioConfig::preset(kind.unwrap_or(ScenarioKind::Hill)),
    };
    if let Some(v) = a.dt {
        cfg.dt = v;
    }
    if let Some(v) = a.t_end {
        cfg.t_end = v;
    }
    if let Some(v) = a.h_quad {
        cfg.h_quad = v;
    }
    if let Some(v) = &a.out {
        cfg.out = v.display().to_string();
    }
    if let Some(v) = a.snapshot_every {
        cfg.snapshot_every = v;
    }
    if a.match_volume {
        cfg.match_volume = true;
    }
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

fn cmd_run(a: &RunArgs) -> Result<(), Failure> {
    let cfg = resolve_config(a)?;
    let state = make_scenario(&cfg).map_err(|e| Failure::Usage(e.to_string()))?;
    let params = cfg
        .run_params()
        .map_err(|e| Failure::Usage(e.to_string()))?;

    let out = PathBuf::from(&cfg.out);
    fs::create_dir_all(&out).map_err(|e| Failure::Failed(e.to_string()))?;
    fs::write(out.join("config.resolved"), serialize_config(&cfg))
        .map_err(|e| Failure::Failed(e.to_string()))?;
    let csv = fs::File::create(out.join("diagnostics.csv"))
        .map_err(|e| Failure::Failed(e.to_string()))?;
    let mut dp = DiagnosticsParams::new(cfg.h_quad);
    dp.with_energy = cfg.energy;
    let diag = DiagnosticsObserver::new(dp).with_writer(Box::new(std::io::BufWriter::new(csv)))?;
    let mut diag = Every::new(cfg.diag_every, diag);
    let mut snaps = Every::new(
        cfg.snapshot_every,
        SnapshotWriter::new(out.join("snapshots"))?,
    );

    let outcome = run(state, &params, &mut [&mut diag, &mut snaps])?;
    let records = &diag.inner.records;
    println!(
        "{}: {} steps to t = {}, {} diagnostics rows, {} snapshots in {}",
        cfg.scenario,
        outcome.steps,
        outcome.state.t(),
        records.len(),
        snaps.inner.written.len(),
        out.display()
    );
    if let Some(last) = records.last() {
        println!(
            "final tau = {:.6}, speed residual = {:.3e}",
            last.tau, last.speed_residual
        );
    }
    if let Some(reason) = outcome.stopped {
        eprintln!("run stopped early: {reason}");
    }
    Ok(())
}

fn parse_seeds(text: &str) -> Result<Vec<HalfPlanePoint>, Failure> {
    let mut seeds = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() || line == "r,z" {
            continue;
        }
        let bad = || Failure::Usage(format!("seed line {}: expected r,z, got '{raw}'", k + 1));
        let (r, z) = line.split_once(',').ok_or_else(bad)?;
        let r: f64 = r.trim().parse().map_err(|_| bad())?;
        let z: f64 = z.trim().parse().map_err(|_| bad())?;
        if !(r >= 0.0 && r.is_finite() && z.is_finite()) {
            return Err(bad());
        }
        seeds.push(HalfPlanePoint::new(r, z));
    }
    if seeds.is_empty() {
        return Err(Failure::Usage("no seed points given".into()));
    }
    Ok(seeds)
}

fn read_snapshots(dir: &Path) -> Result<Vec<Snapshot>, Failure> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    files
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| Failure::Failed(e.to_string()))?;
            parse_snapshot(&text).map_err(|e| Failure::Failed(format!("{}: {e}", p.display())))
        })
        .collect()
}

fn cmd_trace(a: &TraceArgs) -> Result<(), Failure> {
    let cfg_text = fs::read_to_string(a.out.join("config.resolved"))
        .map_err(|e| Failure::Usage(format!("not a run directory ({e})")))?;
    let cfg = parse_config_with(&cfg_text, None).map_err(|e| Failure::Usage(e.to_string()))?;
    let seed_text = fs::read_to_string(&a.seed_points)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", a.seed_points.display())))?;
    let seeds = parse_seeds(&seed_text)?;
    let margin = a.margin.unwrap_or(cfg.margin);
    let dt = a.dt.unwrap_or(cfg.dt);
    if !(margin > 0.0 && dt > 0.0) {
        return Err(Failure::Usage("margin and dt must be positive".into()));
    }
    let snaps = read_snapshots(&a.out.join("snapshots"))?;
    if snaps.len() < 2 {
        return Err(Failure::Failed(
            "a trace needs at least two snapshots".into(),
        ));
    }
    let history = history_from_snapshots(&snaps, 1.0, cfg.h_quad, Interpolation::Linear)?;
    let (t0, t1) = history.span().expect("nonempty history");
    let diag_text = fs::read_to_string(a.out.join("diagnostics.csv"))
        .map_err(|e| Failure::Failed(e.to_string()))?;
    let tau_series: Vec<(f64, f64)> = read_diagnostics_csv(&diag_text)?
        .iter()
        .map(|r| (r.t, r.tau))
        .collect();

    let dir = a.out.join("traces");
    fs::create_dir_all(&dir).map_err(|e| Failure::Failed(e.to_string()))?;
    let mut fates = String::from("seed,r0,z0,fate\n");
    for (k, seed) in seeds.iter().enumerate() {
        let path = advect(&history, t0, *seed, t1, dt)?;
        let mut text = String::from("t,r,z\n");
        for (t, p) in &path {
            let _ = writeln!(text, "{t},{:.16e},{:.16e}", p.r, p.z);
        }
        fs::write(dir.join(format!("seed_{k:03}.csv")), text)
            .map_err(|e| Failure::Failed(e.to_string()))?;
        let fate = if seed.r == 0.0 {
            match classify_axis_fate(&path, &tau_series, margin) {
                Ok(f) => f.label().to_string(),
                Err(e) => format!("unclassified ({e})"),
            }
        } else {
            "off-axis".to_string()
        };
        println!("seed {k}: ({}, {}) -> {fate}", seed.r, seed.z);
        let _ = writeln!(fates, "{k},{},{},{fate}", seed.r, seed.z);
    }
    fs::write(dir.join("fates.csv"), fates).map_err(|e| Failure::Failed(e.to_string()))?;
    Ok(())
}

fn cmd_validate() -> Result<(), Failure> {
    let rows = oracle_suite()?;
    let mut all = true;
    for r in &rows {
        let tag = if r.pass() { "PASS" } else { "FAIL" };
        all &= r.pass();
        println!(
            "{tag}  {:<50} error {:.3e}  tolerance {:.1e}",
            r.name, r.error, r.tolerance
        );
    }
    if all {
        Ok(())
    } else {
        Err(Failure::Failed("validation failed".into()))
    }
}

fn plot_script(dir: &Path) -> String {
    let d = dir.display();
    format!(
        "# gnuplot script for the run in {d}
set datafile separator ','
set key autotitle columnhead
set terminal pngcairo size 900,600
set output '{d}/tau.png'
set xlabel 't'
plot '{d}/diagnostics.csv' using 1:2 with linespoints title 'tau', \\
     '{d}/diagnostics.csv' using 1:(2.0/15.0*$1) with lines title 'W t'
set output '{d}/growth.png'
plot '{d}/diagnostics.csv' using 1:4 with linespoints title 'diameter', \\
     '{d}/diagnostics.csv' using 1:5 with linespoints title 'perimeter'
set output '{d}/conserved.png'
plot '{d}/diagnostics.csv' using 1:7 with lines title 'impulse', \\
     '{d}/diagnostics.csv' using 1:8 with lines title 'energy', \\
     '{d}/diagnostics.csv' using 1:9 with lines title 'l1'
set output '{d}/vorticity.png'
plot '{d}/diagnostics.csv' using 1:12 with lines title 'sup r xi', \\
     '{d}/diagnostics.csv' using 1:13 with lines title 'max dr xi'
set output '{d}/contours.png'
set datafile commentschars '#'
set size ratio -1
set xlabel 'r'
set ylabel 'z'
plot for [f in system('ls {d}/snapshots/*.csv 2>/dev/null')] f using 1:2 with lines notitle
"
    )
}

fn cmd_plot(a: &PlotArgs) -> Result<(), Failure> {
    if !a.out.join("diagnostics.csv").is_file() {
        return Err(Failure::Usage(format!(
            "{} holds no diagnostics.csv",
            a.out.display()
        )));
    }
    let path = a.out.join("plot.gp");
    fs::write(&path, plot_script(&a.out)).map_err(|e| Failure::Failed(e.to_string()))?;
    println!("{}", path.display());
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("HILLFILA_THREADS") {
        let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
            Failure::Usage(format!(
                "HILLFILA_THREADS must be a positive integer, got '{v}'"
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Failed(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Trace(a) => cmd_trace(a),
        Command::Validate => cmd_validate(),
        Command::Plot(a) => cmd_plot(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Failed(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
