use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use optomod::acceptance::{run_all, AcceptanceOptions};
use optomod::classical::find_periodic_orbit;
use optomod::config::RunConfig;
use optomod::covariance::{routh_hurwitz_stable, steady_periodic_covariance, CovOptions};
use optomod::metrics::period_extrema;
use optomod::params::constants;
use optomod::perturbative::{coefficient_table, report};
use optomod::sweep::{
    csv_string, gnuplot_script, heatmaps, isolated_unstable_cells, run_phase_sweep, run_sweep,
    Axis, AxisKind, CellStatus, SweepGrid,
};
use optomod::{Error, Result};

#[derive(Parser)]
#[command(name = "optomod", version, about = "Modulated optomechanical cavity: periodic Gaussian states and their quantum signatures")]
struct Cli {
    /// JSON configuration; omitted keys take reference values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Samples per modulation period.
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Print the physical constants in use.
    #[arg(long, global = true)]
    constants: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Svg,
    Gnuplot,
}

#[derive(Subcommand)]
enum Command {
    /// Periodic steady state of one configuration and its period extrema.
    Steady,
    /// (Omega, epsilon) sweep with heatmaps.
    Sweep2d,
    /// Relative-phase sweep of two modulations.
    Phase,
    /// Harmonic-balance series.
    Perturb {
        #[arg(long)]
        order: Option<usize>,
        /// Semi-numeric coefficient table.
        #[arg(long)]
        paper_table: bool,
    },
    /// Routh-Hurwitz report along the periodic orbit.
    Stability,
    /// Run every acceptance check.
    Validate {
        /// Reduced grids for a fast smoke run.
        #[arg(long)]
        quick: bool,
    },
}

fn load(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p).map_err(|e| match e {
            Error::Io(io) => Error::Config(format!("cannot read {}: {io}", p.display())),
            other => other,
        })?,
        None => RunConfig::default(),
    };
    if let Some(w) = cli.workers {
        cfg.workers = w.max(1);
    }
    if let Some(n) = cli.samples {
        if n < 4 {
            return Err(Error::Config("--samples must be >= 4".into()));
        }
        cfg.settings.samples = n;
    }
    Ok(cfg)
}

fn out_dir(cli: &Cli) -> Result<PathBuf> {
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

fn steady(cli: &Cli, cfg: &RunConfig) -> Result<()> {
    let s = &cfg.settings;
    let orbit = find_periodic_orbit(&cfg.model, s.samples, &s.settle)?;
    let rh = routh_hurwitz_stable(&cfg.model, &orbit);
    if !rh.stable {
        return Err(Error::Instability {
            time: rh.worst_phase,
            reason: format!("Routh-Hurwitz margin {:.3e}", rh.worst_margin),
        });
    }
    let opts = CovOptions { settle: s.settle, source: s.source, ..CovOptions::default() };
    let cov = steady_periodic_covariance(&cfg.model, &orbit, s.samples, &opts)?;
    let summary = period_extrema(&cov, s.measured)?;
    println!("{}", summary.to_json()?);
    if let Some(dir) = cli.out.as_ref() {
        std::fs::create_dir_all(dir)?;
        let mut buf = Vec::new();
        summary.write_csv(&mut buf)?;
        write(dir, "metrics.csv", buf)?;
        write(dir, "metrics.json", summary.to_json()?)?;
        let mut buf = Vec::new();
        orbit.write_csv(&mut buf)?;
        write(dir, "orbit.csv", buf)?;
        let mut buf = Vec::new();
        cov.write_csv(&mut buf)?;
        write(dir, "covariance.csv", buf)?;
        write(dir, "run.json", serde_json::to_string_pretty(&cfg.metadata())?)?;
    }
    Ok(())
}

fn sweep2d(cli: &Cli, cfg: &RunConfig) -> Result<()> {
    let (o, e) = (cfg.omega_axis, cfg.epsilon_axis);
    let grid = SweepGrid::new(
        Axis::new(AxisKind::OmegaOverOmegaM, o.values())?,
        Some(Axis::new(AxisKind::Epsilon, e.values())?),
        cfg.model,
        cfg.settings,
    )?;
    let cells = run_sweep(&grid, cfg.workers)?;
    let dir = out_dir(cli)?;
    write(&dir, "sweep.csv", csv_string(&grid, &cells))?;
    match cli.format {
        Format::Csv => {}
        Format::Svg => {
            for (name, doc) in heatmaps(&grid, &cells) {
                write(&dir, &format!("{name}.svg"), doc)?;
            }
        }
        Format::Gnuplot => write(&dir, "sweep.gp", gnuplot_script(&grid, "sweep.csv"))?,
    }
    let mut meta = cfg.metadata();
    meta["grid"] = serde_json::json!({ "omega_over_omega_m": o, "epsilon": e });
    write(&dir, "run.json", serde_json::to_string_pretty(&meta)?)?;
    let count = |s| cells.iter().filter(|c| c.status == s).count();
    eprintln!(
        "{} cells: {} ok, {} unstable, {} non-converged",
        cells.len(),
        count(CellStatus::Ok),
        count(CellStatus::Unstable),
        count(CellStatus::NonConverged)
    );
    let isolated = isolated_unstable_cells(&grid, &cells);
    if !isolated.is_empty() {
        eprintln!("warning: unstable cells without a low-margin neighbour: {isolated:?}");
    }
    Ok(())
}

fn phase(cli: &Cli, cfg: &RunConfig) -> Result<()> {
    let mut model = cfg.model;
    if !model.modulation.is_active() {
        model.modulation.epsilon = 0.3;
        model.modulation.eta = 0.9;
        eprintln!("no modulation configured; using epsilon = 0.3, eta = 0.9");
    }
    let sweep = run_phase_sweep(&model, &cfg.settings, cfg.phase_points, cfg.workers)?;
    let dir = out_dir(cli)?;
    write(&dir, "phase.csv", csv_string(&sweep.grid, &sweep.cells))?;
    let mut buf = Vec::new();
    sweep.write_references(&mut buf)?;
    write(&dir, "phase_references.csv", buf)?;
    match cli.format {
        Format::Csv => {}
        Format::Svg => {
            for (name, doc) in sweep.charts() {
                write(&dir, &format!("phase_{name}.svg"), doc)?;
            }
        }
        Format::Gnuplot => write(&dir, "phase.gp", gnuplot_script(&sweep.grid, "phase.csv"))?,
    }
    let mut meta = cfg.metadata();
    meta["modulation"] = serde_json::to_value(model.modulation)?;
    write(&dir, "run.json", serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

fn perturb(cfg: &RunConfig, order: Option<usize>, table: bool) -> Result<()> {
    let order = order.unwrap_or(cfg.max_order);
    let mut model = cfg.model;
    if !model.modulation.is_active() {
        model.modulation.epsilon = 0.2;
    }
    if table {
        print!("{}", coefficient_table(&model, order)?);
    } else {
        println!("{}", serde_json::to_string_pretty(&report(&model, order)?)?);
    }
    Ok(())
}

fn stability(cfg: &RunConfig) -> Result<()> {
    let s = &cfg.settings;
    let orbit = find_periodic_orbit(&cfg.model, s.samples, &s.settle);
    let (report, outcome) = match orbit {
        Ok(o) => {
            let report = routh_hurwitz_stable(&cfg.model, &o);
            let opts = CovOptions { settle: s.settle, source: s.source, ..CovOptions::default() };
            let outcome = if report.stable {
                steady_periodic_covariance(&cfg.model, &o, s.samples, &opts).map(|_| ())
            } else {
                Ok(())
            };
            (Some(report), outcome)
        }
        Err(e) => (None, Err(e)),
    };
    let class = match (&report, &outcome) {
        (Some(r), out) => r.classify(out).label().to_string(),
        (None, Err(Error::Instability { .. })) => "classical divergence".into(),
        (None, Err(Error::NonConvergence { .. })) => "non-converged".into(),
        (None, Err(e)) => return Err(Error::Numerical(e.to_string())),
        (None, Ok(())) => unreachable!(),
    };
    let json = serde_json::json!({
        "class": class,
        "stable": report.as_ref().map(|r| r.stable),
        "marginal": report.as_ref().map(|r| r.marginal),
        "worst_margin": report.as_ref().map(|r| r.worst_margin),
        "worst_phase": report.as_ref().map(|r| r.worst_phase),
        "integration": outcome.as_ref().err().map(|e| e.to_string()),
    });
    println!("{}", serde_json::to_string_pretty(&json)?);
    Ok(())
}

fn validate(cfg: &RunConfig, workers: Option<usize>, quick: bool) -> Result<bool> {
    let mut opts = AcceptanceOptions { settings: cfg.settings, ..AcceptanceOptions::default() };
    if let Some(w) = workers {
        opts.workers = w.max(1);
    }
    if quick {
        opts.grid = (11, 6);
        opts.phase_points = 16;
        opts.settings.samples = 128;
    }
    let results = run_all(&opts, |c| {
        println!("{c}");
        let _ = std::io::stdout().flush();
    });
    let failed = results.iter().filter(|c| !c.passed).count();
    println!("{} of {} checks passed", results.len() - failed, results.len());
    Ok(failed == 0)
}

fn run(cli: &Cli) -> Result<bool> {
    if cli.constants {
        eprintln!("{}", constants::listing());
    }
    let cfg = load(cli)?;
    for note in &cfg.notes {
        if note.starts_with("warning") {
            eprintln!("{note}");
        }
    }
    match &cli.command {
        Command::Steady => steady(cli, &cfg)?,
        Command::Sweep2d => sweep2d(cli, &cfg)?,
        Command::Phase => phase(cli, &cfg)?,
        Command::Perturb { order, paper_table } => perturb(&cfg, *order, *paper_table)?,
        Command::Stability => stability(&cfg)?,
        Command::Validate { quick } => return validate(&cfg, cli.workers, *quick),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        // Some acceptance check failed.
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
