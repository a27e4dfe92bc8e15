// (Omega, epsilon) heatmaps of the five figures of merit.
//
//     cargo run --release --example sweep_heatmap -- out_dir [nx ny workers]
//
// Writes sweep.csv, one SVG per metric and a gnuplot script into out_dir.

use std::path::PathBuf;
use std::time::Instant;

use optomod::config::RunConfig;
use optomod::sweep::{
    csv_string, gnuplot_script, heatmaps, isolated_unstable_cells, run_sweep, Axis, AxisKind,
    CellStatus, SweepGrid,
};

fn main() -> optomod::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let out = PathBuf::from(args.first().map_or("sweep_out", String::as_str));
    let nx: usize = args.get(1).map_or(41, |s| s.parse().expect("nx"));
    let ny: usize = args.get(2).map_or(26, |s| s.parse().expect("ny"));
    let workers: usize = args.get(3).map_or(1, |s| s.parse().expect("workers"));

    let cfg = RunConfig::default();
    let grid = SweepGrid::new(
        Axis::linspace(AxisKind::OmegaOverOmegaM, 1.0, 3.0, nx)?,
        Some(Axis::linspace(AxisKind::Epsilon, 0.0, 0.5, ny)?),
        cfg.model,
        cfg.settings,
    )?;

    let start = Instant::now();
    let cells = run_sweep(&grid, workers)?;
    let secs = start.elapsed().as_secs_f64();

    std::fs::create_dir_all(&out)?;
    std::fs::write(out.join("sweep.csv"), csv_string(&grid, &cells))?;
    for (name, doc) in heatmaps(&grid, &cells) {
        std::fs::write(out.join(format!("{name}.svg")), doc)?;
    }
    std::fs::write(out.join("sweep.gp"), gnuplot_script(&grid, "sweep.csv"))?;

    let count = |s| cells.iter().filter(|c| c.status == s).count();
    println!(
        "{} cells in {secs:.1} s: {} ok, {} unstable, {} non-converged",
        cells.len(),
        count(CellStatus::Ok),
        count(CellStatus::Unstable),
        count(CellStatus::NonConverged)
    );
    let isolated = isolated_unstable_cells(&grid, &cells);
    if !isolated.is_empty() {
        eprintln!("warning: isolated unstable cells {isolated:?}");
    }
    Ok(())
}
