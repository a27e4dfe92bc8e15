// Relative-phase sweep with both modulations on at Omega = 2 omega_M.
//
//     cargo run --release --example phase_interference -- out_dir [n_phi eps eta]
//
// Prints the table and writes phase.csv, references.csv and one chart per
// metric with the single-modulation levels drawn dashed.

use std::path::PathBuf;

use optomod::config::PipelineSettings;
use optomod::params::{Model, ModulationSpec, SystemParams};
use optomod::sweep::{csv_string, run_phase_sweep};

fn main() -> optomod::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let out = PathBuf::from(args.first().map_or("phase_out", String::as_str));
    let n_phi: usize = args.get(1).map_or(64, |s| s.parse().expect("n_phi"));
    let eps: f64 = args.get(2).map_or(0.3, |s| s.parse().expect("eps"));
    let eta: f64 = args.get(3).map_or(0.9, |s| s.parse().expect("eta"));

    let w = 2.0 * SystemParams::reference().omega_m;
    let model = Model::reference(ModulationSpec::combined(eps, eta, w, 0.0))?;
    let sweep = run_phase_sweep(&model, &PipelineSettings::default(), n_phi, 1)?;

    println!("phi/pi   status    n_max     en_max    d_max     qvar_min");
    for c in &sweep.cells {
        match &c.metrics {
            Some(m) => println!(
                "{:6.3}   {:8}  {:8.4}  {:8.4}  {:8.4}  {:8.4}",
                c.x,
                c.status.label(),
                m.n_max,
                m.en_max,
                m.d_max,
                m.qvar_min
            ),
            None => println!("{:6.3}   {} {}", c.x, c.status.label(), c.reason),
        }
    }
    for (name, o) in [("spring only", &sweep.mechanical_only), ("drive only", &sweep.drive_only)] {
        if let Some(m) = &o.metrics {
            println!("{name}: n_max {:.4}, qvar_min {:.4}", m.n_max, m.qvar_min);
        }
    }

    std::fs::create_dir_all(&out)?;
    std::fs::write(out.join("phase.csv"), csv_string(&sweep.grid, &sweep.cells))?;
    let mut refs = Vec::new();
    sweep.write_references(&mut refs)?;
    std::fs::write(out.join("references.csv"), refs)?;
    for (name, doc) in sweep.charts() {
        std::fs::write(out.join(format!("phase_{name}.svg")), doc)?;
    }
    Ok(())
}
