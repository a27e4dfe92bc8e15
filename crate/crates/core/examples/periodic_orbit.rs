// Classical periodic orbit and the periodic covariance along it, written
// as CSV with one row per sample phase.
//
//     cargo run --release --example periodic_orbit -- out_dir [eps]

use std::fs::File;
use std::path::PathBuf;

use optomod::classical::{find_periodic_orbit, SettleOptions};
use optomod::covariance::{steady_periodic_covariance, CovOptions};
use optomod::params::{Model, ModulationSpec, SystemParams};

fn main() -> optomod::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "orbit_out".into()));
    let eps: f64 = args.next().map_or(0.2, |s| s.parse().expect("eps"));

    let w = 2.0 * SystemParams::reference().omega_m;
    let model = Model::reference(ModulationSpec::mechanical(eps, w))?;
    let orbit = find_periodic_orbit(&model, 256, &SettleOptions::default())?;
    let cov = steady_periodic_covariance(&model, &orbit, 256, &CovOptions::default())?;
    println!(
        "settled after {:.3e} s (classical) and {:.3e} s (covariance)",
        orbit.settle_time, cov.settle_time
    );

    std::fs::create_dir_all(&out)?;
    orbit.write_csv(File::create(out.join("orbit.csv"))?)?;
    cov.write_csv(File::create(out.join("covariance.csv"))?)?;

    let q = orbit.harmonic_projection(2)?;
    println!("Q: mean {:.2}, |Q1| {:.2}, |Q2| {:.3}", q[0].a0, q[0].amplitude(1), q[0].amplitude(2));
    Ok(())
}
