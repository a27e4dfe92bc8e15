// Routh-Hurwitz margins and the final verdict along the epsilon axis at
// Omega = 2 omega_M.

use optomod::classical::{find_periodic_orbit, SettleOptions};
use optomod::covariance::{routh_hurwitz_stable, steady_periodic_covariance, CovOptions};
use optomod::params::{Model, ModulationSpec, SystemParams};

fn main() -> optomod::Result<()> {
    let w = 2.0 * SystemParams::reference().omega_m;
    for k in 0..=10 {
        let eps = 0.05 * k as f64;
        let model = Model::reference(ModulationSpec::mechanical(eps, w))?;
        match find_periodic_orbit(&model, 128, &SettleOptions::default()) {
            Ok(orbit) => {
                let rh = routh_hurwitz_stable(&model, &orbit);
                let integration = if rh.stable {
                    steady_periodic_covariance(&model, &orbit, 128, &CovOptions::default()).map(|_| ())
                } else {
                    Ok(())
                };
                println!(
                    "eps {eps:.2}: margin {:.4e} at t = {:.3e} s -> {}",
                    rh.worst_margin,
                    rh.worst_phase,
                    rh.classify(&integration).label()
                );
            }
            Err(e) => println!("eps {eps:.2}: no periodic orbit ({e})"),
        }
    }
    Ok(())
}
