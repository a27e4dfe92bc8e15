// Full pipeline for one modulation: orbit, stability, periodic covariance
// and the period extrema of every figure of merit.
//
//     cargo run --release --example steady_state -- 0.2 2.0

use std::time::Instant;

use optomod::config::PipelineSettings;
use optomod::params::{Model, ModulationSpec, SystemParams};
use optomod::sweep::run_model;

fn main() {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().expect("number")).collect();
    let eps = args.first().copied().unwrap_or(0.2);
    let ratio = args.get(1).copied().unwrap_or(2.0);
    let w = ratio * SystemParams::reference().omega_m;
    let model = Model::reference(ModulationSpec::mechanical(eps, w)).expect("valid modulation");

    let start = Instant::now();
    let out = run_model(&model, &PipelineSettings::default());
    println!("eps = {eps}, Omega/omega_M = {ratio}: {} {}", out.status.label(), out.reason);
    if let Some(m) = &out.metrics {
        println!("  n_max    = {:.5}", m.n_max);
        println!("  en_max   = {:.5}", m.en_max);
        println!("  d_max    = {:.5}", m.d_max);
        println!("  qvar_min = {:.5}", m.qvar_min);
        println!("  xvar_min = {:.5}", m.xvar_min);
    }
    if let Some(r) = out.rh_margin {
        println!("  worst Routh margin {r:.3e}");
    }
    println!("  {:.2} s", start.elapsed().as_secs_f64());
}
