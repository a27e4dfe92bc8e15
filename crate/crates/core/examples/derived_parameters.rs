// Derived rates of the reference device and of a JSON configuration.
//
//     cargo run --example derived_parameters -- [config.json]

use optomod::config::RunConfig;

fn main() -> optomod::Result<()> {
    let cfg = match std::env::args().nth(1) {
        Some(path) => RunConfig::load(path.as_ref())?,
        None => RunConfig::default(),
    };
    let s = &cfg.model.system;
    let d = &cfg.model.derived;
    println!("omega_m     = {:.6e} rad/s  (Q = {:.3e})", s.omega_m, s.quality_factor());
    println!("kappa       = {:.6e} rad/s", s.kappa);
    println!("detuning    = {:.6e} rad/s", s.detuning);
    println!("omega_c     = {:.6e} rad/s", d.omega_c);
    println!("G0          = {:.6e} rad/s", d.g0);
    println!("drive E     = {:.6e} s^-1/2", d.drive);
    println!("n_thermal   = {:.6}", d.n_thermal);
    println!("coth factor = {:.6}", d.coth_factor);
    for note in &cfg.notes {
        println!("note: {note}");
    }
    Ok(())
}
