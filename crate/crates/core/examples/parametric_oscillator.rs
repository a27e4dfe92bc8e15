// Single parametric oscillator: closed-form first-order response against
// direct integration, and the numerically located instability threshold.

use optomod::perturbative::{
    toy_first_order_orbit, toy_numeric_orbit, toy_threshold_scan, ToyOscillator,
};

fn main() -> optomod::Result<()> {
    let (omega0, gamma, force) = (1.0, 0.05, 1.0);
    let alpha = 0.05;
    println!("nu/omega0  closed     numeric");
    for k in 0..=10 {
        let nu = 0.5 + 0.1 * k as f64;
        let osc = ToyOscillator { omega0, gamma, alpha, nu, force };
        let closed = toy_first_order_orbit(&osc)?.amplitude(1);
        let numeric = toy_numeric_orbit(&osc, 64, 2)?.amplitude(1);
        println!("{nu:9.2}  {closed:.6}  {numeric:.6}");
    }
    let found = toy_threshold_scan(omega0, gamma, force, 12)?;
    println!("threshold: found {found:.4}, 2 gamma/omega0 = {:.4}", 2.0 * gamma / omega0);
    Ok(())
}
