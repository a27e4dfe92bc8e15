//! Semi-numeric harmonic-balance expansions at the reference parameters:
//! single mechanical modulation (coefficients of powers of eps) and the
//! two-modulation constant parts as functions of the relative phase.

use optomod::params::{ModulationSpec, Model, SystemParams};
use optomod::perturbative::coefficient_table;

fn main() -> optomod::Result<()> {
    let omega = 2.0 * SystemParams::reference().omega_m;
    let single = Model::reference(ModulationSpec::mechanical(0.2, omega))?;
    print!("{}", coefficient_table(&single, 2)?);
    let two = Model::reference(ModulationSpec::combined(0.3, 0.9, omega, 0.0))?;
    print!("{}", coefficient_table(&two, 2)?);
    Ok(())
}
