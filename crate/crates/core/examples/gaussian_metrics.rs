// Figures of merit of hand-built two-mode Gaussian states.

use optomod::covariance::CovMatrix;
use optomod::linalg::Mat4;
use optomod::metrics::{evaluate, Mode};

fn two_mode_squeezed(r: f64) -> CovMatrix {
    let ch = 0.5 * (2.0 * r).cosh();
    let sh = 0.5 * (2.0 * r).sinh();
    CovMatrix(Mat4::new(
        ch, 0.0, sh, 0.0, //
        0.0, ch, 0.0, -sh, //
        sh, 0.0, ch, 0.0, //
        0.0, -sh, 0.0, ch,
    ))
}

fn main() -> optomod::Result<()> {
    let states = [
        ("vacuum", CovMatrix::vacuum()),
        ("thermal mirror n=2", CovMatrix::thermal_mirror(2.0)),
        ("two-mode squeezed r=0.5", two_mode_squeezed(0.5)),
    ];
    for (name, c) in states {
        let m = evaluate(&c, Mode::Cavity)?;
        println!(
            "{name:24} n = {:.4}  E_N = {:.4}  D = {:.4}  var_q = {:.4}  var_X = {:.4}",
            m.n, m.en, m.d, m.qvar, m.xvar
        );
    }
    Ok(())
}
