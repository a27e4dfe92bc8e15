//! Gaussian figures of merit and their extrema over one modulation period.
//!
//! Inputs are in the vacuum = 1/2 convention. Only [`gaussian_discord`]
//! rescales to vacuum = 1, internally.

use std::io::Write;

use nalgebra::Matrix2;
use serde::Serialize;

use crate::covariance::{CovMatrix, CovOrbit, VACUUM};
use crate::error::{Error, Result};
use crate::linalg::Mat4;

/// Tolerance on symplectic eigenvalues below vacuum accepted as round-off.
pub const PHYSICAL_TOL: f64 = 1e-9;

/// Which 2×2 diagonal block of C.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Mirror,
    Cavity,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mirror" => Ok(Self::Mirror),
            "cavity" => Ok(Self::Cavity),
            other => Err(Error::InvalidArgument(format!("unknown mode `{other}`"))),
        }
    }
}

fn block(c: &Mat4, r: usize, col: usize) -> Matrix2<f64> {
    c.fixed_view::<2, 2>(r, col).into_owned()
}

/// n = (C11 + C22 − 1)/2.
pub fn phonon_number(c: &CovMatrix) -> f64 {
    (c.get(0, 0) + c.get(1, 1) - 1.0) / 2.0
}

/// Smaller eigenvalue of the selected diagonal block: the minimum over θ
/// of the variance of the rotated quadrature.
pub fn min_quadrature_variance(c: &CovMatrix, mode: Mode) -> f64 {
    let o = match mode {
        Mode::Mirror => 0,
        Mode::Cavity => 2,
    };
    let (a, b, d) = (c.get(o, o), c.get(o, o + 1), c.get(o + 1, o + 1));
    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    mean - half.hypot(b)
}

/// Logarithmic negativity, natural log.
pub fn logarithmic_negativity(c: &CovMatrix) -> Result<f64> {
    let m = c.matrix();
    let da = block(m, 0, 0).determinant();
    let db = block(m, 2, 2).determinant();
    let dk = block(m, 0, 2).determinant();
    let det = m.determinant();
    let sigma = da + db - 2.0 * dk;
    let disc = sigma * sigma - 4.0 * det;
    let scale = (sigma * sigma).max(1e-300);
    if disc < -1e-9 * scale.max(1.0) {
        return Err(Error::Unphysical(format!(
            "partial-transpose discriminant {disc:.3e} < 0"
        )));
    }
    let nu = (0.5 * (sigma - disc.max(0.0).sqrt())).max(0.0).sqrt();
    Ok((-(2.0 * nu).ln()).max(0.0))
}

/// f(x) = ((x+1)/2) log2((x+1)/2) − ((x−1)/2) log2((x−1)/2), with the
/// second term taken as 0 at x ≤ 1.
fn entropy_fn(x: f64) -> f64 {
    let p = 0.5 * (x + 1.0);
    let m = 0.5 * (x - 1.0);
    let hp = if p > 0.0 { p * p.log2() } else { 0.0 };
    let hm = if m > 0.0 { m * m.log2() } else { 0.0 };
    hp - hm
}

/// Gaussian quantum discord (log2), measurement on `measured`.
pub fn gaussian_discord(c: &CovMatrix, measured: Mode) -> Result<f64> {
    let (lo, _) = c.symplectic_eigenvalues();
    if lo < VACUUM - PHYSICAL_TOL {
        return Err(Error::Unphysical(format!(
            "symplectic eigenvalue {lo:.12} below vacuum"
        )));
    }
    // Vacuum = 1 units; unmeasured block first.
    let m = c.matrix() * 2.0;
    let (ia, ib) = match measured {
        Mode::Cavity => (0, 2),
        Mode::Mirror => (2, 0),
    };
    let a = block(&m, ia, ia).determinant();
    let b = block(&m, ib, ib).determinant();
    let kd = block(&m, ia, ib).determinant();
    let dd = m.determinant();
    let (nu_minus, nu_plus) = c.symplectic_eigenvalues();
    let (nu_minus, nu_plus) = (2.0 * nu_minus, 2.0 * nu_plus);

    let k2 = kd * kd;
    let e_min = if (dd - a * b).powi(2) <= (1.0 + b) * k2 * (a + dd) {
        let bm1 = b - 1.0;
        if bm1.abs() < 1e-12 {
            // A pure measured marginal forces a product state.
            a
        } else {
            let inner = (k2 + bm1 * (dd - a)).max(0.0);
            (2.0 * k2 + bm1 * (dd - a) + 2.0 * kd.abs() * inner.sqrt()) / (bm1 * bm1)
        }
    } else {
        let rad = (k2 * k2 + (dd - a * b).powi(2) - 2.0 * k2 * (a * b + dd)).max(0.0);
        (a * b - k2 + dd - rad.sqrt()) / (2.0 * b)
    };
    let d = entropy_fn(b.max(1.0).sqrt()) - entropy_fn(nu_minus) - entropy_fn(nu_plus)
        + entropy_fn(e_min.max(1.0).sqrt());
    Ok(d.max(0.0))
}

/// All five metrics at one covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricValues {
    pub n: f64,
    pub en: f64,
    pub d: f64,
    pub qvar: f64,
    pub xvar: f64,
}

pub fn evaluate(c: &CovMatrix, measured: Mode) -> Result<MetricValues> {
    Ok(MetricValues {
        n: phonon_number(c),
        en: logarithmic_negativity(c)?,
        d: gaussian_discord(c, measured)?,
        qvar: min_quadrature_variance(c, Mode::Mirror),
        xvar: min_quadrature_variance(c, Mode::Cavity),
    })
}

/// Phase within the period at which each extremum occurs, s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArgTimes {
    pub n_max: f64,
    pub en_max: f64,
    pub d_max: f64,
    pub qvar_min: f64,
    pub xvar_min: f64,
}

/// Conventions behind the numbers in a [`MetricsSummary`].
#[derive(Debug, Clone, Serialize)]
pub struct MetricsMeta {
    pub vacuum_variance: f64,
    pub log_negativity_base: &'static str,
    pub discord_base: &'static str,
    pub discord_measured: Mode,
    pub phonon_formula: &'static str,
    pub samples: usize,
    pub period: f64,
}

/// Period extrema of the five figures of merit.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsSummary {
    pub n_max: f64,
    pub en_max: f64,
    pub d_max: f64,
    pub qvar_min: f64,
    pub xvar_min: f64,
    pub arg_times: ArgTimes,
    pub meta: MetricsMeta,
}

pub const CSV_HEADER: &str = "n_max,en_max,d_max,qvar_min,xvar_min,t_n_max,t_en_max,t_d_max,t_qvar_min,t_xvar_min";

impl MetricsSummary {
    pub fn csv_row(&self) -> String {
        let t = &self.arg_times;
        [
            self.n_max,
            self.en_max,
            self.d_max,
            self.qvar_min,
            self.xvar_min,
            t.n_max,
            t.en_max,
            t.d_max,
            t.qvar_min,
            t.xvar_min,
        ]
        .iter()
        .map(|v| format!("{v:.9e}"))
        .collect::<Vec<_>>()
        .join(",")
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        writeln!(w, "{}", self.csv_row())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Extremum of uniformly spaced periodic samples with three-point parabolic
/// refinement. Returns (value, fractional index).
pub fn refined_extremum(values: &[f64], maximize: bool) -> (f64, f64) {
    let n = values.len();
    let better = |a: f64, b: f64| if maximize { a > b } else { a < b };
    let mut i = 0;
    for (k, &v) in values.iter().enumerate() {
        if better(v, values[i]) {
            i = k;
        }
    }
    if n < 3 {
        return (values[i], i as f64);
    }
    let ym = values[(i + n - 1) % n];
    let y0 = values[i];
    let yp = values[(i + 1) % n];
    let curv = ym - 2.0 * y0 + yp;
    let right_sign = if maximize { curv < 0.0 } else { curv > 0.0 };
    if !right_sign {
        return (y0, i as f64);
    }
    let delta = (0.5 * (ym - yp) / curv).clamp(-0.5, 0.5);
    let v = y0 - 0.25 * (ym - yp) * delta;
    (v, (i as f64 + delta).rem_euclid(n as f64))
}

/// Evaluate every metric at every sample and take period extrema.
pub fn period_extrema(orbit: &CovOrbit, measured: Mode) -> Result<MetricsSummary> {
    if orbit.is_empty() {
        return Err(Error::InvalidArgument("empty covariance orbit".into()));
    }
    let vals = orbit
        .samples
        .iter()
        .map(|(_, c)| evaluate(c, measured))
        .collect::<Result<Vec<_>>>()?;
    let dt = orbit.period / orbit.len() as f64;
    let pick = |f: fn(&MetricValues) -> f64, maximize: bool| {
        let series: Vec<f64> = vals.iter().map(f).collect();
        let (v, idx) = refined_extremum(&series, maximize);
        (v, idx * dt)
    };
    let (n_max, tn) = pick(|m| m.n, true);
    let (en_max, te) = pick(|m| m.en, true);
    let (d_max, td) = pick(|m| m.d, true);
    let (qvar_min, tq) = pick(|m| m.qvar, false);
    let (xvar_min, tx) = pick(|m| m.xvar, false);
    Ok(MetricsSummary {
        n_max,
        en_max,
        d_max,
        qvar_min,
        xvar_min,
        arg_times: ArgTimes {
            n_max: tn,
            en_max: te,
            d_max: td,
            qvar_min: tq,
            xvar_min: tx,
        },
        meta: MetricsMeta {
            vacuum_variance: VACUUM,
            log_negativity_base: "e",
            discord_base: "2",
            discord_measured: measured,
            phonon_formula: "(C11 + C22 - 1)/2",
            samples: orbit.len(),
            period: orbit.period,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::local_rotation;
    use proptest::prelude::*;

    fn tmsv(r: f64) -> CovMatrix {
        let ch = 0.5 * (2.0 * r).cosh();
        let sh = 0.5 * (2.0 * r).sinh();
        CovMatrix(Mat4::new(
            ch, 0.0, sh, 0.0, //
            0.0, ch, 0.0, -sh, //
            sh, 0.0, ch, 0.0, //
            0.0, -sh, 0.0, ch,
        ))
    }

    #[test]
    fn vacuum_has_no_phonons() {
        assert_eq!(phonon_number(&CovMatrix::vacuum()), 0.0);
        assert!((phonon_number(&CovMatrix::thermal_mirror(7.25)) - 7.25).abs() < 1e-14);
    }

    #[test]
    fn quadrature_variance_cases() {
        let mut c = CovMatrix::vacuum();
        c.0[(0, 0)] = 0.7;
        c.0[(1, 1)] = 0.4;
        assert!((min_quadrature_variance(&c, Mode::Mirror) - 0.4).abs() < 1e-15);
        let mut c = CovMatrix::vacuum();
        c.0[(2, 2)] = 1.0;
        c.0[(3, 3)] = 1.0;
        c.0[(2, 3)] = 0.5;
        c.0[(3, 2)] = 0.5;
        assert!((min_quadrature_variance(&c, Mode::Cavity) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tmsv_negativity() {
        for r in [0.1, 0.5, 1.3] {
            let en = logarithmic_negativity(&tmsv(r)).unwrap();
            assert!((en - 2.0 * r).abs() < 1e-9, "r = {r}: {en}");
        }
    }

    #[test]
    fn product_states_are_uncorrelated() {
        let c = CovMatrix::thermal_mirror(3.0);
        assert_eq!(logarithmic_negativity(&c).unwrap(), 0.0);
        assert!(gaussian_discord(&c, Mode::Cavity).unwrap().abs() < 1e-12);
        assert!(gaussian_discord(&c, Mode::Mirror).unwrap().abs() < 1e-12);
    }

    #[test]
    fn tmsv_discord_oracle() {
        // For a pure state the discord equals the entanglement entropy
        // f(cosh 2r) of either marginal.
        let r = 0.5_f64;
        let x = (2.0 * r).cosh();
        let p = 0.5 * (x + 1.0);
        let m = 0.5 * (x - 1.0);
        let want = p * p.log2() - m * m.log2();
        let d = gaussian_discord(&tmsv(r), Mode::Cavity).unwrap();
        assert!((d - want).abs() < 1e-9, "{d} vs {want}");
        assert!((d - 0.951_389_513_891_278_6).abs() < 1e-9);
    }

    #[test]
    fn separable_classical_correlations() {
        // A = B = I, K = 0.1 I in vacuum = 1 units; the symplectic spectrum
        // is (0.9, 1.1), so scale by 1.2 to make it physical.
        let mut m = Mat4::identity();
        for (i, j) in [(0, 2), (2, 0), (1, 3), (3, 1)] {
            m[(i, j)] = 0.1;
        }
        let c = CovMatrix(m * 0.5 * 1.2);
        let d = gaussian_discord(&c, Mode::Cavity).unwrap();
        assert!(d > 0.0 && d < 1.0, "{d}");
        assert_eq!(logarithmic_negativity(&c).unwrap(), 0.0);
    }

    #[test]
    fn unphysical_input_rejected() {
        let c = CovMatrix(Mat4::identity() * 0.1);
        assert!(matches!(gaussian_discord(&c, Mode::Cavity), Err(Error::Unphysical(_))));
    }

    #[test]
    fn parabolic_refinement_recovers_vertex() {
        // y = −(x − 3.3)² sampled on integers, periodic padding far away.
        let v: Vec<f64> = (0..12).map(|i| -((i as f64 - 3.3).powi(2))).collect();
        let (y, x) = refined_extremum(&v, true);
        assert!((x - 3.3).abs() < 1e-12);
        assert!(y.abs() < 1e-12);
    }

    #[test]
    fn constant_orbit_extrema() {
        let c = tmsv(0.3);
        let orbit = CovOrbit {
            period: 1.0,
            samples: (0..8).map(|j| (j as f64 / 8.0, c)).collect(),
            settle_time: 0.0,
            settle_gap: 0.0,
        };
        let s = period_extrema(&orbit, Mode::Cavity).unwrap();
        let v = evaluate(&c, Mode::Cavity).unwrap();
        assert_eq!((s.n_max, s.en_max, s.d_max, s.qvar_min, s.xvar_min), (v.n, v.en, v.d, v.qvar, v.xvar));
    }

    fn arb_state() -> impl Strategy<Value = CovMatrix> {
        // Thermal two-mode squeezed states passed through a beam splitter
        // and local squeezers: always physical.
        (0.0..1.0f64, 0.0..2.0f64, 0.0..2.0f64, 0.0..1.5f64, -0.5..0.5f64, -0.5..0.5f64).prop_map(
            |(r, n1, n2, th, s1, s2)| {
                let mut c = tmsv(r).0;
                c[(0, 0)] += n1;
                c[(1, 1)] += n1;
                c[(2, 2)] += n2;
                c[(3, 3)] += n2;
                let (s, co) = th.sin_cos();
                let mut bs = Mat4::zeros();
                for k in 0..2 {
                    bs[(k, k)] = co;
                    bs[(k + 2, k + 2)] = co;
                    bs[(k, k + 2)] = s;
                    bs[(k + 2, k)] = -s;
                }
                let sq = Mat4::from_diagonal(&nalgebra::Vector4::new(
                    s1.exp(),
                    (-s1).exp(),
                    s2.exp(),
                    (-s2).exp(),
                ));
                let t = sq * bs;
                let c = t * c * t.transpose();
                CovMatrix(0.5 * (c + c.transpose()))
            },
        )
    }

    proptest! {
        #[test]
        fn local_rotation_invariance(c in arb_state(), t1 in 0.0..6.3f64, t2 in 0.0..6.3f64) {
            let r = local_rotation(t1, t2);
            let rc = CovMatrix(r * c.0 * r.transpose());
            let e0 = logarithmic_negativity(&c).unwrap();
            let e1 = logarithmic_negativity(&rc).unwrap();
            prop_assert!((e0 - e1).abs() < 1e-9);
            let d0 = gaussian_discord(&c, Mode::Cavity).unwrap();
            let d1 = gaussian_discord(&rc, Mode::Cavity).unwrap();
            prop_assert!((d0 - d1).abs() < 1e-9);
            for mode in [Mode::Mirror, Mode::Cavity] {
                let q0 = min_quadrature_variance(&c, mode);
                let q1 = min_quadrature_variance(&rc, mode);
                prop_assert!((q0 - q1).abs() < 1e-9);
            }
        }

        #[test]
        fn entanglement_implies_discord(c in arb_state()) {
            if logarithmic_negativity(&c).unwrap() > 0.0 {
                prop_assert!(gaussian_discord(&c, Mode::Cavity).unwrap() > 0.0);
                prop_assert!(gaussian_discord(&c, Mode::Mirror).unwrap() > 0.0);
            }
        }

        #[test]
        fn physical_mirror_has_nonnegative_phonons(c in arb_state()) {
            prop_assert!(phonon_number(&c) >= -1e-9);
        }
    }
}
