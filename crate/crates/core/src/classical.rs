//! Classical mean values: the nonlinear equations for Q, P and the cavity
//! amplitude A, their unmodulated fixed point, and the asymptotic periodic
//! orbit under modulation.

use std::f64::consts::TAU;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::{Stepper, Tolerances};
use crate::params::Model;
use crate::series::{project, HarmonicSeries};

/// Mean values (Q, P, Re A, Im A), all dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct MeanState {
    pub q: f64,
    pub p: f64,
    pub a_re: f64,
    pub a_im: f64,
}

impl MeanState {
    pub fn to_array(self) -> [f64; 4] {
        [self.q, self.p, self.a_re, self.a_im]
    }

    pub fn from_array(y: &[f64; 4]) -> Self {
        Self {
            q: y[0],
            p: y[1],
            a_re: y[2],
            a_im: y[3],
        }
    }

    pub fn intensity(&self) -> f64 {
        self.a_re * self.a_re + self.a_im * self.a_im
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Time derivative of the mean values:
///
/// ```text
/// Q' = ω_M P
/// P' = −ω_M [1 + ε cos Ω1 t] Q − γ_M P + G0 |A|²
/// A' = −(κ + iΔ0) A + i G0 A Q + E [1 + η cos(Ω2 t + φ)]
/// ```
pub fn mean_rhs(t: f64, s: &MeanState, model: &Model) -> MeanState {
    let sys = &model.system;
    let g0 = model.derived.g0;
    let spring = model.modulation.spring_factor(t);
    let drive = model.derived.drive * model.modulation.drive_factor(t);
    let detuning = sys.detuning - g0 * s.q;
    MeanState {
        q: sys.omega_m * s.p,
        p: -sys.omega_m * spring * s.q - sys.gamma_m * s.p + g0 * s.intensity(),
        a_re: -sys.kappa * s.a_re + detuning * s.a_im + drive,
        a_im: -sys.kappa * s.a_im - detuning * s.a_re,
    }
}

fn rhs_array(t: f64, y: &[f64; 4], model: &Model) -> [f64; 4] {
    mean_rhs(t, &MeanState::from_array(y), model).to_array()
}

const HOMOTOPY_STEPS: usize = 10;
const NEWTON_MAX_ITER: usize = 100;

/// Stationary point of the unmodulated equations.
///
/// Solves the cubic ω_M Q (κ² + (Δ0 − G0 Q)²) = G0 E² by Newton iteration,
/// ramping G0 up from zero in ten steps so that the root returned is the one
/// connected to the cold-cavity solution Q = 0.
pub fn fixed_point_unmodulated(model: &Model) -> Result<MeanState> {
    let sys = &model.system;
    let e = model.derived.drive;
    let g_full = model.derived.g0;
    let w = sys.omega_m;
    let k2 = sys.kappa * sys.kappa;
    let d0 = sys.detuning;

    let mut q: f64 = 0.0;
    let mut last_residual = 0.0;
    for step in 1..=HOMOTOPY_STEPS {
        let g = g_full * step as f64 / HOMOTOPY_STEPS as f64;
        // h(Q) = ω Q (κ² + (Δ0 − gQ)²) − g E²
        let scale = (g * e * e).max(w * k2 * q.abs()).max(f64::MIN_POSITIVE);
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            let d = d0 - g * q;
            let h = w * q * (k2 + d * d) - g * e * e;
            let dh = w * (k2 + d * d) - 2.0 * w * q * g * d;
            last_residual = h.abs() / scale;
            if dh == 0.0 || !dh.is_finite() {
                break;
            }
            let dq = h / dh;
            q -= dq;
            if dq.abs() <= 1e-15 * q.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged || !q.is_finite() {
            return Err(Error::FixedPoint {
                residual: last_residual,
            });
        }
    }
    let d = d0 - g_full * q;
    let denom = k2 + d * d;
    let state = MeanState {
        q,
        p: 0.0,
        a_re: e * sys.kappa / denom,
        a_im: -e * d / denom,
    };
    // Residual of all three stationarity equations.
    let r = mean_rhs(0.0, &state, &model.unmodulated());
    let scale_q = w * q.abs().max(1.0);
    let scale_a = e.max(f64::MIN_POSITIVE);
    let residual = (r.p.abs() / scale_q)
        .max(r.a_re.abs() / scale_a)
        .max(r.a_im.abs() / scale_a)
        .max(r.q.abs() / scale_q);
    if residual > 1e-10 {
        return Err(Error::FixedPoint { residual });
    }
    Ok(state)
}

/// Stroboscopic settling rules shared by the classical and covariance
/// integrations.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SettleOptions {
    /// Relative tolerance of the ODE stepper.
    pub rtol: f64,
    /// Closure tolerance: |Δy_i| < tol · (1 + |y_i|) between periods.
    pub tol: f64,
    pub min_periods: usize,
    pub max_periods: usize,
    /// Consecutive closed periods required.
    pub consecutive: usize,
    /// Any component above this magnitude declares an instability.
    pub overflow: f64,
}

impl Default for SettleOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            tol: 1e-8,
            min_periods: 20,
            max_periods: 2000,
            consecutive: 3,
            overflow: 1e15,
        }
    }
}

/// Largest normalized change |a_i − b_i| / (1 + |a_i|).
pub fn closure_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / (1.0 + x.abs()))
        .fold(0.0, f64::max)
}

/// Asymptotic periodic orbit sampled at N uniform phases.
#[derive(Debug, Clone, Serialize)]
pub struct PeriodicOrbit {
    /// τ = 2π/Ω, s.
    pub period: f64,
    /// (phase time in [0, τ), state)
    pub samples: Vec<(f64, MeanState)>,
    /// Time at which periodicity was certified, s.
    pub settle_time: f64,
    /// Closure gap at certification.
    pub settle_gap: f64,
}

impl PeriodicOrbit {
    pub fn omega(&self) -> f64 {
        TAU / self.period
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// One component across the period (0 = Q, 1 = P, 2 = Re A, 3 = Im A).
    pub fn component(&self, idx: usize) -> Vec<f64> {
        self.samples.iter().map(|(_, s)| s.to_array()[idx]).collect()
    }

    /// Periodic Catmull–Rom interpolation at arbitrary time t.
    pub fn interpolate(&self, t: f64) -> MeanState {
        let n = self.samples.len();
        let x = (t / self.period).rem_euclid(1.0) * n as f64;
        let i = (x.floor() as usize).min(n - 1);
        let u = x - i as f64;
        let p0 = self.samples[(i + n - 1) % n].1.to_array();
        let p1 = self.samples[i].1.to_array();
        let p2 = self.samples[(i + 1) % n].1.to_array();
        let p3 = self.samples[(i + 2) % n].1.to_array();
        let u2 = u * u;
        let u3 = u2 * u;
        let mut out = [0.0; 4];
        for k in 0..4 {
            out[k] = 0.5
                * (2.0 * p1[k]
                    + (p2[k] - p0[k]) * u
                    + (2.0 * p0[k] - 5.0 * p1[k] + 4.0 * p2[k] - p3[k]) * u2
                    + (3.0 * p1[k] - p0[k] - 3.0 * p2[k] + p3[k]) * u3);
        }
        MeanState::from_array(&out)
    }

    /// Harmonic content of each component (Q, P, Re A, Im A).
    pub fn harmonic_projection(&self, max_harmonic: usize) -> Result<[HarmonicSeries; 4]> {
        harmonic_projection(self, max_harmonic)
    }

    /// CSV with columns t, Q, P, ReA, ImA and comment lines for the period
    /// and the settle time.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# period = {:.12e}", self.period)?;
        writeln!(w, "# settle_time = {:.12e}", self.settle_time)?;
        writeln!(w, "t,Q,P,ReA,ImA")?;
        for (t, s) in &self.samples {
            writeln!(
                w,
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                t, s.q, s.p, s.a_re, s.a_im
            )?;
        }
        Ok(())
    }
}

/// Discrete Fourier projection of every component of a sampled orbit.
pub fn harmonic_projection(
    orbit: &PeriodicOrbit,
    max_harmonic: usize,
) -> Result<[HarmonicSeries; 4]> {
    let w = orbit.omega();
    Ok([
        project(&orbit.component(0), w, max_harmonic)?,
        project(&orbit.component(1), w, max_harmonic)?,
        project(&orbit.component(2), w, max_harmonic)?,
        project(&orbit.component(3), w, max_harmonic)?,
    ])
}

pub(crate) fn tolerances(model: &Model, fp: &MeanState, rtol: f64, period: f64) -> Tolerances<4> {
    let sq = fp.q.abs().max(1.0);
    let sa = fp.a_re.hypot(fp.a_im).max(1.0);
    let _ = model;
    let mut tol = Tolerances::new(rtol, [rtol * sq, rtol * sq, rtol * sa, rtol * sa]);
    tol.max_step = period / 8.0;
    tol
}

/// Integrate from the unmodulated fixed point until the stroboscopic map
/// closes, then sample one period at `n_samples` uniform phases.
pub fn find_periodic_orbit(
    model: &Model,
    n_samples: usize,
    opts: &SettleOptions,
) -> Result<PeriodicOrbit> {
    if n_samples < 2 {
        return Err(Error::InvalidArgument("an orbit needs at least 2 samples".into()));
    }
    let period = model
        .period()
        .ok_or_else(|| Error::InvalidArgument("modulation frequency must be > 0".into()))?;
    let fp = fixed_point_unmodulated(model)?;
    if !model.modulation.is_active() {
        return Ok(PeriodicOrbit {
            period,
            samples: (0..n_samples)
                .map(|j| (period * j as f64 / n_samples as f64, fp))
                .collect(),
            settle_time: 0.0,
            settle_gap: 0.0,
        });
    }

    let tol = tolerances(model, &fp, opts.rtol, period);
    let mut f = |t: f64, y: &[f64; 4]| rhs_array(t, y, model);
    let mut st = Stepper::new(0.0, fp.to_array(), 0.0, tol);
    let guard = |st: &Stepper<4>| -> Result<()> {
        if st.y.iter().any(|v| !v.is_finite() || v.abs() > opts.overflow) {
            return Err(Error::Instability {
                time: st.t,
                reason: "classical mean values diverge".into(),
            });
        }
        Ok(())
    };
    let as_instability = |e: Error, t: f64| match e {
        Error::Numerical(msg) => Error::Instability { time: t, reason: msg },
        other => other,
    };

    let mut prev = st.y;
    let mut streak = 0;
    let mut gap = f64::INFINITY;
    let mut settled_at = None;
    for k in 1..=opts.max_periods {
        st.advance(&mut f, k as f64 * period)
            .map_err(|e| as_instability(e, st.t))?;
        guard(&st)?;
        gap = closure_gap(&st.y, &prev);
        prev = st.y;
        streak = if gap < opts.tol { streak + 1 } else { 0 };
        if k >= opts.min_periods && streak >= opts.consecutive {
            settled_at = Some(k);
            break;
        }
    }
    let k = settled_at.ok_or(Error::NonConvergence {
        periods: opts.max_periods,
        gap,
    })?;
    let t0 = k as f64 * period;
    let mut samples = Vec::with_capacity(n_samples);
    samples.push((0.0, MeanState::from_array(&st.y)));
    let stops: Vec<f64> = (1..n_samples)
        .map(|j| t0 + period * j as f64 / n_samples as f64)
        .collect();
    st.sample(&mut f, &stops, |_, t, y| {
        samples.push((t - t0, MeanState::from_array(y)));
    })
    .map_err(|e| as_instability(e, t0))?;
    Ok(PeriodicOrbit {
        period,
        samples,
        settle_time: t0,
        settle_gap: gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{ModulationSpec, SystemParams};

    fn reference() -> Model {
        Model::reference(ModulationSpec::none()).unwrap()
    }

    #[test]
    fn drive_only_derivative() {
        let mut m = reference();
        m.derived.g0 = 0.0;
        let d = mean_rhs(0.0, &MeanState::default(), &m);
        assert_eq!(d, MeanState { q: 0.0, p: 0.0, a_re: m.derived.drive, a_im: 0.0 });
    }

    #[test]
    fn undriven_origin_is_stationary() {
        let mut m = reference();
        m.derived.drive = 0.0;
        let d = mean_rhs(0.3, &MeanState::default(), &m);
        assert_eq!(d, MeanState::default());
    }

    #[test]
    fn decoupled_fixed_point() {
        let mut m = reference();
        m.derived.g0 = 0.0;
        let fp = fixed_point_unmodulated(&m).unwrap();
        let s = &m.system;
        let denom = s.kappa * s.kappa + s.detuning * s.detuning;
        assert_eq!(fp.q, 0.0);
        assert_eq!(fp.p, 0.0);
        assert!((fp.a_re - m.derived.drive * s.kappa / denom).abs() < 1e-12 * fp.a_re.abs());
        assert!((fp.a_im + m.derived.drive * s.detuning / denom).abs() < 1e-12 * fp.a_im.abs());
    }

    #[test]
    fn undriven_fixed_point_is_zero() {
        let mut m = reference();
        m.derived.drive = 0.0;
        let fp = fixed_point_unmodulated(&m).unwrap();
        assert_eq!(fp, MeanState::default());
    }

    #[test]
    fn reference_fixed_point_is_stationary() {
        let m = reference();
        let fp = fixed_point_unmodulated(&m).unwrap();
        // Appendix quotes 14684.7 for this constant; the printed rate set
        // lands 0.5 % below it.
        assert!((fp.q / 14684.7 - 1.0).abs() < 0.01, "Q = {}", fp.q);
        let d = mean_rhs(0.0, &fp, &m);
        assert!(d.p.abs() < 1e-9 * m.system.omega_m * fp.q);
        assert!(d.a_re.abs() < 1e-9 * m.derived.drive);
        assert!(d.a_im.abs() < 1e-9 * m.derived.drive);
    }

    #[test]
    fn unmodulated_orbit_is_fixed_point() {
        let m = Model::reference(ModulationSpec::mechanical(0.0, 2.0 * TAU * 1e6)).unwrap();
        let orbit = find_periodic_orbit(&m, 8, &SettleOptions::default()).unwrap();
        let fp = fixed_point_unmodulated(&m).unwrap();
        assert_eq!(orbit.settle_gap, 0.0);
        assert!(orbit.samples.iter().all(|(_, s)| *s == fp));
    }

    #[test]
    fn cavity_field_decays_without_drive() {
        let mut m = reference();
        m.derived.drive = 0.0;
        let omega_m = m.system.omega_m;
        let mut st = Stepper::new(
            0.0,
            [0.0, 0.0, 100.0, 0.0],
            0.0,
            Tolerances::new(1e-10, [1e-10; 4]),
        );
        let mut f = |t: f64, y: &[f64; 4]| rhs_array(t, y, &m);
        let mut last = f64::INFINITY;
        for k in 1..30 {
            st.advance(&mut f, k as f64 * TAU / omega_m).unwrap();
            let amp = st.y[2].hypot(st.y[3]);
            assert!(amp < last);
            last = amp;
        }
    }

    #[test]
    fn orbit_export_has_header() {
        let orbit = PeriodicOrbit {
            period: 1.0,
            samples: vec![(0.0, MeanState::default()), (0.5, MeanState::default())],
            settle_time: 3.0,
            settle_gap: 0.0,
        };
        let mut buf = Vec::new();
        orbit.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# period"));
        assert!(lines[1].starts_with("# settle_time"));
        assert_eq!(lines[2], "t,Q,P,ReA,ImA");
        assert_eq!(lines.len(), 5);
    }

    #[test]
    fn interpolation_reproduces_samples() {
        let m = Model::reference(ModulationSpec::mechanical(0.1, 2.0 * SystemParams::reference().omega_m))
            .unwrap();
        let orbit = find_periodic_orbit(&m, 64, &SettleOptions::default()).unwrap();
        for (t, s) in &orbit.samples {
            let i = orbit.interpolate(*t);
            assert!((i.q - s.q).abs() < 1e-9 * s.q.abs());
        }
    }
}
