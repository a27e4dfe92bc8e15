//! Gaussian fluctuations: drift and noise matrices, propagation of the
//! covariance equation ∂t C = S C + C Sᵀ + N to its periodic steady state,
//! and frozen-time Routh–Hurwitz stability.
//!
//! Quadrature ordering is (δq, δp, δX, δY) with X = (a + a†)/√2, so the
//! vacuum variance is 1/2.

use std::f64::consts::SQRT_2;
use std::io::Write;

use serde::Serialize;

use crate::classical::{closure_gap, MeanState, PeriodicOrbit, SettleOptions};
use crate::error::{Error, Result};
use crate::linalg::{solve_lyapunov, sym_pack, sym_unpack, symplectic_eigenvalues, Mat4, SYM_INDEX};
use crate::ode::{Stepper, Tolerances};
use crate::params::Model;

/// Vacuum variance in the convention used throughout this module.
pub const VACUUM: f64 = 0.5;

/// Drift matrix S(t) of the linearized fluctuations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftMatrix(pub Mat4);

impl DriftMatrix {
    /// Wrap a matrix after checking the structural entries: S12 = ω_M,
    /// S33 = S44 = −κ, and the rest of row 1 zero.
    pub fn new(s: Mat4, model: &Model) -> Result<Self> {
        let k = model.system.kappa;
        let structural = s[(0, 0)] == 0.0
            && s[(0, 2)] == 0.0
            && s[(0, 3)] == 0.0
            && s[(0, 1)] == model.system.omega_m
            && s[(2, 2)] == -k
            && s[(3, 3)] == -k
            && s[(2, 1)] == 0.0
            && s[(3, 1)] == 0.0;
        if !structural {
            return Err(Error::InvalidArgument("drift matrix structure violated".into()));
        }
        Ok(Self(s))
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn eigenvalues(&self) -> Vec<nalgebra::Complex<f64>> {
        self.0.complex_eigenvalues().iter().cloned().collect()
    }
}

/// The part of S that is linear in the mean values. The coupling entries
/// carry √2·G0 because X, Y are normalized by √2 while A is not; the
/// detuning shift is G0·Q.
pub fn coupling_matrix(g0: f64, m: &MeanState) -> Mat4 {
    let g = SQRT_2 * g0;
    let mut s = Mat4::zeros();
    s[(1, 2)] = g * m.a_re;
    s[(1, 3)] = g * m.a_im;
    s[(2, 0)] = -g * m.a_im;
    s[(3, 0)] = g * m.a_re;
    s[(2, 3)] = -g0 * m.q;
    s[(3, 2)] = g0 * m.q;
    s
}

/// S with the mean-value terms removed and the spring factor set to 1.
pub fn bare_drift(model: &Model) -> Mat4 {
    let sys = &model.system;
    let mut s = Mat4::zeros();
    s[(0, 1)] = sys.omega_m;
    s[(1, 0)] = -sys.omega_m;
    s[(1, 1)] = -sys.gamma_m;
    s[(2, 2)] = -sys.kappa;
    s[(2, 3)] = sys.detuning;
    s[(3, 2)] = -sys.detuning;
    s[(3, 3)] = -sys.kappa;
    s
}

#[inline]
fn drift_raw(t: f64, mean: &MeanState, model: &Model) -> Mat4 {
    let mut s = bare_drift(model) + coupling_matrix(model.derived.g0, mean);
    s[(1, 0)] = -model.system.omega_m * model.modulation.spring_factor(t);
    s
}

/// S(t) evaluated on the classical mean values at time t.
pub fn drift_at(t: f64, mean: &MeanState, model: &Model) -> DriftMatrix {
    DriftMatrix(drift_raw(t, mean, model))
}

/// Diagonal noise matrix N = diag(0, γ_M coth(ħω_M/2k_BT), κ, κ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseMatrix(pub Mat4);

impl NoiseMatrix {
    pub fn new(model: &Model) -> Self {
        let k = model.system.kappa;
        Self(Mat4::from_diagonal(&nalgebra::Vector4::new(
            0.0,
            model.system.gamma_m * model.derived.coth_factor,
            k,
            k,
        )))
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }
}

/// Symmetric 4×4 covariance matrix, vacuum = 1/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovMatrix(pub Mat4);

impl CovMatrix {
    pub fn vacuum() -> Self {
        Self(Mat4::identity() * VACUUM)
    }

    /// Mirror in a thermal state with occupation `n`, cavity in vacuum.
    pub fn thermal_mirror(n: f64) -> Self {
        Self(Mat4::from_diagonal(&nalgebra::Vector4::new(
            n + VACUUM,
            n + VACUUM,
            VACUUM,
            VACUUM,
        )))
    }

    pub fn from_packed(v: &[f64]) -> Self {
        Self(sym_unpack(v))
    }

    pub fn packed(&self) -> [f64; 10] {
        sym_pack(&self.0)
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn is_symmetric(&self) -> bool {
        self.0 == self.0.transpose()
    }

    /// (ν−, ν+) in the vacuum = 1/2 convention.
    pub fn symplectic_eigenvalues(&self) -> (f64, f64) {
        symplectic_eigenvalues(&self.0)
    }

    /// Fails when a symplectic eigenvalue is below 1/2 − `tol`.
    pub fn check_physical(&self, tol: f64) -> Result<()> {
        let (lo, _) = self.symplectic_eigenvalues();
        if !(lo >= VACUUM - tol) {
            return Err(Error::Unphysical(format!(
                "smallest symplectic eigenvalue {lo:.12} < 1/2"
            )));
        }
        Ok(())
    }
}

/// Steady state of the unmodulated system: S0 C + C S0ᵀ + N = 0 at the
/// classical fixed point.
pub fn algebraic_steady_state(model: &Model, fixed_point: &MeanState) -> Result<CovMatrix> {
    let s0 = drift_raw(0.0, fixed_point, &model.unmodulated());
    Ok(CovMatrix(solve_lyapunov(&s0, NoiseMatrix::new(model).matrix())?))
}

/// How the covariance integrator obtains the classical mean values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OrbitSource {
    /// Periodic cubic interpolation of the sampled orbit.
    #[default]
    Interpolated,
    /// Integrate the mean values alongside C.
    Lockstep,
}

impl std::str::FromStr for OrbitSource {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interpolated" => Ok(Self::Interpolated),
            "lockstep" => Ok(Self::Lockstep),
            other => Err(Error::InvalidArgument(format!("unknown orbit source `{other}`"))),
        }
    }
}

/// Integration and settling controls for the covariance equation.
#[derive(Debug, Clone, Copy)]
pub struct CovOptions {
    pub settle: SettleOptions,
    pub source: OrbitSource,
    /// Initial covariance; defaults to the unmodulated algebraic solution.
    pub initial: Option<CovMatrix>,
    /// Largest admissible |C_ij| before declaring divergence.
    pub overflow: f64,
    /// Allowed dip of the smallest symplectic eigenvalue below 1/2.
    pub physical_tol: f64,
}

impl Default for CovOptions {
    fn default() -> Self {
        Self {
            settle: SettleOptions::default(),
            source: OrbitSource::default(),
            initial: None,
            overflow: 1e12,
            physical_tol: 1e-6,
        }
    }
}

#[inline]
fn lyapunov_rhs(s: &Mat4, n: &Mat4, c: &[f64]) -> [f64; 10] {
    let c = sym_unpack(c);
    let sc = s * c;
    let mut out = [0.0; 10];
    for (k, &(i, j)) in SYM_INDEX.iter().enumerate() {
        out[k] = sc[(i, j)] + sc[(j, i)] + n[(i, j)];
    }
    out
}

// The absolute floor sits at the vacuum scale, not at the initial
// magnitude: a hot start would otherwise loosen the settled state.
fn cov_tolerances(rtol: f64, period: f64) -> Tolerances<10> {
    let mut tol = Tolerances::new(rtol, [rtol * VACUUM; 10]);
    tol.max_step = period / 8.0;
    tol
}

/// Integrator over either orbit source, advanced period by period.
enum CovStepper<'a> {
    Interp {
        st: Stepper<10>,
        orbit: &'a PeriodicOrbit,
    },
    Lock {
        st: Stepper<14>,
    },
}

impl<'a> CovStepper<'a> {
    fn new(
        c0: &CovMatrix,
        orbit: &'a PeriodicOrbit,
        source: OrbitSource,
        rtol: f64,
        t0: f64,
    ) -> Self {
        let packed = c0.packed();
        let ctol = cov_tolerances(rtol, orbit.period);
        match source {
            OrbitSource::Interpolated => Self::Interp {
                st: Stepper::new(t0, packed, 0.0, ctol),
                orbit,
            },
            OrbitSource::Lockstep => {
                let m0 = orbit.interpolate(t0);
                let mut y = [0.0; 14];
                y[..4].copy_from_slice(&m0.to_array());
                y[4..].copy_from_slice(&packed);
                let sq = m0.q.abs().max(1.0);
                let sa = m0.a_re.hypot(m0.a_im).max(1.0);
                let mut atol = [0.0; 14];
                atol[..4].copy_from_slice(&[rtol * sq, rtol * sq, rtol * sa, rtol * sa]);
                atol[4..].copy_from_slice(&ctol.atol);
                let mut tol = Tolerances::new(rtol, atol);
                tol.max_step = ctol.max_step;
                Self::Lock {
                    st: Stepper::new(t0, y, 0.0, tol),
                }
            }
        }
    }

    fn t(&self) -> f64 {
        match self {
            Self::Interp { st, .. } => st.t,
            Self::Lock { st } => st.t,
        }
    }

    fn cov(&self) -> [f64; 10] {
        match self {
            Self::Interp { st, .. } => st.y,
            Self::Lock { st } => {
                let mut c = [0.0; 10];
                c.copy_from_slice(&st.y[4..]);
                c
            }
        }
    }

    fn advance(&mut self, model: &Model, noise: &Mat4, t_end: f64) -> Result<()> {
        match self {
            Self::Interp { st, orbit } => {
                let orbit = *orbit;
                let mut f = |t: f64, y: &[f64; 10]| {
                    let s = drift_raw(t, &orbit.interpolate(t), model);
                    lyapunov_rhs(&s, noise, y)
                };
                st.advance(&mut f, t_end)
            }
            Self::Lock { st } => {
                let mut f = |t: f64, y: &[f64; 14]| {
                    let m = MeanState::from_array(&[y[0], y[1], y[2], y[3]]);
                    let dm = crate::classical::mean_rhs(t, &m, model).to_array();
                    let s = drift_raw(t, &m, model);
                    let dc = lyapunov_rhs(&s, noise, &y[4..]);
                    let mut out = [0.0; 14];
                    out[..4].copy_from_slice(&dm);
                    out[4..].copy_from_slice(&dc);
                    out
                };
                st.advance(&mut f, t_end)
            }
        }
    }
}

/// Propagate C from `c0` at `t_span.0` and return C at each time in `stops`
/// (ascending, within the span). The classical mean values come from
/// `orbit`, periodically extended.
pub fn evolve_covariance(
    c0: &CovMatrix,
    orbit: &PeriodicOrbit,
    model: &Model,
    t_span: (f64, f64),
    stops: &[f64],
    opts: &CovOptions,
) -> Result<Vec<(f64, CovMatrix)>> {
    if stops.windows(2).any(|w| w[1] < w[0])
        || stops.first().is_some_and(|&t| t < t_span.0)
        || stops.last().is_some_and(|&t| t > t_span.1)
    {
        return Err(Error::InvalidArgument(
            "sample times must be ascending and inside the span".into(),
        ));
    }
    let noise = *NoiseMatrix::new(model).matrix();
    let mut st = CovStepper::new(c0, orbit, opts.source, opts.settle.rtol, t_span.0);
    let mut out = Vec::with_capacity(stops.len());
    for &ts in stops {
        step_checked(&mut st, model, &noise, ts, opts)?;
        let c = CovMatrix::from_packed(&st.cov());
        c.check_physical(opts.physical_tol).map_err(|_| {
            Error::Numerical(format!(
                "covariance lost physicality at t = {ts:.6e}; tighten the tolerance"
            ))
        })?;
        out.push((ts, c));
    }
    Ok(out)
}

fn step_checked(
    st: &mut CovStepper<'_>,
    model: &Model,
    noise: &Mat4,
    t_end: f64,
    opts: &CovOptions,
) -> Result<()> {
    st.advance(model, noise, t_end).map_err(|e| match e {
        Error::Numerical(msg) => Error::Instability {
            time: st.t(),
            reason: msg,
        },
        other => other,
    })?;
    if st.cov().iter().any(|v| !v.is_finite() || v.abs() > opts.overflow) {
        return Err(Error::Instability {
            time: st.t(),
            reason: "covariance diverges".into(),
        });
    }
    Ok(())
}

/// Asymptotic periodic covariance sampled at N uniform phases.
#[derive(Debug, Clone, Serialize)]
pub struct CovOrbit {
    pub period: f64,
    #[serde(serialize_with = "ser_samples")]
    pub samples: Vec<(f64, CovMatrix)>,
    pub settle_time: f64,
    pub settle_gap: f64,
}

fn ser_samples<S: serde::Serializer>(
    v: &[(f64, CovMatrix)],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for (t, c) in v {
        seq.serialize_element(&(t, c.packed()))?;
    }
    seq.end()
}

impl CovOrbit {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Entry (i, j) across the period.
    pub fn entry(&self, i: usize, j: usize) -> Vec<f64> {
        self.samples.iter().map(|(_, c)| c.get(i, j)).collect()
    }

    /// CSV: t followed by the ten upper-triangle entries, row-major.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# period = {:.12e}", self.period)?;
        writeln!(w, "# settle_time = {:.12e}", self.settle_time)?;
        let names: Vec<String> = SYM_INDEX
            .iter()
            .map(|(i, j)| format!("C{}{}", i + 1, j + 1))
            .collect();
        writeln!(w, "t,{}", names.join(","))?;
        for (t, c) in &self.samples {
            let row: Vec<String> = c.packed().iter().map(|v| format!("{v:.12e}")).collect();
            writeln!(w, "{t:.12e},{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Integrate from the unmodulated algebraic solution (or `opts.initial`)
/// until the stroboscopic map of C closes, then sample one period.
pub fn steady_periodic_covariance(
    model: &Model,
    orbit: &PeriodicOrbit,
    n_samples: usize,
    opts: &CovOptions,
) -> Result<CovOrbit> {
    if n_samples < 2 {
        return Err(Error::InvalidArgument("an orbit needs at least 2 samples".into()));
    }
    let period = orbit.period;
    let c0 = match opts.initial {
        Some(c) => c,
        None => {
            let fp = crate::classical::fixed_point_unmodulated(model)?;
            algebraic_steady_state(model, &fp)?
        }
    };
    let noise = *NoiseMatrix::new(model).matrix();
    let mut st = CovStepper::new(&c0, orbit, opts.source, opts.settle.rtol, 0.0);
    let so = &opts.settle;
    let mut prev = st.cov();
    let mut streak = 0;
    let mut gap = f64::INFINITY;
    let mut settled = None;
    for k in 1..=so.max_periods {
        step_checked(&mut st, model, &noise, k as f64 * period, opts)?;
        let cur = st.cov();
        gap = closure_gap(&cur, &prev);
        prev = cur;
        streak = if gap < so.tol { streak + 1 } else { 0 };
        if k >= so.min_periods && streak >= so.consecutive {
            settled = Some(k);
            break;
        }
    }
    let k = settled.ok_or(Error::NonConvergence {
        periods: so.max_periods,
        gap,
    })?;
    let t0 = k as f64 * period;
    let mut samples = Vec::with_capacity(n_samples);
    for j in 0..n_samples {
        let ts = t0 + period * j as f64 / n_samples as f64;
        step_checked(&mut st, model, &noise, ts, opts)?;
        let c = CovMatrix::from_packed(&st.cov());
        c.check_physical(opts.physical_tol).map_err(|_| {
            Error::Numerical(format!(
                "covariance lost physicality at t = {ts:.6e}; tighten the tolerance"
            ))
        })?;
        samples.push((ts - t0, c));
    }
    Ok(CovOrbit {
        period,
        samples,
        settle_time: t0,
        settle_gap: gap,
    })
}

/// Zero pivots in the Routh array are replaced by this value.
pub const RH_EPSILON: f64 = 1e-12;

/// First column of the Routh array for λ⁴ + a1λ³ + a2λ² + a3λ + a4.
/// The second value is true when a zero pivot had to be perturbed.
pub fn routh_first_column(a: [f64; 4]) -> ([f64; 5], bool) {
    let mut marginal = false;
    let mut pivot = |v: f64| {
        if v.abs() < RH_EPSILON {
            marginal = true;
            RH_EPSILON
        } else {
            v
        }
    };
    let r0 = 1.0;
    let r1 = pivot(a[0]);
    let b1 = pivot((r1 * a[1] - a[2]) / r1);
    let b2 = a[3];
    let c1 = pivot((b1 * a[2] - r1 * b2) / b1);
    let d1 = b2;
    ([r0, r1, b1, c1, d1], marginal)
}

/// Frozen-time stability at one phase.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhaseCheck {
    pub phase: f64,
    pub stable: bool,
    /// Smallest Routh first-column entry of the polynomial in s = λ/ω_M.
    pub margin: f64,
    pub marginal: bool,
}

/// Routh–Hurwitz verdict over one period.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub stable: bool,
    pub marginal: bool,
    pub worst_margin: f64,
    /// Phase (s, within the period) of the worst margin.
    pub worst_phase: f64,
    pub phases: Vec<PhaseCheck>,
}

impl StabilityReport {
    /// Combine the frozen-time verdict with the outcome of an integration:
    /// a frozen-stable system that still diverges is a parametric
    /// instability.
    pub fn classify(&self, integration: &Result<()>) -> StabilityClass {
        match (self.stable, integration) {
            (false, _) => StabilityClass::FrozenUnstable,
            (true, Err(Error::Instability { .. })) => StabilityClass::ParametricInstability,
            (true, Err(Error::NonConvergence { .. })) => StabilityClass::NonConverged,
            (true, _) if self.marginal => StabilityClass::Marginal,
            (true, _) => StabilityClass::Stable,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityClass {
    Stable,
    Marginal,
    FrozenUnstable,
    ParametricInstability,
    NonConverged,
}

impl StabilityClass {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Stable => "stable",
            Self::Marginal => "marginal",
            Self::FrozenUnstable => "routh-hurwitz",
            Self::ParametricInstability => "parametric instability",
            Self::NonConverged => "non-converged",
        }
    }
}

/// Routh–Hurwitz test of the characteristic polynomial of a single matrix,
/// scaled by `omega` so that the margin is dimensionless.
pub fn routh_hurwitz_matrix(s: &Mat4, omega: f64) -> (bool, f64, bool) {
    let a = crate::linalg::char_poly4(s);
    let scaled = [
        a[0] / omega,
        a[1] / omega.powi(2),
        a[2] / omega.powi(3),
        a[3] / omega.powi(4),
    ];
    let (col, marginal) = routh_first_column(scaled);
    let margin = col[1..].iter().cloned().fold(f64::INFINITY, f64::min);
    (margin > 0.0, margin, marginal)
}

/// Evaluate the Routh array of S(t) at every sample phase of `orbit`.
pub fn routh_hurwitz_stable(model: &Model, orbit: &PeriodicOrbit) -> StabilityReport {
    let omega = model.system.omega_m;
    let phases: Vec<PhaseCheck> = orbit
        .samples
        .iter()
        .map(|(t, m)| {
            let (stable, margin, marginal) = routh_hurwitz_matrix(&drift_raw(*t, m, model), omega);
            PhaseCheck {
                phase: *t,
                stable,
                margin,
                marginal,
            }
        })
        .collect();
    let worst = phases
        .iter()
        .min_by(|a, b| a.margin.total_cmp(&b.margin))
        .copied()
        .unwrap_or(PhaseCheck {
            phase: 0.0,
            stable: true,
            margin: f64::INFINITY,
            marginal: false,
        });
    StabilityReport {
        stable: phases.iter().all(|p| p.stable),
        marginal: phases.iter().any(|p| p.marginal),
        worst_margin: worst.margin,
        worst_phase: worst.phase,
        phases,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{find_periodic_orbit, fixed_point_unmodulated};
    use crate::params::ModulationSpec;
    use std::f64::consts::TAU;

    fn reference() -> Model {
        Model::reference(ModulationSpec::none()).unwrap()
    }

    fn constant_orbit(model: &Model, m: MeanState) -> PeriodicOrbit {
        let period = TAU / (2.0 * model.system.omega_m);
        PeriodicOrbit {
            period,
            samples: (0..16).map(|j| (period * j as f64 / 16.0, m)).collect(),
            settle_time: 0.0,
            settle_gap: 0.0,
        }
    }

    #[test]
    fn decoupled_drift_is_block_diagonal() {
        let mut m = reference();
        m.derived.g0 = 0.0;
        let s = drift_at(0.0, &MeanState { q: 5.0, p: 1.0, a_re: 3.0, a_im: -2.0 }, &m);
        let s = DriftMatrix::new(s.0, &m).unwrap().0;
        let w = m.system.omega_m;
        assert_eq!(s.fixed_view::<2, 2>(0, 2).norm(), 0.0);
        assert_eq!(s.fixed_view::<2, 2>(2, 0).norm(), 0.0);
        assert_eq!((s[(0, 1)], s[(1, 0)], s[(1, 1)]), (w, -w, -m.system.gamma_m));
        let k = m.system.kappa;
        let d = m.system.detuning;
        assert_eq!((s[(2, 2)], s[(2, 3)], s[(3, 2)], s[(3, 3)]), (-k, d, -d, -k));
    }

    #[test]
    fn spring_entry_follows_modulation() {
        let m = Model::reference(ModulationSpec::mechanical(0.2, 1.0)).unwrap();
        let s = drift_at(0.0, &MeanState { q: 123.0, ..Default::default() }, &m);
        assert_eq!(s.0[(1, 0)], -1.2 * m.system.omega_m);
    }

    #[test]
    fn structural_check_rejects_tampering() {
        let m = reference();
        let mut s = drift_at(0.0, &MeanState::default(), &m).0;
        s[(0, 2)] = 1.0;
        assert!(DriftMatrix::new(s, &m).is_err());
    }

    #[test]
    fn fixed_point_drift_is_hurwitz() {
        let m = reference();
        let fp = fixed_point_unmodulated(&m).unwrap();
        let s = drift_at(0.0, &fp, &m);
        assert!(s.eigenvalues().iter().all(|l| l.re < 0.0));
        let (stable, margin, marginal) = routh_hurwitz_matrix(&s.0, m.system.omega_m);
        assert!(stable && margin > 0.0 && !marginal);
    }

    #[test]
    fn noise_is_diagonal() {
        let m = reference();
        let n = NoiseMatrix::new(&m).0;
        assert_eq!(n, Mat4::from_diagonal(&n.diagonal()));
        assert_eq!(n[(1, 1)], m.system.gamma_m * m.derived.coth_factor);
        assert_eq!(n[(0, 0)], 0.0);
    }

    #[test]
    fn frozen_without_drift_or_noise() {
        let mut m = reference();
        m.system.omega_m = 0.0;
        m.system.gamma_m = 0.0;
        m.system.kappa = 0.0;
        m.system.detuning = 0.0;
        m.derived.g0 = 0.0;
        let orbit = constant_orbit(&reference(), MeanState::default());
        let c0 = CovMatrix::thermal_mirror(3.0);
        let out = evolve_covariance(&c0, &orbit, &m, (0.0, 1e-5), &[5e-6, 1e-5], &CovOptions::default())
            .unwrap();
        assert!(out.iter().all(|(_, c)| *c == c0));
    }

    #[test]
    fn decoupled_mirror_thermalizes() {
        // Strong damping so thermalization takes a handful of periods.
        let mut m = reference();
        m.derived.g0 = 0.0;
        m.system.gamma_m = 0.2 * m.system.omega_m;
        m.derived.coth_factor = 21.0;
        let orbit = constant_orbit(&m, MeanState::default());
        let t1 = 60.0 / m.system.gamma_m;
        let out = evolve_covariance(&CovMatrix::vacuum(), &orbit, &m, (0.0, t1), &[t1], &CovOptions::default())
            .unwrap();
        let c = out[0].1;
        // n̄ + 1/2 = coth/2
        assert!((c.get(0, 0) - 10.5).abs() < 1e-6, "{}", c.get(0, 0));
        assert!((c.get(1, 1) - 10.5).abs() < 1e-6);
        assert!((c.get(2, 2) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn unmodulated_steady_state_matches_lyapunov() {
        let m = Model::reference(ModulationSpec::mechanical(0.0, 2.0 * TAU * 1e6)).unwrap();
        let fp = fixed_point_unmodulated(&m).unwrap();
        let alg = algebraic_steady_state(&m, &fp).unwrap();
        let orbit = find_periodic_orbit(&m, 32, &SettleOptions::default()).unwrap();
        let cov = steady_periodic_covariance(&m, &orbit, 32, &CovOptions::default()).unwrap();
        for (_, c) in &cov.samples {
            assert!((c.0 - alg.0).abs().max() < 1e-7);
            assert!(c.is_symmetric());
        }
        assert!((alg.get(0, 0) - 0.56).abs() < 0.02);
    }

    #[test]
    fn decoupled_steady_state_is_thermal() {
        let mut m = Model::reference(ModulationSpec::mechanical(0.0, 2.0 * TAU * 1e6)).unwrap();
        m.derived.g0 = 0.0;
        let fp = fixed_point_unmodulated(&m).unwrap();
        let orbit = constant_orbit(&m, fp);
        let cov = steady_periodic_covariance(&m, &orbit, 8, &CovOptions::default()).unwrap();
        let want = CovMatrix::thermal_mirror(m.derived.n_thermal).0;
        for (_, c) in &cov.samples {
            assert!((c.0 - want).abs().max() < 1e-7);
        }
    }

    #[test]
    fn routh_mirror_only() {
        let mut s = Mat4::zeros();
        s[(0, 1)] = 1.0;
        s[(1, 0)] = -1.0;
        s[(1, 1)] = -0.1;
        s[(2, 2)] = -1.0;
        s[(3, 3)] = -1.0;
        assert!(routh_hurwitz_matrix(&s, 1.0).0);
        s[(1, 1)] = 0.1;
        assert!(!routh_hurwitz_matrix(&s, 1.0).0);
    }

    #[test]
    fn routh_zero_pivot_is_marginal() {
        // λ⁴ + λ² has a zero in the first column.
        let (_, marginal) = routh_first_column([0.0, 1.0, 0.0, 0.0]);
        assert!(marginal);
    }

    #[test]
    fn csv_columns() {
        let orbit = CovOrbit {
            period: 1.0,
            samples: vec![(0.0, CovMatrix::vacuum())],
            settle_time: 0.0,
            settle_gap: 0.0,
        };
        let mut buf = Vec::new();
        orbit.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().nth(2).unwrap();
        assert_eq!(header, "t,C11,C12,C13,C14,C22,C23,C24,C33,C34,C44");
    }
}
