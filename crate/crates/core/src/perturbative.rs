//! Harmonic balance in the modulation strengths.
//!
//! Mean values and covariances are expanded as x = x⁽⁰⁾ + x⁽¹⁾ + x⁽²⁾ + …,
//! where x⁽ⁿ⁾ is homogeneous of degree n in (ε, η). Each order obeys a
//! linear equation with the unmodulated Jacobian and a forcing assembled
//! from lower orders, so it is solved harmonic by harmonic with one dense
//! real block system per frequency kΩ. Order n contains harmonics 0..=n.
//!
//! The single parametric oscillator ẍ = −ω0²[1 + α cos νt]x − γẋ + F is
//! included as a scalar reference for the same mechanism.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, Vector4};
use serde::Serialize;

use crate::classical::{closure_gap, fixed_point_unmodulated, MeanState};
use crate::covariance::{bare_drift, coupling_matrix, NoiseMatrix};
use crate::error::{Error, Result};
use crate::linalg::{lyapunov_operator, solve_harmonic, solve_lyapunov, sym_pack, sym_unpack, Mat4};
use crate::ode::{Stepper, Tolerances};
use crate::params::Model;
use crate::series::{trig_product, HarmonicSeries, Trig};

/// Highest order the iterative solver accepts.
pub const MAX_ORDER: usize = 6;

/// Condition numbers above this produce a warning.
pub const COND_WARN: f64 = 1e10;

// ---------------------------------------------------------------------------
// Single parametric oscillator

/// ẍ = −ω0²[1 + α cos νt] x − γ ẋ + F
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToyOscillator {
    pub omega0: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub nu: f64,
    pub force: f64,
}

impl ToyOscillator {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega0 > 0.0) {
            return Err(Error::InvalidParameter {
                name: "omega0",
                reason: "must be > 0".into(),
            });
        }
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                reason: "must be > 0".into(),
            });
        }
        if !(self.alpha >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: "must be >= 0".into(),
            });
        }
        Ok(())
    }

    /// Modulation strength 2γ/ω0 at which pumping at ν = 2ω0 overcomes
    /// damping.
    pub fn threshold(&self) -> f64 {
        2.0 * self.gamma / self.omega0
    }

    fn rhs(&self, t: f64, y: &[f64; 2]) -> [f64; 2] {
        let w2 = self.omega0 * self.omega0;
        [
            y[1],
            -w2 * (1.0 + self.alpha * (self.nu * t).cos()) * y[0] - self.gamma * y[1] + self.force,
        ]
    }
}

/// Lorentzian response 1/√((ω0² − ν²)² + (γν)²).
pub fn toy_response(osc: &ToyOscillator) -> f64 {
    let w2 = osc.omega0 * osc.omega0;
    let nu = osc.nu;
    1.0 / ((w2 - nu * nu).powi(2) + (osc.gamma * nu).powi(2)).sqrt()
}

/// F/ω0² + α·x1(t), where x1 is the steady response of the damped
/// oscillator to the effective force −F cos νt. The phase comes from the
/// transfer function X = −F/(ω0² − ν² + iγν): x1 = Re X cos νt − Im X sin νt.
pub fn toy_first_order_orbit(osc: &ToyOscillator) -> Result<HarmonicSeries> {
    osc.validate()?;
    if osc.alpha >= osc.threshold() {
        return Err(Error::AboveThreshold {
            alpha: osc.alpha,
            threshold: osc.threshold(),
        });
    }
    let w2 = osc.omega0 * osc.omega0;
    let mut t = Trig::constant(osc.force / w2);
    if osc.alpha > 0.0 && osc.force != 0.0 {
        let re = w2 - osc.nu * osc.nu;
        let im = osc.gamma * osc.nu;
        let d = re * re + im * im;
        let (x_re, x_im) = (-osc.force * re / d, osc.force * im / d);
        t.add_term(1, osc.alpha * x_re, -osc.alpha * x_im);
    }
    Ok(HarmonicSeries::from_trig(&t, osc.nu, 1))
}

/// Integrate the oscillator from rest at x = F/ω0² until the stroboscopic
/// map closes and project one period onto harmonics of ν.
pub fn toy_numeric_orbit(osc: &ToyOscillator, n_samples: usize, max_harmonic: usize) -> Result<HarmonicSeries> {
    osc.validate()?;
    if !(osc.nu > 0.0) {
        return Err(Error::InvalidArgument("toy modulation frequency must be > 0".into()));
    }
    let period = TAU / osc.nu;
    let x0 = osc.force / (osc.omega0 * osc.omega0);
    let scale = x0.abs().max(1.0);
    let mut tol = Tolerances::new(1e-10, [1e-12 * scale; 2]);
    tol.max_step = period / 16.0;
    let mut st = Stepper::new(0.0, [x0, 0.0], 0.0, tol);
    let mut f = |t: f64, y: &[f64; 2]| osc.rhs(t, y);
    let mut prev = st.y;
    let mut k = 0usize;
    loop {
        k += 1;
        st.advance(&mut f, k as f64 * period)?;
        if st.y.iter().any(|v| !v.is_finite() || v.abs() > 1e12 * scale) {
            return Err(Error::Instability {
                time: st.t,
                reason: "toy oscillator diverges".into(),
            });
        }
        let gap = closure_gap(&st.y, &prev);
        prev = st.y;
        if k >= 20 && gap < 1e-10 {
            break;
        }
        if k >= 100_000 {
            return Err(Error::NonConvergence { periods: k, gap });
        }
    }
    let t0 = st.t;
    let mut xs = Vec::with_capacity(n_samples);
    for j in 0..n_samples {
        st.advance(&mut f, t0 + period * j as f64 / n_samples as f64)?;
        xs.push(st.y[0]);
    }
    crate::series::project(&xs, osc.nu, max_harmonic)
}

/// Growth of the oscillation envelope over three windows of 40/γ each:
/// true when the last window's peak deviation exceeds the previous one's
/// by more than 50 %.
pub fn toy_diverges(osc: &ToyOscillator) -> Result<bool> {
    osc.validate()?;
    let x0 = osc.force / (osc.omega0 * osc.omega0);
    let window = 40.0 / osc.gamma;
    let mut tol = Tolerances::new(1e-9, [1e-12 * x0.abs().max(1.0); 2]);
    if osc.nu > 0.0 {
        tol.max_step = TAU / osc.nu / 8.0;
    }
    // Small kick so that F = 0 still seeds the unstable mode.
    let mut st = Stepper::new(0.0, [x0 + 1e-3 * x0.abs().max(1.0), 0.0], 0.0, tol);
    let mut f = |t: f64, y: &[f64; 2]| osc.rhs(t, y);
    let per_window = 256;
    let mut peaks = Vec::new();
    for w in 0..3 {
        let mut peak: f64 = 0.0;
        for j in 1..=per_window {
            let t = window * (w as f64 + j as f64 / per_window as f64);
            if st.advance(&mut f, t).is_err() {
                return Ok(true);
            }
            if !st.y[0].is_finite() || st.y[0].abs() > 1e200 {
                return Ok(true);
            }
            peak = peak.max((st.y[0] - x0).abs());
        }
        peaks.push(peak);
    }
    Ok(peaks[2] > 1.5 * peaks[1])
}

/// Bisect the modulation strength at ν = 2ω0 for the onset of divergence.
pub fn toy_threshold_scan(omega0: f64, gamma: f64, force: f64, iterations: usize) -> Result<f64> {
    let mut osc = ToyOscillator {
        omega0,
        gamma,
        alpha: 0.0,
        nu: 2.0 * omega0,
        force,
    };
    let nominal = osc.threshold();
    let (mut lo, mut hi) = (0.25 * nominal, 4.0 * nominal);
    osc.alpha = hi;
    if !toy_diverges(&osc)? {
        return Err(Error::Numerical("no divergence found in the scan range".into()));
    }
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        osc.alpha = mid;
        if toy_diverges(&osc)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

// ---------------------------------------------------------------------------
// Optomechanical harmonic balance

fn to_d(v: &Vector4<f64>) -> DVector<f64> {
    DVector::from_column_slice(v.as_slice())
}

fn mean_vec(m: &MeanState) -> Vector4<f64> {
    Vector4::new(m.q, m.p, m.a_re, m.a_im)
}

fn vec_mean(v: &Vector4<f64>) -> MeanState {
    MeanState {
        q: v[0],
        p: v[1],
        a_re: v[2],
        a_im: v[3],
    }
}

/// Jacobian of the unmodulated mean-value equations at `x0`.
pub fn mean_jacobian(model: &Model, x0: &MeanState) -> Mat4 {
    let s = &model.system;
    let g = model.derived.g0;
    let d = s.detuning - g * x0.q;
    Mat4::new(
        0.0, s.omega_m, 0.0, 0.0, //
        -s.omega_m, -s.gamma_m, 2.0 * g * x0.a_re, 2.0 * g * x0.a_im, //
        -g * x0.a_im, 0.0, -s.kappa, d, //
        g * x0.a_re, 0.0, -d, -s.kappa,
    )
}

/// Solve ẋ = L x + f(t) for the periodic response, harmonic by harmonic.
fn solve_orders_step<T, F>(
    forcing: &Trig<T>,
    omega: f64,
    dim_solve: F,
    max_cond: &mut f64,
) -> Result<Trig<T>>
where
    T: crate::series::Coef,
    F: Fn(f64, &T, &T) -> Result<(T, T, f64)>,
{
    let z = forcing.c0.zero_like();
    let (a0, _, c0) = dim_solve(0.0, &forcing.c0, &z)?;
    *max_cond = max_cond.max(c0);
    let mut out = Trig::constant(a0);
    for k in 1..=forcing.max_harmonic() {
        let (fa, fb) = forcing.coeffs(k);
        let (a, b, c) = dim_solve(k as f64 * omega, &fa, &fb)?;
        *max_cond = max_cond.max(c);
        out.add_term(k, a, b);
    }
    Ok(out)
}

fn cos_wave() -> Trig<f64> {
    let mut c = Trig::constant(0.0);
    c.add_term(1, 1.0, 0.0);
    c
}

fn check_order(max_order: usize) -> Result<()> {
    if max_order > MAX_ORDER {
        return Err(Error::InvalidArgument(format!(
            "perturbative order {max_order} exceeds {MAX_ORDER}"
        )));
    }
    Ok(())
}

fn model_frequency(model: &Model) -> Result<f64> {
    model
        .modulation
        .frequency()
        .ok_or_else(|| Error::InvalidArgument("modulation frequency must be > 0".into()))
}

fn cond_warning(what: &str, cond: f64) -> Option<String> {
    (cond > COND_WARN).then(|| {
        format!("{what}: condition number {cond:.3e} above {COND_WARN:e}; close to an instability")
    })
}

/// Mean values order by order, in the state ordering (Q, P, Re A, Im A).
#[derive(Debug, Clone)]
pub struct ClassicalOrders {
    pub omega: f64,
    /// `orders[n]` is the degree-n part x⁽ⁿ⁾.
    pub orders: Vec<Trig<Vector4<f64>>>,
    pub max_condition: f64,
    pub warnings: Vec<String>,
}

impl ClassicalOrders {
    pub fn max_order(&self) -> usize {
        self.orders.len() - 1
    }

    pub fn fixed_point(&self) -> MeanState {
        vec_mean(&self.orders[0].c0)
    }

    /// Degree-n part of one component (0 = Q, 1 = P, 2 = Re A, 3 = Im A).
    pub fn order_term(&self, n: usize, idx: usize) -> Trig<f64> {
        self.orders[n].map(|v| v[idx])
    }

    /// Sum of orders 0..=max_order of one component.
    pub fn component(&self, idx: usize, max_order: usize) -> HarmonicSeries {
        let top = max_order.min(self.max_order());
        let mut acc = self.order_term(0, idx);
        for n in 1..=top {
            acc = acc.plus(&self.order_term(n, idx));
        }
        HarmonicSeries::from_trig(&acc, self.omega, top)
    }

    pub fn eval(&self, t: f64) -> MeanState {
        let v = self
            .orders
            .iter()
            .fold(Vector4::zeros(), |acc, o| acc + o.eval(self.omega, t));
        vec_mean(&v)
    }
}

/// Harmonic-balance solution of the mean-value equations up to `max_order`.
pub fn classical_orders(model: &Model, max_order: usize) -> Result<ClassicalOrders> {
    check_order(max_order)?;
    let omega = model_frequency(model)?;
    let x0 = fixed_point_unmodulated(model)?;
    let l = DMatrix::from_column_slice(4, 4, mean_jacobian(model, &x0).as_slice());
    let s = &model.system;
    let g0 = model.derived.g0;
    let eps = model.modulation.epsilon;
    let eta = model.modulation.eta;
    let phi = model.modulation.phi;
    let drive = model.derived.drive;

    let solve = |w: f64, fa: &Vector4<f64>, fb: &Vector4<f64>| {
        let (a, b, c) = solve_harmonic(&l, w, &to_d(fa), &to_d(fb))?;
        Ok((
            Vector4::from_column_slice(a.as_slice()),
            Vector4::from_column_slice(b.as_slice()),
            c,
        ))
    };
    let quad = |u: &Vector4<f64>, v: &Vector4<f64>| {
        Vector4::new(
            0.0,
            g0 * (u[2] * v[2] + u[3] * v[3]),
            -g0 * u[0] * v[3],
            g0 * u[0] * v[2],
        )
    };
    let spring = |c: &f64, v: &Vector4<f64>| Vector4::new(0.0, -s.omega_m * eps * c * v[0], 0.0, 0.0);

    let mut orders = vec![Trig::constant(mean_vec(&x0))];
    let mut max_cond: f64 = 0.0;
    for n in 1..=max_order {
        let mut f = trig_product(&cos_wave(), &orders[n - 1], spring);
        if n == 1 {
            f.c0 = Vector4::zeros();
            let (sp, cp) = phi.sin_cos();
            f.add_term(
                1,
                Vector4::new(0.0, 0.0, drive * eta * cp, 0.0),
                Vector4::new(0.0, 0.0, -drive * eta * sp, 0.0),
            );
        }
        for i in 1..n {
            f = f.plus(&trig_product(&orders[i], &orders[n - i], quad));
        }
        orders.push(solve_orders_step(&f, omega, solve, &mut max_cond)?);
    }
    let warnings = cond_warning("classical orders", max_cond).into_iter().collect();
    Ok(ClassicalOrders {
        omega,
        orders,
        max_condition: max_cond,
        warnings,
    })
}

/// Covariance matrix order by order.
#[derive(Debug, Clone)]
pub struct CovarianceOrders {
    pub omega: f64,
    pub orders: Vec<Trig<Mat4>>,
    pub max_condition: f64,
    pub warnings: Vec<String>,
}

impl CovarianceOrders {
    pub fn max_order(&self) -> usize {
        self.orders.len() - 1
    }

    fn summed(&self, max_order: usize) -> (Trig<Mat4>, usize) {
        let top = max_order.min(self.max_order());
        let mut acc = self.orders[0].clone();
        for n in 1..=top {
            acc = acc.plus(&self.orders[n]);
        }
        (acc, top)
    }

    /// Degree-n part of entry (i, j).
    pub fn order_entry(&self, n: usize, i: usize, j: usize) -> Trig<f64> {
        self.orders[n].map(|m| m[(i, j)])
    }

    pub fn entry(&self, i: usize, j: usize, max_order: usize) -> HarmonicSeries {
        let (acc, top) = self.summed(max_order);
        HarmonicSeries::from_trig(&acc.map(|m| m[(i, j)]), self.omega, top)
    }

    /// Degree-n part of (C11 + C22 − 1)/2; the −1/2 sits in order 0.
    pub fn order_phonon(&self, n: usize) -> Trig<f64> {
        let mut t = self.orders[n].map(|m| 0.5 * (m[(0, 0)] + m[(1, 1)]));
        if n == 0 {
            t.c0 -= 0.5;
        }
        t
    }

    pub fn phonon(&self, max_order: usize) -> HarmonicSeries {
        let (acc, top) = self.summed(max_order);
        let mut t = acc.map(|m| 0.5 * (m[(0, 0)] + m[(1, 1)]));
        t.c0 -= 0.5;
        HarmonicSeries::from_trig(&t, self.omega, top)
    }

    pub fn eval(&self, t: f64) -> Mat4 {
        self.orders
            .iter()
            .fold(Mat4::zeros(), |acc, o| acc + o.eval(self.omega, t))
    }
}

/// Harmonic-balance solution of ∂t C = S C + C Sᵀ + N with S expanded along
/// the classical orders. Order 0 is the algebraic Lyapunov solution.
pub fn covariance_orders(
    model: &Model,
    classical: &ClassicalOrders,
    max_order: usize,
) -> Result<CovarianceOrders> {
    check_order(max_order)?;
    if max_order > classical.max_order() {
        return Err(Error::InvalidArgument(format!(
            "covariance order {max_order} needs classical orders up to {max_order}"
        )));
    }
    let omega = classical.omega;
    let g0 = model.derived.g0;
    let eps = model.modulation.epsilon;
    let x0 = classical.fixed_point();
    let s0 = bare_drift(model) + coupling_matrix(g0, &x0);
    let noise = *NoiseMatrix::new(model).matrix();
    let c0 = solve_lyapunov(&s0, &noise)?;

    // S⁽ⁿ⁾ for n ≥ 1: the mean-value coupling plus, at n = 1, −ω_M ε cos Ωt.
    let mut s_orders: Vec<Trig<Mat4>> = vec![Trig::constant(s0)];
    for n in 1..=max_order {
        let mut sn = classical.orders[n].map(|v| coupling_matrix(g0, &vec_mean(v)));
        if n == 1 {
            let mut e = Mat4::zeros();
            e[(1, 0)] = -model.system.omega_m * eps;
            sn.add_term(1, e, Mat4::zeros());
        }
        s_orders.push(sn);
    }

    let op = lyapunov_operator(&s0);
    let l = DMatrix::from_column_slice(10, 10, op.as_slice());
    let solve = |w: f64, fa: &Mat4, fb: &Mat4| {
        let (a, b, c) = solve_harmonic(
            &l,
            w,
            &DVector::from_column_slice(&sym_pack(fa)),
            &DVector::from_column_slice(&sym_pack(fb)),
        )?;
        Ok((sym_unpack(a.as_slice()), sym_unpack(b.as_slice()), c))
    };

    let mut orders = vec![Trig::constant(c0)];
    let mut max_cond: f64 = 0.0;
    for n in 1..=max_order {
        let mut f = Trig::zero(&Mat4::zeros());
        for i in 1..=n {
            let p = trig_product(&s_orders[i], &orders[n - i], |s, c| s * c);
            f = f.plus(&p.map(|m| m + m.transpose()));
        }
        orders.push(solve_orders_step(&f, omega, solve, &mut max_cond)?);
    }
    let warnings = cond_warning("covariance orders", max_cond).into_iter().collect();
    Ok(CovarianceOrders {
        omega,
        orders,
        max_condition: max_cond,
        warnings,
    })
}

/// Frobenius norm of the first-harmonic pair of C⁽¹⁾, √(|a1|² + |b1|²).
pub fn first_harmonic_response(cov: &CovarianceOrders) -> f64 {
    let (a, b) = cov.orders[1].coeffs(1);
    (a.norm_squared() + b.norm_squared()).sqrt()
}

/// v(φ) ≈ A + B cos(φ + φ0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseFit {
    pub a: f64,
    pub b: f64,
    pub phi0: f64,
    /// Coefficients of cos φ and sin φ.
    pub cos_coef: f64,
    pub sin_coef: f64,
    /// Root-mean-square misfit.
    pub residual: f64,
}

/// Least-squares fit of samples v(φ_i) onto 1, cos φ, sin φ.
pub fn phase_decomposition(phis: &[f64], values: &[f64]) -> Result<PhaseFit> {
    if phis.len() != values.len() {
        return Err(Error::InvalidArgument("phase and value counts differ".into()));
    }
    if phis.len() < 3 {
        return Err(Error::InvalidArgument("phase fit needs at least 3 samples".into()));
    }
    let n = phis.len();
    let m = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 1.0,
        1 => phis[i].cos(),
        _ => phis[i].sin(),
    });
    let v = DVector::from_column_slice(values);
    let x = m
        .clone()
        .svd(true, true)
        .solve(&v, 1e-12)
        .map_err(|e| Error::Numerical(e.to_string()))?;
    if m.clone().svd(false, false).singular_values.min() < 1e-9 {
        return Err(Error::InvalidArgument("phases do not resolve cos φ and sin φ".into()));
    }
    let r = &m * &x - v;
    let (c, s) = (x[1], x[2]);
    Ok(PhaseFit {
        a: x[0],
        b: c.hypot(s),
        phi0: (-s).atan2(c),
        cos_coef: c,
        sin_coef: s,
        residual: (r.norm_squared() / n as f64).sqrt(),
    })
}

/// Evaluate `f` on the perturbative solution at `n_phi` uniform phases and
/// fit the result in φ.
pub fn phase_scan<F>(model: &Model, n_phi: usize, max_order: usize, f: F) -> Result<PhaseFit>
where
    F: Fn(&ClassicalOrders, &CovarianceOrders) -> f64,
{
    let phis: Vec<f64> = (0..n_phi).map(|i| TAU * i as f64 / n_phi as f64).collect();
    let mut vals = Vec::with_capacity(n_phi);
    for &phi in &phis {
        let mut m = *model;
        m.modulation.phi = phi;
        let cl = classical_orders(&m, max_order)?;
        let cv = covariance_orders(&m, &cl, max_order)?;
        vals.push(f(&cl, &cv));
    }
    phase_decomposition(&phis, &vals)
}

// ---------------------------------------------------------------------------
// Reporting

/// Serializable bundle of the summed series.
#[derive(Debug, Clone, Serialize)]
pub struct PerturbativeReport {
    pub order: usize,
    pub omega: f64,
    pub q: HarmonicSeries,
    pub p: HarmonicSeries,
    pub a_re: HarmonicSeries,
    pub a_im: HarmonicSeries,
    pub c11: HarmonicSeries,
    pub c22: HarmonicSeries,
    pub n_phon: HarmonicSeries,
    pub max_condition: f64,
    pub warnings: Vec<String>,
}

pub fn report(model: &Model, max_order: usize) -> Result<PerturbativeReport> {
    let cl = classical_orders(model, max_order)?;
    let cv = covariance_orders(model, &cl, max_order)?;
    let mut warnings = cl.warnings.clone();
    warnings.extend(cv.warnings.iter().cloned());
    Ok(PerturbativeReport {
        order: max_order,
        omega: cl.omega,
        q: cl.component(0, max_order),
        p: cl.component(1, max_order),
        a_re: cl.component(2, max_order),
        a_im: cl.component(3, max_order),
        c11: cv.entry(0, 0, max_order),
        c22: cv.entry(1, 1, max_order),
        n_phon: cv.phonon(max_order),
        max_condition: cl.max_condition.max(cv.max_condition),
        warnings,
    })
}

fn fmt_coef(v: f64) -> String {
    let a = v.abs();
    if a >= 100.0 {
        format!("{a:.2}")
    } else if a >= 1.0 {
        format!("{a:.3}")
    } else {
        format!("{a:.4}")
    }
}

fn signed(v: f64, first: bool) -> String {
    match (first, v < 0.0) {
        (true, false) => fmt_coef(v),
        (true, true) => format!("-{}", fmt_coef(v)),
        (false, false) => format!(" + {}", fmt_coef(v)),
        (false, true) => format!(" - {}", fmt_coef(v)),
    }
}

/// One line `name(t) = …` with the degree-n parts divided by `unit^n`, so
/// that the printed coefficients multiply powers of `symbol`.
pub fn graded_line(name: &str, terms: &[Trig<f64>], unit: f64, symbol: &str) -> String {
    let mut out = format!("{name}(t) = ");
    let mut first = true;
    let pow = |n: usize| match n {
        0 => String::new(),
        1 => format!("{symbol} "),
        _ => format!("{symbol}^{n} "),
    };
    // Constants of all orders first, then harmonics by order.
    for (n, t) in terms.iter().enumerate() {
        let c = t.c0 / unit.powi(n as i32);
        if n == 0 || c.abs() > 0.0 {
            let s = signed(c, first);
            let _ = write!(out, "{}", if n == 0 { s } else { format!("{s} {}", pow(n)).trim_end().to_string() });
            first = false;
        }
    }
    for (n, t) in terms.iter().enumerate().skip(1) {
        for k in 1..=t.max_harmonic() {
            let (a, b) = t.coeffs(k);
            let (a, b) = (a / unit.powi(n as i32), b / unit.powi(n as i32));
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let w = if k == 1 { "Wt".to_string() } else { format!("{k}Wt") };
            let _ = write!(
                out,
                " + {}({} cos({w}){} sin({w}))",
                pow(n),
                signed(a, true),
                signed(b, false)
            );
        }
    }
    out
}

/// Semi-numeric table in the layout of the printed expansions.
///
/// With η = 0 every order n is proportional to εⁿ and the coefficients of
/// ε, ε², … are printed. With two modulations the time-constant parts of
/// Q, C11 + C22 − 1 and C11 are decomposed in φ.
pub fn coefficient_table(model: &Model, max_order: usize) -> Result<String> {
    let mut out = String::new();
    let eps = model.modulation.epsilon;
    let eta = model.modulation.eta;
    if eta == 0.0 {
        let mut m = *model;
        if eps == 0.0 {
            m.modulation.epsilon = 0.5;
        }
        let unit = m.modulation.epsilon;
        let cl = classical_orders(&m, max_order)?;
        let cv = covariance_orders(&m, &cl, max_order.min(2))?;
        let q: Vec<Trig<f64>> = (0..=max_order).map(|n| cl.order_term(n, 0)).collect();
        let n: Vec<Trig<f64>> = (0..=cv.max_order()).map(|k| cv.order_phonon(k)).collect();
        let c11: Vec<Trig<f64>> = (0..=cv.max_order()).map(|k| cv.order_entry(k, 0, 0)).collect();
        let _ = writeln!(out, "# single modulation, Omega/omega_M = {:.6}", cl.omega / m.system.omega_m);
        let _ = writeln!(out, "{}", graded_line("Q", &q, unit, "eps"));
        let _ = writeln!(out, "{}", graded_line("n_phon", &n, unit, "eps"));
        let _ = writeln!(out, "{}", graded_line("C11", &c11, unit, "eps"));
        for w in cl.warnings.iter().chain(cv.warnings.iter()) {
            let _ = writeln!(out, "# warning: {w}");
        }
        return Ok(out);
    }
    let order = max_order.clamp(2, MAX_ORDER);
    let fits = [
        ("Q", phase_scan(model, 8, order, |cl, _| cl.component(0, order).a0)?),
        (
            "C11+C22-1",
            phase_scan(model, 8, order.min(2), |_, cv| 2.0 * cv.phonon(2).a0)?,
        ),
        ("C11", phase_scan(model, 8, order.min(2), |_, cv| cv.entry(0, 0, 2).a0)?),
    ];
    let _ = writeln!(
        out,
        "# two modulations, eps = {eps}, eta = {eta}, Omega/omega_M = {:.6}; constant parts vs phi",
        model_frequency(model)? / model.system.omega_m
    );
    for (name, f) in fits {
        let _ = writeln!(
            out,
            "{name} = {}{} cos(phi){} sin(phi)    [= {} + {} cos(phi {:+.4}), rms {:.1e}]",
            signed(f.a, true),
            signed(f.cos_coef, false),
            signed(f.sin_coef, false),
            fmt_coef(f.a),
            fmt_coef(f.b),
            f.phi0,
            f.residual
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ModulationSpec;

    fn single(eps: f64) -> Model {
        let w = 2.0 * TAU * 1e6;
        Model::reference(ModulationSpec::mechanical(eps, w)).unwrap()
    }

    #[test]
    fn toy_response_values() {
        let mut o = ToyOscillator { omega0: 2.0, gamma: 0.1, alpha: 0.0, nu: 0.0, force: 1.0 };
        assert_eq!(toy_response(&o), 0.25);
        o.nu = 2.0;
        assert!((toy_response(&o) - 1.0 / 0.2).abs() < 1e-12);
        o.nu = 1.0;
        assert_eq!(toy_response(&o), 1.0 / (9.0f64 + 0.01).sqrt());
    }

    #[test]
    fn toy_trivial_orbits() {
        let o = ToyOscillator { omega0: 2.0, gamma: 0.1, alpha: 0.0, nu: 1.0, force: 3.0 };
        let s = toy_first_order_orbit(&o).unwrap();
        assert_eq!(s.a0, 0.75);
        assert!(s.harmonics.is_empty());
        let o = ToyOscillator { alpha: 0.05, force: 0.0, ..o };
        let s = toy_first_order_orbit(&o).unwrap();
        assert_eq!(s.a0, 0.0);
        assert_eq!(s.amplitude(1), 0.0);
    }

    #[test]
    fn toy_threshold_error() {
        let o = ToyOscillator { omega0: 1.0, gamma: 0.05, alpha: 0.1, nu: 2.0, force: 1.0 };
        assert!(matches!(toy_first_order_orbit(&o), Err(Error::AboveThreshold { .. })));
    }

    #[test]
    fn toy_resonant_amplitude() {
        let o = ToyOscillator { omega0: 1.0, gamma: 0.05, alpha: 0.05, nu: 1.0, force: 1.0 };
        let s = toy_first_order_orbit(&o).unwrap();
        assert!((s.amplitude(1) - 1.0).abs() < 1e-12);
        assert!((s.amplitude(1) - o.alpha * toy_response(&o) * o.force).abs() < 1e-12);
    }

    #[test]
    fn zero_modulation_orders_are_constant() {
        let m = single(0.0);
        let cl = classical_orders(&m, 3).unwrap();
        for n in 1..=3 {
            assert_eq!(cl.orders[n].c0, Vector4::zeros());
            assert!(cl.orders[n].harmonics.iter().all(|(a, b)| a.norm() == 0.0 && b.norm() == 0.0));
        }
        let cv = covariance_orders(&m, &cl, 2).unwrap();
        assert!(cv.orders[1].c0.norm() == 0.0 && cv.orders[2].c0.norm() == 0.0);
    }

    #[test]
    fn first_order_solves_linearized_equation() {
        // Residual of ẋ1 = L x1 + f1 at a few times.
        let m = single(0.1);
        let cl = classical_orders(&m, 1).unwrap();
        let l = mean_jacobian(&m, &cl.fixed_point());
        let w = cl.omega;
        let x0 = cl.fixed_point();
        for t in [0.0, 0.13e-6, 0.31e-6] {
            let x1 = cl.orders[1].eval(w, t);
            // time derivative from the harmonics
            let (a, b) = cl.orders[1].coeffs(1);
            let (s, c) = (w * t).sin_cos();
            let dx = (-a * s + b * c) * w;
            let f = Vector4::new(0.0, -m.system.omega_m * 0.1 * c * x0.q, 0.0, 0.0);
            let r = dx - (l * x1 + f);
            assert!(r.norm() < 1e-6 * f.norm(), "{}", r.norm());
        }
    }

    #[test]
    fn orders_are_homogeneous_in_epsilon() {
        let a = classical_orders(&single(0.1), 2).unwrap();
        let b = classical_orders(&single(0.2), 2).unwrap();
        let r1 = b.orders[1].coeffs(1).0[0] / a.orders[1].coeffs(1).0[0];
        let r2 = b.orders[2].c0[0] / a.orders[2].c0[0];
        assert!((r1 - 2.0).abs() < 1e-9);
        assert!((r2 - 4.0).abs() < 1e-9);
    }

    #[test]
    fn phase_fit_recovers_synthetic() {
        let phis: Vec<f64> = (0..8).map(|i| TAU * i as f64 / 8.0).collect();
        let v: Vec<f64> = phis.iter().map(|p| 2.0 + 3.0 * (p + 0.7).cos()).collect();
        let f = phase_decomposition(&phis, &v).unwrap();
        assert!((f.a - 2.0).abs() < 1e-12);
        assert!((f.b - 3.0).abs() < 1e-12);
        assert!((f.phi0 - 0.7).abs() < 1e-12);
        assert!(f.residual < 1e-12);
        let flat = phase_decomposition(&phis, &[1.5; 8]).unwrap();
        assert!(flat.b < 1e-12 && flat.residual < 1e-12);
        assert!(phase_decomposition(&phis[..2], &v[..2]).is_err());
    }

    #[test]
    fn table_has_three_lines() {
        let t = coefficient_table(&single(0.2), 2).unwrap();
        assert!(t.lines().filter(|l| !l.starts_with('#')).count() == 3, "{t}");
        assert!(t.contains("Q(t) = "));
    }
}
