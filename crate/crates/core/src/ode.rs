//! Embedded Dormand–Prince 5(4) integrator with adaptive step control.
//!
//! State vectors are fixed-size arrays; the right-hand side is any closure
//! `f(t, &y) -> dy/dt`. The stepper keeps its last accepted step size so a
//! long trajectory can be advanced interval by interval without restarting
//! the step-size search.

use crate::error::{Error, Result};

// Butcher tableau (Dormand & Prince 1980).
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Error coefficients: 5th-order weights minus 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

/// Tolerances and limits for [`Stepper`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerances<const N: usize> {
    pub rtol: f64,
    pub atol: [f64; N],
    /// Upper bound on a single step, s. `f64::INFINITY` for none.
    pub max_step: f64,
    /// Budget of attempted steps per call to [`Stepper::advance`].
    pub max_steps: usize,
}

impl<const N: usize> Tolerances<N> {
    pub fn new(rtol: f64, atol: [f64; N]) -> Self {
        Self {
            rtol,
            atol,
            max_step: f64::INFINITY,
            max_steps: 5_000_000,
        }
    }
}

/// Adaptive stepper carrying the current time, state and step size.
#[derive(Debug, Clone)]
pub struct Stepper<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    h: f64,
    tol: Tolerances<N>,
    fsal: Option<[f64; N]>,
    /// Accepted steps so far.
    pub accepted: usize,
    /// Rejected steps so far.
    pub rejected: usize,
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

impl<const N: usize> Stepper<N> {
    /// `h0` is the first trial step; pass 0 to let the stepper pick one.
    pub fn new(t0: f64, y0: [f64; N], h0: f64, tol: Tolerances<N>) -> Self {
        Self {
            t: t0,
            y: y0,
            h: h0,
            tol,
            fsal: None,
            accepted: 0,
            rejected: 0,
        }
    }

    fn error_norm(&self, y0: &[f64; N], y1: &[f64; N], err: &[f64; N]) -> f64 {
        let mut sum = 0.0;
        for i in 0..N {
            let sc = self.tol.atol[i] + self.tol.rtol * y0[i].abs().max(y1[i].abs());
            let r = err[i] / sc;
            sum += r * r;
        }
        (sum / N as f64).sqrt()
    }

    fn initial_step<F>(&self, f: &mut F, span: f64) -> f64
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        // Hairer–Nørsett–Wanner starting-step heuristic.
        let f0 = f(self.t, &self.y);
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..N {
            let sc = self.tol.atol[i] + self.tol.rtol * self.y[i].abs();
            d0 += (self.y[i] / sc).powi(2);
            d1 += (f0[i] / sc).powi(2);
        }
        d0 = (d0 / N as f64).sqrt();
        d1 = (d1 / N as f64).sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6 * span
        } else {
            0.01 * d0 / d1
        };
        h0.min(span).min(self.tol.max_step)
    }

    /// Integrate up to exactly `t_end`.
    pub fn advance<F>(&mut self, f: &mut F, t_end: f64) -> Result<()>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let span = t_end - self.t;
        if span <= 0.0 {
            return Ok(());
        }
        if self.h <= 0.0 {
            self.h = self.initial_step(f, span);
        }
        let mut attempts = 0usize;
        while self.t < t_end {
            attempts += 1;
            if attempts > self.tol.max_steps {
                return Err(Error::Numerical(format!(
                    "step budget exhausted at t = {:.6e}",
                    self.t
                )));
            }
            let remaining = t_end - self.t;
            let mut h = self.h.min(self.tol.max_step);
            let last = h >= remaining * (1.0 - 1e-12);
            if last {
                h = remaining;
            }
            let t = self.t;
            let y = self.y;
            let k1 = match self.fsal {
                Some(k) => k,
                None => f(t, &y),
            };
            let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
            let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(
                t + C4 * h,
                &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            );
            let k5 = f(
                t + C5 * h,
                &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                t + h,
                &axpy(
                    &y,
                    h,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            );
            let y_new = axpy(
                &y,
                h,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let k7 = f(t + h, &y_new);
            let mut err = [0.0; N];
            for i in 0..N {
                err[i] = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
            }
            let en = self.error_norm(&y, &y_new, &err);
            if !en.is_finite() {
                self.fsal = None;
                self.h = h * MIN_FACTOR;
                self.rejected += 1;
                if self.h < 1e-300 {
                    return Err(Error::Numerical(format!(
                        "non-finite state at t = {t:.6e}"
                    )));
                }
                continue;
            }
            if en <= 1.0 {
                self.t = if last { t_end } else { t + h };
                self.y = y_new;
                self.fsal = Some(k7);
                self.accepted += 1;
                let factor = if en == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * en.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                // A step shortened to land on t_end does not shrink the next one.
                if !last || h >= self.h {
                    self.h = h * factor;
                }
            } else {
                self.rejected += 1;
                self.h = h * (SAFETY * en.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
                if self.h < 1e-15 * t.abs().max(1e-300) {
                    return Err(Error::Numerical(format!(
                        "step size underflow at t = {t:.6e}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Integrate to `t_end`, visiting every time in `stops` (ascending) and
    /// handing the state at each one to `visit`.
    pub fn sample<F, V>(&mut self, f: &mut F, stops: &[f64], mut visit: V) -> Result<()>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
        V: FnMut(usize, f64, &[f64; N]),
    {
        for (i, &ts) in stops.iter().enumerate() {
            self.advance(f, ts)?;
            visit(i, self.t, &self.y);
        }
        Ok(())
    }
}

/// One-shot integration from `t0` to `t1`.
pub fn integrate<const N: usize, F>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    tol: Tolerances<N>,
) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let mut s = Stepper::new(t0, y0, 0.0, tol);
    s.advance(&mut f, t1)?;
    Ok(s.y)
}
