//! Truncated Fourier series in a base frequency Ω.
//!
//! [`Trig`] is the working representation used by the harmonic-balance
//! solver: a dense list of (cos, sin) coefficient pairs indexed by harmonic
//! number, generic over the coefficient type so that the same product rule
//! serves scalars, state vectors and 4×4 matrices. [`HarmonicSeries`] is the
//! sparse, serializable scalar form handed to callers.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficient types a [`Trig`] can carry.
pub trait Coef: Clone + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero_like(&self) -> Self;
}

impl Coef for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
}

impl Coef for nalgebra::Matrix4<f64> {
    fn zero_like(&self) -> Self {
        nalgebra::Matrix4::zeros()
    }
}

impl Coef for nalgebra::Vector4<f64> {
    fn zero_like(&self) -> Self {
        nalgebra::Vector4::zeros()
    }
}

/// c0 + Σ_k [a_k cos(kΩt) + b_k sin(kΩt)], harmonics k = 1..=len.
#[derive(Debug, Clone, PartialEq)]
pub struct Trig<T> {
    pub c0: T,
    /// `harmonics[k-1] = (a_k, b_k)`
    pub harmonics: Vec<(T, T)>,
}

impl<T: Coef> Trig<T> {
    pub fn constant(c0: T) -> Self {
        Self {
            c0,
            harmonics: Vec::new(),
        }
    }

    pub fn zero(like: &T) -> Self {
        Self::constant(like.zero_like())
    }

    pub fn max_harmonic(&self) -> usize {
        self.harmonics.len()
    }

    fn ensure(&mut self, k: usize) {
        let z = self.c0.zero_like();
        while self.harmonics.len() < k {
            self.harmonics.push((z.clone(), z.clone()));
        }
    }

    /// Add `a cos(kΩt) + b sin(kΩt)`; k = 0 adds `a` to the constant.
    pub fn add_term(&mut self, k: usize, a: T, b: T) {
        if k == 0 {
            self.c0 = self.c0.clone() + a;
            return;
        }
        self.ensure(k);
        let (ref mut ak, ref mut bk) = self.harmonics[k - 1];
        *ak = ak.clone() + a;
        *bk = bk.clone() + b;
    }

    /// Constant at k = 0, otherwise the (cos, sin) pair.
    pub fn coeffs(&self, k: usize) -> (T, T) {
        let z = self.c0.zero_like();
        if k == 0 {
            (self.c0.clone(), z)
        } else if k <= self.harmonics.len() {
            self.harmonics[k - 1].clone()
        } else {
            (z.clone(), z)
        }
    }

    pub fn map<U: Coef>(&self, f: impl Fn(&T) -> U) -> Trig<U> {
        Trig {
            c0: f(&self.c0),
            harmonics: self.harmonics.iter().map(|(a, b)| (f(a), f(b))).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v.clone() * s)
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.c0 = out.c0.clone() + other.c0.clone();
        for (i, (a, b)) in other.harmonics.iter().enumerate() {
            out.add_term(i + 1, a.clone(), b.clone());
        }
        out
    }

    pub fn eval(&self, omega: f64, t: f64) -> T {
        let mut acc = self.c0.clone();
        for (i, (a, b)) in self.harmonics.iter().enumerate() {
            let (s, c) = ((i + 1) as f64 * omega * t).sin_cos();
            acc = acc + a.clone() * c + b.clone() * s;
        }
        acc
    }
}

/// Product of two trigonometric series under a bilinear coefficient product,
/// using cos·cos = ½[cos(p−q) + cos(p+q)] and its sine companions.
pub fn trig_product<A, B, C>(x: &Trig<A>, y: &Trig<B>, mul: impl Fn(&A, &B) -> C) -> Trig<C>
where
    A: Coef,
    B: Coef,
    C: Coef,
{
    let c0 = mul(&x.c0, &y.c0);
    let mut out = Trig::zero(&c0);
    out.c0 = c0;
    let np = x.max_harmonic();
    let nq = y.max_harmonic();
    // constant × harmonic
    for q in 1..=nq {
        let (c, d) = y.coeffs(q);
        out.add_term(q, mul(&x.c0, &c), mul(&x.c0, &d));
    }
    for p in 1..=np {
        let (a, b) = x.coeffs(p);
        out.add_term(p, mul(&a, &y.c0), mul(&b, &y.c0));
    }
    for p in 1..=np {
        let (a, b) = x.coeffs(p);
        for q in 1..=nq {
            let (c, d) = y.coeffs(q);
            let ac = mul(&a, &c) * 0.5;
            let bd = mul(&b, &d) * 0.5;
            let ad = mul(&a, &d) * 0.5;
            let bc = mul(&b, &c) * 0.5;
            let z = ac.zero_like();
            // sum frequency
            out.add_term(p + q, ac.clone() - bd.clone(), ad.clone() + bc.clone());
            // difference frequency, folded to a non-negative index
            if p == q {
                out.add_term(0, ac + bd, z);
            } else if p > q {
                out.add_term(p - q, ac + bd, bc - ad);
            } else {
                out.add_term(q - p, ac + bd, ad - bc);
            }
        }
    }
    out
}

/// One harmonic of a [`HarmonicSeries`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub k: usize,
    /// cos(kΩt) coefficient.
    pub a: f64,
    /// sin(kΩt) coefficient.
    pub b: f64,
}

/// a0 + Σ a_k cos(kΩt) + b_k sin(kΩt).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicSeries {
    /// Base angular frequency Ω, rad/s.
    pub omega: f64,
    pub a0: f64,
    pub harmonics: Vec<Harmonic>,
    /// Perturbative order included (0 for purely numerical projections).
    pub order: usize,
}

impl HarmonicSeries {
    pub fn constant(omega: f64, a0: f64) -> Self {
        Self {
            omega,
            a0,
            harmonics: Vec::new(),
            order: 0,
        }
    }

    pub fn from_trig(t: &Trig<f64>, omega: f64, order: usize) -> Self {
        Self {
            omega,
            a0: t.c0,
            harmonics: t
                .harmonics
                .iter()
                .enumerate()
                .map(|(i, &(a, b))| Harmonic { k: i + 1, a, b })
                .collect(),
            order,
        }
    }

    pub fn to_trig(&self) -> Trig<f64> {
        let mut t = Trig::constant(self.a0);
        for h in &self.harmonics {
            t.add_term(h.k, h.a, h.b);
        }
        t
    }

    /// Coefficient pair of harmonic `k` (zero when absent).
    pub fn harmonic(&self, k: usize) -> (f64, f64) {
        self.harmonics
            .iter()
            .find(|h| h.k == k)
            .map(|h| (h.a, h.b))
            .unwrap_or((0.0, 0.0))
    }

    pub fn amplitude(&self, k: usize) -> f64 {
        let (a, b) = self.harmonic(k);
        a.hypot(b)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.harmonics.iter().fold(self.a0, |acc, h| {
            let (s, c) = (h.k as f64 * self.omega * t).sin_cos();
            acc + h.a * c + h.b * s
        })
    }

    /// Check that harmonic indices are positive and unique.
    pub fn validate(&self) -> Result<()> {
        let mut ks: Vec<usize> = self.harmonics.iter().map(|h| h.k).collect();
        ks.sort_unstable();
        if ks.first() == Some(&0) || ks.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(
                "harmonic indices must be positive and unique".into(),
            ));
        }
        Ok(())
    }
}

/// Exact discrete projection of `N` uniform samples over one period onto
/// a0 and (a_k, b_k), k = 1..=max_harmonic. Sample j sits at phase 2πj/N.
pub fn project(samples: &[f64], omega: f64, max_harmonic: usize) -> Result<HarmonicSeries> {
    let n = samples.len();
    if n < 2 * max_harmonic + 2 {
        return Err(Error::InvalidArgument(format!(
            "{n} samples cannot resolve {max_harmonic} harmonics (need >= {})",
            2 * max_harmonic + 2
        )));
    }
    let a0 = samples.iter().sum::<f64>() / n as f64;
    let harmonics = (1..=max_harmonic)
        .map(|k| {
            let (mut a, mut b) = (0.0, 0.0);
            for (j, v) in samples.iter().enumerate() {
                let th = std::f64::consts::TAU * (k * j) as f64 / n as f64;
                let (s, c) = th.sin_cos();
                a += v * c;
                b += v * s;
            }
            Harmonic {
                k,
                a: 2.0 * a / n as f64,
                b: 2.0 * b / n as f64,
            }
        })
        .collect();
    Ok(HarmonicSeries {
        omega,
        a0,
        harmonics,
        order: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    #[test]
    fn projection_of_constant() {
        let s = project(&[2.5; 16], 1.0, 3).unwrap();
        assert_eq!(s.a0, 2.5);
        assert!(s.harmonics.iter().all(|h| h.a.abs() < 1e-15 && h.b.abs() < 1e-15));
    }

    #[test]
    fn projection_identity() {
        let n = 32;
        let v: Vec<f64> = (0..n)
            .map(|j| {
                let th = TAU * j as f64 / n as f64;
                3.0 + 2.0 * th.cos() - 0.5 * (2.0 * th).sin()
            })
            .collect();
        let s = project(&v, 1.0, 4).unwrap();
        assert!((s.a0 - 3.0).abs() < 1e-14);
        assert!((s.harmonic(1).0 - 2.0).abs() < 1e-14);
        assert!((s.harmonic(2).1 + 0.5).abs() < 1e-14);
        assert!(s.harmonic(3).0.abs() < 1e-14);
    }

    #[test]
    fn projection_needs_enough_samples() {
        assert!(matches!(project(&[0.0; 7], 1.0, 3), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn duplicate_harmonics_rejected() {
        let mut s = HarmonicSeries::constant(1.0, 0.0);
        s.harmonics = vec![Harmonic { k: 1, a: 0.0, b: 0.0 }, Harmonic { k: 1, a: 1.0, b: 0.0 }];
        assert!(s.validate().is_err());
    }

    fn arb_trig() -> impl Strategy<Value = Trig<f64>> {
        (-2.0..2.0f64, prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 0..4))
            .prop_map(|(c0, h)| Trig { c0, harmonics: h })
    }

    proptest! {
        #[test]
        fn product_matches_pointwise(x in arb_trig(), y in arb_trig(), t in 0.0..7.0f64) {
            let p = trig_product(&x, &y, |a, b| a * b);
            let lhs = p.eval(1.3, t);
            let rhs = x.eval(1.3, t) * y.eval(1.3, t);
            prop_assert!((lhs - rhs).abs() < 1e-10);
        }

        #[test]
        fn series_round_trip_through_samples(x in arb_trig()) {
            let n = 16;
            let samples: Vec<f64> = (0..n).map(|j| x.eval(1.0, TAU * j as f64 / n as f64)).collect();
            let s = project(&samples, 1.0, 4).unwrap();
            for k in 0..=x.max_harmonic() {
                let (a, b) = x.coeffs(k);
                let (pa, pb) = if k == 0 { (s.a0, 0.0) } else { s.harmonic(k) };
                prop_assert!((a - pa).abs() < 1e-12 && (b - pb).abs() < 1e-12);
            }
        }
    }
}
