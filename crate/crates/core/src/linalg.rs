//! Small dense linear-algebra kernels shared by the covariance, metrics and
//! perturbative modules.

use nalgebra::{DMatrix, DVector, Matrix4, SMatrix, SVector};

use crate::error::{Error, Result};

pub type Mat4 = Matrix4<f64>;

/// Upper-triangle index pairs of a symmetric 4×4 matrix, row-major.
pub const SYM_INDEX: [(usize, usize); 10] = [
    (0, 0),
    (0, 1),
    (0, 2),
    (0, 3),
    (1, 1),
    (1, 2),
    (1, 3),
    (2, 2),
    (2, 3),
    (3, 3),
];

/// Flatten the upper triangle of `m`.
pub fn sym_pack(m: &Mat4) -> [f64; 10] {
    let mut v = [0.0; 10];
    for (k, &(i, j)) in SYM_INDEX.iter().enumerate() {
        v[k] = m[(i, j)];
    }
    v
}

/// Rebuild a symmetric matrix from its packed upper triangle.
pub fn sym_unpack(v: &[f64]) -> Mat4 {
    let mut m = Mat4::zeros();
    for (k, &(i, j)) in SYM_INDEX.iter().enumerate() {
        m[(i, j)] = v[k];
        m[(j, i)] = v[k];
    }
    m
}

/// Matrix of X ↦ S X + X Sᵀ restricted to symmetric X, in packed coordinates.
pub fn lyapunov_operator(s: &Mat4) -> SMatrix<f64, 10, 10> {
    let mut op = SMatrix::<f64, 10, 10>::zeros();
    for (col, &(i, j)) in SYM_INDEX.iter().enumerate() {
        let mut e = Mat4::zeros();
        e[(i, j)] = 1.0;
        e[(j, i)] = 1.0;
        let img = s * e + e * s.transpose();
        let packed = sym_pack(&img);
        for row in 0..10 {
            op[(row, col)] = packed[row];
        }
    }
    op
}

/// Solve S X + X Sᵀ + Q = 0 for symmetric X.
pub fn solve_lyapunov(s: &Mat4, q: &Mat4) -> Result<Mat4> {
    let op = lyapunov_operator(s);
    let rhs = -SVector::<f64, 10>::from_column_slice(&sym_pack(q));
    let x = op
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("Lyapunov operator".into()))?;
    Ok(sym_unpack(x.as_slice()))
}

/// 2-norm condition number of a dense matrix.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Solve the real block system
///
/// ```text
/// [ L   −w I ] [a]   [−fa]
/// [ w I   L  ] [b] = [−fb]
/// ```
///
/// which is what the harmonic ansatz a cos(wt) + b sin(wt) of
/// ẋ = L x + fa cos(wt) + fb sin(wt) reduces to. With `w = 0` only the
/// first block row is solved (constant response). Returns (a, b, cond).
pub fn solve_harmonic(
    l: &DMatrix<f64>,
    w: f64,
    fa: &DVector<f64>,
    fb: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>, f64)> {
    let n = l.nrows();
    if w == 0.0 {
        let cond = condition_number(l);
        let a = l
            .clone()
            .lu()
            .solve(&(-fa))
            .ok_or_else(|| Error::Singular("static response".into()))?;
        if !a.iter().all(|v| v.is_finite()) {
            return Err(Error::Singular("static response".into()));
        }
        return Ok((a, DVector::zeros(n), cond));
    }
    let mut big = DMatrix::<f64>::zeros(2 * n, 2 * n);
    big.view_mut((0, 0), (n, n)).copy_from(l);
    big.view_mut((n, n), (n, n)).copy_from(l);
    for i in 0..n {
        big[(i, n + i)] = -w;
        big[(n + i, i)] = w;
    }
    let mut rhs = DVector::<f64>::zeros(2 * n);
    for i in 0..n {
        rhs[i] = -fa[i];
        rhs[n + i] = -fb[i];
    }
    let cond = condition_number(&big);
    let x = big
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular(format!("harmonic response at w = {w:e}")))?;
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::Singular(format!("harmonic response at w = {w:e}")));
    }
    Ok((x.rows(0, n).into_owned(), x.rows(n, n).into_owned(), cond))
}

/// Coefficients (a1, a2, a3, a4) of det(λI − S) = λ⁴ + a1 λ³ + a2 λ² + a3 λ + a4,
/// by the Faddeev–LeVerrier recursion.
pub fn char_poly4(s: &Mat4) -> [f64; 4] {
    let id = Mat4::identity();
    let mut m = Mat4::zeros();
    let mut c = [0.0; 5];
    c[0] = 1.0;
    for k in 1..=4 {
        m = s * m + id * c[k - 1];
        c[k] = -(s * m).trace() / k as f64;
    }
    [c[1], c[2], c[3], c[4]]
}

/// Symplectic eigenvalues (ν−, ν+) of a two-mode covariance matrix with
/// ordering (q1, p1, q2, p2), in whatever units the matrix is given.
///
/// For positive-definite C they are the singular values of the real
/// antisymmetric C^½ Σ C^½, which stays accurate when ν− ≈ ν+. Otherwise
/// the invariant formula Δ = detA + detB + 2detK is used.
pub fn symplectic_eigenvalues(c: &Mat4) -> (f64, f64) {
    let eig = c.symmetric_eigen();
    if eig.eigenvalues.iter().all(|&v| v > 0.0) {
        let sqrt = &eig.eigenvectors
            * Mat4::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
            * eig.eigenvectors.transpose();
        let m = sqrt * symplectic_form() * sqrt;
        let g = m.transpose() * m;
        let ev = g.symmetric_eigen().eigenvalues;
        let lo = ev.iter().cloned().fold(f64::INFINITY, f64::min).max(0.0);
        let hi = ev.iter().cloned().fold(0.0, f64::max);
        return (lo.sqrt(), hi.sqrt());
    }
    let a = c.fixed_view::<2, 2>(0, 0).determinant();
    let b = c.fixed_view::<2, 2>(2, 2).determinant();
    let k = c.fixed_view::<2, 2>(0, 2).determinant();
    let delta = a + b + 2.0 * k;
    let det = c.determinant();
    let disc = (delta * delta - 4.0 * det).max(0.0).sqrt();
    let minus = (0.5 * (delta - disc)).max(0.0).sqrt();
    let plus = (0.5 * (delta + disc)).max(0.0).sqrt();
    (minus, plus)
}

/// Σ = J ⊕ J with J = ((0, 1), (−1, 0)).
pub fn symplectic_form() -> Mat4 {
    let mut s = Mat4::zeros();
    s[(0, 1)] = 1.0;
    s[(1, 0)] = -1.0;
    s[(2, 3)] = 1.0;
    s[(3, 2)] = -1.0;
    s
}

/// Rotation matrix R(θ) embedded as a 2×2 block.
pub fn rotation(theta: f64) -> nalgebra::Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    nalgebra::Matrix2::new(c, -s, s, c)
}

/// Local rotation R(θ1) ⊕ R(θ2).
pub fn local_rotation(theta1: f64, theta2: f64) -> Mat4 {
    let mut r = Mat4::zeros();
    r.fixed_view_mut::<2, 2>(0, 0).copy_from(&rotation(theta1));
    r.fixed_view_mut::<2, 2>(2, 2).copy_from(&rotation(theta2));
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pack_round_trip() {
        let m = Mat4::from_fn(|i, j| (i + j) as f64 + 0.25 * (i * j) as f64);
        assert_eq!(sym_unpack(&sym_pack(&m)), m);
    }

    #[test]
    fn lyapunov_scalar_blocks() {
        // S = −I → −2X + Q = 0.
        let x = solve_lyapunov(&(-Mat4::identity()), &(Mat4::identity() * 2.0)).unwrap();
        assert!((x - Mat4::identity()).norm() < 1e-14);
    }

    #[test]
    fn lyapunov_residual_vanishes() {
        let s = Mat4::new(
            0.0, 1.0, 0.0, 0.0, -1.0, -0.1, 0.2, 0.05, -0.05, 0.0, -0.3, 1.0, 0.2, 0.0, -1.0, -0.3,
        );
        let q = Mat4::from_diagonal(&nalgebra::Vector4::new(0.0, 0.4, 0.3, 0.3));
        let x = solve_lyapunov(&s, &q).unwrap();
        let r = s * x + x * s.transpose() + q;
        assert!(r.norm() < 1e-12);
        assert_eq!(x, x.transpose());
    }

    #[test]
    fn characteristic_polynomial_of_diagonal() {
        let s = Mat4::from_diagonal(&nalgebra::Vector4::new(-1.0, -2.0, -3.0, -4.0));
        // (λ+1)(λ+2)(λ+3)(λ+4) = λ⁴ + 10λ³ + 35λ² + 50λ + 24
        let c = char_poly4(&s);
        assert_eq!(c, [10.0, 35.0, 50.0, 24.0]);
    }

    #[test]
    fn harmonic_solve_scalar() {
        // ẋ = −x + cos t → x = (cos t + sin t)/2
        let l = DMatrix::from_element(1, 1, -1.0);
        let (a, b, _) = solve_harmonic(
            &l,
            1.0,
            &DVector::from_element(1, 1.0),
            &DVector::zeros(1),
        )
        .unwrap();
        assert!((a[0] - 0.5).abs() < 1e-14);
        assert!((b[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn vacuum_symplectic_spectrum() {
        let (m, p) = symplectic_eigenvalues(&(Mat4::identity() * 0.5));
        assert!((m - 0.5).abs() < 1e-15 && (p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn thermal_symplectic_spectrum() {
        let c = Mat4::from_diagonal(&nalgebra::Vector4::new(2.5, 2.5, 0.5, 0.5));
        let (m, p) = symplectic_eigenvalues(&c);
        assert!((m - 0.5).abs() < 1e-14 && (p - 2.5).abs() < 1e-14);
    }
}
