//! Dense linear algebra helpers on top of faer.

use faer::complex_native::c64;
use faer::prelude::*;
use faer::{Mat, Side};

use crate::error::{Error, Result};

pub type CMat = Mat<c64>;
pub type RMat = Mat<f64>;

pub fn cx(re: f64, im: f64) -> c64 {
    c64::new(re, im)
}

pub const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub const ONE: c64 = c64 { re: 1.0, im: 0.0 };
pub const I: c64 = c64 { re: 0.0, im: 1.0 };

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(h: &CMat) -> (Vec<f64>, CMat) {
    let n = h.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let evd = h.selfadjoint_eigendecomposition(Side::Lower);
    let vals = (0..n).map(|i| evd.s().column_vector().read(i).re).collect();
    (vals, evd.u().to_owned())
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &RMat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    m.selfadjoint_eigenvalues(Side::Lower)
}

/// Eigenvalues of a general real matrix.
pub fn real_eigenvalues(m: &RMat) -> Vec<c64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    m.eigenvalues::<c64>()
}

/// Eigenvalues of a general complex matrix.
pub fn complex_eigenvalues(m: &CMat) -> Vec<c64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    m.eigenvalues::<c64>()
}

/// Eigenvalues and unit-norm eigenvectors (columns) of a general complex matrix.
pub fn complex_eigen(m: &CMat) -> (Vec<c64>, CMat) {
    let n = m.nrows();
    let evd = m.eigendecomposition::<c64>();
    let vals: Vec<c64> = (0..n).map(|i| evd.s().column_vector().read(i)).collect();
    let mut vecs = evd.u().to_owned();
    for j in 0..n {
        let nrm = (0..n).map(|i| vecs.read(i, j).norm_sqr()).sum::<f64>().sqrt();
        if nrm > 0.0 {
            for i in 0..n {
                vecs.write(i, j, vecs.read(i, j) * (1.0 / nrm));
            }
        }
    }
    (vals, vecs)
}

pub fn real_inverse(m: &RMat) -> RMat {
    m.partial_piv_lu().inverse()
}

pub fn complex_solve(m: &CMat, rhs: &CMat) -> CMat {
    m.partial_piv_lu().solve(rhs)
}

pub fn all_finite(m: &RMat) -> bool {
    (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m.read(i, j).is_finite()))
}

pub fn real_part(m: &CMat) -> RMat {
    RMat::from_fn(m.nrows(), m.ncols(), |i, j| m.read(i, j).re)
}

pub fn max_imag(m: &CMat) -> f64 {
    let mut out = 0.0_f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out = out.max(m.read(i, j).im.abs());
        }
    }
    out
}

pub fn to_complex(m: &RMat) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| cx(m.read(i, j), 0.0))
}

pub fn frobenius_c(m: &CMat) -> f64 {
    m.norm_l2()
}

pub fn frobenius(m: &RMat) -> f64 {
    m.norm_l2()
}

/// Standard symplectic form Ω = [[0, I], [−I, 0]] on n modes.
pub fn omega(n: usize) -> RMat {
    RMat::from_fn(2 * n, 2 * n, |i, j| {
        if i < n && j == i + n {
            1.0
        } else if i >= n && j + n == i {
            -1.0
        } else {
            0.0
        }
    })
}

/// Solve `A X + X Aᵀ + D = 0` for a Hurwitz-stable real `A`.
///
/// Uses the scaled matrix-sign iteration of Roberts. The iteration converges
/// to `sign(A) = −I` exactly when every eigenvalue of `A` has negative real
/// part, so instability is detected without a separate eigensolve.
/// Returns the solution and its relative Frobenius residual.
pub fn lyapunov(a: &RMat, d: &RMat) -> Result<(RMat, f64)> {
    let n = a.nrows();
    if a.ncols() != n || d.nrows() != n || d.ncols() != n {
        return Err(Error::DimensionMismatch("lyapunov operands must be square and equal".into()));
    }
    let mut ak = a.clone();
    let mut qk = d.clone();
    let mut converged = false;
    for _ in 0..100 {
        let inv = real_inverse(&ak);
        if !all_finite(&inv) {
            return Err(Error::NonUnique("drift is singular (undamped mode)".into()));
        }
        let c = (frobenius(&inv) / frobenius(&ak)).sqrt();
        let next = (&ak * c + &inv * (1.0 / c)) * 0.5;
        let q_next = (&qk * c + &inv * &qk * inv.transpose() * (1.0 / c)) * 0.5;
        let step = frobenius(&(&next - &ak));
        let scale = frobenius(&next);
        ak = next;
        qk = q_next;
        if step <= 1e-13 * scale {
            converged = true;
            break;
        }
    }
    let dev = frobenius(&(&ak + RMat::identity(n, n)));
    if !converged || dev > 1e-6 * (n as f64).sqrt() {
        let max_re = real_eigenvalues(a).iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        if max_re >= 0.0 {
            return Err(Error::Unstable { max_real_part: max_re });
        }
        return Err(Error::NonUnique("sign iteration did not converge".into()));
    }
    let x = &qk * 0.5_f64;
    let x = (&x + x.transpose()) * 0.5_f64;
    let res = frobenius(&(a * &x + &x * a.transpose() + d));
    let dn = frobenius(d);
    let rel = if dn > 0.0 { res / dn } else { res };
    Ok((x, rel))
}

/// Symmetric part (M + Mᵀ)/2.
pub fn symmetrize(m: &RMat) -> RMat {
    (m + m.transpose()) * 0.5
}
