#![allow(dead_code)]

use dissipair::linalg::{cx, CMat, RMat};
use faer::complex_native::c64;
use faer::prelude::*;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Dense Kronecker-product solve of `A X + X Aᵀ + D = 0`.
pub fn kron_lyapunov(a: &RMat, d: &RMat) -> RMat {
    let n = a.nrows();
    let k = RMat::from_fn(n * n, n * n, |r, c| {
        // vec index (i, j) -> j * n + i (column-major)
        let (i, j) = (r % n, r / n);
        let (p, q) = (c % n, c / n);
        let mut v = 0.0;
        if q == j {
            v += a.read(i, p);
        }
        if p == i {
            v += a.read(j, q);
        }
        v
    });
    let rhs = RMat::from_fn(n * n, 1, |r, _| -d.read(r % n, r / n));
    let sol = k.partial_piv_lu().solve(&rhs);
    RMat::from_fn(n, n, |i, j| sol.read(j * n + i, 0))
}

/// Explicit `T A Tᴴ` with `T = (1/√2)[[I, I], [−iI, iI]]`.
pub fn explicit_quadrature(a: &CMat) -> CMat {
    let n = a.nrows() / 2;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let t = CMat::from_fn(2 * n, 2 * n, |i, j| {
        let same = i % n == j % n;
        if !same {
            return cx(0.0, 0.0);
        }
        match (i < n, j < n) {
            (true, _) => cx(s, 0.0),
            (false, true) => cx(0.0, -s),
            (false, false) => cx(0.0, s),
        }
    });
    &t * a * t.adjoint()
}

pub fn max_abs_r(m: &RMat) -> f64 {
    let mut out = 0.0_f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out = out.max(m.read(i, j).abs());
        }
    }
    out
}

pub fn max_abs_c(m: &CMat) -> f64 {
    let mut out = 0.0_f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out = out.max(m.read(i, j).abs());
        }
    }
    out
}

/// Random connected bipartite hopping matrix with complex amplitudes.
///
/// A chain backbone keeps the sublattices balanced to within one site.
pub fn random_chiral(rng: &mut impl Rng, n: usize) -> CMat {
    let mut h = CMat::zeros(n, n);
    let bond = |h: &mut CMat, i: usize, j: usize, rng: &mut dyn rand::RngCore| {
        let mag = 0.3 + 1.2 * rng.gen::<f64>();
        let ph = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
        let z = c64::from_polar(mag, ph);
        h.write(i, j, z);
        h.write(j, i, z.conj());
    };
    for i in 0..n - 1 {
        bond(&mut h, i, i + 1, rng);
    }
    for i in 0..n {
        for j in (i + 3..n).step_by(2) {
            if rng.gen::<f64>() < 0.3 {
                bond(&mut h, i, j, rng);
            }
        }
    }
    h
}

/// Two distinct sites on the even sublattice of a backbone chain.
pub fn random_even_sites(rng: &mut impl Rng, n: usize) -> (usize, usize) {
    let evens: Vec<usize> = (0..n).step_by(2).collect();
    let a = evens[rng.gen_range(0..evens.len())];
    loop {
        let b = evens[rng.gen_range(0..evens.len())];
        if b != a {
            return (a, b);
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
