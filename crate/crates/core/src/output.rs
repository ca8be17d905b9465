//! Output-field squeezing spectrum with the pairing jump realized by a lossy ancilla.

use faer::complex_native::c64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::BdgMatrix;
use crate::gaussian::Basis;
use crate::linalg::{complex_solve, cx, CMat, I};
use crate::stability::spectrum;

/// Lattice plus ancilla `b` with `H_I = g(a_{0̄} + η a†_{1̄}) b† + h.c.`,
/// ancilla loss `κ` and a waveguide of rate `Γ` on one lattice site.
#[derive(Debug, Clone)]
pub struct IoSetup {
    pub hamiltonian: CMat,
    pub site0: usize,
    pub site1: usize,
    pub eta: f64,
    pub g: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub waveguide_site: usize,
}

/// Linear Langevin system `∂_t r = A r + B ξ_in` over `(a, b, a†, b†)`,
/// inputs ordered `(a_in, b_in, a_in†, b_in†)`.
#[derive(Debug, Clone)]
pub struct IoSystem {
    pub drift: BdgMatrix,
    pub input: CMat,
    pub n_modes: usize,
    pub waveguide_site: usize,
    pub gamma: f64,
}

impl IoSetup {
    pub fn with_eta(&self, eta: f64) -> Self {
        Self { eta, ..self.clone() }
    }

    fn validate(&self) -> Result<usize> {
        let n = self.hamiltonian.nrows();
        if self.hamiltonian.ncols() != n {
            return Err(Error::DimensionMismatch("hamiltonian must be square".into()));
        }
        if self.site0 >= n || self.site1 >= n || self.waveguide_site >= n {
            return Err(Error::InvalidParameter("site index outside the lattice".into()));
        }
        if !(self.gamma > 0.0) || !(self.kappa > 0.0) {
            return Err(Error::InvalidParameter("gamma and kappa must be positive".into()));
        }
        Ok(n)
    }

    /// Extended drift and input map without a stability check.
    pub fn assemble(&self) -> Result<IoSystem> {
        let n = self.validate()?;
        let nt = n + 1;
        let b = n;
        let mut x = CMat::from_fn(nt, nt, |i, j| if i < n && j < n { self.hamiltonian.read(i, j) * (-I) } else { cx(0.0, 0.0) });
        let mut y = CMat::zeros(nt, nt);
        let ig = cx(0.0, -self.g);
        x.write(self.site0, b, x.read(self.site0, b) + ig);
        x.write(b, self.site0, x.read(b, self.site0) + ig);
        let ige = ig * self.eta;
        y.write(self.site1, b, y.read(self.site1, b) + ige);
        y.write(b, self.site1, y.read(b, self.site1) + ige);
        x.write(b, b, x.read(b, b) - 0.5 * self.kappa);
        let w = self.waveguide_site;
        x.write(w, w, x.read(w, w) - 0.5 * self.gamma);
        let matrix = CMat::from_fn(2 * nt, 2 * nt, |i, j| match (i < nt, j < nt) {
            (true, true) => x.read(i, j),
            (true, false) => y.read(i, j - nt),
            (false, true) => y.read(i - nt, j).conj(),
            (false, false) => x.read(i - nt, j - nt).conj(),
        });
        let mut input = CMat::zeros(2 * nt, 4);
        let (sg, sk) = (cx(self.gamma.sqrt(), 0.0), cx(self.kappa.sqrt(), 0.0));
        input.write(w, 0, sg);
        input.write(b, 1, sk);
        input.write(nt + w, 2, sg);
        input.write(nt + b, 3, sk);
        if self.gamma >= self.kappa {
            log::warn!("gamma >= kappa: outside the weak-waveguide regime");
        }
        Ok(IoSystem {
            drift: BdgMatrix { matrix, basis: Basis::DoubledMode },
            input,
            n_modes: nt,
            waveguide_site: w,
            gamma: self.gamma,
        })
    }

    pub fn is_stable(&self) -> Result<bool> {
        Ok(spectrum(&self.assemble()?.drift).stable)
    }
}

/// Extended system, rejected when its drift is unstable.
pub fn build_io_system(setup: &IoSetup) -> Result<IoSystem> {
    let sys = setup.assemble()?;
    let rep = spectrum(&sys.drift);
    if !rep.stable {
        return Err(Error::Unstable { max_real_part: rep.max_real_part });
    }
    Ok(sys)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SqueezeSpectrumResult {
    pub omega: Vec<f64>,
    /// Minimum output quadrature noise, vacuum = 1.
    pub p: Vec<f64>,
    /// Maximum output quadrature noise.
    pub p_anti: Vec<f64>,
    /// Quadrature angle attaining the minimum, in `[0, π)`.
    pub theta: Vec<f64>,
}

impl IoSystem {
    /// Output row map `K(ω)`: `(a_out(ω), a_out†(−ω))` in terms of the inputs.
    fn output_map(&self, omega: f64) -> [[c64; 4]; 2] {
        let nt = self.n_modes;
        let dim = 2 * nt;
        let lhs = CMat::from_fn(dim, dim, |i, j| {
            let d = if i == j { cx(0.0, -omega) } else { cx(0.0, 0.0) };
            d - self.drift.matrix.read(i, j)
        });
        let r = complex_solve(&lhs, &self.input);
        let sg = self.gamma.sqrt();
        let w = self.waveguide_site;
        let mut k = [[cx(0.0, 0.0); 4]; 2];
        for c in 0..4 {
            k[0][c] = r.read(w, c) * (-sg);
            k[1][c] = r.read(nt + w, c) * (-sg);
        }
        k[0][0] += cx(1.0, 0.0);
        k[1][2] += cx(1.0, 0.0);
        k
    }

    /// Output spectral matrix `S(ω) = K(ω) N K(−ω)ᵀ` for vacuum inputs.
    pub fn spectral_matrix(&self, omega: f64) -> [[c64; 2]; 2] {
        let kp = self.output_map(omega);
        let km = self.output_map(-omega);
        let mut s = [[cx(0.0, 0.0); 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                s[a][b] = kp[a][0] * km[b][2] + kp[a][1] * km[b][3];
            }
        }
        s
    }

    /// `(P, P_anti, θ)` at one frequency.
    pub fn squeezing_at(&self, omega: f64) -> (f64, f64, f64) {
        let s = self.spectral_matrix(omega);
        let base = (s[0][1] + s[1][0]).re;
        let amp = s[0][0].abs();
        let theta = ((s[0][0].arg() - std::f64::consts::PI) / 2.0).rem_euclid(std::f64::consts::PI);
        // rem_euclid of a tiny negative angle rounds up to π
        let theta = if theta >= std::f64::consts::PI { 0.0 } else { theta };
        (base - 2.0 * amp, base + 2.0 * amp, theta)
    }
}

/// Default grid: 801 points on `[−5, 5]`, denser near zero.
pub fn default_frequency_grid() -> Vec<f64> {
    frequency_grid(5.0, 801)
}

/// `ω = w sinh(c t)/sinh(c)` on a uniform `t ∈ [−1, 1]`.
pub fn frequency_grid(half_width: f64, points: usize) -> Vec<f64> {
    let c = 4.0_f64;
    let pts = points.max(2);
    (0..pts)
        .map(|i| {
            let t = -1.0 + 2.0 * i as f64 / (pts - 1) as f64;
            half_width * (c * t).sinh() / c.sinh()
        })
        .collect()
}

pub fn squeezing_spectrum(setup: &IoSetup, omegas: &[f64]) -> Result<SqueezeSpectrumResult> {
    let sys = build_io_system(setup)?;
    let rows: Vec<(f64, f64, f64)> = omegas.par_iter().map(|&w| sys.squeezing_at(w)).collect();
    Ok(SqueezeSpectrumResult {
        omega: omegas.to_vec(),
        p: rows.iter().map(|r| r.0).collect(),
        p_anti: rows.iter().map(|r| r.1).collect(),
        theta: rows.iter().map(|r| r.2).collect(),
    })
}

/// `P(0)` at each η; unstable points are reported as NaN.
pub fn eta_sweep(setup: &IoSetup, etas: &[f64]) -> Result<Vec<(f64, f64)>> {
    etas.par_iter()
        .map(|&eta| match build_io_system(&setup.with_eta(eta)) {
            Ok(sys) => Ok((eta, sys.squeezing_at(0.0).0)),
            Err(e) if e.is_unstable() => Ok((eta, f64::NAN)),
            Err(e) => Err(e),
        })
        .collect()
}

/// Bisection for the instability threshold of the extended system.
pub fn io_eta_critical(setup: &IoSetup, bracket: (f64, f64), rel_tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = bracket;
    if !(setup.with_eta(lo).is_stable()? && !setup.with_eta(hi).is_stable()?) {
        return Err(Error::BracketNotStraddling { lo, hi });
    }
    for _ in 0..200 {
        if hi - lo <= rel_tol * hi.abs() {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if setup.with_eta(mid).is_stable()? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaOptimum {
    pub eta_opt: f64,
    pub p0: f64,
}

/// Golden-section minimization of `P(0)` over `η ∈ bracket`.
pub fn eta_opt_search(setup: &IoSetup, bracket: (f64, f64)) -> Result<EtaOptimum> {
    let (lo, hi) = bracket;
    for eta in [lo, hi] {
        if !setup.with_eta(eta).is_stable()? {
            return Err(Error::InvalidParameter(format!("bracket endpoint eta = {eta} is unstable")));
        }
    }
    let p0 = |eta: f64| -> Result<f64> { Ok(build_io_system(&setup.with_eta(eta))?.squeezing_at(0.0).0) };
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (p0(c)?, p0(d)?);
    for _ in 0..200 {
        if (b - a) <= 1e-12 * b.abs().max(1e-300) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = p0(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = p0(d)?;
        }
    }
    let (eta_opt, best) = if fc < fd { (c, fc) } else { (d, fd) };
    Ok(EtaOptimum { eta_opt, p0: best })
}
