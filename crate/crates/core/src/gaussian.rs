//! Model types, drift and diffusion generators, covariance states.
//!
//! Conventions: `x = (a + a†)/√2`, `p = −i(a − a†)/√2`, quadratures ordered
//! `(x_0 … x_{N−1}, p_0 … p_{N−1})`, vacuum covariance `I/2`.

use faer::complex_native::c64;

use crate::error::{Error, Result};
use crate::linalg::{cx, frobenius_c, omega, CMat, RMat, I, ZERO};

/// Linear jump operator `L = Σ_i u_i a_i + v_i a_i†`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpOperator {
    pub u: Vec<c64>,
    pub v: Vec<c64>,
}

/// Location and strength of a canonical pairing jump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairingSites {
    pub site0: usize,
    pub site1: usize,
    pub kappa: f64,
    pub eta: f64,
}

impl JumpOperator {
    pub fn new(u: Vec<c64>, v: Vec<c64>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "jump vectors have lengths {} and {}",
                u.len(),
                v.len()
            )));
        }
        if u.iter().chain(v.iter()).all(|z| *z == ZERO) {
            return Err(Error::InvalidParameter("jump operator is identically zero".into()));
        }
        Ok(Self { u, v })
    }

    /// `L = √κ (a_{site0} + η a†_{site1})`.
    pub fn pairing(n: usize, site0: usize, site1: usize, kappa: f64, eta: f64) -> Result<Self> {
        if site0 >= n || site1 >= n {
            return Err(Error::InvalidParameter(format!("sites ({site0}, {site1}) outside 0..{n}")));
        }
        if !(kappa > 0.0) || !eta.is_finite() {
            return Err(Error::InvalidParameter(format!("kappa = {kappa}, eta = {eta}")));
        }
        let mut u = vec![ZERO; n];
        let mut v = vec![ZERO; n];
        u[site0] = cx(kappa.sqrt(), 0.0);
        v[site1] = cx(eta * kappa.sqrt(), 0.0);
        Ok(Self { u, v })
    }

    /// `L = √γ a_site`.
    pub fn loss(n: usize, site: usize, rate: f64) -> Result<Self> {
        let mut u = vec![ZERO; n];
        if site >= n {
            return Err(Error::InvalidParameter(format!("site {site} outside 0..{n}")));
        }
        u[site] = cx(rate.sqrt(), 0.0);
        Self::new(u, vec![ZERO; n])
    }

    /// `L = √γ a†_site`.
    pub fn gain(n: usize, site: usize, rate: f64) -> Result<Self> {
        let mut v = vec![ZERO; n];
        if site >= n {
            return Err(Error::InvalidParameter(format!("site {site} outside 0..{n}")));
        }
        v[site] = cx(rate.sqrt(), 0.0);
        Self::new(vec![ZERO; n], v)
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Recovers `(0̄, 1̄, κ, η)` if this jump has the canonical pairing shape.
    pub fn pairing_sites(&self) -> Option<PairingSites> {
        let nz = |w: &[c64]| w.iter().enumerate().filter(|(_, z)| **z != ZERO).map(|(i, _)| i).collect::<Vec<_>>();
        let us = nz(&self.u);
        let vs = nz(&self.v);
        if us.len() != 1 || vs.len() > 1 {
            return None;
        }
        let s0 = us[0];
        let a = self.u[s0];
        let kappa = a.norm_sqr();
        if kappa <= 0.0 {
            return None;
        }
        // a common phase of u and v is irrelevant; η is measured relative to u
        let (s1, eta) = match vs.first() {
            Some(&s1) => {
                let ratio = self.v[s1] * a.inv();
                if ratio.im.abs() > 1e-12 * ratio.abs() {
                    return None;
                }
                (s1, ratio.re)
            }
            None => (s0, 0.0),
        };
        Some(PairingSites { site0: s0, site1: s1, kappa, eta })
    }
}

/// Quadratic bosonic model: `ĥ = Σ H_ij a_i†a_j + ½Σ (G_ij a_i†a_j† + h.c.)` plus jumps.
#[derive(Debug, Clone)]
pub struct QuadraticSystem {
    pub hamiltonian: CMat,
    pub anomalous: Option<CMat>,
    pub jumps: Vec<JumpOperator>,
}

impl QuadraticSystem {
    /// Validates dimensions and symmetrizes `H`, warning if the correction exceeds 1e-10.
    pub fn new(hamiltonian: CMat, jumps: Vec<JumpOperator>) -> Result<Self> {
        let n = hamiltonian.nrows();
        if hamiltonian.ncols() != n || n == 0 {
            return Err(Error::DimensionMismatch(format!(
                "hamiltonian is {}x{}",
                hamiltonian.nrows(),
                hamiltonian.ncols()
            )));
        }
        for (k, j) in jumps.iter().enumerate() {
            if j.u.len() != n || j.v.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "jump {k} has length {} but the system has {n} modes",
                    j.u.len()
                )));
            }
        }
        let sym = hermitian_part(&hamiltonian);
        let scale = frobenius_c(&hamiltonian).max(f64::MIN_POSITIVE);
        let dev = frobenius_c(&(&sym - &hamiltonian)) / scale;
        if dev > 1e-10 {
            log::warn!("hamiltonian was not Hermitian (relative deviation {dev:.3e}); symmetrized");
        }
        Ok(Self { hamiltonian: sym, anomalous: None, jumps })
    }

    /// Adds a symmetric anomalous term `½ Σ G_ij a_i†a_j† + h.c.`.
    pub fn with_anomalous(mut self, g: CMat) -> Result<Self> {
        let n = self.n_modes();
        if g.nrows() != n || g.ncols() != n {
            return Err(Error::DimensionMismatch("anomalous block must be N x N".into()));
        }
        self.anomalous = Some(CMat::from_fn(n, n, |i, j| (g.read(i, j) + g.read(j, i)) * 0.5));
        Ok(self)
    }

    pub fn n_modes(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn with_jumps(&self, jumps: Vec<JumpOperator>) -> Result<Self> {
        let mut out = Self::new(self.hamiltonian.clone(), jumps)?;
        out.anomalous = self.anomalous.clone();
        Ok(out)
    }
}

fn hermitian_part(h: &CMat) -> CMat {
    CMat::from_fn(h.nrows(), h.ncols(), |i, j| (h.read(i, j) + h.read(j, i).conj()) * 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Rows and columns ordered `(a_0 … a_{N−1}, a_0† … a_{N−1}†)`.
    DoubledMode,
    /// Rows and columns ordered `(x_0 … x_{N−1}, p_0 … p_{N−1})`.
    Quadrature,
}

/// First-moment drift matrix `∂_t ⟨r⟩ = A ⟨r⟩`.
#[derive(Debug, Clone)]
pub struct BdgMatrix {
    pub matrix: CMat,
    pub basis: Basis,
}

impl BdgMatrix {
    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    /// Largest deviation from the particle-hole block structure (doubled basis only).
    pub fn particle_hole_deviation(&self) -> Result<f64> {
        if self.basis != Basis::DoubledMode {
            return Err(Error::WrongBasis);
        }
        let n = self.n_modes();
        let a = &self.matrix;
        let mut dev = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                dev = dev.max((a.read(i + n, j + n) - a.read(i, j).conj()).abs());
                dev = dev.max((a.read(i + n, j) - a.read(i, j + n).conj()).abs());
            }
        }
        Ok(dev)
    }

    /// Real quadrature-basis drift.
    pub fn quadrature_real(&self) -> RMat {
        match self.basis {
            Basis::Quadrature => crate::linalg::real_part(&self.matrix),
            Basis::DoubledMode => quadrature_blocks(&self.matrix),
        }
    }
}

fn quadrature_blocks(a: &CMat) -> RMat {
    let n = a.nrows() / 2;
    RMat::from_fn(2 * n, 2 * n, |i, j| {
        let (bi, ii) = (i / n, i % n);
        let (bj, jj) = (j / n, j % n);
        let x = a.read(ii, jj);
        let y = a.read(ii, jj + n);
        match (bi, bj) {
            (0, 0) => x.re + y.re,
            (0, _) => y.im - x.im,
            (_, 0) => x.im + y.im,
            _ => x.re - y.re,
        }
    })
}

/// Builds the drift in the doubled-mode basis.
///
/// With `X = −iH + ½Σ_k (v vᴴ − ū uᵀ)` and `Y = −iG + ½Σ_k (v ūᵀ − ū vᵀ)`,
/// `A = [[X, Y], [Ȳ, X̄]]`.
pub fn build_drift(system: &QuadraticSystem) -> BdgMatrix {
    let n = system.n_modes();
    let h = &system.hamiltonian;
    let mut x = CMat::from_fn(n, n, |i, j| h.read(i, j) * (-I));
    let mut y = match &system.anomalous {
        Some(g) => CMat::from_fn(n, n, |i, j| g.read(i, j) * (-I)),
        None => CMat::zeros(n, n),
    };
    for jump in &system.jumps {
        let (u, v) = (&jump.u, &jump.v);
        let su: Vec<usize> = (0..n).filter(|&i| u[i] != ZERO).collect();
        let sv: Vec<usize> = (0..n).filter(|&i| v[i] != ZERO).collect();
        for &i in &sv {
            for &j in &sv {
                x.write(i, j, x.read(i, j) + v[i] * v[j].conj() * 0.5);
            }
        }
        for &i in &su {
            for &j in &su {
                x.write(i, j, x.read(i, j) - u[i].conj() * u[j] * 0.5);
            }
        }
        for &i in &sv {
            for &j in &su {
                y.write(i, j, y.read(i, j) + v[i] * u[j].conj() * 0.5);
            }
        }
        for &i in &su {
            for &j in &sv {
                y.write(i, j, y.read(i, j) - u[i].conj() * v[j] * 0.5);
            }
        }
    }
    let matrix = CMat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, true) => x.read(i, j),
        (true, false) => y.read(i, j - n),
        (false, true) => y.read(i - n, j).conj(),
        (false, false) => x.read(i - n, j - n).conj(),
    });
    BdgMatrix { matrix, basis: Basis::DoubledMode }
}

/// Diffusion matrix `D_q` so that `dV/dt = A_q V + V A_qᵀ + D_q`.
pub fn build_diffusion(system: &QuadraticSystem) -> RMat {
    let n = system.n_modes();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut cc = RMat::zeros(2 * n, 2 * n);
    for jump in &system.jumps {
        let c: Vec<c64> = (0..2 * n)
            .map(|k| {
                if k < n {
                    (jump.u[k] + jump.v[k]) * s
                } else {
                    (jump.u[k - n] - jump.v[k - n]) * I * s
                }
            })
            .collect();
        let nz: Vec<usize> = (0..2 * n).filter(|&k| c[k] != ZERO).collect();
        for &i in &nz {
            for &j in &nz {
                cc.write(i, j, cc.read(i, j) + (c[i].conj() * c[j]).re);
            }
        }
    }
    let om = omega(n);
    &om * &cc * om.transpose()
}

/// Similarity transform into the quadrature basis; the spectrum is unchanged.
pub fn to_quadrature_basis(a: &BdgMatrix) -> Result<BdgMatrix> {
    if a.basis != Basis::DoubledMode {
        return Err(Error::WrongBasis);
    }
    let q = quadrature_blocks(&a.matrix);
    Ok(BdgMatrix { matrix: crate::linalg::to_complex(&q), basis: Basis::Quadrature })
}

/// Gaussian state given by its quadrature covariance.
#[derive(Debug, Clone)]
pub struct CovarianceState {
    pub v: RMat,
}

impl CovarianceState {
    pub fn vacuum(n: usize) -> Self {
        Self { v: RMat::identity(2 * n, 2 * n) * 0.5 }
    }

    /// Checks symmetry and the uncertainty relation.
    pub fn new(v: RMat) -> Result<Self> {
        let n2 = v.nrows();
        if v.ncols() != n2 || n2 % 2 != 0 {
            return Err(Error::DimensionMismatch("covariance must be 2N x 2N".into()));
        }
        let asym = crate::linalg::frobenius(&(&v - v.transpose()));
        if asym > 1e-10 * crate::linalg::frobenius(&v).max(1.0) {
            return Err(Error::Unphysical(format!("covariance asymmetric by {asym:.3e}")));
        }
        let state = Self { v: crate::linalg::symmetrize(&v) };
        let nu = crate::entanglement::symplectic_eigenvalues(&state.v)?;
        if let Some(min) = nu.first() {
            if *min < 0.5 - 1e-8 {
                return Err(Error::Unphysical(format!("symplectic eigenvalue {min:.6e} < 1/2")));
            }
        }
        Ok(state)
    }

    pub fn n_modes(&self) -> usize {
        self.v.nrows() / 2
    }

    /// Builds `V` from `N_ij = ⟨a_i†a_j⟩` and `M_ij = ⟨a_i a_j⟩`.
    pub fn from_moments(number: &CMat, anomalous: &CMat) -> Self {
        let n = number.nrows();
        let v = RMat::from_fn(2 * n, 2 * n, |i, j| {
            let (ii, jj) = (i % n, j % n);
            let nn = number.read(ii, jj);
            let mm = anomalous.read(ii, jj);
            let d = if ii == jj { 0.5 } else { 0.0 };
            match (i < n, j < n) {
                (true, true) => mm.re + nn.re + d,
                (false, false) => -mm.re + nn.re + d,
                (true, false) => mm.im + nn.im,
                (false, true) => {
                    let nt = number.read(jj, ii);
                    let mt = anomalous.read(jj, ii);
                    mt.im + nt.im
                }
            }
        });
        Self { v }
    }

    /// `N_ij = ⟨a_i†a_j⟩`.
    pub fn number_matrix(&self) -> CMat {
        let n = self.n_modes();
        let v = &self.v;
        CMat::from_fn(n, n, |i, j| {
            let re = 0.5 * (v.read(i, j) + v.read(i + n, j + n)) - if i == j { 0.5 } else { 0.0 };
            let im = 0.5 * (v.read(i, j + n) - v.read(j, i + n));
            cx(re, im)
        })
    }

    /// `M_ij = ⟨a_i a_j⟩`.
    pub fn anomalous_matrix(&self) -> CMat {
        let n = self.n_modes();
        let v = &self.v;
        CMat::from_fn(n, n, |i, j| {
            let re = 0.5 * (v.read(i, j) - v.read(i + n, j + n));
            let im = 0.5 * (v.read(i, j + n) + v.read(j, i + n));
            cx(re, im)
        })
    }

    /// Covariance restricted to a set of modes.
    pub fn reduced(&self, sites: &[usize]) -> RMat {
        let n = self.n_modes();
        let k = sites.len();
        let idx = |a: usize| if a < k { sites[a] } else { sites[a - k] + n };
        RMat::from_fn(2 * k, 2 * k, |i, j| self.v.read(idx(i), idx(j)))
    }
}

/// Two-mode squeezing frame in which the pairing jump becomes local loss.
///
/// `a′ = cosh r a + sinh r b†`, `b′ = cosh r b + sinh r a†` with `tanh r = η`,
/// so `L = √κ (a + η b†) = √(κ(1 − η²)) a′`.
#[derive(Debug, Clone)]
pub struct LocalLossFrame {
    pub eta: f64,
    pub r: f64,
    /// Rows give `(a′, b′, a′†, b′†)` in terms of `(a, b, a†, b†)`.
    pub transform: CMat,
    /// `L` equals `√(κ · loss_factor) a′`.
    pub loss_factor: f64,
    /// `Δ(a†a + b†b)` becomes `detuning_scale · Δ(a′†a′ + b′†b′)` plus pairing.
    pub detuning_scale: f64,
    /// Coefficient of `Δ(a′b′ + a′†b′†)`.
    pub pairing_coefficient: f64,
}

pub fn local_loss_frame(eta: f64) -> Result<LocalLossFrame> {
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!("eta = {eta} must lie in [0, 1)")));
    }
    let r = eta.atanh();
    let (c, s) = (r.cosh(), r.sinh());
    let mut t = CMat::zeros(4, 4);
    for (row, other) in [(0usize, 3usize), (1, 2), (2, 1), (3, 0)] {
        t.write(row, row, cx(c, 0.0));
        t.write(row, other, cx(s, 0.0));
    }
    Ok(LocalLossFrame {
        eta,
        r,
        transform: t,
        loss_factor: 1.0 - eta * eta,
        detuning_scale: (1.0 + eta * eta) / (1.0 - eta * eta),
        pairing_coefficient: -2.0 * eta / (1.0 - eta * eta),
    })
}
