//! Lattice Hamiltonians, chiral sublattice checks and chiral-paired eigenmodes.

use std::collections::VecDeque;
use std::f64::consts::PI;

use faer::complex_native::c64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::gaussian::{JumpOperator, QuadraticSystem};
use crate::linalg::{cx, hermitian_eigen, CMat, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryKind {
    Chain,
    SquareOpen,
    /// Square lattice with the y direction wrapped.
    SquareCylinder,
}

/// Site labelling. Square site `(m, n)` has flat index `m·ny + n`; a chain has `ny = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeGeometry {
    pub kind: GeometryKind,
    pub nx: usize,
    pub ny: usize,
}

impl LatticeGeometry {
    pub fn chain(n: usize) -> Self {
        Self { kind: GeometryKind::Chain, nx: n, ny: 1 }
    }

    pub fn square(nx: usize, ny: usize, cylinder: bool) -> Self {
        let kind = if cylinder { GeometryKind::SquareCylinder } else { GeometryKind::SquareOpen };
        Self { kind, nx, ny }
    }

    pub fn n_sites(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_square(&self) -> bool {
        self.kind != GeometryKind::Chain
    }

    pub fn index(&self, m: usize, n: usize) -> usize {
        m * self.ny + n
    }

    pub fn coords(&self, i: usize) -> (usize, usize) {
        (i / self.ny, i % self.ny)
    }
}

#[derive(Debug, Clone)]
pub struct Lattice {
    pub geometry: LatticeGeometry,
    pub hamiltonian: CMat,
}

impl Lattice {
    pub fn n_sites(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn system(&self, jumps: Vec<JumpOperator>) -> Result<QuadraticSystem> {
        QuadraticSystem::new(self.hamiltonian.clone(), jumps)
    }

    /// System with one canonical pairing jump.
    pub fn with_pairing(&self, site0: usize, site1: usize, kappa: f64, eta: f64) -> Result<QuadraticSystem> {
        let jump = JumpOperator::pairing(self.n_sites(), site0, site1, kappa, eta)?;
        self.system(vec![jump])
    }
}

/// Sign pattern of the staggered hopping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SshConvention {
    /// Bond `i` has strength `J(1 + (−1)^i α) + J_i`; bond 0 is weak for `α < 0`.
    #[default]
    PlusFirst,
    /// Bond `i` has strength `J(1 − (−1)^i α) + J_i`.
    MinusFirst,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SshParams {
    pub n: usize,
    pub alpha: f64,
    pub j: f64,
    pub convention: SshConvention,
    /// Standard deviation of the bond disorder `J_i`, in units of `J`.
    pub sigma: f64,
    pub seed: u64,
}

impl SshParams {
    pub fn new(n: usize, alpha: f64) -> Self {
        Self { n, alpha, j: 1.0, convention: SshConvention::PlusFirst, sigma: 0.0, seed: 0 }
    }
}

pub fn build_ssh(p: &SshParams) -> Result<Lattice> {
    let mut rng = ChaCha20Rng::seed_from_u64(p.seed);
    build_ssh_with_rng(p, &mut rng)
}

/// SSH chain drawing the bond disorder from `rng`.
pub fn build_ssh_with_rng<R: Rng + ?Sized>(p: &SshParams, rng: &mut R) -> Result<Lattice> {
    if p.n < 2 {
        return Err(Error::InvalidParameter(format!("SSH chain needs N >= 2, got {}", p.n)));
    }
    if !(p.alpha.abs() < 1.0) {
        return Err(Error::InvalidParameter(format!("|alpha| = {} must be < 1", p.alpha.abs())));
    }
    if !(p.sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!("sigma = {} must be >= 0", p.sigma)));
    }
    let normal = if p.sigma > 0.0 {
        Some(Normal::new(0.0, p.sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?)
    } else {
        None
    };
    let sign = match p.convention {
        SshConvention::PlusFirst => 1.0,
        SshConvention::MinusFirst => -1.0,
    };
    let mut h = CMat::zeros(p.n, p.n);
    for i in 0..p.n - 1 {
        let stagger = if i % 2 == 0 { 1.0 } else { -1.0 };
        let noise = normal.map(|d| d.sample(rng)).unwrap_or(0.0);
        let t = p.j * (1.0 + sign * stagger * p.alpha + noise);
        h.write(i, i + 1, cx(t, 0.0));
        h.write(i + 1, i, cx(t, 0.0));
    }
    Ok(Lattice { geometry: LatticeGeometry::chain(p.n), hamiltonian: h })
}

/// Quarter-flux Hofstadter model in Landau gauge: unit x-bonds and
/// `e^{iπm/2} a†_{m,n} a_{m,n+1}` on y-bonds. `cylinder` wraps y.
pub fn build_hofstadter(nx: usize, ny: usize, cylinder: bool) -> Result<Lattice> {
    if nx < 2 || ny < 2 || (cylinder && ny < 3) {
        return Err(Error::InvalidParameter(format!("lattice {nx}x{ny} too small")));
    }
    let geom = LatticeGeometry::square(nx, ny, cylinder);
    let mut h = CMat::zeros(nx * ny, nx * ny);
    let mut add = |i: usize, j: usize, z: c64| {
        h.write(i, j, h.read(i, j) + z);
        h.write(j, i, h.read(j, i) + z.conj());
    };
    for m in 0..nx {
        let phase = c64::cis(PI * m as f64 / 2.0);
        for n in 0..ny {
            let i = geom.index(m, n);
            if m + 1 < nx {
                add(i, geom.index(m + 1, n), cx(1.0, 0.0));
            }
            if n + 1 < ny {
                add(i, geom.index(m, n + 1), phase);
            } else if cylinder {
                add(i, geom.index(m, 0), phase);
            }
        }
    }
    Ok(Lattice { geometry: geom, hamiltonian: h })
}

/// Three sites `a, b, c` with `H = J1 a†b + J2 b†c + h.c.`.
pub fn build_three_mode(j1: f64, j2: f64) -> Lattice {
    let mut h = CMat::zeros(3, 3);
    for (i, t) in [(0, j1), (1, j2)] {
        h.write(i, i + 1, cx(t, 0.0));
        h.write(i + 1, i, cx(t, 0.0));
    }
    Lattice { geometry: LatticeGeometry::chain(3), hamiltonian: h }
}

/// Two sites coupled by `J`, with on-site energies `−δ` and `+δ`.
pub fn build_dimer(j: f64, delta: f64) -> Lattice {
    let mut h = CMat::zeros(2, 2);
    h.write(0, 0, cx(-delta, 0.0));
    h.write(1, 1, cx(delta, 0.0));
    h.write(0, 1, cx(j, 0.0));
    h.write(1, 0, cx(j, 0.0));
    Lattice { geometry: LatticeGeometry::chain(2), hamiltonian: h }
}

/// Two-colours the hopping graph; `H_ij = 0` whenever the signs agree.
pub fn check_chiral(h: &CMat) -> Result<Vec<i8>> {
    let n = h.nrows();
    let scale = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| h.read(i, j).abs())
        .fold(0.0_f64, f64::max);
    let tol = 1e-14 * scale.max(f64::MIN_POSITIVE);
    let bonded = |i: usize, j: usize| h.read(i, j).abs() > tol;
    let mut sign = vec![0_i8; n];
    for start in 0..n {
        if sign[start] != 0 {
            continue;
        }
        sign[start] = 1;
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            if bonded(i, i) {
                return Err(Error::NotChiral(i, i));
            }
            for j in 0..n {
                if j == i || !bonded(i, j) {
                    continue;
                }
                if sign[j] == 0 {
                    sign[j] = -sign[i];
                    queue.push_back(j);
                } else if sign[j] == sign[i] {
                    return Err(Error::NotChiral(i.min(j), i.max(j)));
                }
            }
        }
    }
    Ok(sign)
}

#[derive(Debug, Clone)]
pub struct ModePair {
    /// Positive energy `ε_α`.
    pub energy: f64,
    pub plus: Vec<c64>,
    /// Partner at `−ε_α`, exactly the sublattice flip of `plus`.
    pub minus: Vec<c64>,
}

#[derive(Debug, Clone)]
pub struct ZeroMode {
    pub energy: f64,
    pub vector: Vec<c64>,
}

/// Chiral-paired eigenmodes of a bipartite Hamiltonian.
#[derive(Debug, Clone)]
pub struct EigenmodeSet {
    pub pairs: Vec<ModePair>,
    pub zero_modes: Vec<ZeroMode>,
    pub sublattice: Vec<i8>,
    /// Smallest gap between positive energies relative to the spectral radius.
    pub min_relative_gap: f64,
    /// Set when degenerate subspaces were resolved by a symmetry (momentum) basis.
    pub symmetry_resolved: bool,
}

impl EigenmodeSet {
    pub fn n_modes(&self) -> usize {
        self.sublattice.len()
    }

    /// All eigenvectors with energies, pairs first then zero modes.
    pub fn all_modes(&self) -> Vec<(f64, &[c64])> {
        let mut out = Vec::with_capacity(self.n_modes());
        for p in &self.pairs {
            out.push((p.energy, p.plus.as_slice()));
            out.push((-p.energy, p.minus.as_slice()));
        }
        for z in &self.zero_modes {
            out.push((z.energy, z.vector.as_slice()));
        }
        out
    }
}

fn fix_phase(v: &mut [c64]) {
    let max = v.iter().map(|z| z.abs()).fold(0.0_f64, f64::max);
    if max == 0.0 {
        return;
    }
    let k = v.iter().position(|z| z.abs() >= max * (1.0 - 1e-9)).unwrap_or(0);
    let ph = v[k].conj() * (1.0 / v[k].abs());
    for z in v.iter_mut() {
        *z *= ph;
    }
}

fn column(u: &CMat, j: usize) -> Vec<c64> {
    (0..u.nrows()).map(|i| u.read(i, j)).collect()
}

fn flip(sign: &[i8], v: &[c64]) -> Vec<c64> {
    v.iter().zip(sign).map(|(z, s)| if *s > 0 { *z } else { -*z }).collect()
}

/// Rotates a degenerate zero-energy subspace into sublattice-polarized vectors.
fn polarize_zero_modes(sign: &[i8], vecs: Vec<(f64, Vec<c64>)>) -> Vec<ZeroMode> {
    let k = vecs.len();
    if k <= 1 {
        return vecs
            .into_iter()
            .map(|(e, mut v)| {
                fix_phase(&mut v);
                ZeroMode { energy: e, vector: v }
            })
            .collect();
    }
    let n = sign.len();
    let s_proj = CMat::from_fn(k, k, |a, b| {
        (0..n).fold(ZERO, |acc, i| acc + vecs[a].1[i].conj() * vecs[b].1[i] * sign[i] as f64)
    });
    let (_, rot) = hermitian_eigen(&s_proj);
    (0..k)
        .map(|c| {
            let mut v: Vec<c64> =
                (0..n).map(|i| (0..k).fold(ZERO, |acc, a| acc + vecs[a].1[i] * rot.read(a, c))).collect();
            fix_phase(&mut v);
            let e = (0..k).map(|a| vecs[a].0 * rot.read(a, c).norm_sqr()).sum();
            ZeroMode { energy: e, vector: v }
        })
        .collect()
}

fn assemble(sign: Vec<i8>, modes: Vec<(f64, Vec<c64>)>, tol: f64, symmetry_resolved: bool) -> Result<EigenmodeSet> {
    let scale = modes.iter().map(|(e, _)| e.abs()).fold(0.0_f64, f64::max).max(f64::MIN_POSITIVE);
    let mut pairs = Vec::new();
    let mut zeros = Vec::new();
    let mut negatives = 0usize;
    for (e, mut v) in modes {
        if e.abs() <= tol * scale {
            zeros.push((e, v));
        } else if e > 0.0 {
            fix_phase(&mut v);
            let minus = flip(&sign, &v);
            pairs.push(ModePair { energy: e, plus: v, minus });
        } else {
            negatives += 1;
        }
    }
    if negatives != pairs.len() {
        return Err(Error::NotChiral(0, 0));
    }
    pairs.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    let min_relative_gap = pairs
        .windows(2)
        .map(|w| (w[1].energy - w[0].energy) / scale)
        .fold(f64::INFINITY, f64::min);
    Ok(EigenmodeSet {
        pairs,
        zero_modes: polarize_zero_modes(&sign, zeros),
        sublattice: sign,
        min_relative_gap,
        symmetry_resolved,
    })
}

/// Default relative tolerance for classifying zero modes.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// Chiral-paired eigenmodes; `tol` is relative to the spectral radius.
pub fn eigenpairs(h: &CMat, tol: f64) -> Result<EigenmodeSet> {
    let sign = check_chiral(h)?;
    let (vals, vecs) = hermitian_eigen(h);
    let modes = vals.iter().enumerate().map(|(j, &e)| (e, column(&vecs, j))).collect();
    assemble(sign, modes, tol, false)
}

/// Reduced chain Hamiltonian of the y-wrapped Hofstadter cylinder at momentum `k`.
fn cylinder_block(nx: usize, k: f64) -> CMat {
    let mut hk = CMat::zeros(nx, nx);
    for m in 0..nx {
        hk.write(m, m, cx(2.0 * (k + PI * m as f64 / 2.0).cos(), 0.0));
        if m + 1 < nx {
            hk.write(m, m + 1, cx(1.0, 0.0));
            hk.write(m + 1, m, cx(1.0, 0.0));
        }
    }
    hk
}

fn require_cylinder(lattice: &Lattice) -> Result<()> {
    if lattice.geometry.kind != GeometryKind::SquareCylinder {
        return Err(Error::InvalidParameter("cylinder geometry required".into()));
    }
    Ok(())
}

/// Eigenmodes of the Hofstadter cylinder in the momentum-resolved basis
/// `φ(m, n) = u_m e^{i k n}/√ny`, `k = 2πj/ny`.
///
/// The cylinder spectrum is exactly degenerate, so a generic eigensolver returns
/// arbitrary mixtures; this basis makes every mode a `k_y` eigenstate.
pub fn cylinder_eigenmodes(lattice: &Lattice, tol: f64) -> Result<EigenmodeSet> {
    require_cylinder(lattice)?;
    let (nx, ny) = (lattice.geometry.nx, lattice.geometry.ny);
    let sign = check_chiral(&lattice.hamiltonian)?;
    let norm = 1.0 / (ny as f64).sqrt();
    let mut modes = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let k = 2.0 * PI * j as f64 / ny as f64;
        let (vals, u) = hermitian_eigen(&cylinder_block(nx, k));
        for (a, &e) in vals.iter().enumerate() {
            let v: Vec<c64> = (0..nx * ny)
                .map(|i| {
                    let (m, n) = lattice.geometry.coords(i);
                    u.read(m, a) * c64::cis(k * n as f64) * norm
                })
                .collect();
            modes.push((e, v));
        }
    }
    modes.sort_by(|a, b| a.0.total_cmp(&b.0));
    assemble(sign, modes, tol, true)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandPoint {
    pub ky: f64,
    pub energy: f64,
    /// `⟨|x − center|⟩` of the reduced eigenvector.
    pub mean_abs_x: f64,
}

/// Per-`k_y` band energies of the cylinder with the mean distance from the center.
pub fn cylinder_bands(lattice: &Lattice) -> Result<Vec<BandPoint>> {
    require_cylinder(lattice)?;
    let (nx, ny) = (lattice.geometry.nx, lattice.geometry.ny);
    let center = (nx as f64 - 1.0) / 2.0;
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let ky = 2.0 * PI * j as f64 / ny as f64;
        let (vals, u) = hermitian_eigen(&cylinder_block(nx, ky));
        for (a, &energy) in vals.iter().enumerate() {
            let mean_abs_x = (0..nx).map(|m| u.read(m, a).norm_sqr() * (m as f64 - center).abs()).sum();
            out.push(BandPoint { ky, energy, mean_abs_x });
        }
    }
    Ok(out)
}

/// Flux through every elementary plaquette (and wrapped plaquettes on a cylinder).
pub fn plaquette_fluxes(lattice: &Lattice) -> Vec<f64> {
    let g = lattice.geometry;
    let h = &lattice.hamiltonian;
    let hop = |i: usize, j: usize| h.read(i, j);
    let n_max = if g.kind == GeometryKind::SquareCylinder { g.ny } else { g.ny - 1 };
    let mut out = Vec::new();
    for m in 0..g.nx.saturating_sub(1) {
        for n in 0..n_max {
            let n1 = (n + 1) % g.ny;
            let (a, b, c, d) = (g.index(m, n), g.index(m + 1, n), g.index(m + 1, n1), g.index(m, n1));
            // loop a → b → c → d → a, amplitude of hopping j ← i is H_ij
            let w = hop(b, a) * hop(c, b) * hop(d, c) * hop(a, d);
            out.push(-w.arg());
        }
    }
    out
}
