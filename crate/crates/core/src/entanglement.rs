//! Gaussian entanglement entropy, bipartitions, edge localization under
//! disorder, spiral ordering and line cuts.

use std::f64::consts::PI;

use faer::Side;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::CovarianceState;
use crate::lattice::{build_ssh_with_rng, eigenpairs, LatticeGeometry, SshConvention, SshParams, DEGENERACY_TOL};
use crate::linalg::{omega, symmetric_eigenvalues, RMat};
use crate::stability::eta_critical_wavefunction;
use crate::steady::{bogoliubov_steady_state, BogoliubovOptions};
use crate::gaussian::JumpOperator;

/// Symplectic eigenvalues of a covariance matrix, ascending, one per mode.
pub fn symplectic_eigenvalues(v: &RMat) -> Result<Vec<f64>> {
    let n = v.nrows() / 2;
    if n == 0 {
        return Ok(Vec::new());
    }
    let chol = v
        .cholesky(Side::Lower)
        .map_err(|_| Error::Unphysical("covariance is not positive definite".into()))?;
    let l = chol.compute_l();
    let k = l.transpose() * omega(n) * &l;
    let ktk = k.transpose() * &k;
    let mut w: Vec<f64> = symmetric_eigenvalues(&ktk).into_iter().map(|x| x.abs().sqrt()).collect();
    w.sort_by(f64::total_cmp);
    Ok(w.into_iter().step_by(2).collect())
}

fn entropy_term(nu: f64) -> f64 {
    let a = nu + 0.5;
    let b = nu - 0.5;
    let bl = if b > 0.0 { b * b.ln() } else { 0.0 };
    a * a.ln() - bl
}

/// Von Neumann entropy in nats of a covariance matrix.
pub fn covariance_entropy(v: &RMat) -> Result<f64> {
    let scale = (0..v.nrows()).map(|i| v.read(i, i).abs()).fold(1.0_f64, f64::max);
    let guard = 1e-9 * scale;
    let mut s = 0.0;
    for nu in symplectic_eigenvalues(v)? {
        if nu < 0.5 - guard {
            return Err(Error::Unphysical(format!("symplectic eigenvalue {nu:.6e} < 1/2")));
        }
        s += entropy_term(nu.max(0.5));
    }
    Ok(s)
}

/// Subsystem `A` of a lattice, with the cut angle when built by a line cut.
#[derive(Debug, Clone, PartialEq)]
pub struct Bipartition {
    pub sites: Vec<usize>,
    pub angle: Option<f64>,
}

impl Bipartition {
    pub fn new(sites: Vec<usize>, n_sites: usize) -> Result<Self> {
        if sites.is_empty() || sites.len() >= n_sites || sites.iter().any(|&s| s >= n_sites) {
            return Err(Error::InvalidParameter("bipartition must be a nonempty proper subset".into()));
        }
        Ok(Self { sites, angle: None })
    }

    pub fn complement(&self, n_sites: usize) -> Vec<usize> {
        let mut inside = vec![false; n_sites];
        for &s in &self.sites {
            inside[s] = true;
        }
        (0..n_sites).filter(|&i| !inside[i]).collect()
    }
}

/// Entropy of the reduced state on `sites`.
pub fn subsystem_entropy(state: &CovarianceState, sites: &[usize]) -> Result<f64> {
    covariance_entropy(&state.reduced(sites))
}

pub fn entanglement_entropy(state: &CovarianceState, part: &Bipartition) -> Result<f64> {
    subsystem_entropy(state, &part.sites)
}

/// `I(A:B) = S(A) + S(B) − S(A ∪ B)` for disjoint site sets.
pub fn mutual_information(state: &CovarianceState, a: &[usize], b: &[usize]) -> Result<f64> {
    let joint: Vec<usize> = a.iter().chain(b).copied().collect();
    Ok(subsystem_entropy(state, a)? + subsystem_entropy(state, b)? - subsystem_entropy(state, &joint)?)
}

/// `m` cuts through the lattice center at `θ_i = πi/m`.
///
/// A site belongs to `A` when its signed distance along `(−sin θ, cos θ)` is
/// non-negative; ties within 1e-12 go to `A`.
pub fn angled_bipartitions(geometry: &LatticeGeometry, m: usize) -> Result<Vec<Bipartition>> {
    if !geometry.is_square() {
        return Err(Error::InvalidParameter("angled cuts need a square geometry".into()));
    }
    let cx = (geometry.nx as f64 - 1.0) / 2.0;
    let cy = (geometry.ny as f64 - 1.0) / 2.0;
    let n = geometry.n_sites();
    (0..m)
        .map(|i| {
            let theta = PI * i as f64 / m as f64;
            let (nx, ny) = (-theta.sin(), theta.cos());
            let sites = (0..n)
                .filter(|&s| {
                    let (a, b) = geometry.coords(s);
                    (a as f64 - cx) * nx + (b as f64 - cy) * ny >= -1e-12
                })
                .collect();
            let mut part = Bipartition::new(sites, n)?;
            part.angle = Some(theta);
            Ok(part)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares line through `(x, y)`.
pub fn volume_law_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::InvalidParameter("fit needs at least 3 paired points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx <= 1e-300 {
        return Err(Error::InvalidParameter("degenerate x values".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(LinearFit { slope, intercept, r_squared })
}

/// Symmetrized edge localization factor
/// `𝒮 = (1/n) Σ_i √(n_i n_{N−1−i}) (1 − 4i(N − i)/N²)`.
pub fn edge_localization(density: &[f64]) -> Result<f64> {
    let n = density.len();
    let total: f64 = density.iter().sum();
    if n == 0 || !(total > 0.0) {
        return Err(Error::InvalidParameter("density must have positive total".into()));
    }
    let nf = n as f64;
    let s: f64 = (0..n)
        .map(|i| {
            let w = 1.0 - 4.0 * i as f64 * (nf - i as f64) / (nf * nf);
            (density[i] * density[n - 1 - i]).max(0.0).sqrt() * w
        })
        .sum();
    Ok(s / total)
}

/// Disordered SSH chain with a pairing jump at `η = eta_ratio · η_c` of each realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisorderTemplate {
    pub n: usize,
    pub site0: usize,
    pub site1: usize,
    pub eta_ratio: f64,
    pub j: f64,
    pub convention: SshConvention,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisorderPoint {
    pub alpha: f64,
    pub sigma: f64,
    pub mean: f64,
    pub stderr: f64,
    pub used: usize,
    pub skipped: usize,
    /// More than half of the realizations were skipped.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisorderSweepResult {
    pub points: Vec<DisorderPoint>,
    pub realizations: usize,
    pub seed: u64,
}

/// Generator for realization `r` at grid point `g`: key = master seed, stream = `(g, r)`.
pub fn realization_rng(seed: u64, grid_index: usize, realization: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(((grid_index as u64) << 32) | realization as u64);
    rng
}

fn realization(t: &DisorderTemplate, alpha: f64, sigma: f64, rng: &mut ChaCha20Rng) -> Result<Option<f64>> {
    let params = SshParams { n: t.n, alpha, j: t.j, convention: t.convention, sigma, seed: 0 };
    let lat = build_ssh_with_rng(&params, rng)?;
    let outcome = (|| {
        let modes = eigenpairs(&lat.hamiltonian, DEGENERACY_TOL)?;
        let eta_c = eta_critical_wavefunction(&modes, t.site0, t.site1)?.critical_value;
        let jump = JumpOperator::pairing(t.n, t.site0, t.site1, 1.0, t.eta_ratio * eta_c)?;
        let st = bogoliubov_steady_state(&modes, &jump, BogoliubovOptions::default())?;
        let density: Vec<f64> = (0..t.n).map(|i| st.number.read(i, i).re).collect();
        edge_localization(&density)
    })();
    match outcome {
        Ok(s) => Ok(Some(s)),
        Err(e) if e.is_unstable() || matches!(e, Error::NonUnique(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Mean edge localization over `realizations` seeded disorder draws per `(α, σ)`.
pub fn disorder_sweep(
    template: &DisorderTemplate,
    alphas: &[f64],
    sigmas: &[f64],
    realizations: usize,
    seed: u64,
) -> Result<DisorderSweepResult> {
    let mut points = Vec::with_capacity(alphas.len() * sigmas.len());
    for (ai, &alpha) in alphas.iter().enumerate() {
        for (si, &sigma) in sigmas.iter().enumerate() {
            let g = ai * sigmas.len() + si;
            let values: Vec<Option<f64>> = (0..realizations)
                .into_par_iter()
                .map(|r| realization(template, alpha, sigma, &mut realization_rng(seed, g, r)))
                .collect::<Result<_>>()?;
            let ok: Vec<f64> = values.iter().flatten().copied().collect();
            let used = ok.len();
            let mean = if used > 0 { ok.iter().sum::<f64>() / used as f64 } else { f64::NAN };
            let stderr = if used > 1 {
                let var = ok.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (used - 1) as f64;
                (var / used as f64).sqrt()
            } else {
                f64::NAN
            };
            let skipped = realizations - used;
            points.push(DisorderPoint { alpha, sigma, mean, stderr, used, skipped, flagged: 2 * skipped > realizations });
        }
    }
    Ok(DisorderSweepResult { points, realizations, seed })
}

/// σ where the mean `𝒮` first crosses 0.5, by linear interpolation between grid points.
pub fn crossover_sigma(points: &[DisorderPoint]) -> Option<f64> {
    let mut pts: Vec<&DisorderPoint> = points.iter().filter(|p| p.mean.is_finite()).collect();
    pts.sort_by(|a, b| a.sigma.total_cmp(&b.sigma));
    pts.windows(2).find_map(|w| {
        let (a, b) = (w[0], w[1]);
        if (a.mean - 0.5) * (b.mean - 0.5) <= 0.0 && a.mean != b.mean {
            Some(a.sigma + (0.5 - a.mean) * (b.sigma - a.sigma) / (b.mean - a.mean))
        } else {
            None
        }
    })
}

/// Clockwise spiral from the upper-left corner inward.
///
/// Rows count down from the top (`row = ny − 1 − n`), columns are `m`.
/// The first `4(N − 1)` entries are the boundary.
pub fn spiral_order(geometry: &LatticeGeometry) -> Result<Vec<usize>> {
    if geometry.kind != crate::lattice::GeometryKind::SquareOpen || geometry.nx != geometry.ny {
        return Err(Error::InvalidParameter("spiral order needs a square open lattice".into()));
    }
    let size = geometry.nx;
    let mut out = Vec::with_capacity(size * size);
    let site = |row: usize, col: usize| geometry.index(col, size - 1 - row);
    let (mut top, mut left) = (0usize, 0usize);
    let (mut bottom, mut right) = (size as isize - 1, size as isize - 1);
    while (top as isize) <= bottom && (left as isize) <= right {
        let (b, r) = (bottom as usize, right as usize);
        for col in left..=r {
            out.push(site(top, col));
        }
        for row in top + 1..=b {
            out.push(site(row, r));
        }
        if (top as isize) < bottom {
            for col in (left..r).rev() {
                out.push(site(b, col));
            }
        }
        if (left as isize) < right {
            for row in (top + 1..b).rev() {
                out.push(site(row, left));
            }
        }
        top += 1;
        left += 1;
        bottom -= 1;
        right -= 1;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutPath {
    /// Sites `(m, n)` for all `m` at fixed `n`.
    Row(usize),
    /// Sites `(m, n)` for all `n` at fixed `m`.
    Column(usize),
    /// The boundary prefix of the spiral order.
    EdgeWalk,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutRow {
    pub site: usize,
    pub m: usize,
    pub n: usize,
    pub density: f64,
    /// `|⟨a_ref† a_site⟩|`, zero without a reference site.
    pub number_corr: f64,
    /// `|⟨a_ref a_site⟩|`, zero without a reference site.
    pub anomalous_corr: f64,
}

pub fn line_cut(
    state: &CovarianceState,
    geometry: &LatticeGeometry,
    path: CutPath,
    reference: Option<usize>,
) -> Result<Vec<CutRow>> {
    let n_sites = geometry.n_sites();
    if state.n_modes() != n_sites {
        return Err(Error::DimensionMismatch("state and geometry sizes differ".into()));
    }
    let sites: Vec<usize> = match path {
        CutPath::Row(n) if n < geometry.ny => (0..geometry.nx).map(|m| geometry.index(m, n)).collect(),
        CutPath::Column(m) if m < geometry.nx => (0..geometry.ny).map(|n| geometry.index(m, n)).collect(),
        CutPath::EdgeWalk => {
            let order = spiral_order(geometry)?;
            order[..(4 * (geometry.nx - 1)).max(1).min(order.len())].to_vec()
        }
        _ => return Err(Error::InvalidParameter("cut path out of bounds".into())),
    };
    if reference.is_some_and(|r| r >= n_sites) {
        return Err(Error::InvalidParameter("reference site out of bounds".into()));
    }
    let number = state.number_matrix();
    let anomalous = state.anomalous_matrix();
    Ok(sites
        .into_iter()
        .map(|s| {
            let (m, n) = geometry.coords(s);
            let (nc, ac) = match reference {
                Some(r) => (number.read(r, s).abs(), anomalous.read(r, s).abs()),
                None => (0.0, 0.0),
            };
            CutRow { site: s, m, n, density: number.read(s, s).re, number_corr: nc, anomalous_corr: ac }
        })
        .collect())
}
