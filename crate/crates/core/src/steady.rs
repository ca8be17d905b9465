//! Steady states: Bogoliubov construction, Lyapunov oracle, observables,
//! mirrored dissipator, squeezed-noise comparator and dissipative gaps.

use faer::complex_native::c64;

use crate::error::{Error, Result};
use crate::gaussian::{build_diffusion, build_drift, CovarianceState, JumpOperator, QuadraticSystem};
use crate::lattice::EigenmodeSet;
use crate::linalg::{cx, lyapunov, CMat, ZERO};
use crate::stability::{spectrum, SpectrumReport, NODE_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DegeneracyPolicy {
    /// Degenerate positive energies make the steady state non-unique.
    #[default]
    Strict,
    /// Accept degeneracies when the mode set was resolved by a symmetry basis.
    SymmetryResolved,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BogoliubovOptions {
    /// Relative energy gap below which the spectrum counts as degenerate.
    pub degeneracy_tol: f64,
    /// Relative gap below which a slow-relaxation warning is logged.
    pub warn_tol: f64,
    pub policy: DegeneracyPolicy,
}

impl Default for BogoliubovOptions {
    fn default() -> Self {
        Self { degeneracy_tol: 1e-10, warn_tol: 1e-6, policy: DegeneracyPolicy::Strict }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSqueeze {
    pub energy: f64,
    pub r: f64,
    pub phi: f64,
    /// `N_α` with `|N_α|² = |ψ_α[0̄]|² (1 − tanh² r_α)`.
    pub weight: c64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroSqueeze {
    pub r: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, Default)]
pub struct SqueezeParameters {
    pub pairs: Vec<PairSqueeze>,
    pub zero_modes: Vec<ZeroSqueeze>,
}

#[derive(Debug, Clone)]
pub struct BogoliubovState {
    pub state: CovarianceState,
    pub number: CMat,
    pub anomalous: CMat,
    pub squeeze: SqueezeParameters,
}

fn wrap_phase(z: c64) -> f64 {
    z.arg().rem_euclid(2.0 * std::f64::consts::PI)
}

/// `(tanh r e^{iφ}, n, m)` for one Bogoliubov block.
fn block(z: c64) -> Result<(f64, f64, c64)> {
    let t2 = z.norm_sqr();
    if t2 >= 1.0 {
        return Err(Error::Heating { tanh_r: t2.sqrt() });
    }
    let n = t2 / (1.0 - t2);
    let m = -z * (1.0 / (1.0 - t2));
    Ok((z.abs().atanh(), n, m))
}

/// Steady state as the joint vacuum of the Bogoliubov modes annihilated by the jump.
///
/// Each `(ψ_α, ψ_{−α})` pair is two-mode squeezed with `tanh r_α e^{iφ_α} =
/// s_{0̄} η ψ̄_α[1̄] / ψ_α[0̄]`; zero modes are single-mode squeezed.
pub fn bogoliubov_steady_state(
    modes: &EigenmodeSet,
    jump: &JumpOperator,
    opts: BogoliubovOptions,
) -> Result<BogoliubovState> {
    let ps = jump
        .pairing_sites()
        .ok_or_else(|| Error::InvalidParameter("jump is not a canonical pairing jump".into()))?;
    let n = modes.n_modes();
    if jump.len() != n {
        return Err(Error::DimensionMismatch(format!("jump has length {} for {n} modes", jump.len())));
    }
    let (s0, s1, eta) = (ps.site0, ps.site1, ps.eta);
    if modes.sublattice[s0] != modes.sublattice[s1] {
        return Err(Error::MixedSublattice(s0, s1));
    }
    let resolved = opts.policy == DegeneracyPolicy::SymmetryResolved && modes.symmetry_resolved;
    if modes.min_relative_gap < opts.degeneracy_tol && !resolved {
        return Err(Error::NonUnique(format!(
            "degenerate spectrum (relative gap {:.3e})",
            modes.min_relative_gap
        )));
    }
    if modes.min_relative_gap < opts.warn_tol && !resolved {
        log::warn!(
            "near-degenerate spectrum (relative gap {:.3e}); relaxation time grows as its inverse",
            modes.min_relative_gap
        );
    }
    let sign0 = modes.sublattice[s0] as f64;
    let np = modes.pairs.len();
    let mut squeeze = SqueezeParameters::default();
    let mut nn = Vec::with_capacity(np);
    let mut mm = Vec::with_capacity(np);
    for pair in &modes.pairs {
        let p = pair.plus[s0];
        let q = pair.plus[s1].conj() * eta;
        if p.abs() < NODE_TOL {
            return Err(if q.abs() < NODE_TOL {
                Error::NonUnique(format!("mode at energy {:.6} does not couple to the jump", pair.energy))
            } else {
                Error::Heating { tanh_r: f64::INFINITY }
            });
        }
        let z = q * p.inv() * sign0;
        let (r, ni, mi) = block(z)?;
        squeeze.pairs.push(PairSqueeze {
            energy: pair.energy,
            r,
            phi: wrap_phase(z),
            weight: p * (1.0_f64 - z.norm_sqr()).sqrt(),
        });
        nn.push(ni);
        mm.push(mi);
    }
    let plus = CMat::from_fn(n, np, |i, a| modes.pairs[a].plus[i]);
    let minus = CMat::from_fn(n, np, |i, a| modes.pairs[a].minus[i]);
    let scaled = |m: &CMat, w: &dyn Fn(usize) -> c64| CMat::from_fn(n, np, |i, a| m.read(i, a) * w(a));
    let plus_n = scaled(&plus, &|a| cx(nn[a], 0.0));
    let minus_n = scaled(&minus, &|a| cx(nn[a], 0.0));
    let plus_m = scaled(&plus, &|a| mm[a]);
    let mut number = plus.conjugate() * plus_n.transpose() + minus.conjugate() * minus_n.transpose();
    let half = &plus_m * minus.transpose();
    let mut anomalous = &half + half.transpose();
    for zm in &modes.zero_modes {
        let p = zm.vector[s0];
        let q = zm.vector[s1].conj() * eta;
        if p.abs() < NODE_TOL {
            return Err(if q.abs() < NODE_TOL {
                Error::NonUnique("zero mode does not couple to the jump".into())
            } else {
                Error::Heating { tanh_r: f64::INFINITY }
            });
        }
        let z = q * p.inv();
        let (r, ni, mi) = block(z)?;
        squeeze.zero_modes.push(ZeroSqueeze { r, phi: wrap_phase(z) });
        let v = &zm.vector;
        for i in 0..n {
            for j in 0..n {
                number.write(i, j, number.read(i, j) + v[i].conj() * v[j] * ni);
                anomalous.write(i, j, anomalous.read(i, j) + v[i] * v[j] * mi);
            }
        }
    }
    let state = CovarianceState::from_moments(&number, &anomalous);
    Ok(BogoliubovState { state, number, anomalous, squeeze })
}

/// Relative residual ceiling for the Lyapunov route.
pub const LYAPUNOV_TOL: f64 = 1e-9;

/// Solves `A_q V + V A_qᵀ + D_q = 0` directly.
pub fn lyapunov_steady_state(system: &QuadraticSystem) -> Result<CovarianceState> {
    let a = build_drift(system).quadrature_real();
    let d = build_diffusion(system);
    let (v, residual) = lyapunov(&a, &d)?;
    if residual >= LYAPUNOV_TOL {
        return Err(Error::Residual { residual, tolerance: LYAPUNOV_TOL });
    }
    Ok(CovarianceState { v })
}

#[derive(Debug, Clone)]
pub struct ObservableSet {
    pub density: Vec<f64>,
    pub number: CMat,
    pub anomalous: CMat,
    pub total_photons: f64,
    pub purity: f64,
    pub symplectic_eigenvalues: Vec<f64>,
}

pub fn observables(state: &CovarianceState) -> Result<ObservableSet> {
    let nu = crate::entanglement::symplectic_eigenvalues(&state.v)?;
    if let Some(min) = nu.first() {
        if *min < 0.5 - 1e-8 {
            return Err(Error::Unphysical(format!("symplectic eigenvalue {min:.6e} < 1/2")));
        }
    }
    let number = state.number_matrix();
    let anomalous = state.anomalous_matrix();
    let density: Vec<f64> = (0..number.nrows()).map(|i| number.read(i, i).re).collect();
    let total_photons = density.iter().sum();
    let purity = nu.iter().map(|x| (0.5 / x.max(0.5)).ln()).sum::<f64>().exp();
    Ok(ObservableSet { density, number, anomalous, total_photons, purity, symplectic_eigenvalues: nu })
}

/// Adds `L′ = √κ (a_{N−1−0̄} − η a†_{N−1−1̄})` to a system holding the pairing jump.
pub fn mirrored_dissipator(system: &QuadraticSystem, jump: &JumpOperator) -> Result<QuadraticSystem> {
    let n = system.n_modes();
    if n % 2 != 0 {
        return Err(Error::InvalidParameter(format!("mirrored dissipator needs even N, got {n}")));
    }
    let ps = jump
        .pairing_sites()
        .ok_or_else(|| Error::InvalidParameter("jump is not a canonical pairing jump".into()))?;
    let h = &system.hamiltonian;
    let mut dev = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            dev = dev.max((h.read(i, j).abs() - h.read(n - 1 - i, n - 1 - j).abs()).abs());
        }
    }
    if dev > 1e-12 {
        return Err(Error::NotMirrorSymmetric(dev));
    }
    let mut u = vec![ZERO; n];
    let mut v = vec![ZERO; n];
    u[n - 1 - ps.site0] = jump.u[ps.site0];
    v[n - 1 - ps.site1] = -jump.v[ps.site1];
    let mirrored = if ps.eta == 0.0 { JumpOperator::new(u, vec![ZERO; n])? } else { JumpOperator::new(u, v)? };
    let mut jumps = system.jumps.clone();
    jumps.push(mirrored);
    system.with_jumps(jumps)
}

#[derive(Debug, Clone)]
pub struct ComparatorResult {
    pub system: QuadraticSystem,
    pub spectrum: SpectrumReport,
    pub observables: ObservableSet,
}

/// Two pairing jumps `√κ(a_{0̄} + η a†_{1̄})` and `√κ(a_{1̄} + η a†_{0̄})`.
pub fn squeezed_noise_comparator(h: &CMat, site0: usize, site1: usize, kappa: f64, eta: f64) -> Result<ComparatorResult> {
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!("eta = {eta} must lie in [0, 1)")));
    }
    let n = h.nrows();
    let jumps = vec![
        JumpOperator::pairing(n, site0, site1, kappa, eta)?,
        JumpOperator::pairing(n, site1, site0, kappa, eta)?,
    ];
    let system = QuadraticSystem::new(h.clone(), jumps)?;
    let spec = spectrum(&build_drift(&system));
    let state = lyapunov_steady_state(&system)?;
    let obs = observables(&state)?;
    Ok(ComparatorResult { system, spectrum: spec, observables: obs })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapRow {
    pub n: usize,
    pub gap: f64,
}

/// Dissipative gap of `family(N)` for each size.
pub fn dissipative_gap_vs_size<F>(sizes: &[usize], family: F) -> Result<Vec<GapRow>>
where
    F: Fn(usize) -> Result<QuadraticSystem>,
{
    sizes
        .iter()
        .map(|&n| {
            let rep = spectrum(&build_drift(&family(n)?));
            if !rep.stable {
                return Err(Error::Unstable { max_real_part: rep.max_real_part });
            }
            Ok(GapRow { n, gap: rep.dissipative_gap })
        })
        .collect()
}
