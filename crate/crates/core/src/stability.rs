//! Drift spectra, stability thresholds, golden-rule rates and exceptional points.

use faer::complex_native::c64;

use crate::error::{Error, Result};
use crate::gaussian::{build_drift, BdgMatrix, JumpOperator, QuadraticSystem};
use crate::lattice::EigenmodeSet;
use crate::linalg::{complex_eigen, cx, real_eigenvalues, CMat};

/// Relative stability tolerance: marginal when `max Re λ ≤ tol · ρ(A)`.
pub const STABILITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<c64>,
    pub max_real_part: f64,
    pub stable: bool,
    /// Slowest relaxation rate, `−max Re λ` for a stable drift and 0 otherwise.
    pub dissipative_gap: f64,
    /// Absolute tolerance used for the verdict.
    pub stability_tol: f64,
}

pub fn spectrum(a: &BdgMatrix) -> SpectrumReport {
    spectrum_with_tol(a, STABILITY_TOL)
}

pub fn spectrum_with_tol(a: &BdgMatrix, rel_tol: f64) -> SpectrumReport {
    let eigenvalues = real_eigenvalues(&a.quadrature_real());
    let max_real_part = eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let radius = eigenvalues.iter().map(|z| z.abs()).fold(0.0_f64, f64::max);
    let stability_tol = rel_tol * radius;
    let stable = max_real_part <= stability_tol;
    let dissipative_gap = if max_real_part < 0.0 { -max_real_part } else { 0.0 };
    SpectrumReport { eigenvalues, max_real_part, stable, dissipative_gap, stability_tol }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMethod {
    Bisection,
    ClosedForm,
    Wavefunction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityBoundary {
    pub parameter: String,
    pub critical_value: f64,
    pub bracket: (f64, f64),
    pub method: BoundaryMethod,
}

/// Bisection on the stability verdict of `family(η)`.
///
/// `bracket.0` must be stable and `bracket.1` unstable; stops when the bracket
/// width falls below `rel_tol · |η|` or after 200 halvings.
pub fn eta_critical_spectral<F>(family: F, bracket: (f64, f64), rel_tol: f64) -> Result<StabilityBoundary>
where
    F: Fn(f64) -> Result<QuadraticSystem>,
{
    let stable = |eta: f64| -> Result<bool> { Ok(spectrum(&build_drift(&family(eta)?)).stable) };
    let (mut lo, mut hi) = bracket;
    if !(stable(lo)? && !stable(hi)?) {
        return Err(Error::BracketNotStraddling { lo, hi });
    }
    for _ in 0..200 {
        if hi - lo <= rel_tol * hi.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if stable(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(StabilityBoundary {
        parameter: "eta".into(),
        critical_value: 0.5 * (lo + hi),
        bracket,
        method: BoundaryMethod::Bisection,
    })
}

/// Amplitudes below this are treated as nodes of a mode on a dissipator site.
pub const NODE_TOL: f64 = 1e-14;

/// `η_c = min_α |ψ_α[0̄] / ψ_α[1̄]|` over all eigenmodes.
pub fn eta_critical_wavefunction(modes: &EigenmodeSet, site0: usize, site1: usize) -> Result<StabilityBoundary> {
    let n = modes.n_modes();
    if site0 >= n || site1 >= n {
        return Err(Error::InvalidParameter(format!("sites ({site0}, {site1}) outside 0..{n}")));
    }
    if modes.sublattice[site0] != modes.sublattice[site1] {
        return Err(Error::MixedSublattice(site0, site1));
    }
    let eta_c = modes
        .all_modes()
        .iter()
        .filter(|(_, v)| v[site1].abs() >= NODE_TOL)
        .map(|(_, v)| v[site0].abs() / v[site1].abs())
        .fold(f64::INFINITY, f64::min);
    Ok(StabilityBoundary {
        parameter: "eta".into(),
        critical_value: eta_c,
        bracket: (0.0, f64::INFINITY),
        method: BoundaryMethod::Wavefunction,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FgrRate {
    pub energy: f64,
    pub rate: f64,
}

/// First-order relaxation rates `Γ_α = ½ Σ_L (|Σ_i u_i ψ_α[i]|² − |Σ_i v_i ψ̄_α[i]|²)`.
pub fn fgr_rates(modes: &EigenmodeSet, jumps: &[JumpOperator]) -> Vec<FgrRate> {
    modes
        .all_modes()
        .iter()
        .map(|(energy, psi)| {
            let rate = jumps
                .iter()
                .map(|l| {
                    let uu = psi.iter().zip(&l.u).fold(cx(0.0, 0.0), |acc, (p, u)| acc + *u * *p);
                    let vv = psi.iter().zip(&l.v).fold(cx(0.0, 0.0), |acc, (p, v)| acc + *v * p.conj());
                    0.5 * (uu.norm_sqr() - vv.norm_sqr())
                })
                .sum();
            FgrRate { energy: *energy, rate }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExceptionalPoint {
    pub parameter: f64,
    /// Distance between the coalescing eigenvalues.
    pub gap: f64,
    /// `1 − |⟨w_i, w_j⟩|²` for the unit eigenvectors; 0 at a true coalescence.
    pub gram: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpScanOptions {
    pub points: usize,
    /// Eigenvalue-gap threshold for a coalescence.
    pub gap_tol: f64,
    /// Gram-determinant threshold for eigenvector coalescence.
    pub gram_tol: f64,
}

impl Default for EpScanOptions {
    fn default() -> Self {
        Self { points: 400, gap_tol: 1e-6, gram_tol: 1e-6 }
    }
}

/// Closest eigenvalue pair, ignoring degenerate pairs with independent eigenvectors.
pub fn coalescence_gap(a: &CMat) -> (f64, f64) {
    let (vals, vecs) = complex_eigen(a);
    let n = vals.len();
    let mut best = (f64::INFINITY, 1.0);
    for i in 0..n {
        for j in i + 1..n {
            let d = (vals[i] - vals[j]).abs();
            let overlap = (0..n).fold(cx(0.0, 0.0), |acc, k| acc + vecs.read(k, i).conj() * vecs.read(k, j));
            let gram = 1.0 - overlap.norm_sqr();
            if gram > 1e-3 && d < 1e-9 {
                continue;
            }
            if d < best.0 {
                best = (d, gram);
            }
        }
    }
    best
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        c
    } else {
        d
    }
}

/// Locates eigenvalue coalescences of `family(p)` for `p ∈ [lo, hi]`.
///
/// Local minima of the closest-pair distance on a uniform grid are refined by
/// golden-section search and accepted when both the gap and the eigenvector
/// Gram determinant fall below tolerance.
pub fn ep_scan<F>(family: F, lo: f64, hi: f64, opts: EpScanOptions) -> Vec<ExceptionalPoint>
where
    F: Fn(f64) -> CMat,
{
    let n = opts.points.max(3);
    let grid: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let gaps: Vec<f64> = grid.iter().map(|&p| coalescence_gap(&family(p)).0).collect();
    let mut out: Vec<ExceptionalPoint> = Vec::new();
    for i in 1..n - 1 {
        if gaps[i] <= gaps[i - 1] && gaps[i] <= gaps[i + 1] {
            let p = golden_min(|x| coalescence_gap(&family(x)).0, grid[i - 1], grid[i + 1]);
            let (gap, gram) = coalescence_gap(&family(p));
            if gap < opts.gap_tol && gram < opts.gram_tol {
                if out.last().map_or(true, |e| (e.parameter - p).abs() > 1e-9) {
                    out.push(ExceptionalPoint { parameter: p, gap, gram });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dissipation {
    /// One jump `√(2κ)(a + η b†)`.
    Correlated,
    /// Separate jumps `√(2κ) a` and `η√(2κ) b†`.
    Uncorrelated,
}

/// Two-mode model `H = −δ a†a + δ b†b + J1(a†b + h.c.) + J2(a†b† + h.c.)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeParams {
    pub kappa: f64,
    pub j1: f64,
    pub j2: f64,
    pub delta: f64,
    pub dissipation: Dissipation,
}

pub fn two_mode_system(p: &TwoModeParams, eta: f64) -> Result<QuadraticSystem> {
    let s = (2.0 * p.kappa).sqrt();
    let z = cx(0.0, 0.0);
    let jumps = match p.dissipation {
        Dissipation::Correlated => vec![JumpOperator::new(vec![cx(s, 0.0), z], vec![z, cx(eta * s, 0.0)])?],
        Dissipation::Uncorrelated => {
            let mut out = vec![JumpOperator::new(vec![cx(s, 0.0), z], vec![z, z])?];
            if eta != 0.0 {
                out.push(JumpOperator::new(vec![z, z], vec![z, cx(eta * s, 0.0)])?);
            }
            out
        }
    };
    let h = crate::lattice::build_dimer(p.j1, p.delta).hamiltonian;
    let g = CMat::from_fn(2, 2, |i, j| if i != j { cx(p.j2, 0.0) } else { z });
    QuadraticSystem::new(h, jumps)?.with_anomalous(g)
}

/// Three-mode chain with either the pairing jump on `(a, c)` or uncorrelated
/// loss `√κ a` plus gain `η√κ c†`.
pub fn three_mode_system(j1: f64, j2: f64, kappa: f64, eta: f64, dissipation: Dissipation) -> Result<QuadraticSystem> {
    let lat = crate::lattice::build_three_mode(j1, j2);
    match dissipation {
        Dissipation::Correlated => lat.with_pairing(0, 2, kappa, eta),
        Dissipation::Uncorrelated => {
            let mut jumps = vec![JumpOperator::loss(3, 0, kappa)?];
            if eta != 0.0 {
                jumps.push(JumpOperator::gain(3, 2, eta * eta * kappa)?);
            }
            lat.system(jumps)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedFormModel {
    /// Detuned parametric amplifier with unequal amplitude damping `κ_a`, `κ_b`.
    Paramp { detuning: f64, lambda: f64, kappa_a: f64, kappa_b: f64 },
    /// Beam splitter `J1` plus pairing `J2` under the pairing jump.
    DimerBsPa { kappa: f64, j1: f64, j2: f64 },
    /// Detuned beam splitter under the pairing jump.
    DetunedBeamSplitter { kappa: f64, j: f64, delta: f64 },
    ThreeMode { j1: f64, j2: f64, kappa: f64, eta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClosedForm {
    Paramp {
        lhs: f64,
        rhs: f64,
        unstable: bool,
    },
    DimerBsPa {
        exceptional_point: f64,
        /// Threshold of the exact quadrature-block condition `η = √(J1² − J2²)/(2κ)`.
        instability: f64,
        /// The printed expression `(√(κ² + J1² − J2²) − κ)/√(J1² − J2²)`.
        instability_printed: f64,
        /// Below 1 the uncorrelated variant has no EP.
        uncorrelated_ep_parameter: f64,
    },
    DetunedBeamSplitter {
        /// Roots in `(0, 1)` of `η²/(η² − 1)² = δ²/4J²`.
        detuning_ep: Option<f64>,
        /// Root in `(0, 1)` of the first printed condition.
        printed_first_ep: Option<f64>,
    },
    ThreeMode {
        bright: f64,
        dark: f64,
        threshold: f64,
        /// Coefficients `[1, c2, c1, c0]` of the characteristic cubic of the `(x_a, p_b, x_c)` block.
        cubic: [f64; 4],
        roots: Vec<c64>,
    },
}

/// Root in `(0, 1)` of `η/(1 − η²) = a`, `a > 0`.
fn ratio_root(a: f64) -> Option<f64> {
    if a <= 0.0 || !a.is_finite() {
        return None;
    }
    Some((-1.0 + (1.0 + 4.0 * a * a).sqrt()) / (2.0 * a))
}

pub fn closed_form_thresholds(model: ClosedFormModel) -> Result<ClosedForm> {
    match model {
        ClosedFormModel::Paramp { detuning, lambda, kappa_a, kappa_b } => {
            let k = 0.5 * (kappa_a + kappa_b);
            let dk = 0.5 * (kappa_a - kappa_b);
            if k <= 0.0 {
                return Err(Error::Domain("mean damping must be positive".into()));
            }
            let lhs = dk * dk / (k * k);
            let rhs = (k * k + detuning * detuning - lambda * lambda) / (k * k + detuning * detuning);
            Ok(ClosedForm::Paramp { lhs, rhs, unstable: lhs >= rhs })
        }
        ClosedFormModel::DimerBsPa { kappa, j1, j2 } => {
            let d = j1 * j1 - j2 * j2;
            if d <= 0.0 {
                return Err(Error::Domain(format!("J1² − J2² = {d} must be positive")));
            }
            if kappa <= 0.0 {
                return Err(Error::Domain("kappa must be positive".into()));
            }
            Ok(ClosedForm::DimerBsPa {
                exceptional_point: 1.0 - (2.0 / kappa).sqrt() * d.powf(0.25),
                instability: d.sqrt() / (2.0 * kappa),
                instability_printed: ((kappa * kappa + d).sqrt() - kappa) / d.sqrt(),
                uncorrelated_ep_parameter: 2.0 / kappa * d.sqrt(),
            })
        }
        ClosedFormModel::DetunedBeamSplitter { kappa, j, delta } => {
            if j == 0.0 || kappa <= 0.0 {
                return Err(Error::Domain("J and kappa must be nonzero".into()));
            }
            let first = (16.0 * j.powi(4) + kappa.powi(4) + 32.0 * j * j * delta * delta
                + 8.0 * kappa * kappa * delta * delta
                + 16.0 * delta.powi(4)
                - 8.0 * j * j * kappa * kappa)
                / (64.0 * j * j * kappa * kappa);
            let second = delta * delta / (4.0 * j * j);
            Ok(ClosedForm::DetunedBeamSplitter {
                detuning_ep: ratio_root(second.sqrt()),
                printed_first_ep: if first > 0.0 { ratio_root(first.sqrt()) } else { None },
            })
        }
        ClosedFormModel::ThreeMode { j1, j2, kappa, eta } => {
            if j1 == 0.0 || j2 == 0.0 {
                return Err(Error::Domain("J1 and J2 must be nonzero".into()));
            }
            let h = 0.5 * kappa;
            let cubic = [1.0, h * (1.0 - eta * eta), j1 * j1 + j2 * j2, h * (j2 * j2 - eta * eta * j1 * j1)];
            let companion = crate::linalg::RMat::from_fn(3, 3, |i, k| match (i, k) {
                (0, _) => -cubic[k + 1],
                (1, 0) | (2, 1) => 1.0,
                _ => 0.0,
            });
            let bright = (j1 / j2).abs();
            let dark = (j2 / j1).abs();
            Ok(ClosedForm::ThreeMode {
                bright,
                dark,
                threshold: bright.min(dark),
                cubic,
                roots: real_eigenvalues(&companion),
            })
        }
    }
}
