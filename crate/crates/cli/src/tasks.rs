use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde_json::json;

use dissipair::entanglement::{
    angled_bipartitions, disorder_sweep, entanglement_entropy, spiral_order, DisorderTemplate,
};
use dissipair::gaussian::{build_drift, CovarianceState};
use dissipair::lattice::{
    build_dimer, build_hofstadter, build_ssh, build_three_mode, cylinder_eigenmodes, eigenpairs, EigenmodeSet,
    GeometryKind, Lattice, SshParams, DEGENERACY_TOL,
};
use dissipair::output::{
    default_frequency_grid, eta_opt_search, eta_sweep, frequency_grid, io_eta_critical, squeezing_spectrum, IoSetup,
};
use dissipair::stability::{
    ep_scan, eta_critical_spectral, eta_critical_wavefunction, spectrum, three_mode_system, two_mode_system,
    Dissipation, EpScanOptions, TwoModeParams,
};
use dissipair::steady::{
    bogoliubov_steady_state, lyapunov_steady_state, mirrored_dissipator, observables, squeezed_noise_comparator,
    BogoliubovOptions, DegeneracyPolicy, ObservableSet, SqueezeParameters,
};

use crate::config::{
    DisorderTask, DissipationKind, DissipatorConfig, EntanglementTask, EpTask, GapTask, Method, ModelConfig, RunConfig,
    SpectrumTask, StabilityTask, SteadyTask,
};
use crate::{Artifact, Command, Failure};

type Res<T> = Result<T, Failure>;

fn bad(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

/// Shortest round-trip form, switching to exponent notation for very small or large values.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn csv_artifact(name: &str, header: &[&str], rows: &[Vec<String>]) -> Res<Artifact> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| Failure::Io(e.to_string()))?;
    for r in rows {
        w.write_record(r).map_err(|e| Failure::Io(e.to_string()))?;
    }
    let content = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
    Ok(Artifact { name: name.into(), content })
}

fn json_artifact(name: &str, value: &serde_json::Value) -> Res<Artifact> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Io(e.to_string()))?;
    text.push('\n');
    Ok(Artifact { name: name.into(), content: text.into_bytes() })
}

fn task<T: DeserializeOwned>(cfg: &RunConfig, command: &str) -> Res<T> {
    let v = cfg.task.clone().ok_or_else(|| bad(format!("{command} needs a task block")))?;
    serde_json::from_value(v).map_err(|e| bad(format!("task block for {command}: {e}")))
}

fn task_or_default<T: DeserializeOwned + Default>(cfg: &RunConfig, command: &str) -> Res<T> {
    match &cfg.task {
        None => Ok(T::default()),
        Some(_) => task(cfg, command),
    }
}

fn model(cfg: &RunConfig) -> Res<&ModelConfig> {
    cfg.model.as_ref().ok_or_else(|| bad("missing model block"))
}

fn dissipator(cfg: &RunConfig) -> Res<&DissipatorConfig> {
    cfg.dissipator.as_ref().ok_or_else(|| bad("missing dissipator block"))
}

pub fn build_lattice(m: &ModelConfig, seed: u64) -> Res<Lattice> {
    Ok(match *m {
        ModelConfig::Ssh { n, alpha, j, convention, sigma } => {
            build_ssh(&SshParams { n, alpha, j, convention: convention.into(), sigma, seed })?
        }
        ModelConfig::Hofstadter { nx, ny, cylinder } => build_hofstadter(nx, ny, cylinder)?,
        ModelConfig::ThreeMode { j1, j2 } => build_three_mode(j1, j2),
        ModelConfig::Dimer { j, delta } => build_dimer(j, delta),
    })
}

fn modes_for(lattice: &Lattice) -> dissipair::Result<EigenmodeSet> {
    if lattice.geometry.kind == GeometryKind::SquareCylinder {
        cylinder_eigenmodes(lattice, DEGENERACY_TOL)
    } else {
        eigenpairs(&lattice.hamiltonian, DEGENERACY_TOL)
    }
}

fn check_eta_fields(d: &DissipatorConfig) -> Res<()> {
    if d.eta.is_some() && d.eta_ratio.is_some() {
        return Err(bad("eta and eta_ratio are mutually exclusive"));
    }
    for x in [d.eta, d.eta_ratio].into_iter().flatten() {
        if !(x >= 0.0 && x.is_finite()) {
            return Err(bad(format!("eta value {x} must be finite and non-negative")));
        }
    }
    if !(d.kappa > 0.0 && d.kappa.is_finite()) {
        return Err(bad(format!("kappa = {} must be positive", d.kappa)));
    }
    Ok(())
}

/// `η_c` from the edge-mode wavefunctions, or by spectral bisection for non-chiral lattices.
fn eta_critical(lattice: &Lattice, modes: Option<&EigenmodeSet>, s0: usize, s1: usize, kappa: f64) -> Res<f64> {
    if let Some(m) = modes {
        return Ok(eta_critical_wavefunction(m, s0, s1)?.critical_value);
    }
    Ok(eta_critical_spectral(|eta| lattice.with_pairing(s0, s1, kappa, eta), (0.0, 0.99999), 1e-12)?.critical_value)
}

struct Resolved {
    lattice: Lattice,
    modes: Option<EigenmodeSet>,
    site0: usize,
    site1: usize,
    eta: f64,
    eta_c: Option<f64>,
}

fn resolve(cfg: &RunConfig, seed: u64) -> Res<Resolved> {
    let d = dissipator(cfg)?;
    check_eta_fields(d)?;
    let lattice = build_lattice(model(cfg)?, seed)?;
    let site0 = d.site0.resolve(&lattice.geometry).map_err(bad)?;
    let site1 = d.site1.resolve(&lattice.geometry).map_err(bad)?;
    let modes = match modes_for(&lattice) {
        Ok(m) => Some(m),
        Err(dissipair::Error::NotChiral(..)) => None,
        Err(e) => return Err(e.into()),
    };
    let (eta, eta_c) = match (d.eta, d.eta_ratio) {
        (Some(eta), None) => (eta, None),
        (None, Some(r)) => {
            let c = eta_critical(&lattice, modes.as_ref(), site0, site1, d.kappa)?;
            (r * c, Some(c))
        }
        _ => return Err(bad("dissipator needs exactly one of eta or eta_ratio")),
    };
    Ok(Resolved { lattice, modes, site0, site1, eta, eta_c })
}

pub fn execute(command: Command, cfg: &RunConfig, seed: u64) -> Res<Vec<Artifact>> {
    match command {
        Command::Stability => stability(cfg),
        Command::Steady => steady(cfg, seed),
        Command::Entanglement => entanglement(cfg, seed),
        Command::Disorder => disorder(cfg, seed),
        Command::Spectrum => spectrum_cmd(cfg, seed),
        Command::Gap => gap(cfg, seed),
        Command::EpScan => ep(cfg),
    }
}

fn stability(cfg: &RunConfig) -> Res<Vec<Artifact>> {
    let t: StabilityTask = task(cfg, "stability")?;
    let ratios = t.ratio.values().map_err(bad)?;
    let etas = t.eta.values().map_err(bad)?;
    if ratios.iter().any(|r| !(*r > 0.0)) || etas.iter().any(|e| !(*e >= 0.0)) {
        return Err(bad("stability grid needs ratio > 0 and eta >= 0"));
    }
    if !(t.kappa > 0.0 && t.j_bar > 0.0) {
        return Err(bad("kappa and j_bar must be positive"));
    }
    let grid: Vec<(f64, f64)> = ratios.iter().flat_map(|&r| etas.iter().map(move |&e| (r, e))).collect();
    let mut out = Vec::new();
    for (kind, name) in
        [(Dissipation::Correlated, "stability_correlated.csv"), (Dissipation::Uncorrelated, "stability_uncorrelated.csv")]
    {
        let rows: Vec<Vec<String>> = grid
            .par_iter()
            .map(|&(r, eta)| {
                let j2 = t.j_bar / (1.0 + r * r).sqrt();
                let sys = three_mode_system(r * j2, j2, t.kappa, eta, kind)?;
                let rep = spectrum(&build_drift(&sys));
                Ok(vec![num(r), num(eta), num(rep.max_real_part), (rep.stable as u8).to_string()])
            })
            .collect::<dissipair::Result<_>>()?;
        out.push(csv_artifact(name, &["param1", "param2", "max_re_eig", "stable"], &rows)?);
    }
    Ok(out)
}

struct SteadyOutcome {
    obs: ObservableSet,
    method: &'static str,
    squeeze: Option<SqueezeParameters>,
}

fn solve_steady(r: &Resolved, d: &DissipatorConfig, method: Method) -> Res<SteadyOutcome> {
    if d.comparator {
        let res = squeezed_noise_comparator(&r.lattice.hamiltonian, r.site0, r.site1, d.kappa, r.eta)?;
        return Ok(SteadyOutcome { obs: res.observables, method: "lyapunov", squeeze: None });
    }
    let sys = r.lattice.with_pairing(r.site0, r.site1, d.kappa, r.eta)?;
    let use_bogoliubov = match method {
        Method::Auto => !d.mirrored && r.modes.is_some(),
        Method::Bogoliubov => {
            if d.mirrored || r.modes.is_none() {
                return Err(bad("the Bogoliubov route needs a chiral lattice and a single pairing jump"));
            }
            true
        }
        Method::Lyapunov => false,
    };
    if use_bogoliubov {
        let modes = r.modes.as_ref().expect("checked above");
        let policy = if modes.symmetry_resolved { DegeneracyPolicy::SymmetryResolved } else { DegeneracyPolicy::Strict };
        let opts = BogoliubovOptions { policy, ..Default::default() };
        let st = bogoliubov_steady_state(modes, &sys.jumps[0], opts)?;
        return Ok(SteadyOutcome { obs: observables(&st.state)?, method: "bogoliubov", squeeze: Some(st.squeeze) });
    }
    let sys = if d.mirrored { mirrored_dissipator(&sys, &sys.jumps[0].clone())? } else { sys };
    let state = lyapunov_steady_state(&sys)?;
    Ok(SteadyOutcome { obs: observables(&state)?, method: "lyapunov", squeeze: None })
}

fn correlation_rows(obs: &ObservableSet, order: &[usize]) -> Vec<Vec<String>> {
    let mut rows = Vec::with_capacity(order.len() * order.len());
    for (a, &i) in order.iter().enumerate() {
        for (b, &j) in order.iter().enumerate() {
            let n = obs.number.read(i, j);
            let m = obs.anomalous.read(i, j);
            rows.push(vec![
                a.to_string(),
                b.to_string(),
                i.to_string(),
                j.to_string(),
                num(n.re),
                num(n.im),
                num(m.re),
                num(m.im),
            ]);
        }
    }
    rows
}

fn steady(cfg: &RunConfig, seed: u64) -> Res<Vec<Artifact>> {
    let t: SteadyTask = task_or_default(cfg, "steady")?;
    let spiral = cfg.output.as_ref().map(|o| o.spiral).unwrap_or(false);
    let r = resolve(cfg, seed)?;
    let d = dissipator(cfg)?;
    let spiral_sites = if spiral { Some(spiral_order(&r.lattice.geometry).map_err(|e| bad(e.to_string()))?) } else { None };
    let out = solve_steady(&r, d, t.method)?;
    let g = &r.lattice.geometry;

    let dens: Vec<Vec<String>> = out
        .obs
        .density
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let (x, y) = g.coords(i);
            vec![i.to_string(), x.to_string(), y.to_string(), num(n)]
        })
        .collect();
    let mut arts = vec![csv_artifact("densities.csv", &["site_index", "x", "y", "density"], &dens)?];

    let n = r.lattice.n_sites();
    let corr: Vec<Vec<String>> = correlation_rows(&out.obs, &(0..n).collect::<Vec<_>>())
        .into_iter()
        .map(|row| row[2..].to_vec())
        .collect();
    arts.push(csv_artifact("correlations.csv", &["i", "j", "re_n", "im_n", "re_m", "im_m"], &corr)?);
    if let Some(order) = spiral_sites {
        let rows = correlation_rows(&out.obs, &order);
        arts.push(csv_artifact(
            "correlations_spiral.csv",
            &["row", "col", "i", "j", "re_n", "im_n", "re_m", "im_m"],
            &rows,
        )?);
    }

    let nu = &out.obs.symplectic_eigenvalues;
    let squeeze = out.squeeze.as_ref().map(|s| {
        json!({
            "pairs": s.pairs.iter().map(|p| json!({"energy": p.energy, "r": p.r, "phi": p.phi})).collect::<Vec<_>>(),
            "zero_modes": s.zero_modes.iter().map(|z| json!({"r": z.r, "phi": z.phi})).collect::<Vec<_>>(),
        })
    });
    let summary = json!({
        "eta": r.eta,
        "eta_c": r.eta_c,
        "kappa": d.kappa,
        "method": out.method,
        "purity": out.obs.purity,
        "site0": r.site0,
        "site1": r.site1,
        "squeeze": squeeze,
        "symplectic_max": nu.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        "symplectic_min": nu.iter().cloned().fold(f64::INFINITY, f64::min),
        "total_photons": out.obs.total_photons,
    });
    arts.push(json_artifact("summary.json", &summary)?);
    Ok(arts)
}

fn pairing_state(r: &Resolved, kappa: f64) -> Res<CovarianceState> {
    let sys = r.lattice.with_pairing(r.site0, r.site1, kappa, r.eta)?;
    match &r.modes {
        Some(modes) => {
            let policy =
                if modes.symmetry_resolved { DegeneracyPolicy::SymmetryResolved } else { DegeneracyPolicy::Strict };
            let opts = BogoliubovOptions { policy, ..Default::default() };
            Ok(bogoliubov_steady_state(modes, &sys.jumps[0], opts)?.state)
        }
        None => Ok(lyapunov_steady_state(&sys)?),
    }
}

fn angle_entropies(r: &Resolved, kappa: f64, angles: usize) -> Res<Vec<(f64, usize, f64)>> {
    let state = pairing_state(r, kappa)?;
    let cuts = angled_bipartitions(&r.lattice.geometry, angles)?;
    cuts.par_iter()
        .map(|c| Ok((c.angle.unwrap_or(f64::NAN), c.sites.len(), entanglement_entropy(&state, c)?)))
        .collect()
}

fn entanglement(cfg: &RunConfig, seed: u64) -> Res<Vec<Artifact>> {
    let t: EntanglementTask = task(cfg, "entanglement")?;
    if t.angles == 0 {
        return Err(bad("angles must be positive"));
    }
    let d = dissipator(cfg)?;
    let cylinder = match model(cfg)? {
        ModelConfig::Hofstadter { nx, ny, cylinder } if nx == ny => *cylinder,
        _ => return Err(bad("entanglement needs a square hofstadter model")),
    };
    if !t.sizes.is_empty() && t.placement.is_none() {
        return Err(bad("sizes need a placement block"));
    }
    let r = resolve(cfg, seed)?;
    let rows: Vec<Vec<String>> = angle_entropies(&r, d.kappa, t.angles)?
        .into_iter()
        .map(|(a, len, s)| vec![num(a), len.to_string(), num(s)])
        .collect();
    let mut arts = vec![csv_artifact("entropy_vs_angle.csv", &["angle", "subsystem_size", "entropy"], &rows)?];

    if let Some(p) = t.placement {
        let mut size_rows = Vec::new();
        for &n in &t.sizes {
            let at = |c: [i64; 2]| -> Res<[usize; 2]> {
                let m = n as i64 / 2 + c[0];
                if m < 0 || m >= n as i64 || c[1] < 0 || c[1] >= n as i64 {
                    return Err(bad(format!("placement {c:?} falls outside the {n}x{n} lattice")));
                }
                Ok([m as usize, c[1] as usize])
            };
            let mut sized = cfg.clone();
            sized.model = Some(ModelConfig::Hofstadter { nx: n, ny: n, cylinder });
            let mut dd = d.clone();
            dd.site0 = crate::config::Site::Coords(at(p.site0)?);
            dd.site1 = crate::config::Site::Coords(at(p.site1)?);
            sized.dissipator = Some(dd);
            let rs = resolve(&sized, seed)?;
            let ent: Vec<f64> = angle_entropies(&rs, d.kappa, t.angles)?.into_iter().map(|x| x.2).collect();
            let mean = ent.iter().sum::<f64>() / ent.len() as f64;
            let min = ent.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = ent.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            size_rows.push(vec![
                n.to_string(),
                (4 * (n - 1)).to_string(),
                num(rs.eta),
                num(mean),
                num(min),
                num(max),
            ]);
        }
        arts.push(csv_artifact(
            "entropy_vs_size.csv",
            &["n", "boundary_sites", "eta", "mean_entropy", "min_entropy", "max_entropy"],
            &size_rows,
        )?);
    }
    Ok(arts)
}

fn disorder(cfg: &RunConfig, seed: u64) -> Res<Vec<Artifact>> {
    let t: DisorderTask = task(cfg, "disorder")?;
    let d = dissipator(cfg)?;
    check_eta_fields(d)?;
    let (n, j, convention) = match model(cfg)? {
        ModelConfig::Ssh { n, j, convention, .. } => (*n, *j, (*convention).into()),
        _ => return Err(bad("disorder needs an ssh model")),
    };
    let eta_ratio = d.eta_ratio.ok_or_else(|| bad("disorder needs dissipator.eta_ratio"))?;
    let geometry = dissipair::lattice::LatticeGeometry::chain(n);
    let site0 = d.site0.resolve(&geometry).map_err(bad)?;
    let site1 = d.site1.resolve(&geometry).map_err(bad)?;
    if t.alphas.is_empty() || t.sigmas.is_empty() || t.realizations == 0 {
        return Err(bad("disorder needs non-empty alphas, sigmas and realizations > 0"));
    }
    let template = DisorderTemplate { n, site0, site1, eta_ratio, j, convention };
    let res = disorder_sweep(&template, &t.alphas, &t.sigmas, t.realizations, seed)?;
    let rows: Vec<Vec<String>> = res
        .points
        .iter()
        .map(|p| {
            vec![
                num(p.alpha),
                num(p.sigma),
                num(p.mean),
                num(p.stderr),
                p.used.to_string(),
                p.skipped.to_string(),
                (p.flagged as u8).to_string(),
            ]
        })
        .collect();
    Ok(vec![csv_artifact(
        "disorder.csv",
        &["alpha", "sigma", "mean_s", "stderr", "used", "skipped", "flagged"],
        &rows,
    )?])
}

fn spectrum_cmd(cfg: &RunConfig, seed: u64) -> Res<Vec<Artifact>> {
    let t: SpectrumTask = task(cfg, "spectrum")?;
    let d = dissipator(cfg)?;
    if d.eta.is_some() && d.eta_ratio.is_some() {
        return Err(bad("eta and eta_ratio are mutually exclusive"));
    }
    if !(t.g > 0.0 && t.kappa > 0.0 && t.gamma > 0.0) {
        return Err(bad("g, kappa and gamma must be positive"));
    }
    let lattice = build_lattice(model(cfg)?, seed)?;
    let site0 = d.site0.resolve(&lattice.geometry).map_err(bad)?;
    let site1 = d.site1.resolve(&lattice.geometry).map_err(bad)?;
    if t.waveguide_site >= lattice.n_sites() {
        return Err(bad("waveguide_site lies outside the lattice"));
    }
    let omegas = match t.omega {
        Some(o) if o.points >= 2 && o.half_width > 0.0 => frequency_grid(o.half_width, o.points),
        Some(o) => return Err(bad(format!("invalid omega grid {o:?}"))),
        None => default_frequency_grid(),
    };
    let sweep = t.eta_sweep.map(|r| r.values()).transpose().map_err(bad)?;
    let setup = IoSetup {
        hamiltonian: lattice.hamiltonian.clone(),
        site0,
        site1,
        eta: 0.0,
        g: t.g,
        kappa: t.kappa,
        gamma: t.gamma,
        waveguide_site: t.waveguide_site,
    };
    let eta_c = io_eta_critical(&setup, (0.0, 0.99999), 1e-10)?;
    let eta = match (d.eta, d.eta_ratio) {
        (Some(e), None) => e,
        (None, Some(r)) => r * eta_c,
        _ => eta_opt_search(&setup, (0.0, eta_c * (1.0 - 1e-6)))?.eta_opt,
    };
    let res = squeezing_spectrum(&setup.with_eta(eta), &omegas)?;
    let rows: Vec<Vec<String>> =
        (0..res.omega.len()).map(|i| vec![num(res.omega[i]), num(res.p[i]), num(res.theta[i])]).collect();
    let mut arts = vec![csv_artifact("spectrum.csv", &["omega", "P", "theta_opt"], &rows)?];
    if let Some(etas) = sweep {
        let rows: Vec<Vec<String>> =
            eta_sweep(&setup, &etas)?.into_iter().map(|(e, p)| vec![num(e), num(p)]).collect();
        arts.push(csv_artifact("eta_sweep.csv", &["eta", "P0"], &rows)?);
    }
    let p0 = setup.with_eta(eta).assemble()?.squeezing_at(0.0).0;
    arts.push(json_artifact("spectrum_summary.json", &json!({"eta": eta, "eta_c": eta_c, "p0": p0}))?);
    Ok(arts)
}

fn gap(cfg: &RunConfig, seed: u64) -> Res<Vec<Artifact>> {
    let t: GapTask = task(cfg, "gap")?;
    if t.sizes.is_empty() {
        return Err(bad("gap needs at least one size"));
    }
    let base = match model(cfg)? {
        ModelConfig::Ssh { .. } => model(cfg)?.clone(),
        _ => return Err(bad("gap needs an ssh model")),
    };
    check_eta_fields(dissipator(cfg)?)?;
    let mut rows = Vec::new();
    for &n in &t.sizes {
        let mut sized = cfg.clone();
        if let ModelConfig::Ssh { alpha, j, convention, sigma, .. } = base {
            sized.model = Some(ModelConfig::Ssh { n, alpha, j, convention, sigma });
        }
        let r = resolve(&sized, seed)?;
        let kappa = dissipator(cfg)?.kappa;
        let sys = r.lattice.with_pairing(r.site0, r.site1, kappa, r.eta)?;
        let mirrored = mirrored_dissipator(&sys, &sys.jumps[0].clone())?;
        for (flag, s) in [(0u8, &sys), (1u8, &mirrored)] {
            let rep = spectrum(&build_drift(s));
            if !rep.stable {
                return Err(dissipair::Error::Unstable { max_real_part: rep.max_real_part }.into());
            }
            rows.push(vec![n.to_string(), flag.to_string(), num(r.eta), num(rep.dissipative_gap)]);
        }
    }
    Ok(vec![csv_artifact("gap.csv", &["n", "mirrored", "eta", "gap"], &rows)?])
}

fn ep(cfg: &RunConfig) -> Res<Vec<Artifact>> {
    let t: EpTask = task(cfg, "ep-scan")?;
    if t.points < 3 {
        return Err(bad("ep-scan needs at least 3 points"));
    }
    let opts = EpScanOptions { points: t.points, ..Default::default() };
    let mut sets = Vec::new();
    for s in &t.sets {
        if !(s.kappa > 0.0 && s.eta_min >= 0.0 && s.eta_max > s.eta_min) {
            return Err(bad(format!("invalid ep-scan set {s:?}")));
        }
        let dissipation = match s.dissipation {
            DissipationKind::Correlated => Dissipation::Correlated,
            DissipationKind::Uncorrelated => Dissipation::Uncorrelated,
        };
        let p = TwoModeParams { kappa: s.kappa, j1: s.j1, j2: s.j2, delta: s.delta, dissipation };
        two_mode_system(&p, s.eta_min)?;
        let eps = ep_scan(|eta| build_drift(&two_mode_system(&p, eta).expect("validated")).matrix, s.eta_min, s.eta_max, opts);
        sets.push(json!({
            "delta": s.delta,
            "dissipation": s.dissipation,
            "exceptional_points": eps.iter().map(|e| json!({"eta": e.parameter, "gap": e.gap, "gram": e.gram})).collect::<Vec<_>>(),
            "j1": s.j1,
            "j2": s.j2,
            "kappa": s.kappa,
        }));
    }
    Ok(vec![json_artifact("ep.json", &json!({ "sets": sets }))?])
}
