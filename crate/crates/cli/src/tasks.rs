//! One function per task: compute, then describe the results as artifacts.

use qpspec::green::{green_avg_many, GreenMethod};
use qpspec::lyapunov::{classify_profile, LyapunovProfile};
use qpspec::rotation::rotation_numbers;
use qpspec::spectrum::{growth_test, linspace, GrowthCriteria, IdsMethod, IdsTable};
use qpspec::{
    acceleration, derivative_identity_residual, green_from_ids, homogeneity_profile, ids_counting, ids_rotation,
    lyapunov, maximal_function, normal_boundary_re_g, spectrum_approx, thouless, truncated_eigenvalues, Complex64,
    Frequency, PotentialSpec,
};
use serde::Serialize;

use crate::artifacts::{Artifact, Csv};
use crate::config::{Params, Task};
use crate::error::Result;
use crate::probe::theta_lipschitz_probe;

#[derive(Debug, Default)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub warnings: Vec<String>,
    pub health_failures: Vec<String>,
}

pub fn execute(task: Task, pot: &PotentialSpec, alpha: &Frequency, p: &Params) -> Result<Outcome> {
    match task {
        Task::Lyapunov => lyapunov_task(pot, alpha, p),
        Task::Acceleration => acceleration_task(pot, alpha, p),
        Task::Rotation => rotation_task(pot, alpha, p),
        Task::Ids => ids_task(pot, alpha, p),
        Task::Spectrum => spectrum_task(pot, alpha, p),
        Task::Green => green_task(pot, alpha, p),
        Task::Boundary => boundary_task(pot, alpha, p),
        Task::Maximal => maximal_task(pot, alpha, p),
        Task::RegimeTable => regime_table(pot, alpha, p),
        Task::Identities => identities(pot, alpha, p),
        Task::ThetaLipschitz => theta_task(pot, alpha, p),
    }
}

fn grid(p: &Params) -> Vec<f64> {
    p.e_grid.as_ref().map(|g| g.values()).unwrap_or_default()
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn lyapunov_task(pot: &PotentialSpec, alpha: &Frequency, p: &Params) -> Result<Outcome> {
    let (n, m, eps) = (p.n.unwrap(), p.m.unwrap(), p.eps_imag.unwrap());
    let mut csv = Csv::new(&["E", "eps", "L"]);
    for e in grid(p) {
        let l = lyapunov(pot, alpha, c(e), eps, n, m)?;
        csv.row(vec![e.into(), eps.into(), l.into()]);
    }
    Ok(Outcome { artifacts: vec![csv.finish("lyapunov.csv")], ..Default::default() })
}

fn profile_rows(csv: &mut Csv, prof: &LyapunovProfile) {
    for (eps, l) in prof.ascending() {
        csv.row(vec![prof.e.re.into(), eps.into(), l.into()]);
    }
}

fn acceleration_task(pot: &PotentialSpec, alpha: &Frequency, p: &Params) -> Result<Outcome> {
    let (n, m) = (p.n.unwrap(), p.m.unwrap());
    let schedule = p.schedule.as_ref().unwrap();
    let mut out = Outcome::default();
    let mut rows = Csv::new(&["E", "eps", "L"]);
    let mut summary = Csv::new(&["E", "L", "slope", "omega", "omega_residual", "convexity_defect", "healthy"]);
    let mut profiles = Vec::new();
    for e in grid(p) {
        let prof = acceleration(pot, alpha, e, schedule, n, m)?;
        profile_rows(&mut rows, &prof);
        summary.row(vec![
            e.into(),
            prof.l_zero.into(),
            prof.slope.into(),
            prof.omega_int.into(),
            prof.omega_residual.into(),
            prof.convexity_defect.into(),
            prof.healthy.into(),
        ]);
        if !prof.healthy {
            out.health_failures.push(format!("E={e}: convexity defect {} exceeds tolerance", prof.convexity_defect));
        }
        profiles.push(prof);
    }
    out.artifacts = vec![
        rows.finish("profiles.csv"),
        summary.finish("acceleration.csv"),
        Artifact::json("profiles.json", &profiles)?,
    ];
    Ok(out)
}

fn rotation_task(pot: &PotentialSpec, alpha: &Frequency, p: &Params) -> Result<Outcome> {
    let e_grid = grid(p);
    let results = rotation_numbers(pot, alpha, &e_grid, p.n.unwrap(), p.m.unwrap())?;
    let mut out = Outcome::default();
    let mut csv = Csv::new(&["E", "rho", "N_from_rho", "spread"]);
    for (e, r) in e_grid.iter().zip(&results) {
        csv.row(vec![(*e).into(), r.rho.into(), (1.0 - 2.0 * r.rho).into(), r.spread.into()]);
        if !r.reliable() {
            out.warnings.push(format!("E={e}: spread {} above 10/n", r.spread));
        }
    }
    out.artifacts.push(csv.finish("rotation.csv"));
    Ok(out)
}

fn compute_ids(pot: &PotentialSpec, alpha: &Frequency, e_grid: &[f64], p: &Params) -> Result<IdsTable> {
    let (n, m) = (p.n.unwrap(), p.m.unwrap());
    Ok(match p.ids_method.unwrap_or(IdsMethod::Counting) {
        IdsMethod::Counting => ids_counting(pot, alpha, e_grid, n, m)?,
        IdsMethod::Rotation => ids_rotation(pot, alpha, e_grid, n, m.max(16))?,
    })
}

fn ids_csv(ids: &IdsTable, name: &str) -> Artifact {
    let mut csv = Csv::new(&["E", "N"]);
    for (e, n) in ids.e_grid.iter().zip(&ids.n_values) {
        csv.row(vec![(*e).into(), (*n).into()]);
    }
    csv.finish(name)
}

fn ids_task(pot: &PotentialSpec, alpha: &Frequency, p: &Params) -> Result<Outcome> {
    let ids = compute_ids(pot, alpha, &grid(p), p)?;
    Ok(Outcome { artifacts: vec![ids_csv(&ids, "ids.csv")], ..Default::default() })
}

#[derive(Serialize)]
struct HomogeneitySummary {
    passing_prefix: Option<f64>,
    measure: f64,
    intervals: usize,
}

fn spectrum_task(pot: &PotentialSpec, alpha: &Frequency, p: &Params) -> Result<Outcome> {
    let s = spectrum_approx(pot, alpha, p.n.unwrap(), p.m.unwrap(), p.margin.unwrap())?;
    let mut out = Outcome::default();
    let sigmas: Vec<f64> = p.sigma_grid.clone().unwrap();
    let (lo, hi) = s.bounds().unwrap_or((0.0, 0.0));
    // σ at or beyond half the span has no meaning for the profile
    let usable: Vec<f64> = sigmas.iter().copied().filter(|&x| x < (hi - lo) / 2.0).collect();
    if usable.len() < sigmas.len() {
        out.warnings.push(format!("{} σ values dropped: not below half the span", sigmas.len() - usable.len()));
    }
    let h = homogeneity_profile(&s, &usable, p.e_samples.unwrap())?;
    let mut csv = Csv::new(&["sigma", "min_ratio", "argmin", "passing"]);
    for i in 0..h.sigma_grid.len() {
        csv.row(vec![h.sigma_grid[i].into(), h.min_ratio[i].into(), h.argmin[i].into(), h.passing[i].into()]);
    }
    out.artifacts.push(Artifact::json("spectrum.json", &s)?);
    out.artifacts.push(csv.finish("homogeneity.csv"));
    out.artifacts.push(Artifact::json(
        "homogeneity.json",
        &HomogeneitySummary { passing_prefix: h.passing_prefix, measure: s.measure(), intervals: s.intervals.len() },
    )?);
    if p.growth_check == Some(true) {
        let e_grid = grid(p);
        let verdicts = growth_test(pot, alpha, &e_grid, p.n.unwrap().min(1000), 256, GrowthCriteria::default())?;
        let mut csv = Csv::new(&["E", "in_union", "growth_off_spectrum", "mean_rate", "min_rate", "min_angle"]);
        let mut disagree = 0;
        for v in &verdicts {
            let inside = s.contains(v.e);
            if inside == v.off_spectrum {
                disagree += 1;
            }
            csv.row(vec![
                v.e.into(),
                inside.into(),
                v.off_spectrum.into(),
                v.mean.into(),
                v.min.into(),
                v.min_angle.into(),
            ]);
        }
        if disagree > 0 {
            out.warnings.push(format!("growth test disagrees with the eigenvalue union at {disagree} grid energies"));
        }
        out.artifacts.push(csv.finish("growth_check.csv"));
    }
    Ok(out)
}

fn green_task(pot: &PotentialSpec, alpha: &Frequency, p: &Params) -> Result<Outcome> {
    let zs: Vec<Complex64> = match &p.points {
        Some(pts) => pts.iter().map(|z| Complex64::new(z[0], z[1])).collect(),
        None => grid(p).into_iter().map(|e| Complex64::new(e, p.eps_imag.unwrap())).collect(),
    };
    let method = p.green_method.unwrap();
    let values = match method {
        GreenMethod::BorelOfIds => {
            let (lo, hi) = pot.containment();
            let pad = 0.05 * (hi - lo);
            let ids = ids_counting(pot, alpha, &linspace(lo - pad, hi + pad, 2001), p.n.unwrap(), p.m.unwrap())?;
            zs.iter().map(|&z| green_from_ids(&ids, z)).collect::<qpspec::Result<Vec<_>>>()?
        }
        _ => green_avg_many(pot, alpha, &zs, p.window, p.m.unwrap())?,
    };
    let mut csv = Csv::new(&["re_z", "im_z", "re_G", "im_G", "method"]);
    let mut out = Outcome::default();
    for g in &values {
        let label = serde_json::to_value(g.method)?.as_str().unwrap_or_default().to_string();
        csv.row(vec![g.z.re.into(), g.z.im.into(), g.value.re.into(), g.value.im.into(), label.into()]);
        let positive = g.value.im > 0.0;
        if g.z.im > 0.0 && !positive {
            out.health_failures.push(format!("z={}: Im G = {} violates the Herglotz property", g.z, g.value.im));
        }
    }
    out.artifacts.push(csv.finish("green.csv"));
    Ok(out)
}

fn boundary_task(pot: &PotentialSpec, alpha: &Frequency, p: &Params) -> Result<Outcome> {
    let mut csv = Csv::new(&["E", "ReG_boundary", "residual", "flag"]);
    let mut out = Outcome::default();
    for e in grid(p) {
        let b = normal_boundary_re_g(pot, alpha, e, p.schedule.as_deref(), p.m.unwrap())?;
        let flag = if b.nonconvergent { "nonconvergent" } else { "ok" };
        csv.row(vec![e.into(), b.value.into(), b.residual.into(), flag.into()]);
    }
    out.artifacts.push(csv.finish("boundary.csv"));
    Ok(out)
}

#[derive(Serialize)]
struct MaximalSummary {
    d_constant: f64,
    chebyshev_bound: f64,
    y_min: f64,
    max_gstar: f64,
}

fn maximal_task(pot: &PotentialSpec, alpha: &Frequency, p: &Params) -> Result<Outcome> {
    let prof =
        maximal_function(pot, alpha, &grid(p), p.cone.as_ref().unwrap(), p.sigma_grid.as_ref().unwrap(), p.m.unwrap())?;
    let mut g = Csv::new(&["E", "Gstar"]);
    for (e, v) in prof.e_grid.iter().zip(&prof.gstar) {
        g.row(vec![(*e).into(), (*v).into()]);
    }
    let mut w = Csv::new(&["sigma", "weak_type_stat"]);
    for (s, v) in prof.sigma_grid.iter().zip(&prof.weak_type_stat) {
        w.row(vec![(*s).into(), (*v).into()]);
    }
    let mut out = Outcome::default();
    if prof.d_constant > prof.chebyshev_bound * (1.0 + 1e-12) {
        out.health_failures.push("weak-type statistic exceeds the Chebyshev bound".to_string());
    }
    out.artifacts = vec![
        g.finish("maximal.csv"),
        w.finish("weak_type.csv"),
        Artifact::json(
            "maximal.json",
            &MaximalSummary {
                d_constant: prof.d_constant,
                chebyshev_bound: prof.chebyshev_bound,
                y_min: prof.y_min,
                max_gstar: prof.gstar.iter().copied().fold(0.0, f64::max),
            },
        )?,
    ];
    Ok(out)
}

pub const QUANTILES: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

/// Eigenvalues of the truncation at phase 0 at the given quantiles.
pub fn quantile_energies(pot: &PotentialSpec, alpha: &Frequency, truncation: usize) -> Result<Vec<f64>> {
    let ev = truncated_eigenvalues(pot, alpha, 0.0, truncation)?;
    Ok(QUANTILES.iter().map(|q| ev[(q * (ev.len() - 1) as f64).round() as usize]).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct RegimeRow {
    pub lambda: f64,
    pub e: f64,
    pub l: f64,
    pub omega: Option<i64>,
    pub omega_residual: f64,
    pub regime: String,
    pub healthy: bool,
}

pub fn regime_rows(pot: &PotentialSpec, alpha: &Frequency, p: &Params) -> Result<Vec<RegimeRow>> {
    let mut rows = Vec::new();
    for &lambda in p.lambdas.as_ref().unwrap() {
        let model = PotentialSpec { lambda, ..pot.clone() };
        for e in quantile_energies(&model, alpha, p.truncation.unwrap())? {
            let prof = acceleration(&model, alpha, e, p.schedule.as_ref().unwrap(), p.n.unwrap(), p.m.unwrap())?;
            let regime = classify_profile(&prof, p.regime_tol.unwrap())
                .map(|r| r.as_str().to_string())
                .unwrap_or_else(|_| "unclassifiable".to_string());
            rows.push(RegimeRow {
                lambda,
                e,
                l: prof.l_zero,
                omega: prof.omega_int,
                omega_residual: prof.omega_residual,
                regime,
                healthy: prof.healthy,
            });
        }
    }
    Ok(rows)
}

fn regime_table(pot: &PotentialSpec, alpha: &Frequency, p: &Params) -> Result<Outcome> {
    let rows = regime_rows(pot, alpha, p)?;
    let mut csv = Csv::new(&["lambda", "E_sample", "L", "omega", "omega_residual", "regime"]);
    let mut out = Outcome::default();
    for r in &rows {
        csv.row(vec![
            r.lambda.into(),
            r.e.into(),
            r.l.into(),
            r.omega.into(),
            r.omega_residual.into(),
            r.regime.clone().into(),
        ]);
        if !r.healthy {
            out.health_failures.push(format!("λ={} E={}: nonconvex profile", r.lambda, r.e));
        }
    }
    out.artifacts.push(csv.finish("regime_table.csv"));
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityRow {
    pub identity: &'static str,
    pub points: usize,
    pub max_residual: f64,
    pub worst_at: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn worst(label: &'static str, tolerance: f64, pairs: &[(f64, f64)]) -> IdentityRow {
    let (worst_at, max_residual) = pairs.iter().copied().fold((f64::NAN, 0.0), |b, c| if c.1 >= b.1 { c } else { b });
    IdentityRow {
        identity: label,
        points: pairs.len(),
        max_residual,
        worst_at,
        tolerance,
        pass: max_residual <= tolerance,
    }
}

pub const DERIVATIVE_PHASES: usize = 256;

/// Residuals of `N = 1 - 2ρ`, the Thouless formula and `∂L/∂E = -Re G`.
pub fn identity_rows(pot: &PotentialSpec, alpha: &Frequency, p: &Params) -> Result<Vec<IdentityRow>> {
    let (n, m) = (p.n.unwrap(), p.m.unwrap());
    let e_grid = grid(p);
    let counted = ids_counting(pot, alpha, &e_grid, n, m)?;
    let rot = rotation_numbers(pot, alpha, &e_grid, n.max(1000), m.max(16))?;
    let relation: Vec<(f64, f64)> = e_grid
        .iter()
        .zip(&counted.n_values)
        .zip(&rot)
        .map(|((&e, &nc), r)| (e, (nc - (1.0 - 2.0 * r.rho)).abs()))
        .collect();

    let (lo, hi) = pot.containment();
    let pad = 0.05 * (hi - lo);
    let fine = ids_counting(pot, alpha, &linspace(lo - pad, hi + pad, 2001), n, m.min(32))?;
    let samples = linspace(lo - 0.5, hi + 0.5, 20);
    let mut thouless_pairs = Vec::with_capacity(samples.len());
    for &e in &samples {
        let t = thouless(&fine, c(e))?;
        let l = lyapunov(pot, alpha, c(e), 0.0, n.max(100), m.next_power_of_two().max(16))?;
        thouless_pairs.push((e, (t - l).abs()));
    }

    let eps = p.eps_imag.unwrap();
    let de = p.de.unwrap();
    // the phase integrand sharpens near band edges of hyperbolic models
    let dm = m.next_power_of_two().max(DERIVATIVE_PHASES);
    let mut derivative = Vec::with_capacity(samples.len());
    for &e in &samples {
        let r = derivative_identity_residual(pot, alpha, e, eps, de, n.max(100), dm)?;
        derivative.push((e, r));
    }
    Ok(vec![
        worst("N=1-2rho", 0.02, &relation),
        worst("thouless", 0.02, &thouless_pairs),
        worst("dL/dE=-ReG", 0.01, &derivative),
    ])
}

fn identities(pot: &PotentialSpec, alpha: &Frequency, p: &Params) -> Result<Outcome> {
    let rows = identity_rows(pot, alpha, p)?;
    let mut csv = Csv::new(&["identity", "points", "max_residual", "worst_at", "tolerance", "pass"]);
    let mut out = Outcome::default();
    for r in &rows {
        csv.row(vec![
            r.identity.into(),
            r.points.into(),
            r.max_residual.into(),
            r.worst_at.into(),
            r.tolerance.into(),
            r.pass.into(),
        ]);
        if !r.pass {
            out.health_failures.push(format!("{}: residual {} above {}", r.identity, r.max_residual, r.tolerance));
        }
    }
    out.artifacts.push(csv.finish("identities.csv"));
    Ok(out)
}

fn theta_task(pot: &PotentialSpec, alpha: &Frequency, p: &Params) -> Result<Outcome> {
    let report = theta_lipschitz_probe(
        pot,
        alpha,
        p.gamma.unwrap(),
        p.tau.unwrap(),
        p.k_max.unwrap(),
        &grid(p),
        p.n.unwrap(),
        p.m.unwrap(),
    )?;
    let mut csv = Csv::new(&["E", "rho", "N", "selected"]);
    for i in 0..report.energies.len() {
        csv.row(vec![
            report.energies[i].into(),
            report.rho[i].into(),
            report.n_values[i].into(),
            report.selected[i].into(),
        ]);
    }
    let mut out = Outcome::default();
    out.warnings.extend(report.warning.clone());
    out.artifacts = vec![csv.finish("theta_selection.csv"), Artifact::json("theta_report.json", &report)?];
    Ok(out)
}
