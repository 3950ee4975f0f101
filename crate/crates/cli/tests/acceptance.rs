//! Acceptance criteria 1 to 11, one PASS/FAIL line each.

use std::process::ExitCode;
use std::time::Instant;

use qpspec::green::green_avg_many;
use qpspec::rotation::rotation_numbers;
use qpspec::spectrum::linspace;
use qpspec::{
    acceleration, derivative_identity_residual, homogeneity_profile, ids_counting, lyapunov, maximal_function,
    normal_boundary_re_g, sdc_check, theta_membership, thouless, Complex64, Cone, DiophantineKind, Frequency,
    FrequencyLiteral, Harmonic, PotentialSpec, SpectrumApprox, SpectrumSource,
};
use qpspec_cli::config::{Grid, Params};
use qpspec_cli::tasks::{quantile_energies, regime_rows};
use qpspec_cli::{compute, run, Options, RunConfig, Task};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn golden() -> Frequency {
    Frequency::golden_mean(40)
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn ensure(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn core<T>(r: qpspec::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn regime_table() -> Outcome {
    let started = Instant::now();
    let pot = PotentialSpec::amo(1.0);
    let params = Params { lambdas: Some(vec![0.5, 1.0, 2.0]), ..Params::default() }.resolved(Task::RegimeTable, &pot);
    if params.n != Some(10_000) || params.m != Some(1024) {
        return Err(format!("defaults changed: n={:?} m={:?}", params.n, params.m));
    }
    let rows = regime_rows(&pot, &golden(), &params).map_err(|e| e.to_string())?;
    let secs = started.elapsed().as_secs_f64();
    let mut bad = Vec::new();
    for r in &rows {
        let ok = match r.lambda {
            2.0 => (r.l - 2f64.ln()).abs() <= 0.02 && r.omega == Some(1) && r.omega_residual <= 0.1,
            0.5 => r.l <= 0.01 && r.omega == Some(0),
            _ => r.l <= 0.02 && r.omega == Some(1),
        };
        if !ok {
            bad.push(format!("λ={} E={:.4} L={:.5} ω={:?} res={:.3}", r.lambda, r.e, r.l, r.omega, r.omega_residual));
        }
    }
    let worst_supercritical =
        rows.iter().filter(|r| r.lambda == 2.0).map(|r| (r.l - 2f64.ln()).abs()).fold(0.0, f64::max);
    let msg = format!(
        "{} rows, max |L-ln2| at λ=2 {:.2e}, {:.1}s{}",
        rows.len(),
        worst_supercritical,
        secs,
        if bad.is_empty() { String::new() } else { format!("; failing: {}", bad.join("; ")) }
    );
    ensure(bad.is_empty() && rows.len() == 15 && secs <= 120.0, msg)
}

fn perturbation_persistence() -> Outcome {
    let pot = PotentialSpec { lambda: 2.0, epsilon: 0.1, v: vec![Harmonic { k: 2, cos: 1.0, sin: 0.0 }] };
    let alpha = golden();
    let energies = quantile_energies(&pot, &alpha, 2000).map_err(|e| e.to_string())?;
    let mut min_l = f64::INFINITY;
    let mut max_res: f64 = 0.0;
    let mut ok = true;
    for e in energies {
        let p = core(acceleration(&pot, &alpha, e, &qpspec::lyapunov::DEFAULT_SCHEDULE, 10_000, 1024))?;
        min_l = min_l.min(p.l_zero);
        max_res = max_res.max(p.omega_residual);
        ok &= p.l_zero >= 0.5 && p.omega_int == Some(1) && p.omega_residual <= 0.1;
    }
    ensure(ok, format!("min L {min_l:.5}, max ω residual {max_res:.2e}"))
}

fn ids_relation_gap(pot: &PotentialSpec, grid: &[f64]) -> Result<f64, String> {
    let alpha = golden();
    let counted = core(ids_counting(pot, &alpha, grid, 2000, 64))?;
    let rot = core(rotation_numbers(pot, &alpha, grid, 4000, 64))?;
    Ok(counted.n_values.iter().zip(&rot).map(|(n, r)| (n - (1.0 - 2.0 * r.rho)).abs()).fold(0.0, f64::max))
}

fn ids_relation() -> Outcome {
    let free = ids_relation_gap(&PotentialSpec::free(), &linspace(-2.5, 2.5, 50))?;
    let amo = ids_relation_gap(&PotentialSpec::amo(2.0), &linspace(-6.5, 6.5, 50))?;
    ensure(free <= 0.01 && amo <= 0.02, format!("free {free:.2e} (≤0.01), AMO λ=2 {amo:.2e} (≤0.02)"))
}

fn thouless_formula() -> Outcome {
    let alpha = golden();
    let free = core(ids_counting(&PotentialSpec::free(), &alpha, &linspace(-2.2, 2.2, 2001), 2000, 16))?;
    let t3 = core(thouless(&free, c(3.0)))?;
    let free_err = (t3 - 0.96242).abs();

    let amo = PotentialSpec::amo(2.0);
    let ids = core(ids_counting(&amo, &alpha, &linspace(-6.6, 6.6, 2001), 2000, 32))?;
    let mut worst: f64 = 0.0;
    for z in linspace(-3.0, 3.0, 20) {
        let t = core(thouless(&ids, c(z)))?;
        let l = core(lyapunov(&amo, &alpha, c(z), 0.0, 5000, 256))?;
        worst = worst.max((t - l).abs());
    }
    ensure(
        free_err <= 5e-3 && worst <= 0.02,
        format!("free z=3 error {free_err:.2e} (≤5e-3), AMO max {worst:.2e} (≤0.02)"),
    )
}

fn derivative_identity() -> Outcome {
    let alpha = golden();
    let pot = PotentialSpec::amo(2.0);
    let mut worst: f64 = 0.0;
    let mut at = 0.0;
    for e in linspace(-6.0, 6.0, 20) {
        let r = core(derivative_identity_residual(&pot, &alpha, e, 0.1, 0.01, 3000, 256))?;
        if r > worst {
            worst = r;
            at = e;
        }
    }
    ensure(worst <= 0.01, format!("max residual {worst:.2e} at E={at:.3} (≤0.01)"))
}

fn reflectionless() -> Outcome {
    let alpha = golden();
    let free = PotentialSpec::free();
    let mut worst: f64 = 0.0;
    for e in [-1.0, 0.0, 0.5, 1.5] {
        worst = worst.max(core(normal_boundary_re_g(&free, &alpha, e, None, 64))?.value.abs());
    }
    let outside = core(normal_boundary_re_g(&free, &alpha, 3.0, None, 64))?.value;
    let exact = -1.0 / 5f64.sqrt();
    let off = (outside - exact).abs();
    ensure(worst <= 0.01 && off <= 0.01, format!("max |Re G| on band {worst:.2e}, E=3 {outside:.5} vs {exact:.5}"))
}

fn herglotz() -> Outcome {
    let alpha = golden();
    let heights: Vec<f64> = (0..10).map(|k| 0.01 * 100f64.powf(k as f64 / 9.0)).collect();
    let mut report = Vec::new();
    let mut ok = true;
    for pot in [PotentialSpec::free(), PotentialSpec::amo(2.0)] {
        let (lo, hi) = pot.containment();
        let zs: Vec<Complex64> =
            linspace(lo, hi, 20).into_iter().flat_map(|x| heights.iter().map(move |&y| Complex64::new(x, y))).collect();
        let values = core(green_avg_many(&pot, &alpha, &zs, None, 64))?;
        let min_im = values.iter().map(|g| g.value.im).fold(f64::INFINITY, f64::min);
        ok &= values.len() == 200 && min_im > 0.0;
        report.push(format!("λ={} min Im G {min_im:.3e}", pot.lambda));
    }
    ensure(ok, format!("200 points per model, {}", report.join(", ")))
}

/// Exact minimum of `|(E-σ,E+σ) ∩ S| / σ` over `E ∈ S` when every endpoint
/// and σ lie on the lattice `2^-10 Z`: the window measure is linear between
/// lattice points, and all arithmetic is exact in binary.
fn lattice_min_ratio(intervals: &[(f64, f64)], sigma: f64) -> f64 {
    let step = 1.0 / 1024.0;
    let measure = |lo: f64, hi: f64| -> f64 { intervals.iter().map(|&(a, b)| (b.min(hi) - a.max(lo)).max(0.0)).sum() };
    let mut best = f64::INFINITY;
    for &(a, b) in intervals {
        let mut k = (a / step).round() as i64;
        while k as f64 * step <= b {
            let e = k as f64 * step;
            best = best.min(measure(e - sigma, e + sigma) / sigma);
            k += 1;
        }
    }
    best
}

fn homogeneity() -> Outcome {
    let band = core(SpectrumApprox::from_intervals(vec![(-2.0, 2.0)], 0.0, SpectrumSource::EigenvalueUnion))?;
    let small: Vec<f64> = (4..=10).map(|k| 2f64.powi(-k)).chain([0.1]).collect();
    let p = core(homogeneity_profile(&band, &small, 0))?;
    let band_min = p.min_ratio.iter().copied().fold(f64::INFINITY, f64::min);

    let q = |x: f64| x / 1024.0;
    let unions = [
        vec![(q(-2048.0), q(-522.0)), (q(-502.0), q(307.0)), (q(819.0), q(2048.0))],
        vec![(q(0.0), q(51.0)), (q(72.0), q(1024.0)), (q(1044.0), q(1055.0))],
        vec![(q(-1024.0), q(0.0)), (q(20.0), q(512.0)), (q(922.0), q(973.0))],
    ];
    let sigmas: Vec<f64> = (2..=8).map(|k| 2f64.powi(-k)).collect();
    let mut mismatches = 0;
    for iv in &unions {
        let s = core(SpectrumApprox::from_intervals(iv.clone(), 0.0, SpectrumSource::EigenvalueUnion))?;
        let prof = core(homogeneity_profile(&s, &sigmas, 0))?;
        for (k, &sigma) in sigmas.iter().enumerate() {
            if prof.min_ratio[k] != lattice_min_ratio(iv, sigma) {
                mismatches += 1;
            }
        }
    }
    ensure(
        band_min >= 1.0 && mismatches == 0,
        format!(
            "[-2,2] min ratio {band_min} for σ ≤ 0.1, {mismatches} mismatches in {} oracle comparisons",
            unions.len() * sigmas.len()
        ),
    )
}

fn weak_type() -> Outcome {
    let cone = Cone { y_min: 1e-2, y_max: 1.0, levels: 5, aspect: 4 };
    let sigmas: Vec<f64> = (-3..=8).map(|k| 2f64.powi(k)).collect();
    let pot = PotentialSpec::amo(2.0);
    let (lo, hi) = pot.containment();
    let pad = 0.05 * (hi - lo);
    let prof = core(maximal_function(&pot, &golden(), &linspace(lo - pad, hi + pad, 401), &cone, &sigmas, 32))?;
    let finite = prof.weak_type_stat.iter().all(|s| s.is_finite());
    let peak = prof.weak_type_stat.iter().position(|&s| s == prof.d_constant).unwrap_or(0);
    // beyond the peak the statistic must not grow again
    let tail_monotone = prof.weak_type_stat[peak..].windows(2).all(|w| w[1] <= w[0]);
    let last = *prof.weak_type_stat.last().unwrap_or(&0.0);
    ensure(
        finite && prof.d_constant <= prof.chebyshev_bound && tail_monotone,
        format!(
            "D = {:.4} over σ ∈ [2^-3, 2^8] (bound {:.4}), peak at σ={}, stat at largest σ {last:.3e}",
            prof.d_constant, prof.chebyshev_bound, prof.sigma_grid[peak]
        ),
    )
}

fn arithmetic() -> Outcome {
    let alpha = golden();
    let sdc = core(sdc_check(&alpha, 0.2, 1.1, 100_000))?;
    let resonant_theta = (alpha.value() / 2.0).rem_euclid(1.0);
    let resonant = core(theta_membership(resonant_theta, &alpha, 0.01, 2.0, 1000))?.member;
    let wide_gamma = core(theta_membership(0.1234, &alpha, 0.6, 2.0, 1000))?.member;
    ensure(
        sdc.kind == DiophantineKind::Sdc && sdc.worst_margin >= 0.2 && !resonant && !wide_gamma,
        format!(
            "SDC worst margin {:.4} at k={}, resonant θ member={resonant}, γ=0.6 member={wide_gamma}",
            sdc.worst_margin, sdc.worst_k
        ),
    )
}

fn determinism() -> Outcome {
    let alpha = FrequencyLiteral::golden_mean();
    let configs = [
        (Task::Lyapunov, PotentialSpec::amo(2.0), Params { n: Some(2000), m: Some(64), ..Params::default() }),
        (Task::Green, PotentialSpec::amo(1.0), Params { m: Some(64), ..Params::default() }),
        (
            Task::Rotation,
            PotentialSpec::amo(0.5),
            Params { e_grid: Some(Grid::Range { lo: -3.0, hi: 3.0, points: 41 }), ..Params::default() },
        ),
    ];
    let mut compared = 0;
    for (task, pot, params) in configs {
        let mut config = RunConfig::new(pot, alpha.clone(), task);
        config.params = params;
        let mut bodies = Vec::new();
        for threads in [1, 3] {
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            let opts = Options { out_dir: Some(dir.path().to_path_buf()), cache_dir: None, threads: Some(threads) };
            let record = run(&config, task, &opts).map_err(|e| e.to_string())?;
            let (_, outcome) = compute(&config, task, Some(threads)).map_err(|e| e.to_string())?;
            let files: Vec<String> = outcome.artifacts.iter().map(|a| a.body.clone()).collect();
            bodies.push((record.outputs.iter().map(|o| o.body_sha256.clone()).collect::<Vec<_>>(), files));
        }
        if bodies[0] != bodies[1] {
            return Err(format!("{} differs between 1 and 3 threads", task.as_str()));
        }
        compared += bodies[0].1.len();
    }
    Ok(format!("{compared} artifacts byte-identical with 1 and 3 threads"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("AMO regime table", regime_table),
        ("perturbation persistence", perturbation_persistence),
        ("IDS from rotation number", ids_relation),
        ("Thouless formula", thouless_formula),
        ("derivative identity", derivative_identity),
        ("reflectionless boundary values", reflectionless),
        ("Herglotz property", herglotz),
        ("homogeneity profile", homogeneity),
        ("weak-type diagnostic", weak_type),
        ("arithmetic layer", arithmetic),
        ("thread-count determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {:>2} PASS  {name}: {msg} [{secs:.1}s]", i + 1),
            Err(msg) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {msg} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
