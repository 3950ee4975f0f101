use std::path::PathBuf;

use qpspec::green::GreenMethod;
use qpspec::spectrum::{linspace, IdsMethod};
use qpspec::{Cone, FrequencyLiteral, PotentialSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Lyapunov,
    Acceleration,
    Rotation,
    Ids,
    Spectrum,
    Green,
    Boundary,
    Maximal,
    RegimeTable,
    Identities,
    ThetaLipschitz,
}

impl Task {
    pub fn as_str(&self) -> &'static str {
        match self {
            Task::Lyapunov => "lyapunov",
            Task::Acceleration => "acceleration",
            Task::Rotation => "rotation",
            Task::Ids => "ids",
            Task::Spectrum => "spectrum",
            Task::Green => "green",
            Task::Boundary => "boundary",
            Task::Maximal => "maximal",
            Task::RegimeTable => "regime-table",
            Task::Identities => "identities",
            Task::ThetaLipschitz => "theta-lipschitz",
        }
    }
}

/// Energy grid: explicit points or `points` equispaced values on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Points(Vec<f64>),
    Range { lo: f64, hi: f64, points: usize },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Points(p) => p.clone(),
            Grid::Range { lo, hi, points } => linspace(*lo, *hi, *points),
        }
    }

    /// 401 points over the containment interval widened by 10%.
    pub fn default_for(pot: &PotentialSpec) -> Grid {
        Self::padded(pot, 401)
    }

    pub fn padded(pot: &PotentialSpec, points: usize) -> Grid {
        let (lo, hi) = pot.containment();
        let pad = 0.05 * (hi - lo);
        Grid::Range { lo: lo - pad, hi: hi + pad, points }
    }
}

/// Task parameters. Every field is optional in the file; [`Params::resolved`]
/// fills the defaults a task uses so that the hashed configuration records
/// them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_grid: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_imag: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ids_method: Option<IdsMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth_check: Option<bool>,
    /// Points `[re, im]` for the green task.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub green_method: Option<GreenMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone: Option<Cone>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    /// Size of the truncation whose eigenvalue quantiles the regime table
    /// samples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub de: Option<f64>,
}

fn fill<T>(slot: &mut Option<T>, default: impl FnOnce() -> T) {
    if slot.is_none() {
        *slot = Some(default());
    }
}

impl Params {
    /// Copy with every parameter used by `task` set.
    pub fn resolved(&self, task: Task, pot: &PotentialSpec) -> Params {
        let mut p = self.clone();
        let grid = || Grid::default_for(pot);
        match task {
            Task::Lyapunov => {
                fill(&mut p.n, || 10_000);
                fill(&mut p.m, || 1024);
                fill(&mut p.e_grid, grid);
                fill(&mut p.eps_imag, || 0.0);
            }
            Task::Acceleration => {
                fill(&mut p.n, || 10_000);
                fill(&mut p.m, || 1024);
                fill(&mut p.e_grid, grid);
                fill(&mut p.schedule, || qpspec::lyapunov::DEFAULT_SCHEDULE.to_vec());
            }
            Task::Rotation => {
                fill(&mut p.n, || 4000);
                fill(&mut p.m, || 64);
                fill(&mut p.e_grid, grid);
            }
            Task::Ids => {
                fill(&mut p.n, || 2000);
                fill(&mut p.m, || 64);
                fill(&mut p.e_grid, grid);
                fill(&mut p.ids_method, || IdsMethod::Counting);
            }
            Task::Spectrum => {
                fill(&mut p.n, || 2000);
                fill(&mut p.m, || 16);
                fill(&mut p.e_grid, grid);
                let step = grid_step(p.e_grid.as_ref().unwrap());
                let n = p.n.unwrap();
                fill(&mut p.margin, || 3.0 / n as f64 + step);
                fill(&mut p.sigma_grid, qpspec::spectrum::default_sigma_grid);
                fill(&mut p.e_samples, || 1000);
                fill(&mut p.growth_check, || false);
            }
            Task::Green => {
                fill(&mut p.m, || 256);
                fill(&mut p.green_method, || GreenMethod::ResolventAverage);
                if p.points.is_none() {
                    fill(&mut p.e_grid, grid);
                    fill(&mut p.eps_imag, || 0.1);
                }
                if p.green_method == Some(GreenMethod::BorelOfIds) {
                    fill(&mut p.n, || 2000);
                }
            }
            Task::Boundary => {
                fill(&mut p.m, || 64);
                fill(&mut p.e_grid, grid);
                fill(&mut p.schedule, || qpspec::lyapunov::DEFAULT_SCHEDULE.to_vec());
            }
            Task::Maximal => {
                fill(&mut p.m, || 32);
                fill(&mut p.e_grid, grid);
                fill(&mut p.cone, || Cone { y_min: 1e-2, y_max: 1.0, levels: 5, aspect: 4 });
                fill(&mut p.sigma_grid, || (-3..=8).map(|k| 2f64.powi(k)).collect());
            }
            Task::RegimeTable => {
                fill(&mut p.n, || 10_000);
                fill(&mut p.m, || 1024);
                fill(&mut p.schedule, || qpspec::lyapunov::DEFAULT_SCHEDULE.to_vec());
                fill(&mut p.lambdas, || vec![0.5, 1.0, 2.0]);
                fill(&mut p.truncation, || 2000);
                fill(&mut p.regime_tol, || qpspec::lyapunov::DEFAULT_REGIME_TOL);
            }
            Task::Identities => {
                fill(&mut p.n, || 2000);
                fill(&mut p.m, || 64);
                fill(&mut p.e_grid, || Grid::padded(pot, 50));
                fill(&mut p.eps_imag, || 0.1);
                let eps = p.eps_imag.unwrap();
                fill(&mut p.de, || eps / 10.0);
            }
            Task::ThetaLipschitz => {
                fill(&mut p.n, || 4000);
                fill(&mut p.m, || 64);
                fill(&mut p.e_grid, grid);
                fill(&mut p.gamma, || 0.01);
                fill(&mut p.tau, || 2.0);
                fill(&mut p.k_max, || 1000);
            }
        }
        p
    }
}

fn grid_step(grid: &Grid) -> f64 {
    grid.values().windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    pub alpha: FrequencyLiteral,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    #[serde(default)]
    pub params: Params,
    /// Default output directory; `--out` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    /// Reserved; every algorithm is deterministic.
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    pub fn new(potential: PotentialSpec, alpha: FrequencyLiteral, task: Task) -> Self {
        RunConfig { potential, alpha, task: Some(task), params: Params::default(), out_dir: None, seed: 0 }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Every problem found, one message per offending field.
    pub fn validate(&self, task: Task) -> Vec<String> {
        let mut issues = Vec::new();
        if let Err(e) = self.potential.validate() {
            issues.push(format!("potential: {e}"));
        }
        if let Err(e) = self.alpha.resolve() {
            issues.push(format!("alpha: {e}"));
        }
        if let Some(t) = self.task {
            if t != task {
                issues.push(format!("task: config names {} but {} was requested", t.as_str(), task.as_str()));
            }
        }
        let p = &self.params;
        let mut check = |ok: bool, msg: &str| {
            if !ok {
                issues.push(msg.to_string());
            }
        };
        if let Some(n) = p.n {
            check(n >= 100, "params.n: must be at least 100");
        }
        if let Some(m) = p.m {
            check(m >= 1, "params.m: must be positive");
            if matches!(task, Task::Lyapunov | Task::Acceleration | Task::RegimeTable) {
                check(m >= 16 && m.is_power_of_two(), "params.m: must be a power of two >= 16");
            }
        }
        if let Some(g) = &p.e_grid {
            let v = g.values();
            check(
                v.len() >= 2 && v.iter().all(|x| x.is_finite()) && v.windows(2).all(|w| w[1] > w[0]),
                "params.e_grid: needs at least two strictly increasing finite points",
            );
        }
        if let Some(e) = p.eps_imag {
            check(e >= 0.0 && e.is_finite(), "params.eps_imag: must be finite and nonnegative");
        }
        if let Some(s) = &p.schedule {
            check(
                qpspec::lyapunov::validate_schedule(s).is_ok(),
                "params.schedule: must be strictly decreasing positive reals",
            );
        }
        if let Some(s) = &p.sigma_grid {
            check(!s.is_empty() && s.iter().all(|&x| x > 0.0), "params.sigma_grid: entries must be positive");
        }
        if let Some(pts) = &p.points {
            check(pts.iter().all(|z| z[1] > 0.0 && z[0].is_finite()), "params.points: every point needs Im z > 0");
        }
        if let Some(w) = p.window {
            check(w >= qpspec::green::MIN_WINDOW, "params.window: must be at least 200");
        }
        if let Some(c) = &p.cone {
            check(c.validate().is_ok(), "params.cone: needs 0 < y_min <= y_max and levels >= 1");
        }
        if let Some(l) = &p.lambdas {
            check(!l.is_empty() && l.iter().all(|x| x.is_finite()), "params.lambdas: needs finite couplings");
        }
        if let Some(g) = p.gamma {
            check(g > 0.0, "params.gamma: must be positive");
        }
        if let Some(t) = p.tau {
            check(t > 1.0, "params.tau: must exceed 1");
        }
        if let Some(d) = p.de {
            check(d > 0.0, "params.de: must be positive");
        }
        if let Some(margin) = p.margin {
            check(margin > 0.0, "params.margin: must be positive");
        }
        issues
    }

    /// The configuration that is hashed: task fixed, defaults filled in, no
    /// output location.
    pub fn canonical(&self, task: Task) -> RunConfig {
        RunConfig {
            potential: self.potential.clone(),
            alpha: self.alpha.clone(),
            task: Some(task),
            params: self.params.resolved(task, &self.potential),
            out_dir: None,
            seed: self.seed,
        }
    }
}
