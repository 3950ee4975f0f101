use qpspec::rotation::rotation_numbers;
use qpspec::{ids_from_rotation, theta_membership, Frequency, PotentialSpec};
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Difference quotients of `N = 1 - 2ρ` on energies whose rotation number
/// lies in the resonance-free set `Θ^τ_γ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaReport {
    pub gamma: f64,
    pub tau: f64,
    pub k_max: u64,
    pub energies: Vec<f64>,
    pub rho: Vec<f64>,
    pub n_values: Vec<f64>,
    pub selected: Vec<bool>,
    /// Largest `|ΔN|/|ΔE|` over consecutive selected energies.
    pub max_quotient: Option<f64>,
    pub max_pair: Option<(f64, f64)>,
    /// The same maximum over all adjacent grid energies.
    pub unfiltered_max_quotient: f64,
    pub warning: Option<String>,
}

fn max_quotient(points: &[(f64, f64)]) -> Option<(f64, (f64, f64))> {
    points.windows(2).map(|w| ((w[1].1 - w[0].1).abs() / (w[1].0 - w[0].0), (w[0].0, w[1].0))).fold(
        None,
        |best: Option<(f64, (f64, f64))>, cur| match best {
            Some(b) if b.0 >= cur.0 => Some(b),
            _ => Some(cur),
        },
    )
}

#[allow(clippy::too_many_arguments)]
pub fn theta_lipschitz_probe(
    pot: &PotentialSpec,
    alpha: &Frequency,
    gamma: f64,
    tau: f64,
    k_max: u64,
    e_grid: &[f64],
    n: usize,
    m: usize,
) -> Result<ThetaReport> {
    qpspec::spectrum::validate_grid(e_grid)?;
    let rotations = rotation_numbers(pot, alpha, e_grid, n, m)?;
    let rho: Vec<f64> = rotations.iter().map(|r| r.rho).collect();
    let n_values = rho.iter().map(|&r| ids_from_rotation(r)).collect::<qpspec::Result<Vec<f64>>>()?;
    let selected = rho
        .iter()
        .map(|&r| theta_membership(r, alpha, gamma, tau, k_max).map(|t| t.member))
        .collect::<qpspec::Result<Vec<bool>>>()?;
    let all: Vec<(f64, f64)> = e_grid.iter().copied().zip(n_values.iter().copied()).collect();
    let chosen: Vec<(f64, f64)> = all.iter().zip(&selected).filter(|(_, &s)| s).map(|(p, _)| *p).collect();
    let best = max_quotient(&chosen);
    let warning = match chosen.len() {
        0 => Some(format!("no grid energy has its rotation number in Θ (γ={gamma}, τ={tau}, k_max={k_max})")),
        1 => Some("only one grid energy selected; no quotient".to_string()),
        _ => None,
    };
    Ok(ThetaReport {
        gamma,
        tau,
        k_max,
        energies: e_grid.to_vec(),
        rho,
        n_values,
        selected,
        max_quotient: best.map(|b| b.0),
        max_pair: best.map(|b| b.1),
        unfiltered_max_quotient: max_quotient(&all).map_or(0.0, |b| b.0),
        warning,
    })
}
