use qpspec::rotation::rotation_numbers;
use qpspec::spectrum::{default_sigma_grid, growth_test, linspace, GrowthCriteria};
use qpspec::{
    homogeneity_profile, ids_counting, ids_rotation, rotation_number, spectrum_approx, truncated_eigenvalues,
    Frequency, PotentialSpec, SpectrumApprox, SpectrumSource,
};

fn golden() -> Frequency {
    Frequency::golden_mean(40)
}

fn free_ids_closed_form(e: f64) -> f64 {
    if e <= -2.0 {
        0.0
    } else if e >= 2.0 {
        1.0
    } else {
        1.0 - (e / 2.0).acos() / std::f64::consts::PI
    }
}

#[test]
fn free_counting_examples() {
    let ids = ids_counting(&PotentialSpec::free(), &golden(), &[0.0, 1.0, 2.0], 2000, 8).unwrap();
    assert!((ids.n_values[0] - 0.5).abs() <= 1e-3);
    assert!((ids.n_values[1] - 2.0 / 3.0).abs() <= 1e-2);
    assert!(ids.n_values[2] >= 1.0 - 2.0 / 2000.0);
}

#[test]
fn free_counting_matches_closed_form() {
    let grid = linspace(-2.5, 2.5, 101);
    let ids = ids_counting(&PotentialSpec::free(), &golden(), &grid, 1000, 8).unwrap();
    for (e, n) in grid.iter().zip(&ids.n_values) {
        assert!((n - free_ids_closed_form(*e)).abs() <= 2e-3, "E={e}");
    }
}

#[test]
fn boundary_effect_scales_like_one_over_n() {
    let pot = PotentialSpec::amo(2.0);
    let grid = linspace(-5.0, 5.0, 81);
    let n = 400;
    let a = ids_counting(&pot, &golden(), &grid, n, 32).unwrap();
    let b = ids_counting(&pot, &golden(), &grid, 2 * n, 32).unwrap();
    let gap = a.n_values.iter().zip(&b.n_values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let constant = gap * n as f64;
    assert!(constant <= 4.0, "C = {constant}");
}

#[test]
fn counting_and_rotation_agree() {
    let grid = linspace(-5.0, 5.0, 41);
    let pot = PotentialSpec::amo(2.0);
    let a = ids_counting(&pot, &golden(), &grid, 1000, 32).unwrap();
    let b = ids_rotation(&pot, &golden(), &grid, 2000, 32).unwrap();
    let gap = a.n_values.iter().zip(&b.n_values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(gap <= 0.02, "{gap}");
}

#[test]
fn rotation_is_monotone_and_settles() {
    let grid = linspace(-3.0, 3.0, 61);
    let pot = PotentialSpec::amo(0.8);
    let r = rotation_numbers(&pot, &golden(), &grid, 2000, 16).unwrap();
    for w in r.windows(2) {
        assert!(w[1].rho <= w[0].rho + 2.0 * w[0].spread.max(w[1].spread) + 1e-12);
    }
    let spread = |n| {
        let v = rotation_numbers(&pot, &golden(), &grid, n, 16).unwrap();
        v.iter().map(|x| x.spread).sum::<f64>()
    };
    assert!(spread(4000) < 0.75 * spread(1000));
}

#[test]
fn below_the_spectrum_rotation_is_half() {
    let pot = PotentialSpec::amo(2.0);
    let s = spectrum_approx(&pot, &golden(), 300, 8, 0.02).unwrap();
    let (lo, _) = s.bounds().unwrap();
    let r = rotation_number(&pot, &golden(), lo - 0.05, 1000, 16).unwrap();
    assert!((r.rho - 0.5).abs() < 1e-3);
}

#[test]
fn free_spectrum_approximation() {
    let s = spectrum_approx(&PotentialSpec::free(), &golden(), 2000, 8, 0.01).unwrap();
    assert_eq!(s.intervals.len(), 1);
    let (a, b) = s.intervals[0];
    assert!(a <= -1.99 && b >= 1.99 && a >= -2.02 && b <= 2.02);
}

#[test]
fn amo_spectrum_is_contained_and_symmetric() {
    let s = spectrum_approx(&PotentialSpec::amo(2.0), &golden(), 600, 16, 0.01).unwrap();
    let (lo, hi) = s.bounds().unwrap();
    assert!(lo >= -6.0 && hi <= 6.0);
    assert!(s.intervals.windows(2).all(|w| w[1].0 > w[0].1));
    // E ↦ -E maps the eigenvalue union onto itself up to the margin
    for &(a, b) in &s.intervals {
        for e in [a, 0.5 * (a + b), b] {
            assert!(s.distance(-e) <= 0.011, "E={e}");
        }
    }
}

#[test]
fn spectrum_carries_the_ids_mass() {
    let pot = PotentialSpec::amo(2.0);
    let s = spectrum_approx(&pot, &golden(), 500, 16, 0.02).unwrap();
    let grid = linspace(-6.5, 6.5, 1301);
    let ids = ids_counting(&pot, &golden(), &grid, 500, 16).unwrap();
    let inside: f64 = ids.cells().filter(|&(a, b, _)| s.contains(0.5 * (a + b))).map(|c| c.2).sum();
    let total: f64 = ids.cells().map(|c| c.2).sum();
    assert!(inside >= 0.99 * total, "{inside} of {total}");
}

#[test]
fn growth_test_separates_outer_gaps() {
    let pot = PotentialSpec::amo(2.0);
    let v = growth_test(&pot, &golden(), &[-5.5, -2.0, 0.0, 2.0, 5.5], 400, 256, GrowthCriteria::default()).unwrap();
    let flags: Vec<bool> = v.iter().map(|x| x.off_spectrum).collect();
    assert_eq!(flags, vec![true, true, false, true, true]);
}

#[test]
fn eigenvalues_of_real_truncation_are_sorted_and_complete() {
    let ev = truncated_eigenvalues(&PotentialSpec::amo(1.0), &golden(), 0.37, 500).unwrap();
    assert_eq!(ev.len(), 500);
    assert!(ev.windows(2).all(|w| w[0] <= w[1]));
}

/// Minimum of the window ratio by dense sampling of each interval, with the
/// window measure summed independently.
fn brute_force_min_ratio(intervals: &[(f64, f64)], sigma: f64) -> f64 {
    let measure = |lo: f64, hi: f64| -> f64 {
        let mut m = 0.0;
        for &(a, b) in intervals {
            let l = if a > lo { a } else { lo };
            let r = if b < hi { b } else { hi };
            if r > l {
                m += r - l;
            }
        }
        m
    };
    let mut best = f64::INFINITY;
    for &(a, b) in intervals {
        let steps = 20_000;
        for i in 0..=steps {
            let e = a + (b - a) * i as f64 / steps as f64;
            best = best.min(measure(e - sigma, e + sigma) / sigma);
        }
    }
    best
}

#[test]
fn homogeneity_matches_brute_force_on_three_intervals() {
    let cases = [
        vec![(-2.0, -0.51), (-0.49, 0.3), (0.8, 2.0)],
        vec![(0.0, 0.05), (0.07, 1.0), (1.02, 1.03)],
        vec![(-1.0, 0.0), (0.02, 0.5), (0.9, 0.95)],
    ];
    for iv in cases {
        let s = SpectrumApprox::from_intervals(iv.clone(), 0.0, SpectrumSource::EigenvalueUnion).unwrap();
        let sigmas = [0.01, 0.02, 0.05, 0.1, 0.2];
        let p = homogeneity_profile(&s, &sigmas, 0).unwrap();
        for (k, &sigma) in sigmas.iter().enumerate() {
            let oracle = brute_force_min_ratio(&iv, sigma);
            // the sampled oracle can only overestimate the exact minimum
            assert!(p.min_ratio[k] <= oracle + 1e-12, "{iv:?} σ={sigma}");
            assert!(oracle - p.min_ratio[k] <= 2.0 * (iv[2].1 - iv[0].0) / 20_000.0 / sigma + 1e-12);
        }
    }
}

#[test]
fn single_band_is_homogeneous_at_all_small_scales() {
    let s = SpectrumApprox::from_intervals(vec![(-2.0, 2.0)], 0.0, SpectrumSource::EigenvalueUnion).unwrap();
    let sigmas: Vec<f64> = default_sigma_grid().into_iter().filter(|&s| s <= 0.1).collect();
    let p = homogeneity_profile(&s, &sigmas, 500).unwrap();
    assert!(p.min_ratio.iter().all(|&r| r >= 1.0 - 1e-12));
    assert!(p.passing.iter().all(|&b| b));
}
