use nalgebra::{DMatrix, SymmetricEigen};
use qrem::gap::{gap_scaling_ensemble, minimal_gap, spectrum_vs_field, GapOptions};
use qrem::hamiltonian::FieldedHamiltonian;
use qrem::stats::median;
use qrem::RemInstance;

fn dense_levels(inst: &RemInstance, gamma: f64) -> Vec<f64> {
    let m = FieldedHamiltonian::new(inst, gamma).dense_matrix().unwrap();
    let a = DMatrix::from_row_slice(m.dim, m.dim, &m.data);
    let mut v: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn zero_field_levels_are_instance_energies() {
    let inst = RemInstance::sample(9, 4).unwrap();
    let curve = spectrum_vs_field(&inst, &[0.0], 4, 1e-10, true).unwrap();
    let lowest = inst.lowest_energies(4);
    for (level, e) in curve.levels.iter().zip(&lowest) {
        assert!((level[0] - e).abs() < 1e-10);
    }
}

#[test]
fn spectrum_matches_dense_solver() {
    let inst = RemInstance::sample(10, 8).unwrap();
    let gammas: Vec<f64> = (0..=24).map(|i| 0.05 * i as f64).collect();
    let curve = spectrum_vs_field(&inst, &gammas, 3, 1e-10, true).unwrap();
    assert!(curve.all_converged());
    for (p, &g) in gammas.iter().enumerate() {
        let exact = dense_levels(&inst, g);
        for (level, values) in curve.levels.iter().enumerate() {
            assert!((values[p] - exact[level]).abs() < 1e-8, "Γ = {g}, level {level}");
        }
    }
    assert!(curve.gaps().iter().all(|&d| d >= 0.0));
}

#[test]
fn warm_and_cold_scans_agree() {
    for (n, seed) in [(12, 2), (14, 5)] {
        let inst = RemInstance::sample(n, seed).unwrap();
        let gc = inst.ground_energy().abs() / n as f64;
        let gammas: Vec<f64> = (0..=16).map(|i| gc * (0.5 + i as f64 / 16.0)).collect();
        let warm = spectrum_vs_field(&inst, &gammas, 2, 1e-10, true).unwrap();
        let cold = spectrum_vs_field(&inst, &gammas, 2, 1e-10, false).unwrap();
        for (a, b) in warm.levels.iter().flatten().zip(cold.levels.iter().flatten()) {
            assert!((a - b).abs() < 1e-8, "n = {n}: {a} vs {b}");
        }
    }
}

#[test]
fn crafted_two_spin_gap_matches_dense_scan() {
    let inst = RemInstance::from_energies(vec![-2.0, 0.1, 0.2, 0.3]).unwrap();
    let opts = GapOptions {
        tol_gamma: Some(1e-7),
        tol_eig: Some(1e-12),
        ..Default::default()
    };
    let r = minimal_gap(&inst, &opts).unwrap();
    let (lo, hi) = r.bracket;
    let (mut best_g, mut best_d) = (lo, f64::INFINITY);
    for i in 0..=100_000 {
        let g = lo + (hi - lo) * i as f64 / 100_000.0;
        let v = dense_levels(&inst, g);
        if v[1] - v[0] < best_d {
            best_d = v[1] - v[0];
            best_g = g;
        }
    }
    assert!((r.gamma_star - best_g).abs() < 1e-4, "{} vs {best_g}", r.gamma_star);
    assert!(r.delta_min <= best_d + 1e-10);
    assert!(best_d - r.delta_min < 1e-8);
}

#[test]
fn search_beats_any_grid_and_is_deterministic() {
    let inst = RemInstance::sample(11, 21).unwrap();
    let r = minimal_gap(&inst, &GapOptions::default()).unwrap();
    assert_eq!(r, minimal_gap(&inst, &GapOptions::default()).unwrap());
    let (lo, hi) = r.bracket;
    assert!(lo <= r.gamma_star && r.gamma_star <= hi);
    let gammas: Vec<f64> = (0..=60).map(|i| lo + (hi - lo) * i as f64 / 60.0).collect();
    let curve = spectrum_vs_field(&inst, &gammas, 2, 1e-10, true).unwrap();
    let grid_min = curve.gaps().into_iter().fold(f64::INFINITY, f64::min);
    assert!(r.delta_min <= grid_min * (1.0 + 1e-6));
}

#[test]
fn ground_level_is_concave_beyond_crossing() {
    let n = 12;
    let inst = RemInstance::sample(n, 6).unwrap();
    let r = minimal_gap(&inst, &GapOptions::default()).unwrap();
    let gammas: Vec<f64> = (0..40).map(|i| r.gamma_star + 0.05 + 0.02 * i as f64).collect();
    let curve = spectrum_vs_field(&inst, &gammas, 2, 1e-11, true).unwrap();
    let e = &curve.levels[0];
    for w in e.windows(3) {
        assert!(w[0] - 2.0 * w[1] + w[2] <= 1e-6);
    }
}

#[test]
fn twelve_spin_median_gap_follows_prediction() {
    let r = gap_scaling_ensemble(&[12], 50, 2024, &GapOptions::default()).unwrap();
    assert!(r.fit.is_none());
    assert_eq!(r.excluded, 0);
    let deltas: Vec<f64> = r.records.iter().map(|x| x.delta_min).collect();
    let preds: Vec<f64> = r
        .records
        .iter()
        .map(|x| 2.0 * x.e0.abs() * 2f64.powi(-6))
        .collect();
    let ratio = median(&deltas).unwrap() / median(&preds).unwrap();
    assert!((0.5..=2.0).contains(&ratio), "ratio {ratio}");
    assert_eq!(r.stats[0].delta_min.count, 50);
}

#[test]
fn sixteen_spin_crossing_sits_at_classical_energy_density() {
    let inst = RemInstance::sample(16, 1).unwrap();
    let r = minimal_gap(&inst, &GapOptions::default()).unwrap();
    let predicted = inst.ground_energy().abs() / 16.0;
    assert!((r.gamma_star - predicted).abs() < 0.05, "{} vs {predicted}", r.gamma_star);
}
