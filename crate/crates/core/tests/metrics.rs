use kuramoto_core::metrics::{
    balance_signs, bl_distance_upper, fit_to_range, lattice_weights, lemma_cal_check,
    lemma_cal_check_cases, min_cost_assignment, modified_wp, project_mean_zero,
    wasserstein_p_fiber, w1_empirical, w1_fiberwise,
};
use kuramoto_core::{EmpiricalMeasure, FrequencyDensity, PhaseEnsemble, QuantileField};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn brute_force(a: &PhaseEnsemble<f64>, b: &PhaseEnsemble<f64>) -> f64 {
    let n = a.len();
    permutations(n)
        .iter()
        .map(|p| {
            (0..n)
                .map(|i| (a.theta[i] - b.theta[p[i]]).hypot(a.omega[i] - b.omega[p[i]]))
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
        / n as f64
}

fn random_ensemble(rng: &mut impl Rng, n: usize) -> PhaseEnsemble<f64> {
    let theta = (0..n).map(|_| rng.gen_range(0.5..5.5)).collect();
    let omega = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    PhaseEnsemble::new(theta, omega).unwrap()
}

#[test]
fn assignment_matches_exhaustive_search() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    for n in 1..=6 {
        for _ in 0..50 {
            let a = random_ensemble(&mut rng, n);
            let b = random_ensemble(&mut rng, n);
            let exact = w1_empirical(
                &EmpiricalMeasure::from_ensemble(&a),
                &EmpiricalMeasure::from_ensemble(&b),
            )
            .unwrap();
            assert!((exact - brute_force(&a, &b)).abs() < 1e-12);
        }
    }
}

#[test]
fn single_frequency_assignment_is_sorted_matching() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    for _ in 0..100 {
        let a = PhaseEnsemble::new((0..4).map(|_| rng.gen_range(0.5..5.5)).collect(), vec![0.2; 4]).unwrap();
        let b = PhaseEnsemble::new((0..4).map(|_| rng.gen_range(0.5..5.5)).collect(), vec![0.2; 4]).unwrap();
        let (ea, eb) = (EmpiricalMeasure::from_ensemble(&a), EmpiricalMeasure::from_ensemble(&b));
        let exact: f64 = w1_empirical(&ea, &eb).unwrap();
        assert!((exact - w1_fiberwise(&ea, &eb).unwrap()).abs() < 1e-12);
        assert!((exact - brute_force(&a, &b)).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn assignment_is_optimal_against_random_permutations(
        cost in prop::collection::vec(0.0f64..10.0, 25),
        perm in Just((0..5).collect::<Vec<usize>>()).prop_shuffle(),
    ) {
        let (assign, total) = min_cost_assignment(&cost, 5).unwrap();
        let mut seen = assign.clone();
        seen.sort();
        prop_assert_eq!(seen, (0..5).collect::<Vec<_>>());
        let other: f64 = perm.iter().enumerate().map(|(i, &j)| cost[i * 5 + j]).sum();
        prop_assert!(total <= other + 1e-12);
    }
}

fn random_field(rng: &mut impl Rng, g: &FrequencyDensity<f64>, m: usize) -> QuantileField<f64> {
    let mut phi = Vec::new();
    for _ in 0..g.grid().len() {
        let mut col: Vec<f64> = (0..m).map(|_| rng.gen_range(0.5..5.5)).collect();
        col.sort_by(f64::total_cmp);
        phi.extend(col);
    }
    QuantileField::new(m, g.grid().clone(), phi).unwrap()
}

#[test]
fn modified_distance_is_a_metric_on_the_lattice() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(5);
    let g = FrequencyDensity::tent(1.0, 6).unwrap();
    for _ in 0..100 {
        let a = random_field(&mut rng, &g, 12);
        let b = random_field(&mut rng, &g, 12);
        let c = random_field(&mut rng, &g, 12);
        for p in [1.0, 2.0, 3.0, f64::INFINITY] {
            let ab = modified_wp(&a, &b, p).unwrap();
            let bc = modified_wp(&b, &c, p).unwrap();
            let ac = modified_wp(&a, &c, p).unwrap();
            assert!(ac <= ab + bc + 1e-12);
            assert_eq!(ab, modified_wp(&b, &a, p).unwrap());
            assert!(ab > 0.0);
        }
    }
}

#[test]
fn fiber_distance_is_shift_invariant_and_homogeneous() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(9);
    let g = FrequencyDensity::uniform(0.5, 4).unwrap();
    for _ in 0..50 {
        let a = random_field(&mut rng, &g, 10).translated(-0.4).unwrap();
        let b = random_field(&mut rng, &g, 10).translated(-0.4).unwrap();
        let c = rng.gen_range(0.0..0.3);
        let lambda = rng.gen_range(0.1..1.0);
        let scaled = QuantileField::new(
            10,
            g.grid().clone(),
            a.phi().iter().zip(b.phi()).map(|(x, y)| x + lambda * (y - x)).collect(),
        )
        .unwrap();
        for k in 0..4 {
            for p in [1.0, 2.0, 5.0, f64::INFINITY] {
                let base = wasserstein_p_fiber(&a, &b, k, p).unwrap();
                let shifted = wasserstein_p_fiber(&a.translated(c).unwrap(), &b.translated(c).unwrap(), k, p).unwrap();
                assert!((base - shifted).abs() < 1e-12);
                let s = wasserstein_p_fiber(&a, &scaled, k, p).unwrap();
                assert!((s - lambda * base).abs() < 1e-12);
            }
        }
    }
}

/// Smooth random pair `b = a + c (1 + ε ψ)` with `ψ` a random smooth field in
/// `[−1, 1]` and `ε = 1%`.
fn smooth_pair(rng: &mut impl Rng) -> (QuantileField<f64>, QuantileField<f64>) {
    let g = FrequencyDensity::tent(0.5, 16).unwrap();
    let m = 64;
    let (a1, a2, a3) = (rng.gen_range(0.1..0.4), rng.gen_range(0.0..0.5), rng.gen_range(0.0..PI));
    let c = rng.gen_range(0.05..0.5);
    let (f1, f2, ph) = (rng.gen_range(0.5..3.0), rng.gen_range(0.5..3.0), rng.gen_range(0.0..PI));
    let fr = kuramoto_core::eta_fractions::<f64>(m);
    let mut pa = Vec::new();
    let mut pb = Vec::new();
    for &w in &g.grid().nodes {
        for &s in &fr {
            let base = 2.0 + 2.0 * s + a1 * (s * PI).sin() * (1.0 + a2 * (w + a3).sin());
            let psi = (f1 * s + f2 * w + ph).sin();
            pa.push(base);
            pb.push(base + c * (1.0 + 0.01 * psi));
        }
    }
    (
        QuantileField::new(m, g.grid().clone(), pa).unwrap(),
        QuantileField::new(m, g.grid().clone(), pb).unwrap(),
    )
}

#[test]
fn large_order_approaches_sup_distance() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(13);
    for _ in 0..100 {
        let (a, b) = smooth_pair(&mut rng);
        let sup = modified_wp(&a, &b, f64::INFINITY).unwrap();
        let w64 = modified_wp(&a, &b, 64.0).unwrap();
        assert!((sup - w64).abs() <= 0.02 * sup);
    }
}

#[test]
fn distance_grows_with_order_towards_sup() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(17);
    let g = FrequencyDensity::uniform(0.5, 8).unwrap();
    for _ in 0..20 {
        let a = random_field(&mut rng, &g, 16);
        let b = random_field(&mut rng, &g, 16);
        // unit total mass: L^p norms increase with p
        let orders = [1.0, 2.0, 4.0, 16.0, 64.0, 1024.0];
        let d: Vec<f64> = orders.iter().map(|&p| modified_wp(&a, &b, p).unwrap()).collect();
        assert!(d.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        let sup = modified_wp(&a, &b, f64::INFINITY).unwrap();
        assert!(d[5] <= sup + 1e-12);
        assert!(modified_wp(&a, &b, 1e5).unwrap() >= 0.99 * sup);
    }
}

#[test]
fn lemma_holds_on_random_fields() {
    let g = FrequencyDensity::uniform(0.5, 8).unwrap();
    let w = lattice_weights(g.grid(), 16);
    let mut rng = rand::rngs::StdRng::seed_from_u64(23);
    for _ in 0..1000 {
        let raw: Vec<f64> = (0..w.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let phi = fit_to_range(&project_mean_zero(&raw, &w), 0.999 * PI / 2.0);
        for p in [1.0, 2.0, 3.0, 5.0] {
            assert!(lemma_cal_check(&phi, &w, p).unwrap().holds);
        }
    }
}

#[test]
fn lemma_cases_hold_for_prescribed_sign_patterns() {
    let g = FrequencyDensity::uniform(0.5, 4).unwrap();
    let w = lattice_weights(g.grid(), 8);
    let mut rng = rand::rngs::StdRng::seed_from_u64(29);
    for _ in 0..300 {
        let raw: Vec<f64> = (0..w.len())
            .map(|_| match rng.gen_range(0..3) {
                0 => 0.0,
                1 => rng.gen_range(0.01..1.5),
                _ => -rng.gen_range(0.01..1.5),
            })
            .collect();
        let Ok(phi) = balance_signs(&raw, &w) else { continue };
        for p in [1.0, 2.0, 3.0, 5.0] {
            let cases = lemma_cal_check_cases(&phi, &w, p).unwrap();
            assert!(cases.iter().all(|c| c.holds));
            let total: f64 = cases.iter().map(|c| c.value).sum();
            let r = lemma_cal_check(&phi, &w, p).unwrap();
            assert!((total - r.lhs).abs() < 1e-13);
            assert!(r.holds);
        }
    }
}

#[test]
fn two_block_field_closed_form() {
    let w = vec![0.25; 4];
    for c in [0.1f64, 0.5, 1.0, 1.5] {
        let r = lemma_cal_check(&[c, c, -c, -c], &w, 2.0).unwrap();
        assert!((r.lhs + c * c.sin()).abs() < 1e-15);
        assert!((r.rhs + 2.0 / PI * c * c).abs() < 1e-15);
        assert!(r.holds);
    }
}

#[test]
fn first_moment_bounds_transport_to_the_centre() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(31);
    for _ in 0..50 {
        let n = rng.gen_range(1..40);
        let e = PhaseEnsemble::identical((0..n).map(|_| rng.gen_range(0.5..5.5)).collect()).unwrap();
        let centre = rng.gen_range(1.0..5.0);
        let dirac = PhaseEnsemble::identical(vec![centre; n]).unwrap();
        let w1 = w1_empirical(
            &EmpiricalMeasure::from_ensemble(&e),
            &EmpiricalMeasure::from_ensemble(&dirac),
        )
        .unwrap();
        assert!(bl_distance_upper(&e, centre) >= w1 - 1e-12);
    }
}
