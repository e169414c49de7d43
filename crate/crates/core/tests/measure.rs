use kuramoto_core::{
    build_cdf, dirac_comb_from_density, pseudo_inverse, EmpiricalMeasure, FrequencyDensity,
    GridDensity, PhaseEnsemble, QuantileField, Support,
};
use proptest::prelude::*;
use std::f64::consts::PI;

fn invariants_hold(g: &FrequencyDensity<f64>) {
    g.validate().unwrap();
    let grid = g.grid();
    assert!((grid.total_mass() - 1.0).abs() < 1e-10);
    assert!(grid.first_moment().abs() < 1e-12);
    let n = grid.len();
    for k in 0..n {
        assert!((grid.nodes[k] + grid.nodes[n - 1 - k]).abs() < 1e-12);
        assert!((grid.density[k] - grid.density[n - 1 - k]).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn uniform_constructor_is_admissible(radius in 0.01f64..5.0, cells in 1usize..200) {
        invariants_hold(&FrequencyDensity::uniform(radius, cells).unwrap());
    }

    #[test]
    fn tent_constructor_is_admissible(radius in 0.01f64..5.0, cells in 1usize..200) {
        invariants_hold(&FrequencyDensity::tent(radius, cells).unwrap());
    }

    #[test]
    fn symmetric_atoms_are_admissible(
        pairs in prop::collection::vec((0.01f64..3.0, 0.01f64..1.0), 1..8),
        centre in 0.0f64..1.0,
    ) {
        let total: f64 = pairs.iter().map(|p| 2.0 * p.1).sum::<f64>() + centre;
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        for (i, &(w, m)) in pairs.iter().enumerate() {
            // distinct positions
            let w = w + i as f64 * 3.0;
            atoms.push((w, m / total));
            atoms.push((-w, m / total));
        }
        if centre > 0.0 {
            atoms.push((0.0, centre / total));
        }
        let mass: f64 = atoms.iter().map(|a| a.1).sum();
        prop_assume!((mass - 1.0).abs() < 1e-13);
        invariants_hold(&FrequencyDensity::atoms(atoms).unwrap());
    }

    #[test]
    fn dilation_keeps_invariants(radius in 0.1f64..2.0, lambda in 0.1f64..4.0) {
        let g = FrequencyDensity::tent(radius, 21).unwrap().dilated(lambda).unwrap();
        invariants_hold(&g);
        prop_assert!((g.support_radius() - radius / lambda).abs() < 1e-12);
    }
}

fn exact_quantile(level: f64) -> f64 {
    // F(θ) = (θ + (1 − cos θ)/2) / 2π for the density (1 + sin θ/2)/2π
    let cdf = |t: f64| (t + 0.5 * (1.0 - t.cos())) / (2.0 * PI);
    let (mut lo, mut hi) = (0.0, 2.0 * PI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn round_trip_error(m_theta: usize) -> f64 {
    let g = FrequencyDensity::<f64>::identical();
    let f = GridDensity::from_profile(m_theta, &g, |th, _| 1.0 + 0.5 * th.sin()).unwrap();
    let fractions = kuramoto_core::eta_fractions::<f64>(64);
    let q = pseudo_inverse(&build_cdf(&f, 0).unwrap(), &fractions).unwrap();
    q.iter()
        .zip(&fractions)
        .map(|(v, s)| (v - exact_quantile(*s)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn inversion_error_halves_under_refinement() {
    let errors: Vec<f64> = [32, 64, 128, 256].iter().map(|&m| round_trip_error(m)).collect();
    for w in errors.windows(2) {
        assert!(w[0] / w[1] >= 1.9, "errors {errors:?}");
    }
}

fn comb_w1(n: usize) -> f64 {
    let g = FrequencyDensity::<f64>::identical();
    let f = GridDensity::from_profile(256, &g, |th, _| {
        let x = (th - PI) / 1.5;
        if x.abs() < 1.0 {
            1.0 + (PI * x).cos()
        } else {
            0.0
        }
    })
    .unwrap();
    let comb = dirac_comb_from_density(&f, n).unwrap();
    let mut atoms = comb.theta.clone();
    atoms.sort_by(f64::total_cmp);
    let cdf = build_cdf(&f, 0).unwrap();
    // ∫_0^1 |Q_comb(s) − Q_f(s)| ds by the midpoint rule on 2^16 points
    let samples = 1 << 16;
    let mut acc = 0.0;
    for i in 0..samples {
        let s = (i as f64 + 0.5) / samples as f64;
        let atom = atoms[((s * n as f64) as usize).min(n - 1)];
        acc += (atom - cdf.quantile(s * cdf.total()).unwrap()).abs();
    }
    acc / samples as f64
}

#[test]
fn comb_approaches_its_density() {
    let w: Vec<f64> = [16, 64, 256].iter().map(|&n| comb_w1(n)).collect();
    assert!(w[0] > w[1] && w[1] > w[2], "{w:?}");
    assert!(w[2] < 5e-3);
}

#[test]
fn quantile_support_box_uses_endpoint_quantiles() {
    let g = FrequencyDensity::<f64>::uniform(0.5, 4).unwrap();
    let phi: Vec<f64> = (0..4)
        .flat_map(|k| (0..10).map(move |j| 2.0 + 0.05 * k as f64 + 0.1 * j as f64 + 0.002 * (j * j) as f64))
        .collect();
    let q = QuantileField::new(10, g.grid().clone(), phi).unwrap();
    let b = q.support_box(0.0).unwrap();
    let lo = (0..4).map(|k| q.lower_endpoint(k)).fold(f64::INFINITY, f64::min);
    let hi = (0..4).map(|k| q.upper_endpoint(k)).fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(b.theta_min, lo);
    assert_eq!(b.theta_max, hi);
    assert_eq!(b.omega_diameter(), 0.75);
}

#[test]
fn support_box_of_atoms() {
    let e = PhaseEnsemble::new(vec![1.0, 2.0, 1.5], vec![-0.5, 0.5, 0.0]).unwrap();
    let b = EmpiricalMeasure::from_ensemble(&e).support_box(0.0).unwrap();
    assert_eq!((b.theta_diameter(), b.omega_diameter()), (1.0, 1.0));
    let single = EmpiricalMeasure::from_ensemble(&PhaseEnsemble::identical(vec![3.0]).unwrap());
    let b = single.support_box(0.0).unwrap();
    assert_eq!((b.theta_diameter(), b.omega_diameter()), (0.0, 0.0));
}
