use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gaugeproj::gauge::GaugeFunction;
use gaugeproj::hierarchy::{
    build_hierarchy, choose_branching, derive_radius_schedule, DiscHierarchy, HierarchyOptions,
};
use gaugeproj::measure::{discrete_energy, frostman_scan, mc_energy, potential, NaturalMeasure, WeightedAtoms};

fn built(s: f64, depth: usize) -> DiscHierarchy {
    let f = GaugeFunction::power(s).unwrap();
    let sch = derive_radius_schedule(&f, depth).unwrap();
    let b = choose_branching(&f, &sch).unwrap();
    build_hierarchy(&f, &sch, &b, None, HierarchyOptions::default()).unwrap()
}

fn uniform_segment(n: usize, seed: u64) -> Vec<([f64; 2], f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| ([rng.gen::<f64>(), 0.0], 1.0 / n as f64)).collect()
}

fn simpson(g: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = g(a) + g(b);
    for i in 1..n {
        s += g(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn uniform_segment_energy() {
    let atoms = uniform_segment(10_000, 7);
    let m = WeightedAtoms::new(&atoms).unwrap();
    let f = GaugeFunction::power(0.5).unwrap();
    let est = mc_energy(&f, &m, 1_000_000, 3).unwrap();
    // double integral of |x-y|^{-1/2} over the unit square
    let want = 8.0 / 3.0 * (1.0 - 1e-4);
    assert!((est.mean - want).abs() < 0.02 * want, "{est:?}");
}

#[test]
fn segment_potential_matches_quadrature() {
    let atoms = uniform_segment(10_000, 11);
    let m = WeightedAtoms::new(&atoms).unwrap();
    let f = GaugeFunction::power(0.5).unwrap();
    let on = potential(&f, &m, [0.5, 0.0], 200_000, 1).unwrap();
    assert!((on.mean - 2.0 * 2f64.sqrt()).abs() < 0.05 * 2.0 * 2f64.sqrt(), "{on:?}");
    let off = potential(&f, &m, [0.5, 1.0], 200_000, 2).unwrap();
    let want = simpson(|y| ((0.5 - y).powi(2) + 1.0).powf(-0.25), 0.0, 1.0, 2000);
    assert!((off.mean - want).abs() < 0.01 * want, "{} vs {want}", off.mean);
}

#[test]
fn exact_and_mc_energy_agree() {
    let h = built(0.5, 3);
    let nm = NaturalMeasure::new(&h, 3).unwrap();
    let atoms = nm.atoms(10_000).unwrap();
    assert_eq!(atoms.len(), 729);
    let f = GaugeFunction::power(0.5).unwrap();
    let exact = discrete_energy(&f, &atoms).unwrap();
    let est = mc_energy(&f, &nm, 200_000, 5).unwrap();
    assert!((est.mean - exact).abs() < 3.0 * est.stderr + 1e-9 * exact, "{est:?} vs {exact}");
    let wa = WeightedAtoms::new(&atoms).unwrap();
    let est2 = mc_energy(&f, &wa, 200_000, 6).unwrap();
    assert!((est2.mean - exact).abs() < 3.0 * est2.stderr, "{est2:?} vs {exact}");
}

#[test]
fn energy_is_mean_potential() {
    let atoms = uniform_segment(400, 13);
    let f = GaugeFunction::power(0.3).unwrap();
    let exact = discrete_energy(&f, &atoms).unwrap();
    let mut acc = 0.0;
    for (i, (x, mx)) in atoms.iter().enumerate() {
        let mut phi = 0.0;
        for (j, (y, my)) in atoms.iter().enumerate() {
            if i != j {
                phi += my * ((x[0] - y[0]).abs()).powf(-0.3);
            }
        }
        acc += mx * phi;
    }
    assert!((acc - exact).abs() < 1e-10 * exact);
}

#[test]
fn frostman_holds_and_scaled_mass_fails() {
    let f = GaugeFunction::power(0.5).unwrap();
    let h = built(0.5, 4);
    let nm = NaturalMeasure::new(&h, 4).unwrap();
    let rep = frostman_scan(&nm, &f, 10_000, 0).unwrap();
    assert_eq!(rep.violations, 0);
    assert!(rep.c_emp <= rep.c_bound);
    let scaled = NaturalMeasure::new(&h, 4).unwrap().with_mass_scale(10.0 * rep.c_bound / rep.c_emp);
    assert!(frostman_scan(&scaled, &f, 10_000, 0).unwrap().violations > 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ball_mass_monotone_in_radius(seed in 0u64..1000, a in -9.0f64..0.5, b in -9.0f64..0.5) {
        let h = built(0.5, 3);
        let nm = NaturalMeasure::new(&h, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let path = nm.sample_path(&mut rng);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let m_lo = nm.ball_mass_at_atom(&path, lo);
        let m_hi = nm.ball_mass_at_atom(&path, hi);
        prop_assert!(m_lo <= m_hi + 1e-12);
        prop_assert!(m_hi <= 1.0 + 1e-12);
        prop_assert!(m_lo >= nm.log_atom_mass().exp() * (1.0 - 1e-12));
    }
}
