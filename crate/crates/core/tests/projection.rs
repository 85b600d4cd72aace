use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gaugeproj::gauge::GaugeFunction;
use gaugeproj::hierarchy::{
    build_hierarchy, choose_branching, derive_radius_schedule, DiscHierarchy, HierarchyOptions,
};
use gaugeproj::measure::discrete_energy;
use gaugeproj::projection::{
    greedy_pieces, lipschitz_transfer, merge_intervals, project_disc, project_measure, qualifies, random_disc_cover,
    sweep_directions, targeted_angles, uniform_angles, IntervalCover,
};
use gaugeproj::quad::cosine_power_integral;

fn built(s: f64, depth: usize) -> DiscHierarchy {
    let f = GaugeFunction::power(s).unwrap();
    let sch = derive_radius_schedule(&f, depth).unwrap();
    let b = choose_branching(&f, &sch).unwrap();
    build_hierarchy(&f, &sch, &b, None, HierarchyOptions::default()).unwrap()
}

fn raw_intervals() -> impl Strategy<Value = Vec<[f64; 2]>> {
    prop::collection::vec((-10.0f64..10.0, 0.0f64..3.0).prop_map(|(a, w)| [a, a + w]), 1..60)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn merge_is_canonical_and_idempotent(raw in raw_intervals()) {
        let m = merge_intervals(&raw);
        prop_assert!(m.is_canonical());
        let again = merge_intervals(&m.intervals);
        prop_assert_eq!(&again.intervals, &m.intervals);
        let sum: f64 = raw.iter().map(|i| i[1] - i[0]).sum();
        let longest = raw.iter().map(|i| i[1] - i[0]).fold(0.0, f64::max);
        prop_assert!(m.total_length() <= sum + 1e-9);
        prop_assert!(m.total_length() >= longest - 1e-12);
        for iv in &raw {
            let inside = m.intervals.iter().any(|c| c[0] <= iv[0] && iv[1] <= c[1]);
            prop_assert!(inside);
        }
    }

    #[test]
    fn greedy_pieces_cover_with_short_pieces(raw in raw_intervals(), rho in 0.05f64..4.0) {
        let m = merge_intervals(&raw);
        let p = greedy_pieces(&m.intervals, rho);
        let per_component: usize = m.intervals.iter().map(|i| (((i[1] - i[0]) / rho).ceil() as usize).max(1)).sum();
        let span = m.intervals.last().unwrap()[1] - m.intervals[0][0];
        prop_assert!(p.len() <= per_component);
        prop_assert!(p.len() as f64 >= (m.total_length() / rho).ceil() - 1e-9);
        prop_assert!(p.len() <= (span / rho).floor() as usize + 1);
        prop_assert!(p.iter().all(|&l| l <= rho * (1.0 + 1e-12)));
        let sum: f64 = p.iter().sum();
        prop_assert!(sum >= m.total_length() - 1e-9 && sum <= span + 1e-9);
    }

    #[test]
    fn cosine_power_integral_matches_gamma(s in 0.01f64..0.95) {
        use statrs::function::gamma::gamma;
        let want = PI.sqrt() * gamma((1.0 - s) / 2.0) / gamma(1.0 - s / 2.0);
        let got = cosine_power_integral(s).unwrap();
        prop_assert!((got - want).abs() < 1e-8 * want, "{} vs {}", got, want);
    }

    #[test]
    fn projected_disc_has_diameter_length(x in -5.0f64..5.0, y in -5.0f64..5.0, log_r in -20.0f64..2.0, theta in 0.0f64..PI) {
        let iv = project_disc([x, y], log_r, theta);
        let r = log_r.exp();
        prop_assert!(((iv[1] - iv[0]) - 2.0 * r).abs() <= 1e-12 * (1.0 + x.abs() + y.abs()));
        let mid = 0.5 * (iv[0] + iv[1]);
        prop_assert!((mid - (x * theta.cos() + y * theta.sin())).abs() < 1e-9);
    }

    #[test]
    fn projection_is_one_lipschitz_for_energy(seed in 0u64..500, theta in 0.0f64..PI) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let atoms: Vec<([f64; 2], f64)> = (0..40).map(|_| ([rng.gen(), rng.gen()], 1.0 / 40.0)).collect();
        let g = GaugeFunction::power(0.6).unwrap();
        let planar = discrete_energy(&g, &atoms).unwrap();
        let line: Vec<([f64; 2], f64)> = project_measure(&atoms, theta).into_iter().map(|(t, m)| ([t, 0.0], m)).collect();
        let projected = discrete_energy(&g, &line).unwrap();
        prop_assert!(projected >= planar * (1.0 - 1e-12));
        let mass: f64 = line.iter().map(|a| a.1).sum();
        prop_assert!((mass - 1.0).abs() < 1e-12);
    }
}

#[test]
fn lipschitz_transfer_on_random_covers() {
    let gauges = [
        GaugeFunction::power(0.5).unwrap(),
        GaugeFunction::power(0.9).unwrap(),
        GaugeFunction::log_power(1.0).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let thetas = uniform_angles(32);
    for _ in 0..100 {
        let discs = random_disc_cover(&mut rng, 50, 1e-4, 0.1);
        for g in &gauges {
            for &t in &thetas {
                let (proj, planar) = lipschitz_transfer(g, &discs, t);
                assert!(proj <= planar * (1.0 + 1e-12), "{} at {t}: {proj} > {planar}", g.label());
            }
        }
    }
}

#[test]
fn merged_cover_matches_brute_force_union() {
    let h = built(0.5, 2);
    let theta = 0.7;
    let mut raw = Vec::new();
    for i in 0..h.disc_count(2) {
        let c = h.center_of(&h.path_of(2, i));
        raw.push(project_disc(c, h.level(2).rho.ln(), theta));
    }
    let cover = IntervalCover::from_raw(&raw, theta, h.log_unit());
    let mut sorted = raw.clone();
    sorted.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let mut union = 0.0;
    let mut reach = f64::NEG_INFINITY;
    for iv in &sorted {
        let start = iv[0].max(reach);
        if iv[1] > start {
            union += iv[1] - start;
        }
        reach = reach.max(iv[1]);
    }
    assert!((cover.total_length() - union).abs() < 1e-12);
}

#[test]
fn targeted_grid_hits_every_arc() {
    let h = built(0.5, 4);
    let thetas = targeted_angles(&h, 256, 16);
    assert_eq!(thetas.len(), 256);
    assert!(thetas.windows(2).all(|w| w[0] <= w[1]));
    for k in 0..4 {
        let hits = thetas.iter().filter(|&&t| qualifies(&h, t, k)).count();
        assert!(hits >= 16, "k={k}: {hits}");
    }
}

#[test]
fn sweep_power_half_has_no_violations() {
    let f = GaugeFunction::power(0.5).unwrap();
    let h = built(0.5, 4);
    let g = f.log_growth_partner().unwrap();
    let t = sweep_directions(&h, &g, &targeted_angles(&h, 64, 8), 4).unwrap();
    assert!(!t.rows.is_empty());
    assert_eq!(t.violations(), 0);
    for r in &t.rows {
        assert!(r.pieces >= 1 && r.cost > 0.0);
        assert!((r.margin - (r.bound / r.cost).ln()).abs() < 1e-9);
    }
    assert!(sweep_directions(&h, &g, &uniform_angles(31), 4).is_err());
}
