use proptest::prelude::*;

use gaugeproj::gauge::GaugeFunction;
use gaugeproj::hierarchy::{
    build_hierarchy, choose_branching, derive_radius_schedule, validate_hierarchy, DiscHierarchy, HierarchyOptions,
    RadiusSchedule,
};

fn build(s: f64, depth: usize) -> DiscHierarchy {
    let f = GaugeFunction::power(s).unwrap();
    let sch = derive_radius_schedule(&f, depth).unwrap();
    let b = choose_branching(&f, &sch).unwrap();
    build_hierarchy(&f, &sch, &b, None, HierarchyOptions::default()).unwrap()
}

#[test]
fn mass_product_brackets_by_hand() {
    for s in [0.3, 0.5] {
        let h = build(s, 4);
        let lr = &h.schedule().log_r;
        let log_a = s * lr[0];
        let mut log_prod = 0.0;
        for k in 1..=4 {
            log_prod += (h.level(k).n as f64).ln();
            let m = log_prod + s * lr[k];
            assert!(m >= log_a - 1e-12 && m <= log_a + 2f64.ln() + 1e-12, "s={s} k={k}");
            // f(r_{k}) < f(r_{k-1}) / 4 and f(r)/r grows by more than 3
            assert!(s * (lr[k] - lr[k - 1]) < -(4f64.ln()));
            assert!((s - 1.0) * (lr[k] - lr[k - 1]) > 3f64.ln());
            // N_k r_k < r_{k-1}
            assert!((h.level(k).n as f64).ln() + lr[k] < lr[k - 1]);
        }
        assert!(validate_hierarchy(&h).all_pass());
    }
}

#[test]
fn brute_force_disjointness() {
    let h = build(0.5, 3);
    for k in 1..=3 {
        let c = h.centers(k).unwrap();
        let rho = h.level(k).rho;
        let mut min_gap = f64::INFINITY;
        for i in 0..c.len() {
            for j in i + 1..c.len() {
                let d = (c[i][0] - c[j][0]).hypot(c[i][1] - c[j][1]);
                min_gap = min_gap.min(d - 2.0 * rho);
            }
        }
        assert!(min_gap > 0.0, "level {k}: {min_gap}");
        // siblings are at least r_k apart (gap exceeds radius)
        assert!(min_gap > rho * (1.0 - 1e-9), "level {k}");
    }
}

#[test]
fn children_inside_parents_by_hand() {
    let h = build(0.5, 3);
    for k in 1..=3 {
        let children = h.centers(k).unwrap();
        let parents = h.centers(k - 1).unwrap();
        let n = h.level(k).n as usize;
        for (i, c) in children.iter().enumerate() {
            let p = parents[i / n];
            let d = (c[0] - p[0]).hypot(c[1] - p[1]);
            assert!(d + h.level(k).rho <= h.level(k - 1).rho * (1.0 + 1e-12));
        }
    }
}

#[test]
fn power_08_depth5_uses_implicit_storage() {
    let f = GaugeFunction::power(0.8).unwrap();
    let sch = derive_radius_schedule(&f, 5).unwrap();
    let b = choose_branching(&f, &sch).unwrap();
    assert!(build_hierarchy(&f, &sch, &b, None, HierarchyOptions::default()).is_err());
    let h = build_hierarchy(&f, &sch, &b, None, HierarchyOptions { disc_cap: u128::MAX }).unwrap();
    assert!(h.disc_count(5) > 1_000_000_000);
    let rep = validate_hierarchy(&h);
    assert!(rep.all_pass(), "{:?}", rep.failures());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn children_fit_flag_matches_oracle(n in 2u64..12, ratio in 0.01f64..0.6) {
        let f = GaugeFunction::power(0.5).unwrap();
        let sch = RadiusSchedule::from_log_radii(vec![0.0, ratio.ln()]).unwrap();
        let h = DiscHierarchy::from_parts(f, sch, vec![n], None, HierarchyOptions::default()).unwrap();
        let rep = validate_hierarchy(&h);
        let eq23 = rep.checks.iter().find(|c| c.anchor == "Eq23").unwrap();
        prop_assert_eq!(eq23.pass, (n as f64) * ratio < 1.0);
        // gap width from 2 N r_1 + (N - 1) s_1 = 2 r_0
        let want = (2.0 - 2.0 * n as f64 * ratio) / (n - 1) as f64;
        prop_assert!((h.gap_width(1) - want).abs() < 1e-12);
    }

    #[test]
    fn path_index_round_trip(idx in 0u128..7290) {
        let h = build(0.5, 4);
        let p = h.path_of(4, idx);
        prop_assert_eq!(p.len(), 4);
        let mut back: u128 = 0;
        for k in 1..=4 {
            back = back * h.level(k).n as u128 + p[k - 1] as u128;
        }
        prop_assert_eq!(back, idx);
    }
}
