use approx::assert_relative_eq;
use nlkg_core::functionals::gn_quotient;
use nlkg_core::ground_state::find_ground_state_unchecked;
use nlkg_core::inequalities::{
    corpus, gn_corpus_min, hardy_check, sobolev_fit, sobolev_ratio, TestField,
};
use nlkg_core::monitors::Status;
use nlkg_core::{find_ground_state, ModelParams, RadialGrid};

#[test]
fn corpus_is_seeded_and_compactly_supported() {
    let a = corpus(2024, 100);
    assert_eq!(a, corpus(2024, 100));
    assert_ne!(a, corpus(2025, 100));
    for f in &a {
        assert!((6.0..12.0).contains(&f.support));
        assert!((1..=4).contains(&f.bumps.len()));
        assert_eq!(f.value(f.support), 0.0);
        assert_eq!(f.value(f.support + 1.0), 0.0);
    }
    let json = serde_json::to_string(&a[0]).unwrap();
    assert_eq!(serde_json::from_str::<TestField>(&json).unwrap(), a[0]);
}

#[test]
fn hardy_holds_on_corpus() {
    let fields = corpus(7, 100);
    for d in [3, 4, 5] {
        let g = RadialGrid::new(d, 16.0, 2048).unwrap();
        let c = hardy_check(&g, &fields);
        assert_eq!(c.status, Status::Pass, "d={d}: {c:?}");
        assert!(c.worst_value < 0.0);
    }
}

#[test]
fn radial_sobolev_ratio() {
    let g = RadialGrid::new(3, 16.0, 4096).unwrap();
    let f = TestField { bumps: vec![(0.0, 0.5, 1.0)], support: 6.0 };
    let x = f.sample(&g);
    assert!(sobolev_ratio(&g, &x, 1.0, 3.0).is_some());
    assert!(sobolev_ratio(&g, &x, 7.0, 3.0).is_none());
    let fit = sobolev_fit(&g, &corpus(2024, 100), &[1.0, 2.0, 4.0], 3.0).unwrap();
    assert!(fit.constant > 0.0 && fit.relative_change() <= 1e-2, "{fit:?}");
}

#[test]
fn gagliardo_nirenberg_ordering() {
    let grid = RadialGrid::shared(3, 30.0, 4096).unwrap();
    let m0 = ModelParams::new(3, 3.0, 0.0, 0.0).unwrap();
    let q0 = find_ground_state_unchecked(&m0, grid.clone()).unwrap();
    let inv_c = gn_quotient(&grid, &q0.profile, &m0).unwrap();
    // Pohozaev at d = p = 3: kinetic = 3·mass, potential = 4·mass
    assert_relative_eq!(inv_c, 27f64.sqrt() / 4.0 * 18.8972513, max_relative = 1e-4);
    let fields = corpus(11, 100);
    assert!(gn_corpus_min(&grid, &fields, &m0).unwrap() >= inv_c);
    let m1 = m0.with_gamma(1.0).unwrap();
    let q1 = find_ground_state(&m1, grid.clone()).unwrap();
    let bound = (1.0 - 1e-3) * inv_c;
    assert!(gn_quotient(&grid, &q1.profile, &m1).unwrap() >= bound);
    assert!(gn_corpus_min(&grid, &fields, &m1).unwrap() >= bound);
}
