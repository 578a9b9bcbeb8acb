use std::sync::Arc;

use approx::assert_relative_eq;
use nlkg_core::functionals::{
    action_from, action_s, energy_charge, functional_k1_k, functional_l, functional_t, gn_quotient, virial_k,
    virial_k_from,
};
use nlkg_core::inequalities::corpus;
use nlkg_core::{
    find_ground_state, Canonical, FunctionalRecord, ModelParams, Norms, RadialGrid, StateSnapshot, VirialIndex, C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params(d: usize, p: f64, w: f64) -> ModelParams {
    ModelParams::new(d, p, 1.0, w).unwrap()
}

#[test]
fn k_coefficients_match_closed_forms() {
    for (d, p, w) in [(3, 3.0, 0.5), (3, 2.0, 0.3), (4, 2.0, 0.0), (5, 1.5, 0.7)] {
        let m = params(d, p, w);
        let df = d as f64;
        let [cm, ck, cp] = Canonical::D2.raw(&m).k_coeffs(&m);
        assert_eq!(cm, 0.0);
        assert_relative_eq!(ck, 2.0, max_relative = 1e-15);
        assert_relative_eq!(cp, df * (p - 1.0) / (p + 1.0), max_relative = 1e-14);
        let [cm, ck, cp] = Canonical::ZeroM1.raw(&m).k_coeffs(&m);
        assert_relative_eq!(cm, df * m.m2() / 2.0, max_relative = 1e-14);
        assert_relative_eq!(ck, (df - 2.0) / 2.0, max_relative = 1e-14);
        assert_relative_eq!(cp, df / (p + 1.0), max_relative = 1e-14);
        let [cm, _, _] = Canonical::TwoPm1.raw(&m).k_coeffs(&m);
        assert_relative_eq!(cm, m.q * (p - 1.0) * m.m2() / 2.0, max_relative = 1e-13, epsilon = 1e-15);
    }
}

#[test]
fn t_coefficients_closed_forms() {
    let m = params(3, 3.0, 0.5);
    let [tm, tk, tp] = Canonical::D2.index(&m).unwrap().t_coeffs(&m);
    assert_relative_eq!(tm, m.m2() / 2.0, max_relative = 1e-14);
    assert_relative_eq!(tk, 1.0 / 6.0, max_relative = 1e-14);
    assert_eq!(tp, 0.0);
    let m = params(3, 7.0 / 3.0, 0.2);
    let [tm, tk, tp] = Canonical::D2.index(&m).unwrap().t_coeffs(&m);
    assert_relative_eq!(tm, m.m2() / 2.0, max_relative = 1e-14);
    assert_eq!(tk, 0.0);
    assert_eq!(tp, 0.0);
}

#[test]
fn admissibility() {
    let m = params(3, 2.0, 0.0);
    assert!(Canonical::D2.index(&m).is_err());
    assert!(Canonical::TwoPm1.index(&m).is_ok());
    assert!(Canonical::ZeroM1.index(&m).is_ok());
    assert!(VirialIndex::new(0.0, 0.0, &m).is_err());
    assert!(VirialIndex::new(-1.0, -1.0, &m).is_err());
    let m = params(3, 3.0, 0.0);
    assert!(Canonical::D2.index(&m).is_ok());
    assert!(Canonical::TwoPm1.index(&m).is_err());
    assert!(Canonical::ZeroM1.index(&m).is_ok());
}

#[test]
fn mu_bar_positive_for_admissible_indices() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let m = params(3, 3.0, 0.0);
    let mut seen = 0;
    for _ in 0..2000 {
        let (a, b) = (rng.gen_range(0.0..5.0), rng.gen_range(-3.0..3.0));
        if let Ok(idx) = VirialIndex::new(a, b, &m) {
            seen += 1;
            assert!(idx.mu_bar(&m) > 0.0);
            assert!((m.p + 1.0) * a - 3.0 * b > 0.0);
        }
    }
    assert!(seen > 100);
}

#[test]
fn zero_field_functionals_vanish() {
    let g = RadialGrid::new(3, 10.0, 256).unwrap();
    let m = params(3, 3.0, 0.5);
    let z = vec![0.0; g.n];
    assert_eq!(action_s(&g, &z, &m), 0.0);
    for c in Canonical::ALL {
        let raw = c.raw(&m);
        assert_eq!(virial_k_from(&Norms::of(&g, &z, &m), &m, &raw), 0.0);
    }
    assert_eq!(functional_t(&g, &z, &m, &Canonical::D2.index(&m).unwrap()).unwrap(), 0.0);
    let s = StateSnapshot::zeros(Arc::new(g));
    assert_eq!(energy_charge(&s, &m), (0.0, 0.0));
    assert_eq!(functional_k1_k(&s, &m), (0.0, 0.0));
}

#[test]
fn virial_is_derivative_of_action_along_scaling() {
    let g = RadialGrid::new(3, 20.0, 2048).unwrap();
    let m = params(3, 3.0, 0.4);
    let eps = 1e-5;
    for field in corpus(11, 20) {
        let f = field.sample(&g);
        let n = Norms::of(&g, &f, &m);
        for c in Canonical::ALL {
            let idx = c.raw(&m);
            let fd = (action_from(&n.scaled(&m, &idx, eps), &m) - action_from(&n.scaled(&m, &idx, -eps), &m)) / (2.0 * eps);
            let k = virial_k_from(&n, &m, &idx);
            assert!((fd - k).abs() <= 1e-6 * (n.mass + n.kinetic + n.potential), "{c:?}: fd {fd} vs K {k}");
        }
    }
}

#[test]
fn scaled_norms_match_regridded_field() {
    let m = params(3, 3.0, 0.0);
    let g = RadialGrid::new(3, 24.0, 8192).unwrap();
    let field = &corpus(3, 1)[0];
    let idx = Canonical::ZeroM1.raw(&m);
    let lam = 0.2;
    let (a, b) = ((idx.alpha * lam).exp(), (idx.beta * lam).exp());
    let f: Vec<f64> = g.r.iter().map(|&r| field.value(r)).collect();
    let scaled: Vec<f64> = g.r.iter().map(|&r| a * field.value(b * r)).collect();
    let predicted = action_from(&Norms::of(&g, &f, &m).scaled(&m, &idx, lam), &m);
    let direct = action_s(&g, &scaled, &m);
    assert_relative_eq!(predicted, direct, max_relative = 1e-4);
}

#[test]
fn virial_k_requires_admissible_index() {
    let g = RadialGrid::new(3, 10.0, 128).unwrap();
    let m = params(3, 2.0, 0.0);
    let f = vec![1.0; g.n];
    assert!(virial_k(&g, &f, &m, &VirialIndex { alpha: 3.0, beta: 2.0 }).is_err());
}

fn random_snapshot(seed: u64, g: Arc<RadialGrid>) -> StateSnapshot {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fields = corpus(seed, 4);
    let (fa, fb, fc, fd) = (&fields[0], &fields[1], &fields[2], &fields[3]);
    let t: f64 = rng.gen_range(0.0..1.0);
    let u = g.r.iter().map(|&r| C64::new(fa.value(r), t * fb.value(r))).collect();
    let v = g.r.iter().map(|&r| C64::new(fc.value(r), fd.value(r))).collect();
    StateSnapshot::new(g, 0.0, u, v).unwrap()
}

#[test]
fn two_formulas_for_l_agree() {
    let g = Arc::new(RadialGrid::new(3, 16.0, 1024).unwrap());
    for seed in 0..10 {
        let s = random_snapshot(seed, g.clone());
        let m = params(3, 2.0, 0.6);
        let (a, b) = functional_l(&s, &m);
        assert_relative_eq!(a, b, max_relative = 1e-12, epsilon = 1e-13);
    }
}

#[test]
fn l_equals_energy_at_zero_frequency() {
    let g = Arc::new(RadialGrid::new(3, 16.0, 512).unwrap());
    let s = random_snapshot(5, g);
    let m = params(3, 3.0, 0.0);
    let r = FunctionalRecord::of_state(&s, &m);
    assert_eq!(r.l, r.e);
}

#[test]
fn record_json_keys() {
    let g = RadialGrid::new(3, 16.0, 256).unwrap();
    let m = params(3, 3.0, 0.5);
    let f = corpus(1, 1)[0].sample(&g);
    let r = FunctionalRecord::of_profile(&g, &f, &m);
    let v = serde_json::to_value(r).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    for k in ["mass", "kinetic", "potential", "S", "E", "C", "L", "K_d2", "K_2pm1", "K_0m1", "T_d2", "T_2pm1", "T_0m1"] {
        assert!(keys.contains(&k), "missing {k}");
    }
    assert_eq!(keys.len(), 13);
    assert!(r.consistency_defect(&m) < 1e-14);
    assert_relative_eq!(r.s, m.m2() / 2.0 * r.mass + 0.5 * r.kinetic - r.potential / (m.p + 1.0), max_relative = 1e-15);
}

#[test]
fn standing_wave_identities() {
    let m = params(3, 3.0, 0.5);
    let g = RadialGrid::shared(3, 30.0, 3072).unwrap();
    let gs = find_ground_state(&m, g.clone()).unwrap();
    let q: Vec<C64> = gs.profile_c64();
    let v: Vec<C64> = q.iter().map(|z| z * C64::new(0.0, m.omega)).collect();
    let s = StateSnapshot::new(g.clone(), 0.0, q, v).unwrap();
    let r = FunctionalRecord::of_state(&s, &m);
    assert_relative_eq!(r.c, -m.omega * r.mass, max_relative = 1e-13);
    assert_relative_eq!(r.e + m.omega * r.c, r.s, max_relative = 1e-13);
    assert_relative_eq!(r.l, r.s, max_relative = 1e-13);
    assert_relative_eq!(gs.record.s, gs.record.t_0m1, max_relative = 1e-5);
    assert_relative_eq!(gs.record.s, gs.record.kinetic / 3.0, max_relative = 1e-5);
    let (k1, _) = functional_k1_k(&s, &m);
    assert!(k1.abs() <= 1e-6 * (r.mass + r.kinetic), "K1 = {k1}");
    for lam in [1.02, 1.1, 1.5] {
        let scaled = StateSnapshot::new(
            g.clone(),
            0.0,
            s.u.iter().map(|z| z * lam).collect(),
            s.v.iter().map(|z| z * lam).collect(),
        )
        .unwrap();
        let (k1, _) = functional_k1_k(&scaled, &m);
        let n = gs.grid_record;
        let expect = lam * lam * (n.mass * m.m2() + n.kinetic) - lam.powf(m.p + 1.0) * n.potential;
        assert_relative_eq!(k1, expect, max_relative = 1e-10);
        assert!(k1 < 0.0);
    }
}

#[test]
fn gn_quotient_properties() {
    let m0 = ModelParams::new(3, 3.0, 0.0, 0.0).unwrap();
    let m1 = ModelParams::new(3, 3.0, 1.0, 0.0).unwrap();
    let ga = RadialGrid::new(3, 20.0, 2048).unwrap();
    for field in corpus(21, 10) {
        let f = field.sample(&ga);
        let j0 = gn_quotient(&ga, &f, &m0).unwrap();
        assert!(gn_quotient(&ga, &f, &m1).unwrap() >= j0);
        let (a, b) = (2.7, 1.6);
        let gb = RadialGrid::new(3, 20.0 / b, 2048).unwrap();
        let scaled: Vec<f64> = f.iter().map(|x| a * x).collect();
        let jb = gn_quotient(&gb, &scaled, &m0).unwrap();
        assert_relative_eq!(j0, jb, max_relative = 1e-8);
    }
    assert!(gn_quotient(&ga, &vec![0.0; ga.n], &m0).is_err());
}
