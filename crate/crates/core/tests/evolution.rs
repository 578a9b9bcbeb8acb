use std::sync::Arc;

use nlkg_core::evolution::{h1_sq, make_lambda_data, make_perturbed_data, step, Monitor, Stepper, Trigger};
use nlkg_core::grid::LaplacianGamma;
use nlkg_core::monitors::{membership, orbit_distance, Membership, OrbitMonitor};
use nlkg_core::ode::solve_tridiagonal;
use nlkg_core::{
    evolve, find_ground_state, Canonical, EvolutionConfig, FunctionalRecord, GroundState, ModelParams, RadialGrid,
    StateSnapshot, Verdict, C64,
};

fn params(d: usize, p: f64, gamma: f64, w: f64) -> ModelParams {
    ModelParams::new(d, p, gamma, w).unwrap()
}

fn ground_state(m: &ModelParams, r_max: f64, n: usize) -> GroundState {
    find_ground_state(m, RadialGrid::shared(m.d, r_max, n).unwrap()).unwrap()
}

fn rel_diff(a: &StateSnapshot, b: &StateSnapshot) -> f64 {
    let g = &a.grid;
    let du: Vec<C64> = a.u.iter().zip(&b.u).map(|(x, y)| x - y).collect();
    let dv: Vec<C64> = a.v.iter().zip(&b.v).map(|(x, y)| x - y).collect();
    ((g.l2_sq(&du) + g.l2_sq(&dv)) / (g.l2_sq(&b.u) + g.l2_sq(&b.v))).sqrt()
}

#[test]
fn zero_state_is_stationary() {
    let g = RadialGrid::shared(3, 10.0, 256).unwrap();
    let m = params(3, 3.0, 1.0, 0.0);
    let z = StateSnapshot::zeros(g.clone());
    let s = step(&z, &m, 0.01);
    assert!(s.u.iter().chain(&s.v).all(|x| *x == C64::default()));
    let cfg = EvolutionConfig::for_grid(&g, 1.0, 0.4);
    let run = evolve(&z, &m, &cfg, &mut []).unwrap();
    assert_eq!(run.verdict, Verdict::GlobalBounded { sup_h1: 0.0 });
    assert!(run.record.samples.iter().all(|s| s.h1 == 0.0));
}

#[test]
fn step_is_time_reversible() {
    let m = params(3, 3.0, 1.0, 0.5);
    let gs = ground_state(&m, 20.0, 1024);
    let s0 = make_perturbed_data(&gs, 0.05, 3).unwrap();
    let dt = 0.4 * gs.grid.h;
    let mut s = s0.clone();
    for _ in 0..50 {
        s = step(&s, &m, dt);
    }
    for _ in 0..50 {
        s = step(&s, &m, -dt);
    }
    assert!(rel_diff(&s, &s0) <= 1e-12, "{}", rel_diff(&s, &s0));
}

/// Lowest eigenpair of A = 1 − Δ_γ by inverse and Rayleigh-quotient iteration.
fn lowest_mode(g: &RadialGrid, gamma: f64) -> (f64, Vec<f64>) {
    let op = LaplacianGamma::new(g, gamma);
    let lo: Vec<f64> = op.lo.iter().map(|x| -x).collect();
    let up: Vec<f64> = op.up.iter().map(|x| -x).collect();
    let apply = |x: &[f64]| -> Vec<f64> { op.apply(x).iter().zip(x).map(|(a, b)| b - a).collect() };
    let rayleigh = |x: &[f64]| {
        let ax = apply(x);
        g.w.iter().zip(x).zip(&ax).map(|((w, a), b)| w * a * b).sum::<f64>() / g.l2_sq(x)
    };
    let normalize = |x: Vec<f64>| {
        let n = g.l2_sq(&x).sqrt();
        x.into_iter().map(|v| v / n).collect::<Vec<f64>>()
    };
    let mut x = normalize(vec![1.0; g.n]);
    let mut shift = 0.0;
    for k in 0..60 {
        if k >= 40 {
            shift = rayleigh(&x);
        }
        let dg: Vec<f64> = op.dg.iter().map(|d| 1.0 - d - shift).collect();
        match solve_tridiagonal(&lo, &dg, &up, &x) {
            Ok(y) => x = normalize(y),
            Err(_) => break,
        }
    }
    (rayleigh(&x), x)
}

#[test]
fn linear_eigenmode_follows_discrete_phase() {
    let g = Arc::new(RadialGrid::new(3, 10.0, 200).unwrap());
    let m = params(3, 3.0, 1.0, 0.0);
    let (lam, e) = lowest_mode(&g, m.gamma);
    let dt = 0.4 * g.h;
    let theta = (1.0 - 0.5 * dt * dt * lam).acos();
    let stepper = Stepper::linear(&g, &m);
    let u: Vec<C64> = e.iter().map(|&x| C64::new(x, 0.0)).collect();
    let mut s = StateSnapshot::new(g.clone(), 0.0, u, vec![C64::default(); g.n]).unwrap();
    let mut acc = vec![C64::default(); g.n];
    stepper.acceleration(&s.u, &mut acc);
    let nsteps = 10_000;
    for _ in 0..nsteps {
        stepper.kdk(&mut s, &mut acc, dt);
    }
    let c = (nsteps as f64 * theta).cos();
    let err: f64 = s.u.iter().zip(&e).map(|(z, x)| (z - c * x).norm()).fold(0.0, f64::max);
    let peak = e.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    assert!(err <= 1e-9 * peak, "phase error {err}");
}

/// |v|² + ⟨u, Au⟩ − dt²/4·|Au|², A = 1 − Δ_γ: the quadratic invariant of kick-drift-kick.
fn modified_energy(stepper: &Stepper, s: &StateSnapshot, dt: f64) -> f64 {
    let g = &s.grid;
    let mut acc = vec![C64::default(); g.n];
    stepper.acceleration(&s.u, &mut acc);
    g.l2_sq(&s.v) - g.inner(&s.u, &acc).re - 0.25 * dt * dt * g.l2_sq(&acc)
}

#[test]
fn linear_flow_conserves_discrete_energy() {
    let m = params(3, 3.0, 1.0, 0.5);
    let gs = ground_state(&m, 20.0, 512);
    let s0 = make_perturbed_data(&gs, 0.3, 9).unwrap();
    let g = s0.grid.clone();
    let stepper = Stepper::linear(&g, &m);
    let dt = 0.4 * g.h;
    let e0 = modified_energy(&stepper, &s0, dt);
    let mut s = s0.clone();
    let mut acc = vec![C64::default(); g.n];
    stepper.acceleration(&s.u, &mut acc);
    let mut worst: f64 = 0.0;
    for k in 1..=10_000 {
        stepper.kdk(&mut s, &mut acc, dt);
        if k % 100 == 0 {
            worst = worst.max((modified_energy(&stepper, &s, dt) - e0).abs() / e0);
        }
    }
    assert!(worst <= 1e-12, "modified energy drift {worst:e}");
}

#[test]
fn standing_wave_stays_on_orbit() {
    let m = params(3, 2.0, 1.0, 0.8);
    let gs = ground_state(&m, 30.0, 2048);
    let init = make_lambda_data(&gs, 1.0).unwrap();
    assert_eq!(orbit_distance(&init, &gs), 0.0);
    let cfg = EvolutionConfig::for_grid(&gs.grid, 5.0, 0.4);
    let mut monitors: Vec<Box<dyn Monitor>> = vec![Box::new(OrbitMonitor { gs: gs.clone() })];
    let run = evolve(&init, &m, &cfg, &mut monitors).unwrap();
    assert!(run.verdict.is_bounded(), "{:?}", run.verdict);
    let dist = run.record.extra("orbit_dist").unwrap();
    assert!(dist.iter().all(|&x| x <= 1e-3), "max {}", dist.iter().fold(0.0f64, |a, &b| a.max(b)));
    assert!(run.record.relative_drift(|s| s.record.e) <= 1e-8);
    assert!(run.record.relative_drift(|s| s.record.c) <= 1e-12);
    assert!(run.final_state.momentum().iter().all(|&p| p == 0.0));
    let times = run.record.times();
    assert!(times.windows(2).all(|w| w[1] > w[0] && w[1] - w[0] <= cfg.monitor_stride as f64 * cfg.dt + 1e-12));
    assert!((times.last().unwrap() - 5.0).abs() <= 0.5 * cfg.dt + 1e-12);
}

#[test]
fn amplified_standing_wave_blows_up() {
    let m = params(3, 3.0, 1.0, 0.5);
    let gs = ground_state(&m, 40.0, 4096);
    let init = make_lambda_data(&gs, 1.05).unwrap();
    let cfg = EvolutionConfig::for_grid(&gs.grid, 10.0, 0.4);
    let run = evolve(&init, &m, &cfg, &mut []).unwrap();
    match run.verdict {
        Verdict::BlowUp { t_star, trigger } => {
            assert!(t_star > 0.5 && t_star < 5.0, "t* = {t_star}");
            assert!(matches!(trigger, Trigger::H1Growth | Trigger::Amplitude | Trigger::NonFinite));
        }
        v => panic!("expected blow-up, got {v:?}"),
    }
    let json = serde_json::to_value(run.verdict).unwrap();
    assert_eq!(json["kind"], "blow_up");
    assert!(json.get("t_star").is_some() && json.get("trigger").is_some());
}

#[test]
fn lambda_data_membership() {
    let m = params(3, 3.0, 1.0, 0.5);
    let gs = ground_state(&m, 30.0, 2048);
    let one = make_lambda_data(&gs, 1.0).unwrap();
    let q = gs.profile_c64();
    assert_eq!(one.u, q);
    assert!(one.v.iter().zip(&q).all(|(v, z)| *v == z * C64::new(0.0, 0.5)));
    for (lam, want) in [(1.05, Membership::Minus), (1.2, Membership::Minus), (0.9, Membership::Plus), (0.5, Membership::Plus)] {
        let s = make_lambda_data(&gs, lam).unwrap();
        let r = FunctionalRecord::of_state(&s, &m);
        assert!(r.l < gs.r_level);
        assert_eq!(r.k_d2 < 0.0, lam > 1.0);
        assert_eq!(membership(&r, gs.r_level, Canonical::D2, &m), want);
    }
    assert!(make_lambda_data(&gs, 0.0).is_err());
}

#[test]
fn perturbed_data_distance_and_determinism() {
    let m = params(3, 2.0, 1.0, 0.8);
    let gs = ground_state(&m, 30.0, 1024);
    let base = make_lambda_data(&gs, 1.0).unwrap();
    let zero = make_perturbed_data(&gs, 0.0, 4).unwrap();
    assert_eq!(zero.u, base.u);
    assert_eq!(zero.v, base.v);
    for (delta, seed) in [(1e-3, 0), (1e-2, 1), (0.1, 7)] {
        let s = make_perturbed_data(&gs, delta, seed).unwrap();
        let g = &gs.grid;
        let du: Vec<C64> = s.u.iter().zip(&base.u).map(|(a, b)| a - b).collect();
        let dv: Vec<C64> = s.v.iter().zip(&base.v).map(|(a, b)| a - b).collect();
        let dist = (h1_sq(g, &du, m.gamma) + g.l2_sq(&dv)).sqrt();
        assert!((dist - 2f64.sqrt() * delta).abs() <= 1e-10, "{dist}");
        let again = make_perturbed_data(&gs, delta, seed).unwrap();
        assert_eq!(again.u, s.u);
        assert_eq!(again.v, s.v);
        let other = make_perturbed_data(&gs, delta, seed + 100).unwrap();
        assert_ne!(other.u, s.u);
    }
    assert!(make_perturbed_data(&gs, -1.0, 0).is_err());
}

#[test]
fn conservation_is_second_order_on_perturbed_flow() {
    let m = params(3, 2.0, 1.0, 0.8);
    let gs = ground_state(&m, 30.0, 1024);
    let init = make_perturbed_data(&gs, 0.05, 2).unwrap();
    let drift = |divisor: f64| {
        let cfg = EvolutionConfig::for_grid(&gs.grid, 5.0, 0.4);
        let cfg = cfg.with_dt(cfg.dt / divisor);
        let run = evolve(&init, &m, &cfg, &mut []).unwrap();
        assert!(run.verdict.is_bounded());
        run.record.relative_drift(|s| s.record.e)
    };
    let (a, b) = (drift(1.0), drift(2.0));
    assert!(a <= 1e-5, "drift {a:e}");
    assert!((a / b - 4.0).abs() <= 0.5, "ratio {}", a / b);
}

#[test]
fn finite_propagation_speed() {
    let m = params(3, 3.0, 1.0, 0.0);
    let g = RadialGrid::shared(3, 20.0, 2048).unwrap();
    let bump = |r: f64| if r < 2.0 { 0.3 * (1.0 - (r / 2.0).powi(2)).powi(4) } else { 0.0 };
    let u: Vec<C64> = g.r.iter().map(|&r| C64::new(bump(r), 0.0)).collect();
    let init = StateSnapshot::new(g.clone(), 0.0, u, vec![C64::default(); g.n]).unwrap();
    let t_end = 4.0;
    let cfg = EvolutionConfig::for_grid(&g, t_end, 0.4);
    let run = evolve(&init, &m, &cfg, &mut []).unwrap();
    let peak = run.final_state.u.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    let k = g.first_node_at_or_beyond(2.0 + t_end + 1.0);
    let outside = run.final_state.u[k..].iter().fold(0.0f64, |a, z| a.max(z.norm()));
    assert!(outside <= 1e-10 * peak, "outside {outside:e}, peak {peak:e}");
}

#[test]
fn config_guards() {
    let g = RadialGrid::new(3, 10.0, 1000).unwrap();
    let m = params(3, 3.0, 1.0, 0.0);
    let cfg = EvolutionConfig::for_grid(&g, 1.0, 0.4);
    assert!(cfg.validate(&g, &m).is_ok());
    assert!(cfg.with_dt(0.5 * g.h).validate(&g, &m).is_err());
    assert!(EvolutionConfig { cfl: 1.0, ..cfg }.validate(&g, &m).is_err());
    assert!(EvolutionConfig { monitor_stride: 0, ..cfg }.validate(&g, &m).is_err());
    let stiff = params(3, 3.0, 40.0, 0.0);
    assert!(cfg.validate(&g, &stiff).is_err());
    assert!(EvolutionConfig::stability_limit(&g, &stiff) < cfg.dt);
}
