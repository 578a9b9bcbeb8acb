//! Störmer–Verlet integration of u_tt = Δ_γu − u + |u|^{p−1}u, blow-up detection and initial data.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::functionals::{k1_k_from, FunctionalRecord, Norms, Velocity};
use crate::grid::{pow_abs, LaplacianGamma, RadialGrid, StateSnapshot, C64};
use crate::ground_state::GroundState;
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_end: f64,
    pub cfl: f64,
    /// Blow-up when the H¹×L² norm exceeds this multiple of its initial value.
    pub blowup_h1_factor: f64,
    /// Blow-up when max |u| exceeds this.
    pub blowup_amp: f64,
    pub monitor_stride: usize,
    /// A run reaching t_end is GlobalBounded if its H¹×L² norm stayed within this multiple of
    /// the initial value, Undecided otherwise.
    pub bounded_factor: f64,
}

impl EvolutionConfig {
    /// dt = cfl·h with the stride that keeps sample spacing ≤ 0.01.
    pub fn for_grid(grid: &RadialGrid, t_end: f64, cfl: f64) -> Self {
        let dt = cfl * grid.h;
        Self {
            dt,
            t_end,
            cfl,
            blowup_h1_factor: 1e3,
            blowup_amp: 1e6,
            monitor_stride: default_stride(dt),
            bounded_factor: 10.0,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self.monitor_stride = default_stride(dt);
        self
    }

    /// 2/√(λ_max + 1): the linear stability limit of the scheme on this grid.
    pub fn stability_limit(grid: &RadialGrid, params: &ModelParams) -> f64 {
        let lmax = LaplacianGamma::new(grid, params.gamma).spectral_bound(grid);
        2.0 / (lmax + 1.0).sqrt()
    }

    pub fn validate(&self, grid: &RadialGrid, params: &ModelParams) -> Result<()> {
        let bad = |m: String| Err(LabError::Domain(m));
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return bad(format!("cfl = {} must lie in (0, 1)", self.cfl));
        }
        if !(self.dt > 0.0) || self.dt > self.cfl * grid.h * (1.0 + 1e-12) {
            return bad(format!("dt = {} must lie in (0, cfl·h = {}]", self.dt, self.cfl * grid.h));
        }
        let limit = 0.95 * Self::stability_limit(grid, params);
        if self.dt > limit {
            return bad(format!("dt = {} exceeds the stiffness guard {limit}", self.dt));
        }
        if !(self.t_end > 0.0) || self.monitor_stride == 0 {
            return bad("t_end must be positive and monitor_stride at least 1".into());
        }
        if !(self.blowup_h1_factor > 1.0 && self.blowup_amp > 0.0 && self.bounded_factor >= 1.0) {
            return bad("blow-up thresholds must exceed the initial size".into());
        }
        Ok(())
    }
}

fn default_stride(dt: f64) -> usize {
    ((0.01 / dt).floor() as usize).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trigger {
    H1Growth,
    Amplitude,
    NonFinite,
}

/// Classification of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    GlobalBounded { sup_h1: f64 },
    BlowUp { t_star: f64, trigger: Trigger },
    Undecided { t_end: f64, sup_h1: f64 },
}

impl Verdict {
    pub fn is_blow_up(&self) -> bool {
        matches!(self, Verdict::BlowUp { .. })
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, Verdict::GlobalBounded { .. })
    }
}

/// Acceleration Δ_γu − u + |u|^{p−1}u; the linear hook drops the nonlinearity.
#[derive(Debug, Clone)]
pub struct Stepper {
    op: LaplacianGamma,
    p: f64,
    nonlinear: bool,
}

impl Stepper {
    pub fn new(grid: &RadialGrid, params: &ModelParams) -> Self {
        Self { op: LaplacianGamma::new(grid, params.gamma), p: params.p, nonlinear: true }
    }

    pub fn linear(grid: &RadialGrid, params: &ModelParams) -> Self {
        Self { nonlinear: false, ..Self::new(grid, params) }
    }

    pub fn acceleration(&self, u: &[C64], out: &mut [C64]) {
        self.op.apply_into(u, out);
        for (a, &x) in out.iter_mut().zip(u) {
            *a -= x;
            if self.nonlinear {
                *a += x * pow_abs(x.norm_sqr(), self.p - 1.0);
            }
        }
    }

    /// Kick-drift-kick with `acc` holding the acceleration of the incoming u; on return it
    /// holds the acceleration of the outgoing u.
    pub fn kdk(&self, s: &mut StateSnapshot, acc: &mut [C64], dt: f64) {
        let half = 0.5 * dt;
        for ((u, v), a) in s.u.iter_mut().zip(s.v.iter_mut()).zip(acc.iter()) {
            *v += a * half;
            *u += *v * dt;
        }
        self.acceleration(&s.u, acc);
        for (v, a) in s.v.iter_mut().zip(acc.iter()) {
            *v += a * half;
        }
        s.t += dt;
    }

    pub fn step(&self, s: &StateSnapshot, dt: f64) -> StateSnapshot {
        let mut out = s.clone();
        let mut acc = vec![C64::default(); s.u.len()];
        self.acceleration(&s.u, &mut acc);
        self.kdk(&mut out, &mut acc, dt);
        out
    }
}

/// One Störmer–Verlet step of the full equation.
pub fn step(s: &StateSnapshot, params: &ModelParams, dt: f64) -> StateSnapshot {
    Stepper::new(&s.grid, params).step(s, dt)
}

/// Quantities recorded at every sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub record: FunctionalRecord,
    /// ‖(u, v)‖_{H¹×L²}.
    pub h1: f64,
    pub v_sq: f64,
    pub k1: f64,
    pub k: f64,
    /// f′ = 2 Re⟨u, v⟩.
    pub fprime: f64,
    pub max_abs: f64,
}

impl Sample {
    pub fn of(s: &StateSnapshot, params: &ModelParams) -> Self {
        let n = Norms::of(&s.grid, &s.u, params);
        let vel = Velocity::of(&s.grid, &s.u, &s.v);
        let record = FunctionalRecord::from_parts(&n, &vel, params);
        let (k1, k) = k1_k_from(&n, &vel, params);
        Self {
            t: s.t,
            record,
            h1: (n.mass + n.kinetic + vel.v_sq).sqrt(),
            v_sq: vel.v_sq,
            k1,
            k,
            fprime: 2.0 * vel.re_uv,
            max_abs: s.u.iter().fold(0.0, |m: f64, z| m.max(z.norm())),
        }
    }

    pub fn f(&self) -> f64 {
        self.record.mass
    }
}

/// A quantity sampled along a trajectory.
pub trait Monitor: Send {
    fn names(&self) -> Vec<String>;
    fn sample(&mut self, s: &StateSnapshot, base: &Sample) -> Result<Vec<f64>>;
}

/// Time series of a run.
#[derive(Debug, Clone, Default)]
pub struct TrajectoryRecord {
    pub samples: Vec<Sample>,
    pub extra_names: Vec<String>,
    pub extras: Vec<Vec<f64>>,
    pub dt: f64,
    pub stride: usize,
}

impl TrajectoryRecord {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn series(&self, f: impl Fn(&Sample) -> f64) -> Vec<f64> {
        self.samples.iter().map(f).collect()
    }

    pub fn extra(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.extra_names.iter().position(|n| n == name)?;
        Some(self.extras.iter().map(|row| row[k]).collect())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Largest relative drift of a sampled quantity from its initial value.
    pub fn relative_drift(&self, f: impl Fn(&Sample) -> f64) -> f64 {
        let Some(first) = self.samples.first() else { return 0.0 };
        let x0 = f(first);
        let scale = if x0 != 0.0 { x0.abs() } else { 1.0 };
        self.samples.iter().map(|s| (f(s) - x0).abs() / scale).fold(0.0, f64::max)
    }

    pub fn sup_h1(&self) -> f64 {
        self.samples.iter().map(|s| s.h1).fold(0.0, f64::max)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        let orbit = self.extra_names.iter().position(|n| n == "orbit_dist");
        let mut head = vec!["t", "mass", "kinetic", "potential", "E", "C", "H1"];
        if orbit.is_some() {
            head.push("orbit_dist");
        }
        head.extend(["K_d2", "K1"]);
        let others: Vec<usize> = (0..self.extra_names.len()).filter(|&k| Some(k) != orbit).collect();
        let mut header: Vec<String> = head.iter().map(|s| s.to_string()).collect();
        header.extend(others.iter().map(|&k| self.extra_names[k].clone()));
        header.extend(["f", "fprime", "K", "L"].map(String::from));
        writeln!(out, "{}", header.join(","))?;
        for (s, row) in self.samples.iter().zip(&self.extras) {
            let r = &s.record;
            let mut vals = vec![s.t, r.mass, r.kinetic, r.potential, r.e, r.c, s.h1];
            if let Some(k) = orbit {
                vals.push(row[k]);
            }
            vals.extend([r.k_d2, s.k1]);
            vals.extend(others.iter().map(|&k| row[k]));
            vals.extend([s.f(), s.fprime, s.k, r.l]);
            let line: Vec<String> = vals.iter().map(|x| format!("{x:.16e}")).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Result of [`evolve`].
#[derive(Debug, Clone)]
pub struct Run {
    pub record: TrajectoryRecord,
    pub verdict: Verdict,
    pub final_state: StateSnapshot,
}

fn take_sample(
    s: &StateSnapshot,
    params: &ModelParams,
    monitors: &mut [Box<dyn Monitor>],
    rec: &mut TrajectoryRecord,
) -> Result<Sample> {
    let base = Sample::of(s, params);
    let mut row = Vec::new();
    for m in monitors.iter_mut() {
        match m.sample(s, &base) {
            Ok(v) => row.extend(v),
            Err(e) => {
                return Err(LabError::Monitor {
                    t: s.t,
                    message: e.to_string(),
                    partial: Box::new(rec.clone()),
                })
            }
        }
    }
    rec.samples.push(base);
    rec.extras.push(row);
    Ok(base)
}

/// Integrates from `init` to t_end or the first blow-up trigger, sampling every monitor
/// each `monitor_stride` steps.
pub fn evolve(
    init: &StateSnapshot,
    params: &ModelParams,
    cfg: &EvolutionConfig,
    monitors: &mut [Box<dyn Monitor>],
) -> Result<Run> {
    cfg.validate(&init.grid, params)?;
    if !init.is_finite() {
        return Err(LabError::Domain("initial data is not finite".into()));
    }
    let stepper = Stepper::new(&init.grid, params);
    let mut rec = TrajectoryRecord {
        extra_names: monitors.iter().flat_map(|m| m.names()).collect(),
        dt: cfg.dt,
        stride: cfg.monitor_stride,
        ..Default::default()
    };
    let mut s = init.clone();
    let first = take_sample(&s, params, monitors, &mut rec)?;
    let h0 = first.h1;
    let mut sup = h0;
    let mut acc = vec![C64::default(); s.u.len()];
    stepper.acceleration(&s.u, &mut acc);
    let nsteps = (cfg.t_end / cfg.dt).round().max(1.0) as usize;
    let t0 = s.t;
    for k in 1..=nsteps {
        stepper.kdk(&mut s, &mut acc, cfg.dt);
        s.t = t0 + k as f64 * cfg.dt;
        let trigger = if !s.is_finite() {
            Some(Trigger::NonFinite)
        } else {
            let base = Sample::of(&s, params);
            sup = sup.max(base.h1);
            if base.max_abs > cfg.blowup_amp {
                Some(Trigger::Amplitude)
            } else if !base.h1.is_finite() || base.h1 > cfg.blowup_h1_factor * h0 {
                Some(Trigger::H1Growth)
            } else {
                None
            }
        };
        if let Some(trigger) = trigger {
            return Ok(Run { record: rec, verdict: Verdict::BlowUp { t_star: s.t, trigger }, final_state: s });
        }
        if k % cfg.monitor_stride == 0 || k == nsteps {
            take_sample(&s, params, monitors, &mut rec)?;
        }
    }
    let verdict = if sup <= cfg.bounded_factor * h0 {
        Verdict::GlobalBounded { sup_h1: sup }
    } else {
        Verdict::Undecided { t_end: s.t, sup_h1: sup }
    };
    Ok(Run { record: rec, verdict, final_state: s })
}

/// (λQ, iλωQ) at t = 0.
pub fn make_lambda_data(gs: &GroundState, lambda: f64) -> Result<StateSnapshot> {
    if !(lambda > 0.0) {
        return Err(LabError::Domain(format!("lambda must be positive, got {lambda}")));
    }
    let w = gs.params.omega;
    let u: Vec<C64> = gs.profile.iter().map(|&q| C64::new(lambda * q, 0.0)).collect();
    let v: Vec<C64> = gs.profile.iter().map(|&q| C64::new(0.0, lambda * w * q)).collect();
    StateSnapshot::new(gs.grid.clone(), 0.0, u, v)
}

/// Sum of three Gaussian bumps with complex standard-normal amplitudes, centres in [0, 8] and
/// widths in [0.5, 2].
pub fn random_bumps(grid: &RadialGrid, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let mut f = vec![C64::default(); grid.n];
    for _ in 0..3 {
        let c: f64 = rng.gen_range(0.0..8.0);
        let s: f64 = rng.gen_range(0.5..2.0);
        let a = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        for (x, &r) in f.iter_mut().zip(&grid.r) {
            let z = (r - c) / s;
            *x += a * (-z * z).exp();
        }
    }
    f
}

/// ‖f‖²_{H¹} = mass + γ-kinetic.
pub fn h1_sq(grid: &RadialGrid, f: &[C64], gamma: f64) -> f64 {
    grid.l2_sq(f) + grid.kinetic_gamma(f, gamma)
}

/// (Q + δη₁/‖η₁‖_{H¹}, iωQ + δη₂/‖η₂‖_{L²}) with η₁, η₂ from the seeded generator.
pub fn make_perturbed_data(gs: &GroundState, delta: f64, seed: u64) -> Result<StateSnapshot> {
    if !(delta >= 0.0) {
        return Err(LabError::Domain(format!("delta must be non-negative, got {delta}")));
    }
    let mut s = make_lambda_data(gs, 1.0)?;
    if delta == 0.0 {
        return Ok(s);
    }
    let grid = &gs.grid;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e1 = random_bumps(grid, &mut rng);
    let e2 = random_bumps(grid, &mut rng);
    let c1 = delta / h1_sq(grid, &e1, gs.params.gamma).sqrt();
    let c2 = delta / grid.l2_sq(&e2).sqrt();
    for ((u, v), (a, b)) in s.u.iter_mut().zip(s.v.iter_mut()).zip(e1.iter().zip(&e2)) {
        *u += a * c1;
        *v += b * c2;
    }
    Ok(s)
}
