//! Trajectory monitors and audits: localized virial weights, orbit distance, the virial
//! remainder fit, the mass differential-inequality chain, blow-up margins and 𝓡± membership.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::evolution::{Monitor, Sample, TrajectoryRecord};
use crate::functionals::{action_from, virial_k_from, FunctionalRecord};
use crate::grid::{pow_abs, RadialGrid, StateSnapshot, C64};
use crate::ground_state::GroundState;
use crate::params::{Canonical, ModelParams, Regime};

/// Quintic smoothstep P(x) = x³(10 − 15x + 6x²) clamped to [0, 1].
pub fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (x * p1 - pm) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// The cut-offs Φ_R and Ψ_R(r) = r^{1−d}∫₀^r s^{d−1}Φ_R(s) ds as functions of r.
#[derive(Debug, Clone)]
pub struct Weights {
    pub d: usize,
    pub radius: f64,
    rule: Vec<(f64, f64)>,
}

impl Weights {
    pub fn new(d: usize, radius: f64) -> Self {
        // s^{d−1}·P is a polynomial of degree d + 4: this rule integrates it exactly
        Self { d, radius, rule: gauss_legendre((d + 6) / 2 + 1) }
    }

    pub fn phi(&self, r: f64) -> f64 {
        let d = self.d as f64;
        if r <= self.radius {
            d
        } else {
            d * smoothstep((2.0 * self.radius - r) / self.radius)
        }
    }

    pub fn psi(&self, r: f64) -> f64 {
        let big = self.radius;
        if r <= big {
            return r;
        }
        let e = self.d as i32 - 1;
        let b = r.min(2.0 * big);
        let (mid, half) = (0.5 * (big + b), 0.5 * (b - big));
        let tail: f64 = self
            .rule
            .iter()
            .map(|(x, w)| {
                let s = mid + half * x;
                w * s.powi(e) * self.phi(s)
            })
            .sum::<f64>()
            * half;
        (big.powi(e + 1) + tail) / r.powi(e)
    }
}

/// Φ_R and Ψ_R sampled on a grid.
#[derive(Debug, Clone)]
pub struct WeightPair {
    pub radius: f64,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub weights: Weights,
    pub c0_est: Option<f64>,
}

/// Worst violations of the weight properties over the grid nodes.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WeightDefects {
    /// max |Ψ′ + (d−1)Ψ/r − Φ|.
    pub identity: f64,
    /// max (Ψ′ − 1)₊.
    pub psi_slope: f64,
    /// max Φ′₊ on [R, 2R].
    pub phi_slope: f64,
    /// max |Φ − d| + |Ψ − r| on r ≤ R.
    pub inner: f64,
}

impl WeightPair {
    pub fn defects(&self, grid: &RadialGrid) -> WeightDefects {
        let w = &self.weights;
        let d = grid.d as f64;
        let delta = 1e-5;
        let mut out = WeightDefects { identity: 0.0, psi_slope: 0.0, phi_slope: 0.0, inner: 0.0 };
        for &r in &grid.r {
            let lo = (r - delta).max(0.5 * r);
            let hi = r + delta;
            let dpsi = (w.psi(hi) - w.psi(lo)) / (hi - lo);
            let dphi = (w.phi(hi) - w.phi(lo)) / (hi - lo);
            out.identity = out.identity.max((dpsi + (d - 1.0) * w.psi(r) / r - w.phi(r)).abs());
            out.psi_slope = out.psi_slope.max(dpsi - 1.0);
            out.phi_slope = out.phi_slope.max(dphi);
            if r <= self.radius {
                out.inner = out.inner.max((w.phi(r) - d).abs() + (w.psi(r) - r).abs());
            }
        }
        out
    }
}

/// Samples Φ_R and Ψ_R on the grid and verifies their defining properties.
pub fn build_weights(grid: &RadialGrid, radius: f64) -> Result<WeightPair> {
    if !(radius > 0.0) || 2.0 * radius >= grid.r_max {
        return Err(LabError::Domain(format!(
            "weights need 0 < 2R < r_max, got R = {radius}, r_max = {}",
            grid.r_max
        )));
    }
    let weights = Weights::new(grid.d, radius);
    let pair = WeightPair {
        radius,
        phi: grid.r.iter().map(|&r| weights.phi(r)).collect(),
        psi: grid.r.iter().map(|&r| weights.psi(r)).collect(),
        weights,
        c0_est: None,
    };
    let dfx = pair.defects(grid);
    if dfx.identity > 1e-8 || dfx.psi_slope > 1e-8 || dfx.phi_slope > 1e-8 || dfx.inner > 1e-12 {
        return Err(LabError::Numerical(format!("weight construction violates its identities: {dfx:?}")));
    }
    Ok(pair)
}

/// (I_R¹, I_R²) of a snapshot.
pub fn virial_i(s: &StateSnapshot, w: &WeightPair, params: &ModelParams) -> (f64, f64) {
    let g = &s.grid;
    let du = g.radial_derivative(&s.u);
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for i in 0..g.n {
        let vb = s.v[i].conj();
        let uv = (s.u[i] * vb).re;
        a += g.w[i] * w.psi[i] * (du[i] * vb).re;
        b += g.w[i] * w.phi[i] * uv;
        c += g.w[i] * uv;
    }
    let i1 = 2.0 * a + b;
    (i1, i1 + params.q * c)
}

/// ‖u‖^{p+1}_{L^{p+1}(r ≥ R)}.
pub fn tail_potential(s: &StateSnapshot, radius: f64, params: &ModelParams) -> f64 {
    let g = &s.grid;
    let k = g.first_node_at_or_beyond(radius);
    s.u[k..]
        .iter()
        .zip(&g.w[k..])
        .map(|(z, w)| w * pow_abs(z.norm_sqr(), params.p + 1.0))
        .sum()
}

/// Records I_R¹, I_R² and the potential tail beyond R.
pub struct VirialMonitor {
    pub weights: WeightPair,
    pub params: ModelParams,
    pub label: String,
}

impl VirialMonitor {
    pub fn new(weights: WeightPair, params: ModelParams, label: &str) -> Self {
        Self { weights, params, label: label.into() }
    }
}

impl Monitor for VirialMonitor {
    fn names(&self) -> Vec<String> {
        ["I_R1", "I_R2", "tailP"].iter().map(|n| format!("{n}{}", self.label)).collect()
    }

    fn sample(&mut self, s: &StateSnapshot, _base: &Sample) -> Result<Vec<f64>> {
        let (i1, i2) = virial_i(s, &self.weights, &self.params);
        Ok(vec![i1, i2, tail_potential(s, self.weights.radius, &self.params)])
    }
}

/// inf_θ ‖(u, v) − (e^{iθ}Q, iωe^{iθ}Q)‖_{H¹×L²}.
pub fn orbit_distance(s: &StateSnapshot, gs: &GroundState) -> f64 {
    let g = &s.grid;
    let gamma = gs.params.gamma;
    let w = gs.params.omega;
    let q: Vec<C64> = gs.profile_c64();
    let iwq: Vec<C64> = q.iter().map(|z| z * C64::new(0.0, w)).collect();
    let z = g.kinetic_pair(&s.u, &q, gamma) + g.inner(&s.u, &q) + g.inner(&s.v, &iwq);
    let phase = if z.norm() > 0.0 { z / z.norm() } else { C64::new(1.0, 0.0) };
    let du: Vec<C64> = s.u.iter().zip(&q).map(|(a, b)| a - b * phase).collect();
    let dv: Vec<C64> = s.v.iter().zip(&iwq).map(|(a, b)| a - b * phase).collect();
    (g.l2_sq(&du) + g.kinetic_gamma(&du, gamma) + g.l2_sq(&dv)).sqrt()
}

/// Records the orbit distance to a ground state.
pub struct OrbitMonitor {
    pub gs: GroundState,
}

impl Monitor for OrbitMonitor {
    fn names(&self) -> Vec<String> {
        vec!["orbit_dist".into()]
    }

    fn sample(&mut self, s: &StateSnapshot, _base: &Sample) -> Result<Vec<f64>> {
        if s.grid.n != self.gs.grid.n || s.grid.h != self.gs.grid.h {
            return Err(LabError::Domain("orbit distance needs the ground-state grid".into()));
        }
        Ok(vec![orbit_distance(s, &self.gs)])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Info,
}

/// One audited inequality or identity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditCheck {
    pub name: String,
    pub status: Status,
    pub worst_t: Option<f64>,
    pub worst_value: f64,
    pub tolerance: f64,
}

impl AuditCheck {
    /// Worst sample of (t, value, allowed): passes iff value ≤ allowed everywhere.
    pub fn from_samples(name: &str, items: impl Iterator<Item = (f64, f64, f64)>) -> Self {
        let mut worst: Option<(f64, f64, f64)> = None;
        for (t, x, tol) in items {
            if worst.map_or(true, |(_, wx, wt)| x - tol > wx - wt) {
                worst = Some((t, x, tol));
            }
        }
        match worst {
            Some((t, x, tol)) => Self {
                name: name.into(),
                status: if x <= tol { Status::Pass } else { Status::Fail },
                worst_t: Some(t),
                worst_value: x,
                tolerance: tol,
            },
            None => Self { name: name.into(), status: Status::Pass, worst_t: None, worst_value: 0.0, tolerance: 0.0 },
        }
    }

    pub fn info(name: &str, t: f64, value: f64) -> Self {
        Self { name: name.into(), status: Status::Info, worst_t: Some(t), worst_value: value, tolerance: 0.0 }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AuditReport {
    pub checks: Vec<AuditCheck>,
    pub constants: BTreeMap<String, f64>,
}

impl AuditReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(AuditCheck::passed)
    }

    pub fn check(&self, name: &str) -> Option<&AuditCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn extend(&mut self, other: AuditReport) {
        self.checks.extend(other.checks);
        self.constants.extend(other.constants);
    }
}

/// Centred first derivative on a possibly non-uniform sample grid, one-sided at the ends.
pub fn time_derivative(t: &[f64], x: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    out[0] = (x[1] - x[0]) / (t[1] - t[0]);
    out[n - 1] = (x[n - 1] - x[n - 2]) / (t[n - 1] - t[n - 2]);
    for k in 1..n - 1 {
        let (h1, h2) = (t[k] - t[k - 1], t[k + 1] - t[k]);
        out[k] = (h1 * h1 * x[k + 1] - h2 * h2 * x[k - 1] + (h2 * h2 - h1 * h1) * x[k])
            / (h1 * h2 * (h1 + h2));
    }
    out
}

/// Three-point second derivative at interior samples (NaN at the ends).
pub fn second_derivative(t: &[f64], x: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut out = vec![f64::NAN; n];
    for k in 1..n.saturating_sub(1) {
        let (h1, h2) = (t[k] - t[k - 1], t[k + 1] - t[k]);
        out[k] = 2.0 * ((x[k + 1] - x[k]) / h2 - (x[k] - x[k - 1]) / h1) / (h1 + h2);
    }
    out
}

fn require_dense(traj: &TrajectoryRecord, max_spacing: f64) -> Result<()> {
    let t = traj.times();
    if t.len() < 5 {
        return Err(LabError::AuditResolution(format!("only {} samples", t.len())));
    }
    let gap = t.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if gap > max_spacing {
        return Err(LabError::AuditResolution(format!(
            "sample spacing {gap} exceeds {max_spacing}"
        )));
    }
    Ok(())
}

/// Index range [1, k) of samples before the H¹×L² norm first exceeds `growth` times its start.
pub fn smooth_window(traj: &TrajectoryRecord, growth: f64) -> std::ops::Range<usize> {
    let n = traj.len();
    let Some(first) = traj.samples.first() else { return 0..0 };
    let end = traj.samples.iter().position(|s| s.h1 > growth * first.h1).unwrap_or(n);
    1..end.saturating_sub(1).max(1)
}

/// Fitted remainder of the localized virial inequality at one radius.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VirialRemainderRow {
    #[serde(rename = "R")]
    pub radius: f64,
    /// sup ρ₁ R²/M with ρ₁ = −dI_R¹/dt − K^{d,2} − d(p−1)/(p+1)·tail.
    pub c0_est: f64,
    /// Same for I_R² against K + tail.
    pub c0_est2: f64,
    pub max_rho: f64,
    pub min_rho: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VirialRemainderReport {
    pub rows: Vec<VirialRemainderRow>,
    /// sup |−dI_far/dt − K^{d,2}|/M for the untruncated weight: multiply by R² for the floor at R.
    pub identity_floor: f64,
    /// sup |−dI_far/dt − K^{d,2}| / |K^{d,2}| over the window.
    pub identity_rel: f64,
    pub stable: bool,
}

/// Evaluates the localized virial inequality along `traj` over `window` for the monitored
/// radii `labels` (matching [`VirialMonitor`] labels) and the untruncated reference `far`.
pub fn virial_remainder_audit(
    traj: &TrajectoryRecord,
    radii: &[(f64, String)],
    far: &str,
    params: &ModelParams,
    window: std::ops::Range<usize>,
) -> Result<VirialRemainderReport> {
    require_dense(traj, 0.05)?;
    if window.len() < 3 {
        return Err(LabError::AuditResolution(format!("window of {} samples", window.len())));
    }
    let t = traj.times();
    let kd2 = traj.series(|s| s.record.k_d2);
    let kk = traj.series(|s| s.k);
    let mass = traj.series(|s| s.record.mass);
    let coef = params.dim() * (params.p - 1.0) / (params.p + 1.0);
    let col = |name: String| {
        traj.extra(&name).ok_or_else(|| LabError::AuditResolution(format!("missing column {name}")))
    };
    let i_far = col(format!("I_R1{far}"))?;
    let di_far = time_derivative(&t, &i_far);
    let (mut floor, mut rel): (f64, f64) = (0.0, 0.0);
    for k in window.clone() {
        let mismatch = (-di_far[k] - kd2[k]).abs();
        floor = floor.max(mismatch / mass[k]);
        rel = rel.max(mismatch / kd2[k].abs().max(f64::MIN_POSITIVE));
    }
    let mut rows = Vec::new();
    for (radius, label) in radii {
        let d1 = time_derivative(&t, &col(format!("I_R1{label}"))?);
        let d2 = time_derivative(&t, &col(format!("I_R2{label}"))?);
        let tail = col(format!("tailP{label}"))?;
        let r2 = radius * radius;
        let mut row = VirialRemainderRow {
            radius: *radius,
            c0_est: f64::NEG_INFINITY,
            c0_est2: f64::NEG_INFINITY,
            max_rho: f64::NEG_INFINITY,
            min_rho: f64::INFINITY,
        };
        for k in window.clone() {
            let rho1 = -d1[k] - kd2[k] - coef * tail[k];
            let rho2 = -d2[k] - kk[k] - coef * tail[k];
            row.c0_est = row.c0_est.max(rho1 * r2 / mass[k]);
            row.c0_est2 = row.c0_est2.max(rho2 * r2 / mass[k]);
            row.max_rho = row.max_rho.max(rho1);
            row.min_rho = row.min_rho.min(rho1);
        }
        rows.push(row);
    }
    let stable = rows.windows(2).all(|w| {
        let (a, b) = (w[0].c0_est.max(0.0), w[1].c0_est.max(0.0));
        let (fa, fb) = (floor * w[0].radius.powi(2), floor * w[1].radius.powi(2));
        (a <= fa && b <= fb) || (a.max(b) <= 2.0 * a.min(b))
    });
    Ok(VirialRemainderReport { rows, identity_floor: floor, identity_rel: rel, stable })
}

fn trapezoid(t: &[f64], x: &[f64], a: usize, b: usize) -> f64 {
    (a..b).map(|k| 0.5 * (x[k] + x[k + 1]) * (t[k + 1] - t[k])).sum()
}

/// The chain for f = ‖u‖²: the f″ identity, monotonicity of [(p−1)f − 2(p+1)E]₊, the bounds on f
/// and f′, the unit-window bounds on ∫F and ∫‖(u, v)‖², and the E < 0 flag.
pub fn section4_audit(traj: &TrajectoryRecord, params: &ModelParams) -> Result<AuditReport> {
    require_dense(traj, 0.05)?;
    let p = params.p;
    let t = traj.times();
    let s0 = traj.samples[0];
    let e0 = s0.record.e;
    let f = traj.series(Sample::f);
    let fp = traj.series(|s| s.fprime);
    let big_f = traj.series(|s| (p - 1.0) * (s.record.mass + s.record.kinetic) + (p + 3.0) * s.v_sq);
    let scale =
        |s: &Sample| (p - 1.0) * (s.record.mass + s.record.kinetic) + (p + 3.0) * s.v_sq + 2.0 * (p + 1.0) * e0.abs();
    let scale0 = scale(&s0);
    let tol_ramp = 1e-6 * scale0;
    let mut report = AuditReport::default();

    let ramp = |k: usize| tol_ramp * (1.0 + t[k]);
    let fpp = second_derivative(&t, &f);
    report.checks.push(AuditCheck::from_samples(
        "f_second_derivative_identity",
        (1..t.len() - 1).map(|k| {
            let rhs = big_f[k] - 2.0 * (p + 1.0) * e0;
            (t[k], (fpp[k] - rhs).abs() / scale(&traj.samples[k]), 1e-3)
        }),
    ));
    let g: Vec<f64> = f.iter().map(|x| ((p - 1.0) * x - 2.0 * (p + 1.0) * e0).max(0.0)).collect();
    let mut running = g[0];
    let mut items = Vec::new();
    for k in 1..g.len() {
        items.push((t[k], g[k] - running, ramp(k)));
        running = running.min(g[k]);
    }
    report.checks.push(AuditCheck::from_samples("positive_part_monotone", items.into_iter()));
    let cap = f[0].max(2.0 * (p + 1.0) * e0 / (p - 1.0));
    report.checks.push(AuditCheck::from_samples(
        "mass_bound",
        (0..f.len()).map(|k| (t[k], f[k] - cap, ramp(k))),
    ));
    let b = 2.0 * (p + 1.0) * e0 / ((p - 1.0) * (p + 3.0)).sqrt();
    report.checks.push(AuditCheck::from_samples(
        "fprime_upper_bound",
        (0..fp.len()).map(|k| (t[k], fp[k] - b, ramp(k))),
    ));
    let floor = fp[0].min(-b);
    report.checks.push(AuditCheck::from_samples(
        "fprime_lower_bound",
        (0..fp.len()).map(|k| (t[k], floor - fp[k], ramp(k))),
    ));
    let tau = 1.0;
    let bound = 2.0 * (p + 1.0) * e0 * tau + 2.0 * b + fp[0].abs();
    let h1sq = traj.series(|s| s.h1 * s.h1);
    let tol_win = 1e-4 * bound.abs().max(scale0);
    let (mut win43, mut win124) = (Vec::new(), Vec::new());
    let mut end = 0;
    for a in 0..t.len() {
        while end < t.len() && t[end] < t[a] + tau - 1e-12 {
            end += 1;
        }
        if end >= t.len() {
            break;
        }
        win43.push((t[a], trapezoid(&t, &big_f, a, end) - bound, tol_win));
        win124.push((t[a], trapezoid(&t, &h1sq, a, end) - bound / (p - 1.0), tol_win));
    }
    report.checks.push(AuditCheck::from_samples("window_f_integral_bound", win43.into_iter()));
    report.checks.push(AuditCheck::from_samples("window_energy_norm_bound", win124.into_iter()));
    report.checks.push(AuditCheck::info("negative_energy_flag", t[0], e0));
    report.constants.insert("E0".into(), e0);
    report.constants.insert("non_global_predicted".into(), if e0 < 0.0 { 1.0 } else { 0.0 });
    Ok(report)
}

/// True when E(0) < 0, which rules out global existence.
pub fn negative_energy_flag(s: &StateSnapshot, params: &ModelParams) -> bool {
    FunctionalRecord::of_state(s, params).e < 0.0
}

/// Blow-up margin of the data (λQ, iλωQ) and its parts.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Margin {
    pub delta: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub endpoint: bool,
}

/// The margin of the instability argument, from grid functionals so that λ = 1 gives 0.
pub fn margin_delta(gs: &GroundState, lambda: f64) -> Result<Margin> {
    if !(lambda > 1.0) {
        return Err(LabError::Domain(format!("margin needs lambda > 1, got {lambda}")));
    }
    let params = &gs.params;
    let (d, p, w, q) = (params.dim(), params.p, params.omega, params.q);
    let r = gs.r_level;
    let mass = gs.grid_record.mass;
    let scaled = gs.norms().amplified(params, lambda);
    let l = action_from(&scaled, params);
    let minus_wc = w * w * lambda * lambda * mass;
    let m = match params.regime() {
        Regime::MassSuper | Regime::MassCritical => {
            let delta = d * (p - 1.0) / 2.0 * (r - l);
            Margin { delta, delta1: delta, delta2: 0.0, endpoint: false }
        }
        Regime::MassSub => {
            let wc = params.omega_c.unwrap_or(1.0);
            if (w.abs() - wc).abs() <= 1e-9 {
                let delta = q * minus_wc - (q + 2.0) * l;
                Margin { delta, delta1: -(q + 2.0) * l, delta2: q * minus_wc, endpoint: true }
            } else if w.abs() < wc {
                let delta1 = (q + 2.0) * (r - l);
                let delta2 = q * (minus_wc - (q + 2.0) * w * w / params.m2() * r);
                Margin { delta: delta1 + delta2, delta1, delta2, endpoint: false }
            } else {
                return Err(LabError::Domain(format!(
                    "|omega| = {} lies in the stable window above omega_c = {wc}",
                    w.abs()
                )));
            }
        }
    };
    if !(m.delta > 0.0) {
        return Err(LabError::Inconsistency(format!("blow-up margin {} is not positive", m.delta)));
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Plus,
    Minus,
    Outside,
    /// Within the tolerance band of a threshold.
    Boundary,
}

/// 𝓡_{ω,±} membership: L < r with the sign of K^{α,β} deciding ±.
pub fn membership(record: &FunctionalRecord, r_level: f64, idx: Canonical, params: &ModelParams) -> Membership {
    let scale = record.mass + record.kinetic + record.potential;
    let band = 1e-6 * scale.max(r_level.abs());
    let k = virial_k_from(&record.norms(), params, &idx.raw(params));
    if record.l > r_level + band {
        Membership::Outside
    } else if record.l > r_level - band || k.abs() <= band {
        Membership::Boundary
    } else if k > 0.0 {
        Membership::Plus
    } else {
        Membership::Minus
    }
}

/// Index whose constraint is used for membership at these parameters.
pub fn membership_index(params: &ModelParams) -> Canonical {
    match params.regime() {
        Regime::MassSub => Canonical::TwoPm1,
        _ => Canonical::D2,
    }
}

/// Checks that the membership of the initial sample never flips along the trajectory.
pub fn membership_audit(traj: &TrajectoryRecord, r_level: f64, params: &ModelParams) -> AuditCheck {
    let idx = membership_index(params);
    let Some(first) = traj.samples.first() else {
        return AuditCheck::from_samples("membership_invariant", std::iter::empty());
    };
    let start = membership(&first.record, r_level, idx, params);
    if !matches!(start, Membership::Plus | Membership::Minus) {
        return AuditCheck::info("membership_invariant", first.t, first.record.l - r_level);
    }
    AuditCheck::from_samples(
        "membership_invariant",
        traj.samples.iter().map(|s| {
            let m = membership(&s.record, r_level, idx, params);
            let flipped = matches!(m, Membership::Plus | Membership::Minus | Membership::Outside) && m != start;
            (s.t, if flipped { 1.0 } else { 0.0 }, 0.0)
        }),
    )
}
