//! Radial shooting for the stationary problem with the r^σ series start.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::functionals::Norms;
use crate::grid::sphere_area;
use crate::ode::{integrate, Flow, Segment, Tolerance};
use crate::params::ModelParams;

/// Fate of a shot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShotClass {
    Crosses,
    Rebounds,
    Decays,
}

/// State layout: Q, Q', and the running mass, kinetic and potential integrals.
pub type ShotState = [f64; 5];

#[derive(Debug, Clone, Copy)]
pub struct ShootConfig {
    pub r_start: f64,
    pub r_limit: f64,
    pub tol: Tolerance,
}

impl ShootConfig {
    /// Series start ε₀ = min(h/2, 10⁻³/√(1−ω²)).
    pub fn for_grid(params: &ModelParams, h: f64, r_limit: f64) -> Self {
        Self {
            r_start: (h / 2.0).min(1e-3 / params.m2().sqrt()),
            r_limit,
            tol: Tolerance::default(),
        }
    }
}

/// Trajectory of one shot.
#[derive(Debug, Clone)]
pub struct Shot {
    pub amplitude: f64,
    pub class: ShotClass,
    pub r_end: f64,
    pub end: ShotState,
    pub q_max: f64,
    pub r_at_max: f64,
    pub segments: Vec<Segment<5>>,
}

impl Shot {
    /// Dense evaluation of the state at r inside the integrated range.
    pub fn state_at(&self, r: f64) -> Option<ShotState> {
        let first = self.segments.first()?;
        if r < first.x0 || r > self.r_end {
            return None;
        }
        let k = self.segments.partition_point(|s| s.x1 < r).min(self.segments.len() - 1);
        Some(self.segments[k].eval(r))
    }

    pub fn r_start(&self) -> f64 {
        self.segments.first().map(|s| s.x0).unwrap_or(0.0)
    }
}

/// c₂ of the two-term series a r^σ (1 + c₂ r²).
pub fn series_c2(params: &ModelParams) -> f64 {
    params.m2() / (2.0 * (2.0 * params.sigma + params.dim()))
}

/// Series state at r0, with the integrals from 0 to r0 of the leading term.
///
/// Besides a r^σ(1 + c₂r²) the start carries the first nonlinear correction −a^p r^{pσ+2}/D,
/// which is of the same order as c₂ when γ = 0.
pub fn series_start(params: &ModelParams, a: f64, r0: f64) -> ShotState {
    let (s, d, g, p) = (params.sigma, params.dim(), params.gamma, params.p);
    let c2 = series_c2(params);
    let area = sphere_area(params.d);
    let sn = p * s + 2.0;
    let cn = -a.powf(p) / (sn * (sn + d - 2.0) - g);
    let q = a * r0.powf(s) * (1.0 + c2 * r0 * r0) + cn * r0.powf(sn);
    let dq = a * (s * r0.powf(s - 1.0) + c2 * (s + 2.0) * r0.powf(s + 1.0))
        + cn * sn * r0.powf(sn - 1.0);
    let mass = area * a * a * r0.powf(2.0 * s + d) / (2.0 * s + d);
    let kin = area * a * a * (s * s + g) * r0.powf(2.0 * s + d - 2.0) / (2.0 * s + d - 2.0);
    let pot = area * a.powf(p + 1.0) * r0.powf((p + 1.0) * s + d) / ((p + 1.0) * s + d);
    [q, dq, mass, kin, pot]
}

/// Right-hand side of the radial stationary equation plus the quadrature states.
pub fn rhs(params: &ModelParams) -> impl Fn(f64, &ShotState) -> ShotState {
    let (d, g, p, m2) = (params.dim(), params.gamma, params.p, params.m2());
    let area = sphere_area(params.d);
    let e = params.d as i32 - 1;
    move |r: f64, y: &ShotState| {
        let (q, dq) = (y[0], y[1]);
        let aq = q.abs();
        let nl = if aq == 0.0 { 0.0 } else { aq.powf(p - 1.0) * q };
        let jac = area * r.powi(e);
        [
            dq,
            -(d - 1.0) / r * dq + g / (r * r) * q + m2 * q - nl,
            jac * q * q,
            jac * (dq * dq + g * q * q / (r * r)),
            jac * aq.powf(p + 1.0),
        ]
    }
}

fn bisect_in_segment(seg: &Segment<5>, comp: usize) -> f64 {
    let (mut lo, mut hi) = (seg.x0, seg.x1);
    let s_lo = seg.eval(lo)[comp].signum();
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if seg.eval(mid)[comp].signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Integrates one shot with amplitude a and classifies it.
pub fn shoot(params: &ModelParams, a: f64, cfg: &ShootConfig, keep: bool) -> Result<Shot> {
    if !(a > 0.0) {
        return Err(LabError::Domain(format!("shooting amplitude must be positive, got {a}")));
    }
    if !(params.sigma > 0.0) && params.gamma != 0.0 {
        return Err(LabError::Domain("shooting needs gamma >= 0 (sigma >= 0)".into()));
    }
    let y0 = series_start(params, a, cfg.r_start);
    let threshold = 1e-8 * a;
    let mut class = ShotClass::Decays;
    let mut descending = false;
    let mut r_end = cfg.r_limit;
    let mut end = y0;
    let mut q_max = y0[0];
    let mut r_at_max = cfg.r_start;
    let mut segments = Vec::new();
    let f = rhs(params);
    let (r_last, y_last) = integrate(f, cfg.r_start, y0, cfg.r_limit, cfg.tol, |seg| {
        if seg.y1[0] <= 0.0 {
            class = ShotClass::Crosses;
            r_end = bisect_in_segment(seg, 0);
        } else if descending && seg.y1[1] > 0.0 && seg.y1[0] > threshold {
            class = ShotClass::Rebounds;
            r_end = bisect_in_segment(seg, 1);
        } else if seg.y1[0] > 1e6 * q_max.max(a) {
            class = ShotClass::Rebounds;
            r_end = seg.x1;
        }
        if seg.y1[1] < 0.0 {
            descending = true;
        }
        if seg.y1[0] > q_max {
            q_max = seg.y1[0];
            r_at_max = seg.x1;
        }
        if keep {
            segments.push(*seg);
        }
        match class {
            ShotClass::Decays => Flow::Continue,
            _ => {
                end = seg.eval(r_end);
                Flow::Stop
            }
        }
    })?;
    if class == ShotClass::Decays {
        r_end = r_last;
        end = y_last;
    }
    Ok(Shot { amplitude: a, class, r_end, end, q_max, r_at_max, segments })
}

/// Amplitude bracket search, monotonicity scan and bisection.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Bisection {
    pub lo: f64,
    pub hi: f64,
    pub scan: Vec<(f64, ShotClass)>,
    pub scan_monotone: bool,
    pub iterations: usize,
}

pub fn bisect_amplitude(params: &ModelParams, cfg: &ShootConfig) -> Result<Bisection> {
    let crosses = |a: f64| -> Result<bool> { Ok(shoot(params, a, cfg, false)?.class == ShotClass::Crosses) };
    let mut hi = 1.0;
    let mut budget = 0;
    while !crosses(hi)? {
        hi *= 2.0;
        budget += 1;
        if budget > 60 {
            return Err(LabError::NoGroundState(format!(
                "no crossing shot up to amplitude {hi:e}"
            )));
        }
    }
    let mut lo = hi / 2.0;
    budget = 0;
    while crosses(lo)? {
        lo /= 2.0;
        budget += 1;
        if budget > 60 {
            return Err(LabError::NoGroundState(format!(
                "every shot down to amplitude {lo:e} crosses"
            )));
        }
    }
    let mut scan = Vec::with_capacity(10);
    for k in 0..10 {
        let a = lo + (hi - lo) * k as f64 / 9.0;
        scan.push((a, shoot(params, a, cfg, false)?.class));
    }
    let first_cross = scan.iter().position(|(_, c)| *c == ShotClass::Crosses).unwrap_or(scan.len());
    let scan_monotone = scan[first_cross..].iter().all(|(_, c)| *c == ShotClass::Crosses)
        && scan[..first_cross].iter().all(|(_, c)| *c != ShotClass::Crosses);
    if first_cross > 0 {
        lo = scan[first_cross - 1].0;
    }
    if first_cross < scan.len() {
        hi = scan[first_cross].0;
    }
    let mut iterations = 0;
    while hi - lo > 4.0 * f64::EPSILON * hi && iterations < 200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if crosses(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    Ok(Bisection { lo, hi, scan, scan_monotone, iterations })
}

/// Continuum norms along a non-crossing shot, truncated where it leaves the decaying branch and
/// completed with the exponential tail.
pub fn continuum_norms(params: &ModelParams, shot: &Shot, r_join: f64) -> Norms {
    let y = shot.state_at(r_join).unwrap_or(shot.end);
    let kappa = params.m2().sqrt();
    let area = sphere_area(params.d);
    let e = params.d as i32 - 1;
    let q = y[0].max(0.0);
    let tail_mass = area * r_join.powi(e) * q * q / (2.0 * kappa);
    Norms {
        mass: y[2] + tail_mass,
        kinetic: y[3] + kappa * kappa * tail_mass,
        potential: y[4],
    }
}

/// Radius past the maximum where Q first falls below `frac`·max Q, bounded by the shot end.
pub fn junction_radius(shot: &Shot, frac: f64) -> f64 {
    let target = frac * shot.q_max;
    for seg in &shot.segments {
        if seg.x1 > shot.r_end {
            break;
        }
        if seg.x0 >= shot.r_at_max && seg.y1[0] < target && seg.y1[1] < 0.0 {
            return seg.x1;
        }
    }
    // fall back to the deepest point reached before the shot left the branch
    let mut best = (shot.r_at_max, f64::INFINITY);
    for seg in &shot.segments {
        if seg.x1 > shot.r_end {
            break;
        }
        if seg.x0 >= shot.r_at_max && seg.y1[0] > 0.0 && seg.y1[0] < best.1 && seg.y1[1] < 0.0 {
            best = (seg.x1, seg.y1[0]);
        }
    }
    best.0
}
