//! Radial ground states: shooting, Newton polish, constrained minimization and ω-rescaling.

pub mod minimize;
pub mod newton;
pub mod scaling;
pub mod shooting;

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::functionals::{FunctionalRecord, Norms, Velocity};
use crate::grid::{read_json, write_json, GridMeta, RadialField, RadialGrid, C64};
use crate::params::{Canonical, ModelParams, Regime, VirialIndex};

pub use minimize::{constrained_minimize_t, seed_profile, MinimizeOptions};
pub use newton::{newton_polish, stationary_residual};
pub use scaling::{lagrange_degeneracy_check, mass_critical_level, mass_critical_nu, rescale_omega, scaling_exponent};
pub use shooting::{shoot, ShootConfig, Shot, ShotClass};

/// Default acceptance tolerances.
pub const TOL_RESIDUAL: f64 = 1e-8;
pub const TOL_K: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Shoot,
    Minimize(VirialIndex),
    Rescale,
}

/// A validated radial profile with its functional tables.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub params: ModelParams,
    pub grid: Arc<RadialGrid>,
    /// Real, positive grid profile solving the discrete stationary equation.
    pub profile: Vec<f64>,
    /// lim r^{−σ} Q(r) at the origin.
    pub amplitude: f64,
    /// Max-norm of the discrete stationary equation.
    pub residual: f64,
    /// Functionals of the continuum profile (quadrature along the shooting trajectory).
    pub record: FunctionalRecord,
    /// Functionals of the grid profile.
    pub grid_record: FunctionalRecord,
    /// S(Q) on the grid: the threshold used by dynamics margins.
    pub r_level: f64,
    pub method: Method,
    pub iterations: usize,
    pub scan: Vec<(f64, ShotClass)>,
    pub scan_monotone: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundStateMeta {
    pub params: ModelParams,
    pub grid: GridMeta,
    pub amplitude: f64,
    pub residual: f64,
    pub r_level: f64,
    pub method: Method,
    pub iterations: usize,
    pub tol_residual: f64,
    pub tol_k: f64,
    pub grid_record: FunctionalRecord,
    pub scan: Vec<(f64, ShotClass)>,
    pub scan_monotone: bool,
}

/// One named invariant check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn le(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), passed: value <= tolerance, value, tolerance }
    }
}

impl GroundState {
    pub fn profile_c64(&self) -> Vec<C64> {
        self.profile.iter().map(|&x| C64::new(x, 0.0)).collect()
    }

    pub fn field(&self) -> RadialField {
        RadialField { grid: self.grid.clone(), values: self.profile_c64() }
    }

    pub fn norms(&self) -> Norms {
        self.grid_record.norms()
    }

    /// |K^{α,β}(Q)| / (mass + kinetic) of the continuum record for one index.
    pub fn pohozaev_defect(&self, c: Canonical) -> f64 {
        let r = &self.record;
        r.k(c).abs() / (r.mass + r.kinetic)
    }

    /// Same defect on the grid record.
    pub fn grid_pohozaev_defect(&self, c: Canonical) -> f64 {
        let r = &self.grid_record;
        r.k(c).abs() / (r.mass + r.kinetic)
    }

    /// Canonical indices whose constraint characterizes the ground state at these parameters.
    pub fn pohozaev_indices(&self) -> Vec<Canonical> {
        let mut v = vec![Canonical::D2, Canonical::ZeroM1];
        if self.params.regime() == Regime::MassSub {
            v.push(Canonical::TwoPm1);
        }
        v
    }

    /// Fitted slopes (bare, Bessel-corrected) of log Q on [r_max/2, 0.9 r_max].
    pub fn tail_slopes(&self) -> Option<(f64, f64)> {
        let g = &self.grid;
        let d = self.params.dim();
        let (mut xs, mut bare, mut corrected) = (Vec::new(), Vec::new(), Vec::new());
        for (r, &q) in g.r.iter().zip(&self.profile) {
            if *r >= 0.5 * g.r_max && *r <= 0.9 * g.r_max && q > 0.0 {
                xs.push(*r);
                bare.push(q.ln());
                corrected.push(q.ln() + 0.5 * (d - 1.0) * r.ln());
            }
        }
        if xs.len() < 8 {
            return None;
        }
        Some((linear_slope(&xs, &bare), linear_slope(&xs, &corrected)))
    }

    /// Fitted exponent of Q ~ r^σ over the first nodes.
    pub fn origin_exponent(&self) -> f64 {
        let g = &self.grid;
        let r_hi = 0.05_f64.max(8.0 * g.h);
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (k, (r, &q)) in g.r.iter().zip(&self.profile).enumerate() {
            if k >= 2 && *r <= r_hi && q > 0.0 {
                xs.push(r.ln());
                ys.push(q.ln());
            }
        }
        linear_slope(&xs, &ys)
    }

    /// Invariant checks of a ground state.
    pub fn validate(&self, tol_k: f64) -> Vec<Check> {
        let mut out = vec![Check::le("residual", self.residual, TOL_RESIDUAL)];
        let positive = self.profile.iter().all(|&q| q > 0.0);
        out.push(Check { name: "positive".into(), passed: positive, value: 0.0, tolerance: 0.0 });
        let imax = argmax(&self.profile);
        let decreasing = self.profile[imax..].windows(2).all(|w| w[1] < w[0]);
        out.push(Check {
            name: "decreasing_beyond_max".into(),
            passed: decreasing,
            value: self.grid.r[imax],
            tolerance: 0.0,
        });
        for c in self.pohozaev_indices() {
            out.push(Check::le(&format!("pohozaev_{}", c.label()), self.pohozaev_defect(c), tol_k));
        }
        if let Some((bare, corrected)) = self.tail_slopes() {
            let d = self.params.dim();
            out.push(Check::le("tail_rate_bound", bare + 1.0 / (d + 2.0), 0.0));
            let kappa = self.params.m2().sqrt();
            if kappa >= 2.0 / (d + 2.0) {
                out.push(Check::le("tail_rate_sharp", (corrected + kappa).abs() / kappa, 0.02));
            }
        }
        out
    }

    pub fn meta(&self) -> GroundStateMeta {
        GroundStateMeta {
            params: self.params,
            grid: self.grid.meta(),
            amplitude: self.amplitude,
            residual: self.residual,
            r_level: self.r_level,
            method: self.method,
            iterations: self.iterations,
            tol_residual: TOL_RESIDUAL,
            tol_k: TOL_K,
            grid_record: self.grid_record,
            scan: self.scan.clone(),
            scan_monotone: self.scan_monotone,
        }
    }

    /// Writes `profile.csv`, `record.json` and `meta.json` into `dir`.
    pub fn write_archive(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.field().write_csv(&dir.join("profile.csv"))?;
        write_json(&dir.join("record.json"), &self.record)?;
        write_json(&dir.join("meta.json"), &self.meta())?;
        Ok(())
    }

    pub fn read_archive(dir: &Path) -> Result<Self> {
        let meta: GroundStateMeta = read_json(&dir.join("meta.json"))?;
        let record: FunctionalRecord = read_json(&dir.join("record.json"))?;
        let grid = Arc::new(RadialGrid::from_meta(&meta.grid)?);
        let field = RadialField::read_csv(&dir.join("profile.csv"), grid.clone())?;
        Ok(Self {
            params: meta.params,
            grid,
            profile: field.re(),
            amplitude: meta.amplitude,
            residual: meta.residual,
            record,
            grid_record: meta.grid_record,
            r_level: meta.r_level,
            method: meta.method,
            iterations: meta.iterations,
            scan: meta.scan,
            scan_monotone: meta.scan_monotone,
        })
    }

    /// Builds a state from a polished grid profile; `record` defaults to the grid record.
    pub(crate) fn from_profile(
        params: ModelParams,
        grid: Arc<RadialGrid>,
        profile: Vec<f64>,
        amplitude: f64,
        residual: f64,
        record: Option<FunctionalRecord>,
        method: Method,
        iterations: usize,
    ) -> Self {
        let grid_record = FunctionalRecord::of_profile(&grid, &profile, &params);
        Self {
            params,
            grid,
            profile,
            amplitude,
            residual,
            record: record.unwrap_or(grid_record),
            grid_record,
            r_level: grid_record.s,
            method,
            iterations,
            scan: Vec::new(),
            scan_monotone: true,
        }
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut k = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[k] {
            k = i;
        }
    }
    k
}

/// Least-squares slope of y against x.
pub fn linear_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}

/// Samples a non-crossing shot onto the grid, continuing past the junction with the
/// C e^{−κr} r^{−(d−1)/2} tail.
pub fn sample_shot(params: &ModelParams, grid: &RadialGrid, shot: &Shot, r_join: f64) -> Vec<f64> {
    let kappa = params.m2().sqrt();
    let half = 0.5 * (params.dim() - 1.0);
    let q_join = shot.state_at(r_join).map(|y| y[0]).unwrap_or(shot.end[0]).max(0.0);
    let r0 = shot.r_start();
    let sigma = params.sigma;
    grid.r
        .iter()
        .map(|&r| {
            if r < r0 {
                let q0 = shot.state_at(r0).map(|y| y[0]).unwrap_or(0.0);
                q0 * (r / r0).powf(sigma)
            } else if r <= r_join {
                shot.state_at(r).map(|y| y[0]).unwrap_or(0.0)
            } else {
                q_join * (-kappa * (r - r_join)).exp() * (r_join / r).powf(half)
            }
        })
        .collect()
}

/// Ground state by shooting, tail matching and Newton polish on `grid`.
pub fn find_ground_state(params: &ModelParams, grid: Arc<RadialGrid>) -> Result<GroundState> {
    params.require_ground_state_regime()?;
    find_ground_state_unchecked(params, grid)
}

/// As [`find_ground_state`] but also admits γ = 0 (used for the classical GN optimizer).
pub fn find_ground_state_unchecked(params: &ModelParams, grid: Arc<RadialGrid>) -> Result<GroundState> {
    if grid.d != params.d {
        return Err(LabError::Domain(format!(
            "grid dimension {} differs from model dimension {}",
            grid.d, params.d
        )));
    }
    if params.gamma < 0.0 {
        return Err(LabError::Domain("shooting needs gamma >= 0".into()));
    }
    let cfg = ShootConfig::for_grid(params, grid.h, grid.r_max);
    let bis = shooting::bisect_amplitude(params, &cfg)?;
    let shot = shoot(params, bis.lo, &cfg, true)?;
    let r_join = shooting::junction_radius(&shot, 1e-6);
    let norms = shooting::continuum_norms(params, &shot, r_join);
    let record = FunctionalRecord::from_parts(&norms, &Velocity::standing(params, norms.mass), params);
    let mut profile = sample_shot(params, &grid, &shot, r_join);
    let report = newton_polish(&grid, params, &mut profile)?;
    if report.residual > TOL_RESIDUAL {
        return Err(LabError::Numerical(format!(
            "Newton polish stalled at residual {:e}",
            report.residual
        )));
    }
    let mut gs = GroundState::from_profile(
        *params,
        grid,
        profile,
        bis.lo,
        report.residual,
        Some(record),
        Method::Shoot,
        bis.iterations,
    );
    gs.scan = bis.scan;
    gs.scan_monotone = bis.scan_monotone;
    Ok(gs)
}
