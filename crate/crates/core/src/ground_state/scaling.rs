//! ω-rescaling, the action scaling law, Lagrange-multiplier degeneracy and the mass-critical ν.

use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::functionals::{FunctionalRecord, Velocity};
use crate::grid::{LaplacianGamma, RadialGrid};
use crate::params::{Canonical, ModelParams, Regime};

use super::newton::{max_abs, stationary_residual};
use super::{GroundState, Method};

/// (p+1)/(p−1) − d/2, the exponent of (1−ω²) in S(Q_ω).
pub fn scaling_exponent(params: &ModelParams) -> f64 {
    (params.p + 1.0) / (params.p - 1.0) - params.dim() / 2.0
}

/// Maps Q_{0,γ} to Q_{ω,γ}(r) = μ Q_{0,γ}(k r), μ = (1−ω²)^{1/(p−1)}, k = (1−ω²)^{1/2}.
///
/// The grid is stretched by 1/k so nodes map onto nodes and the discrete equation is
/// preserved exactly; the continuum record scales with the exact norm exponents.
pub fn rescale_omega(gs: &GroundState, omega_new: f64) -> Result<GroundState> {
    if gs.params.omega != 0.0 {
        return Err(LabError::Domain(format!(
            "rescaling starts from omega = 0, got {}",
            gs.params.omega
        )));
    }
    let params = gs.params.with_omega(omega_new)?;
    if omega_new == 0.0 {
        return Ok(gs.clone());
    }
    let m2 = params.m2();
    let k = m2.sqrt();
    let mu = m2.powf(1.0 / (params.p - 1.0));
    let r_max = gs.grid.r_max / k;
    if !r_max.is_finite() {
        return Err(LabError::Numerical(format!("regrid to omega = {omega_new} overflows")));
    }
    let grid = Arc::new(RadialGrid::new(gs.grid.d, r_max, gs.grid.n)?);
    let profile: Vec<f64> = gs.profile.iter().map(|q| mu * q).collect();
    let op = LaplacianGamma::new(&grid, params.gamma);
    let residual = max_abs(&stationary_residual(&op, &params, &profile));
    let d = params.dim();
    let src = gs.record.norms();
    let norms = crate::functionals::Norms {
        mass: src.mass * mu * mu * k.powf(-d),
        kinetic: src.kinetic * mu * mu * k.powf(2.0 - d),
        potential: src.potential * mu.powf(params.p + 1.0) * k.powf(-d),
    };
    let record = FunctionalRecord::from_parts(&norms, &Velocity::standing(&params, norms.mass), &params);
    Ok(GroundState::from_profile(
        params,
        grid,
        profile,
        mu * k.powf(params.sigma) * gs.amplitude,
        residual,
        Some(record),
        Method::Rescale,
        0,
    ))
}

/// ⟨(K^{α,β})′(Q), 𝓓^{α,β}Q⟩ at a solution with K^{α,β}(Q) = 0, from the continuum record.
///
/// Errors when the value is not strictly negative in the regime where the index characterizes
/// the ground state.
pub fn lagrange_degeneracy_check(gs: &GroundState, idx: Canonical) -> Result<f64> {
    let p = &gs.params;
    let (d, pp, m2) = (p.dim(), p.p, p.m2());
    let r = &gs.record;
    let (value, valid) = match idx {
        Canonical::D2 => (
            -(pp - 1.0) * d * ((pp - 1.0) * d - 4.0) / (pp + 1.0) * r.potential,
            p.regime() == Regime::MassSuper,
        ),
        Canonical::TwoPm1 => (
            -(pp - 1.0) * (4.0 - d * (pp - 1.0)) * m2 * r.mass,
            p.regime() == Regime::MassSub,
        ),
        Canonical::ZeroM1 => (-(d - 2.0) * r.kinetic, true),
    };
    if valid && !(value < 0.0) {
        return Err(LabError::Inconsistency(format!(
            "Lagrange value for index {} is {value:e}, expected negative",
            idx.label()
        )));
    }
    Ok(value)
}

/// Second λ-derivative of S along the scaling family of `idx`, from norms alone.
pub fn scaling_second_derivative(record: &FunctionalRecord, params: &ModelParams, idx: Canonical) -> f64 {
    let v = idx.raw(params);
    let (a, b, d, p) = (v.alpha, v.beta, params.dim(), params.p);
    let em = 2.0 * a - d * b;
    let ek = 2.0 * a - (d - 2.0) * b;
    let ep = (p + 1.0) * a - d * b;
    params.m2() / 2.0 * em * em * record.mass + 0.5 * ek * ek * record.kinetic
        - ep * ep / (p + 1.0) * record.potential
}

/// ν = ((d+2) r^{d,2})^{−1/2} with r^{d,2} = S(Q) at p = 1 + 4/d.
pub fn mass_critical_nu(gs: &GroundState) -> Result<f64> {
    if gs.params.regime() != Regime::MassCritical {
        return Err(LabError::Domain(format!(
            "nu needs p = 1 + 4/d, got p = {}",
            gs.params.p
        )));
    }
    Ok(1.0 / ((gs.params.dim() + 2.0) * gs.record.s).sqrt())
}

/// (1−ω²)/2 · {(d+2)/(d·C_GN)}^{d/2}.
pub fn mass_critical_level(params: &ModelParams, c_gn: f64) -> f64 {
    let d = params.dim();
    params.m2() / 2.0 * ((d + 2.0) / (d * c_gn)).powf(d / 2.0)
}
