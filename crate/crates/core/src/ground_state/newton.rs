//! Newton polishing of a profile against the discretized stationary equation.

use crate::error::{LabError, Result};
use crate::grid::{pow_abs, LaplacianGamma, RadialGrid};
use crate::ode::solve_tridiagonal;
use crate::params::ModelParams;

/// F(Q) = −(1−ω²)Q + Δ_γQ + |Q|^{p−1}Q at every node.
pub fn stationary_residual(op: &LaplacianGamma, params: &ModelParams, q: &[f64]) -> Vec<f64> {
    let lap = op.apply(q);
    let m2 = params.m2();
    q.iter()
        .zip(lap)
        .map(|(&x, l)| -m2 * x + l + pow_abs(x * x, params.p - 1.0) * x)
        .collect()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonReport {
    pub iterations: usize,
    pub residual: f64,
}

/// Full Newton iteration with the tridiagonal Jacobian Δ_γ − (1−ω²) + p|Q|^{p−1}.
pub fn newton_polish(grid: &RadialGrid, params: &ModelParams, q: &mut [f64]) -> Result<NewtonReport> {
    let op = LaplacianGamma::new(grid, params.gamma);
    let m2 = params.m2();
    let mut residual = f64::INFINITY;
    let mut best = f64::INFINITY;
    for it in 0..40 {
        let f = stationary_residual(&op, params, q);
        residual = max_abs(&f);
        if !residual.is_finite() {
            return Err(LabError::Numerical("non-finite residual during Newton polish".into()));
        }
        if residual >= best * 0.5 && best < 1e-9 {
            return Ok(NewtonReport { iterations: it, residual });
        }
        best = best.min(residual);
        if residual < 1e-13 {
            return Ok(NewtonReport { iterations: it, residual });
        }
        let dg: Vec<f64> = op
            .dg
            .iter()
            .zip(q.iter())
            .map(|(d, &x)| d - m2 + params.p * pow_abs(x * x, params.p - 1.0))
            .collect();
        let rhs: Vec<f64> = f.iter().map(|x| -x).collect();
        let delta = solve_tridiagonal(&op.lo, &dg, &op.up, &rhs)?;
        for (x, dx) in q.iter_mut().zip(delta) {
            *x += dx;
        }
    }
    Ok(NewtonReport { iterations: 40, residual })
}
