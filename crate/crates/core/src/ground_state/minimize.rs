//! Constrained minimization of T^{α,β} on {K^{α,β} = 0} by projected Sobolev-gradient descent.

use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::functionals::Norms;
use crate::grid::{pow_abs, LaplacianGamma, RadialGrid};
use crate::ode::solve_tridiagonal;
use crate::params::{ModelParams, VirialIndex};

use super::newton::{max_abs, stationary_residual};
use super::{GroundState, Method};

#[derive(Debug, Clone, Copy)]
pub struct MinimizeOptions {
    pub max_iter: usize,
    /// Stop once one step lowers the objective by less than `tol` relative.
    pub tol: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self { max_iter: 20_000, tol: 1e-12, armijo: 1e-4 }
    }
}

/// r^σ e^{−√(1−ω²) r}, a positive seed with the right behavior at both ends.
pub fn seed_profile(params: &ModelParams, grid: &RadialGrid) -> Vec<f64> {
    let kappa = params.m2().sqrt();
    grid.r.iter().map(|&r| r.powf(params.sigma) * (-kappa * r).exp()).collect()
}

struct Objective<'a> {
    params: &'a ModelParams,
    grid: &'a RadialGrid,
    op: LaplacianGamma,
    k: [f64; 3],
    t: [f64; 3],
}

struct Eval {
    value: f64,
    lambda: f64,
    norms: Norms,
}

impl<'a> Objective<'a> {
    /// λ > 0 with K(λf) = 0: λ^{p−1} = (c_M M + c_K Kin)/(c_P P).
    fn lambda(&self, n: &Norms) -> Result<f64> {
        let a = self.k[0] * n.mass + self.k[1] * n.kinetic;
        let c = self.k[2] * n.potential;
        if !(a > 0.0 && c > 0.0) || !(a / c).is_finite() {
            return Err(LabError::Projection(format!(
                "K(lambda f) = 0 has no positive root (quadratic part {a:e}, potential part {c:e})"
            )));
        }
        Ok((a / c).powf(1.0 / (self.params.p - 1.0)))
    }

    fn eval(&self, f: &[f64]) -> Result<Eval> {
        let norms = Norms::of(self.grid, f, self.params);
        let lambda = self.lambda(&norms)?;
        let g = norms.amplified(self.params, lambda);
        let value = self.t[0] * g.mass + self.t[1] * g.kinetic - self.t[2] * g.potential;
        Ok(Eval { value, lambda, norms })
    }

    /// Weighted-L² gradient of f ↦ T(λ(f) f).
    fn gradient(&self, f: &[f64], e: &Eval) -> Vec<f64> {
        let p = self.params.p;
        let lam = e.lambda;
        let lap = self.op.apply(f);
        let a = self.k[0] * e.norms.mass + self.k[1] * e.norms.kinetic;
        let c = self.k[2] * e.norms.potential;
        let g = e.norms.amplified(self.params, lam);
        let pair = (2.0 * self.t[0] * g.mass + 2.0 * self.t[1] * g.kinetic
            - self.t[2] * (p + 1.0) * g.potential)
            / lam;
        let dl = lam / (p - 1.0);
        let lam_p = lam.powf(p);
        f.iter()
            .zip(lap)
            .map(|(&x, l)| {
                let nl = pow_abs(x * x, p - 1.0) * x;
                let grad_t = 2.0 * self.t[0] * lam * x - 2.0 * self.t[1] * lam * l
                    - self.t[2] * (p + 1.0) * lam_p * nl;
                let grad_a = 2.0 * self.k[0] * x - 2.0 * self.k[1] * l;
                let grad_c = self.k[2] * (p + 1.0) * nl;
                lam * grad_t + pair * dl * (grad_a / a - grad_c / c)
            })
            .collect()
    }

    /// Solves ((1−ω²) − Δ_γ) z = g.
    fn precondition(&self, g: &[f64]) -> Result<Vec<f64>> {
        let m2 = self.params.m2();
        let lo: Vec<f64> = self.op.lo.iter().map(|x| -x).collect();
        let up: Vec<f64> = self.op.up.iter().map(|x| -x).collect();
        let dg: Vec<f64> = self.op.dg.iter().map(|x| m2 - x).collect();
        solve_tridiagonal(&lo, &dg, &up, g)
    }
}

/// Minimizes T^{α,β} over {K^{α,β} = 0} starting from `seed`.
pub fn constrained_minimize_t(
    params: &ModelParams,
    grid: Arc<RadialGrid>,
    idx: &VirialIndex,
    seed: &[f64],
    opts: MinimizeOptions,
) -> Result<GroundState> {
    idx.check(params)?;
    if seed.len() != grid.n {
        return Err(LabError::Domain(format!(
            "seed has {} samples, grid has {} nodes",
            seed.len(),
            grid.n
        )));
    }
    let obj = Objective {
        params,
        grid: &grid,
        op: LaplacianGamma::new(&grid, params.gamma),
        k: idx.k_coeffs(params),
        t: idx.t_coeffs(params),
    };
    let mut f: Vec<f64> = seed.iter().map(|x| x.abs()).collect();
    let mut cur = obj.eval(&f)?;
    let mut last_change = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let grad = obj.gradient(&f, &cur);
        let dir = obj.precondition(&grad)?;
        let slope: f64 = grid.w.iter().zip(&grad).zip(&dir).map(|((w, g), z)| w * g * z).sum();
        if !(slope > 0.0) {
            converged = true;
            break;
        }
        let mut step = 1.0;
        let mut accepted = None;
        while step > 1e-14 {
            let trial: Vec<f64> = f.iter().zip(&dir).map(|(x, z)| (x - step * z).abs()).collect();
            if let Ok(e) = obj.eval(&trial) {
                if e.value <= cur.value - opts.armijo * step * slope {
                    accepted = Some((trial, e));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((trial, e)) = accepted else {
            converged = true;
            break;
        };
        last_change = (cur.value - e.value) / cur.value.abs().max(f64::MIN_POSITIVE);
        f = trial.iter().map(|x| x * e.lambda).collect();
        cur = obj.eval(&f)?;
        if last_change < opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LabError::Stagnation { iterations, last_change });
    }
    let op = LaplacianGamma::new(&grid, params.gamma);
    let residual = max_abs(&stationary_residual(&op, params, &f));
    let amplitude = f[0] / grid.r[0].powf(params.sigma);
    Ok(GroundState::from_profile(
        *params,
        grid,
        f,
        amplitude,
        residual,
        None,
        Method::Minimize(*idx),
        iterations,
    ))
}
