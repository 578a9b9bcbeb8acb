//! Action, virial functionals, T, L, conserved quantities and the GN quotient.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::{Amp, RadialGrid, StateSnapshot, C64};
use crate::params::{Canonical, ModelParams, VirialIndex};

/// The three norms every functional is built from.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Norms {
    pub mass: f64,
    pub kinetic: f64,
    pub potential: f64,
}

impl Norms {
    pub fn of<T: Amp>(grid: &RadialGrid, f: &[T], params: &ModelParams) -> Self {
        Self {
            mass: grid.l2_sq(f),
            kinetic: grid.kinetic_gamma(f, params.gamma),
            potential: grid.lp_pow(f, params.p + 1.0),
        }
    }

    /// Norms of the scaled field e^{αλ} f(e^{βλ} ·), from the exact scaling weights.
    pub fn scaled(&self, params: &ModelParams, idx: &VirialIndex, lambda: f64) -> Self {
        let (a, b, d, p) = (idx.alpha, idx.beta, params.dim(), params.p);
        Self {
            mass: self.mass * ((2.0 * a - d * b) * lambda).exp(),
            kinetic: self.kinetic * ((2.0 * a - (d - 2.0) * b) * lambda).exp(),
            potential: self.potential * (((p + 1.0) * a - d * b) * lambda).exp(),
        }
    }

    /// Norms of c·f.
    pub fn amplified(&self, params: &ModelParams, c: f64) -> Self {
        let c2 = c * c;
        Self {
            mass: self.mass * c2,
            kinetic: self.kinetic * c2,
            potential: self.potential * c.abs().powf(params.p + 1.0),
        }
    }
}

pub fn action_from(n: &Norms, params: &ModelParams) -> f64 {
    params.m2() / 2.0 * n.mass + 0.5 * n.kinetic - n.potential / (params.p + 1.0)
}

pub fn virial_k_from(n: &Norms, params: &ModelParams, idx: &VirialIndex) -> f64 {
    let [cm, ck, cp] = idx.k_coeffs(params);
    cm * n.mass + ck * n.kinetic - cp * n.potential
}

pub fn functional_t_from(n: &Norms, params: &ModelParams, idx: &VirialIndex) -> f64 {
    let [tm, tk, tp] = idx.t_coeffs(params);
    tm * n.mass + tk * n.kinetic - tp * n.potential
}

/// S_{ω,γ}(f).
pub fn action_s<T: Amp>(grid: &RadialGrid, f: &[T], params: &ModelParams) -> f64 {
    action_from(&Norms::of(grid, f, params), params)
}

/// K^{α,β}_{ω,γ}(f) through the generic three-coefficient form.
pub fn virial_k<T: Amp>(
    grid: &RadialGrid,
    f: &[T],
    params: &ModelParams,
    idx: &VirialIndex,
) -> Result<f64> {
    idx.check(params)?;
    Ok(virial_k_from(&Norms::of(grid, f, params), params, idx))
}

/// T^{α,β}_{ω,γ}(f) = S(f) − K(f)/μ̄.
pub fn functional_t<T: Amp>(
    grid: &RadialGrid,
    f: &[T],
    params: &ModelParams,
    idx: &VirialIndex,
) -> Result<f64> {
    idx.check(params)?;
    Ok(functional_t_from(&Norms::of(grid, f, params), params, idx))
}

/// Quantities of a phase-space point that go beyond the norms of u.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Velocity {
    /// ‖v‖².
    pub v_sq: f64,
    /// Im Σ w u v̄.
    pub charge: f64,
    /// Re Σ w u v̄.
    pub re_uv: f64,
}

impl Velocity {
    pub fn of(grid: &RadialGrid, u: &[C64], v: &[C64]) -> Self {
        let z = grid.inner(u, v);
        Self { v_sq: grid.l2_sq(v), charge: z.im, re_uv: z.re }
    }

    /// Data (f, iωf) for a real profile f of mass `mass`.
    pub fn standing(params: &ModelParams, mass: f64) -> Self {
        Self { v_sq: params.omega * params.omega * mass, charge: -params.omega * mass, re_uv: 0.0 }
    }
}

/// Flat functional table, serialized with the keys of the record JSON.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FunctionalRecord {
    pub mass: f64,
    pub kinetic: f64,
    pub potential: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "K_d2")]
    pub k_d2: f64,
    #[serde(rename = "K_2pm1")]
    pub k_2pm1: f64,
    #[serde(rename = "K_0m1")]
    pub k_0m1: f64,
    #[serde(rename = "T_d2")]
    pub t_d2: f64,
    #[serde(rename = "T_2pm1")]
    pub t_2pm1: f64,
    #[serde(rename = "T_0m1")]
    pub t_0m1: f64,
}

impl FunctionalRecord {
    /// Canonical K and T values use the raw indices, admissible or not.
    pub fn from_parts(n: &Norms, vel: &Velocity, params: &ModelParams) -> Self {
        let k = |c: Canonical| virial_k_from(n, params, &c.raw(params));
        let t = |c: Canonical| functional_t_from(n, params, &c.raw(params));
        let s = action_from(n, params);
        let e = 0.5 * n.kinetic + 0.5 * n.mass - n.potential / (params.p + 1.0) + 0.5 * vel.v_sq;
        Self {
            mass: n.mass,
            kinetic: n.kinetic,
            potential: n.potential,
            s,
            e,
            c: vel.charge,
            l: e + params.omega * vel.charge,
            k_d2: k(Canonical::D2),
            k_2pm1: k(Canonical::TwoPm1),
            k_0m1: k(Canonical::ZeroM1),
            t_d2: t(Canonical::D2),
            t_2pm1: t(Canonical::TwoPm1),
            t_0m1: t(Canonical::ZeroM1),
        }
    }

    pub fn of_state(s: &StateSnapshot, params: &ModelParams) -> Self {
        let n = Norms::of(&s.grid, &s.u, params);
        Self::from_parts(&n, &Velocity::of(&s.grid, &s.u, &s.v), params)
    }

    /// Record of the standing-wave data (f, iωf) for a real profile.
    pub fn of_profile(grid: &RadialGrid, f: &[f64], params: &ModelParams) -> Self {
        let n = Norms::of(grid, f, params);
        Self::from_parts(&n, &Velocity::standing(params, n.mass), params)
    }

    pub fn norms(&self) -> Norms {
        Norms { mass: self.mass, kinetic: self.kinetic, potential: self.potential }
    }

    pub fn k(&self, c: Canonical) -> f64 {
        match c {
            Canonical::D2 => self.k_d2,
            Canonical::TwoPm1 => self.k_2pm1,
            Canonical::ZeroM1 => self.k_0m1,
        }
    }

    pub fn t(&self, c: Canonical) -> f64 {
        match c {
            Canonical::D2 => self.t_d2,
            Canonical::TwoPm1 => self.t_2pm1,
            Canonical::ZeroM1 => self.t_0m1,
        }
    }

    /// Largest relative mismatch between stored S, K, T and their recomputation from the norms.
    pub fn consistency_defect(&self, params: &ModelParams) -> f64 {
        let n = self.norms();
        let scale = n.mass + n.kinetic + n.potential;
        let mut worst = (action_from(&n, params) - self.s).abs();
        for c in Canonical::ALL {
            worst = worst.max((virial_k_from(&n, params, &c.raw(params)) - self.k(c)).abs());
            worst = worst.max((functional_t_from(&n, params, &c.raw(params)) - self.t(c)).abs());
        }
        if scale > 0.0 {
            worst / scale
        } else {
            worst
        }
    }
}

/// (E_γ, C) of a snapshot.
pub fn energy_charge(s: &StateSnapshot, params: &ModelParams) -> (f64, f64) {
    let r = FunctionalRecord::of_state(s, params);
    (r.e, r.c)
}

/// L_{ω,γ} two ways: E + ωC and S(u) + ½‖v − iωu‖².
pub fn functional_l(s: &StateSnapshot, params: &ModelParams) -> (f64, f64) {
    let (e, c) = energy_charge(s, params);
    let iw = Complex64::new(0.0, params.omega);
    let diff: Vec<C64> = s.u.iter().zip(&s.v).map(|(u, v)| v - iw * u).collect();
    let other = action_s(&s.grid, &s.u, params) + 0.5 * s.grid.l2_sq(&diff);
    (e + params.omega * c, other)
}

/// K_1 = mass + kinetic − potential − ‖v‖² and K = K^{d,2} + q·K_1.
pub fn k1_k_from(n: &Norms, vel: &Velocity, params: &ModelParams) -> (f64, f64) {
    let k1 = n.mass + n.kinetic - n.potential - vel.v_sq;
    let kd2 = virial_k_from(n, params, &Canonical::D2.raw(params));
    (k1, kd2 + params.q * k1)
}

pub fn functional_k1_k(s: &StateSnapshot, params: &ModelParams) -> (f64, f64) {
    let n = Norms::of(&s.grid, &s.u, params);
    k1_k_from(&n, &Velocity::of(&s.grid, &s.u, &s.v), params)
}

/// J(f) = mass^{(p+1−d(p−1)/2)/2} kinetic^{d(p−1)/4} / potential.
pub fn gn_quotient_from(n: &Norms, params: &ModelParams) -> Result<f64> {
    if !(n.potential > 0.0) {
        return Err(LabError::Domain("GN quotient of the zero field".into()));
    }
    let (d, p) = (params.dim(), params.p);
    let a = (p + 1.0 - d * (p - 1.0) / 2.0) / 2.0;
    let b = d * (p - 1.0) / 4.0;
    Ok(n.mass.powf(a) * n.kinetic.powf(b) / n.potential)
}

pub fn gn_quotient<T: Amp>(grid: &RadialGrid, f: &[T], params: &ModelParams) -> Result<f64> {
    gn_quotient_from(&Norms::of(grid, f, params), params)
}
