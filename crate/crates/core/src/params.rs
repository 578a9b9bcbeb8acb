//! Model parameters (d, p, γ, ω), derived constants and virial indices.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

const SLACK: f64 = 1e-12;

/// Position of p relative to the mass-critical exponent 1 + 4/d.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    MassSub,
    MassCritical,
    MassSuper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub d: usize,
    pub p: f64,
    pub gamma: f64,
    pub omega: f64,
    pub omega_c: Option<f64>,
    pub rho: f64,
    pub sigma: f64,
    pub q: f64,
}

impl ModelParams {
    pub fn new(d: usize, p: f64, gamma: f64, omega: f64) -> Result<Self> {
        if d < 3 {
            return Err(LabError::Domain(format!("d = {d} must be at least 3")));
        }
        let df = d as f64;
        if !(p > 1.0) || p > 1.0 + 4.0 / (df - 2.0) + SLACK {
            return Err(LabError::Domain(format!(
                "p = {p} must satisfy 1 < p <= 1 + 4/(d-2) = {}",
                1.0 + 4.0 / (df - 2.0)
            )));
        }
        let hardy = ((df - 2.0) / 2.0).powi(2);
        if !(gamma > -hardy) {
            return Err(LabError::Domain(format!(
                "gamma = {gamma} must exceed -((d-2)/2)^2 = {}",
                -hardy
            )));
        }
        if !(omega.abs() < 1.0) {
            return Err(LabError::Domain(format!("|omega| = {} must be below 1", omega.abs())));
        }
        let half = (df - 2.0) / 2.0;
        let rho = half - (half * half + gamma).sqrt();
        let denom = 4.0 - (df - 1.0) * (p - 1.0);
        let omega_c = (denom > 0.0).then(|| ((p - 1.0) / denom).sqrt());
        Ok(Self {
            d,
            p,
            gamma,
            omega,
            omega_c,
            rho,
            sigma: -rho,
            q: 4.0 / (p - 1.0) - df,
        })
    }

    pub fn dim(&self) -> f64 {
        self.d as f64
    }

    /// 1 − ω².
    pub fn m2(&self) -> f64 {
        1.0 - self.omega * self.omega
    }

    pub fn with_omega(&self, omega: f64) -> Result<Self> {
        Self::new(self.d, self.p, self.gamma, omega)
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.d, self.p, gamma, self.omega)
    }

    pub fn mass_critical_p(&self) -> f64 {
        1.0 + 4.0 / self.dim()
    }

    pub fn regime(&self) -> Regime {
        let pc = self.mass_critical_p();
        if (self.p - pc).abs() <= 1e-12 {
            Regime::MassCritical
        } else if self.p < pc {
            Regime::MassSub
        } else {
            Regime::MassSuper
        }
    }

    /// Local well-posedness is assumed rather than proved for d ≥ 6.
    pub fn conditional_regime(&self) -> bool {
        self.d >= 6
    }

    /// Preconditions of the ground-state solver.
    pub fn require_ground_state_regime(&self) -> Result<()> {
        if !(self.gamma > 0.0) {
            return Err(LabError::Domain(format!(
                "ground states need gamma > 0, got {}",
                self.gamma
            )));
        }
        let ecrit = 1.0 + 4.0 / (self.dim() - 2.0);
        if self.p >= ecrit - SLACK {
            return Err(LabError::Domain(format!(
                "ground states need p < 1 + 4/(d-2) = {ecrit}"
            )));
        }
        Ok(())
    }
}

/// Scaling index (α, β) of the family e^{αλ} f(e^{βλ} ·).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirialIndex {
    pub alpha: f64,
    pub beta: f64,
}

/// Names of the three indices used throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Canonical {
    #[serde(rename = "d2")]
    D2,
    #[serde(rename = "2pm1")]
    TwoPm1,
    #[serde(rename = "0m1")]
    ZeroM1,
}

impl Canonical {
    pub const ALL: [Canonical; 3] = [Canonical::D2, Canonical::TwoPm1, Canonical::ZeroM1];

    pub fn label(&self) -> &'static str {
        match self {
            Canonical::D2 => "d2",
            Canonical::TwoPm1 => "2pm1",
            Canonical::ZeroM1 => "0m1",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "d2" | "d,2" => Some(Canonical::D2),
            "2pm1" | "2,p-1" => Some(Canonical::TwoPm1),
            "0m1" | "0,-1" => Some(Canonical::ZeroM1),
            _ => None,
        }
    }

    pub fn raw(&self, params: &ModelParams) -> VirialIndex {
        match self {
            Canonical::D2 => VirialIndex { alpha: params.dim(), beta: 2.0 },
            Canonical::TwoPm1 => VirialIndex { alpha: 2.0, beta: params.p - 1.0 },
            Canonical::ZeroM1 => VirialIndex { alpha: 0.0, beta: -1.0 },
        }
    }

    pub fn index(&self, params: &ModelParams) -> Result<VirialIndex> {
        let raw = self.raw(params);
        VirialIndex::new(raw.alpha, raw.beta, params)
    }
}

impl VirialIndex {
    /// Checks the admissibility conditions for the given (d, p).
    pub fn new(alpha: f64, beta: f64, params: &ModelParams) -> Result<Self> {
        let idx = Self { alpha, beta };
        idx.check(params)?;
        Ok(idx)
    }

    pub fn check(&self, params: &ModelParams) -> Result<()> {
        let (a, b, d, p) = (self.alpha, self.beta, params.dim(), params.p);
        let fail = |what: &str| {
            Err(LabError::Constraint(format!(
                "(alpha, beta) = ({a}, {b}) violates {what} at d = {d}, p = {p}"
            )))
        };
        if a < -SLACK {
            return fail("alpha >= 0");
        }
        if 2.0 * a - d * b < -SLACK {
            return fail("2 alpha - d beta >= 0");
        }
        if 2.0 * a - (d - 2.0) * b <= SLACK {
            return fail("2 alpha - (d-2) beta > 0");
        }
        if (p - 1.0) * a - 2.0 * b < -SLACK {
            return fail("(p-1) alpha - 2 beta >= 0");
        }
        if a.abs() <= SLACK && b.abs() <= SLACK {
            return fail("(alpha, beta) != (0, 0)");
        }
        let mu = (p + 1.0) * a - d * b;
        if mu <= SLACK {
            return fail("(p+1) alpha - d beta > 0");
        }
        Ok(())
    }

    /// μ̄ with the case split on the sign of β.
    pub fn mu_bar(&self, params: &ModelParams) -> f64 {
        let d = params.dim();
        if self.beta >= 0.0 {
            (params.p + 1.0) * self.alpha - d * self.beta
        } else {
            2.0 * self.alpha - d * self.beta
        }
    }

    /// Coefficients (c_M, c_K, c_P) with K = c_M·mass + c_K·kinetic − c_P·potential.
    pub fn k_coeffs(&self, params: &ModelParams) -> [f64; 3] {
        let (a, b, d, p) = (self.alpha, self.beta, params.dim(), params.p);
        [
            (2.0 * a - d * b) * params.m2() / 2.0,
            (2.0 * a - (d - 2.0) * b) / 2.0,
            ((p + 1.0) * a - d * b) / (p + 1.0),
        ]
    }

    /// Coefficients (t_M, t_K, t_P) with T = S − K/μ̄ = t_M·mass + t_K·kinetic − t_P·potential.
    pub fn t_coeffs(&self, params: &ModelParams) -> [f64; 3] {
        let k = self.k_coeffs(params);
        let mu = self.mu_bar(params);
        let s = [params.m2() / 2.0, 0.5, 1.0 / (params.p + 1.0)];
        let mut t = [0.0; 3];
        for i in 0..3 {
            t[i] = s[i] - k[i] / mu;
            if t[i].abs() < 1e-14 * (s[i].abs() + (k[i] / mu).abs()) {
                t[i] = 0.0;
            }
        }
        t
    }
}
