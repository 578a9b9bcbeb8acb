//! Seeded radial test fields and the functional inequalities they are fuzzed against:
//! Hardy, radial Sobolev (fitted constant) and Gagliardo–Nirenberg (corpus estimate of C_GN).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::functionals::gn_quotient;
use crate::grid::{pow_abs, RadialGrid};
use crate::monitors::{smoothstep, AuditCheck, Status};
use crate::params::ModelParams;

/// Compactly supported radial field: Gaussian bumps times a smooth cut-off at `support`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestField {
    /// (centre, width, amplitude) triples.
    pub bumps: Vec<(f64, f64, f64)>,
    pub support: f64,
}

impl TestField {
    pub fn value(&self, r: f64) -> f64 {
        let cut = smoothstep((self.support - r) / (0.25 * self.support));
        if cut == 0.0 {
            return 0.0;
        }
        let sum: f64 = self
            .bumps
            .iter()
            .map(|&(c, s, a)| {
                let z = (r - c) / s;
                a * (-z * z).exp()
            })
            .sum();
        sum * cut
    }

    pub fn sample(&self, grid: &RadialGrid) -> Vec<f64> {
        grid.r.iter().map(|&r| self.value(r)).collect()
    }

    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        let k = rng.gen_range(1..=4);
        let support = rng.gen_range(6.0..12.0);
        let bumps = (0..k)
            .map(|_| {
                let c = rng.gen_range(0.0..0.6 * support);
                let s = rng.gen_range(0.3..1.5);
                let a: f64 = rng.sample(StandardNormal);
                (c, s, a)
            })
            .collect();
        Self { bumps, support }
    }
}

/// `count` fields drawn from ChaCha8 seeded with `seed`.
pub fn corpus(seed: u64, count: usize) -> Vec<TestField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| TestField::random(&mut rng)).collect()
}

/// (((d−2)/2)² Σ w|f|²/r², Σ w|D f|²) with the γ = 0 kinetic form.
pub fn hardy_sides(grid: &RadialGrid, f: &[f64]) -> (f64, f64) {
    let c = (grid.d as f64 - 2.0) / 2.0;
    (c * c * grid.hardy_sum(f), grid.gradient_sq(f))
}

/// Worst relative Hardy excess over the corpus; passes within 1e−8 relative slack.
pub fn hardy_check(grid: &RadialGrid, fields: &[TestField]) -> AuditCheck {
    let slack = 1e-8;
    let mut worst = (0usize, f64::NEG_INFINITY);
    for (i, f) in fields.iter().enumerate() {
        let (lhs, rhs) = hardy_sides(grid, &f.sample(grid));
        let excess = (lhs - rhs) / rhs;
        if excess > worst.1 {
            worst = (i, excess);
        }
    }
    AuditCheck {
        name: "hardy".into(),
        status: if worst.1 <= slack { Status::Pass } else { Status::Fail },
        worst_t: Some(worst.0 as f64),
        worst_value: worst.1,
        tolerance: slack,
    }
}

/// Norms restricted to r ≥ R: (‖f‖², ‖∇f‖², ‖f‖^{p+1}_{L^{p+1}}).
pub fn outer_norms(grid: &RadialGrid, f: &[f64], radius: f64, p: f64) -> (f64, f64, f64) {
    let k = grid.first_node_at_or_beyond(radius);
    let inv_h2 = 1.0 / (grid.h * grid.h);
    let fw = grid.face_weights();
    let (mut m, mut g, mut pot) = (0.0, 0.0, 0.0);
    for i in k..grid.n {
        let next = if i + 1 < grid.n { f[i + 1] } else { 0.0 };
        m += grid.w[i] * f[i] * f[i];
        g += fw[i] * (next - f[i]).powi(2) * inv_h2;
        pot += grid.w[i] * pow_abs(f[i] * f[i], p + 1.0);
    }
    (m, g, pot)
}

/// Outer mass below this fraction of the total leaves the ratio to roundoff.
pub const OUTER_MASS_FLOOR: f64 = 1e-8;

/// ‖f‖^{p+1}_{L^{p+1}(r≥R)} R^{(d−1)(p−1)/2} / (‖f‖^{(p+3)/2}_{L²(r≥R)} ‖∇f‖^{(p−1)/2}_{L²(r≥R)}),
/// or None when the field is negligible beyond R.
pub fn sobolev_ratio(grid: &RadialGrid, f: &[f64], radius: f64, p: f64) -> Option<f64> {
    let (m, g, pot) = outer_norms(grid, f, radius, p);
    if !(m > OUTER_MASS_FLOOR * grid.l2_sq(f) && g > 0.0) {
        return None;
    }
    let d = grid.d as f64;
    let denom = m.powf((p + 3.0) / 4.0) * g.powf((p - 1.0) / 4.0);
    Some(pot * radius.powf((d - 1.0) * (p - 1.0) / 2.0) / denom)
}

/// Radial Sobolev constant fitted over a corpus and a set of radii at two resolutions.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SobolevFit {
    pub constant: f64,
    pub refined: f64,
}

impl SobolevFit {
    pub fn relative_change(&self) -> f64 {
        (self.refined - self.constant).abs() / self.constant
    }
}

pub fn sobolev_constant(grid: &RadialGrid, fields: &[TestField], radii: &[f64], p: f64) -> f64 {
    let mut best = 0.0f64;
    for f in fields {
        let x = f.sample(grid);
        for &r in radii {
            if let Some(c) = sobolev_ratio(grid, &x, r, p) {
                best = best.max(c);
            }
        }
    }
    best
}

/// Fits the constant on `grid` and on the grid with twice the nodes.
pub fn sobolev_fit(grid: &RadialGrid, fields: &[TestField], radii: &[f64], p: f64) -> Result<SobolevFit> {
    if grid.d < 2 {
        return Err(LabError::Domain("radial Sobolev needs d >= 2".into()));
    }
    let fine = RadialGrid::new(grid.d, grid.r_max, 2 * grid.n)?;
    Ok(SobolevFit {
        constant: sobolev_constant(grid, fields, radii, p),
        refined: sobolev_constant(&fine, fields, radii, p),
    })
}

/// Smallest GN quotient J over the corpus at the given parameters.
pub fn gn_corpus_min(grid: &RadialGrid, fields: &[TestField], params: &ModelParams) -> Result<f64> {
    let mut best = f64::INFINITY;
    for f in fields {
        best = best.min(gn_quotient(grid, &f.sample(grid), params)?);
    }
    Ok(best)
}
