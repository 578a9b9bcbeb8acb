//! Staggered radial grid, quadrature, the operator Δ_γ and field containers.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::ops::{Add, Mul, Sub};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub type C64 = Complex64;

/// Scalar sample types a radial field can carry.
pub trait Amp:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn abs2(self) -> f64;
    fn to_c64(self) -> C64;
}

impl Amp for f64 {
    fn abs2(self) -> f64 {
        self * self
    }
    fn to_c64(self) -> C64 {
        C64::new(self, 0.0)
    }
}

impl Amp for C64 {
    fn abs2(self) -> f64 {
        self.norm_sqr()
    }
    fn to_c64(self) -> C64 {
        self
    }
}

/// Γ(k/2) for a positive integer k.
pub fn gamma_half(k: usize) -> f64 {
    assert!(k > 0);
    let (mut g, mut x) = if k % 2 == 0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    while x < k as f64 / 2.0 - 1e-12 {
        g *= x;
        x += 1.0;
    }
    g
}

/// |S^{d−1}| = 2π^{d/2}/Γ(d/2).
pub fn sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma_half(d)
}

/// Nodes r_i = (i+½)h, i = 0..n−1, with the Dirichlet ghost value f_n = 0 at (n+½)h.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    pub d: usize,
    pub n: usize,
    pub h: f64,
    pub r_max: f64,
    pub r: Vec<f64>,
    pub w: Vec<f64>,
    pub surface: f64,
    /// |S^{d−1}| r_{i+½}^{d−1} h for the face between node i and i+1.
    face_w: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub d: usize,
    pub h: f64,
    pub r_max: f64,
    pub n: usize,
}

impl RadialGrid {
    pub fn new(d: usize, r_max: f64, n: usize) -> Result<Self> {
        if n < 16 {
            return Err(LabError::Domain(format!("grid needs n >= 16, got {n}")));
        }
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(LabError::Domain(format!("grid needs r_max > 0, got {r_max}")));
        }
        if d < 1 {
            return Err(LabError::Domain("grid needs d >= 1".into()));
        }
        let h = r_max / n as f64;
        let surface = sphere_area(d);
        let e = d as i32 - 1;
        let r: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
        let w = r.iter().map(|&ri| surface * ri.powi(e) * h).collect();
        let face_w = (0..n).map(|i| surface * ((i + 1) as f64 * h).powi(e) * h).collect();
        Ok(Self { d, n, h, r_max, r, w, surface, face_w })
    }

    pub fn shared(d: usize, r_max: f64, n: usize) -> Result<Arc<Self>> {
        Ok(Arc::new(Self::new(d, r_max, n)?))
    }

    pub fn meta(&self) -> GridMeta {
        GridMeta { d: self.d, h: self.h, r_max: self.r_max, n: self.n }
    }

    pub fn from_meta(meta: &GridMeta) -> Result<Self> {
        Self::new(meta.d, meta.r_max, meta.n)
    }

    /// Σ w_i |f_i|².
    pub fn l2_sq<T: Amp>(&self, f: &[T]) -> f64 {
        f.iter().zip(&self.w).map(|(x, w)| w * x.abs2()).sum()
    }

    /// Σ w_i |f_i|^q.
    pub fn lp_pow<T: Amp>(&self, f: &[T], q: f64) -> f64 {
        f.iter().zip(&self.w).map(|(x, w)| w * pow_abs(x.abs2(), q)).sum()
    }

    /// Σ w_i f_i conj(g_i).
    pub fn inner(&self, f: &[C64], g: &[C64]) -> C64 {
        f.iter().zip(g).zip(&self.w).map(|((a, b), w)| a * b.conj() * *w).sum()
    }

    /// Σ w_i |f_i|² / r_i².
    pub fn hardy_sum<T: Amp>(&self, f: &[T]) -> f64 {
        f.iter().zip(&self.w).zip(&self.r).map(|((x, w), r)| w * x.abs2() / (r * r)).sum()
    }

    /// Face-difference quadratic form of −Δ (γ = 0) with f_n = 0.
    pub fn gradient_sq<T: Amp>(&self, f: &[T]) -> f64 {
        let n = self.n;
        let inv_h2 = 1.0 / (self.h * self.h);
        let mut s = 0.0;
        for i in 0..n {
            let next = if i + 1 < n { f[i + 1] } else { T::default() };
            s += self.face_w[i] * (next - f[i]).abs2() * inv_h2;
        }
        s
    }

    /// ‖(−Δ_γ)^{1/2} f‖², exactly −Re⟨Δ_γ f, f⟩ for the stencil of [`LaplacianGamma`].
    pub fn kinetic_gamma<T: Amp>(&self, f: &[T], gamma: f64) -> f64 {
        self.gradient_sq(f) + gamma * self.hardy_sum(f)
    }

    /// Sesquilinear form of kinetic_gamma: B(f, g) with B(f, f) = kinetic_gamma(f).
    pub fn kinetic_pair(&self, f: &[C64], g: &[C64], gamma: f64) -> C64 {
        let n = self.n;
        let inv_h2 = 1.0 / (self.h * self.h);
        let zero = C64::new(0.0, 0.0);
        let mut s = zero;
        for i in 0..n {
            let (fn_, gn) = if i + 1 < n { (f[i + 1], g[i + 1]) } else { (zero, zero) };
            s += (fn_ - f[i]) * (gn - g[i]).conj() * (self.face_w[i] * inv_h2);
            s += f[i] * g[i].conj() * (gamma * self.w[i] / (self.r[i] * self.r[i]));
        }
        s
    }

    /// Pointwise ∂_r f: centred in the interior, one-sided second order at both ends.
    pub fn radial_derivative<T: Amp>(&self, f: &[T]) -> Vec<T> {
        let n = self.n;
        let c = 0.5 / self.h;
        let mut out = vec![T::default(); n];
        for i in 1..n - 1 {
            out[i] = (f[i + 1] - f[i - 1]) * c;
        }
        out[0] = (f[1] * 4.0 - f[0] * 3.0 - f[2]) * c;
        out[n - 1] = (f[n - 1] * 3.0 - f[n - 2] * 4.0 + f[n - 3]) * c;
        out
    }

    /// Weights masked to r ≥ r0 (restriction norms without regridding).
    pub fn outer_weights(&self, r0: f64) -> Vec<f64> {
        self.r.iter().zip(&self.w).map(|(r, w)| if *r >= r0 { *w } else { 0.0 }).collect()
    }

    pub fn face_weights(&self) -> &[f64] {
        &self.face_w
    }

    /// Index of the first node with r_i ≥ r0 (n if none).
    pub fn first_node_at_or_beyond(&self, r0: f64) -> usize {
        self.r.partition_point(|&r| r < r0)
    }
}

/// |x|^{q} given |x|², with the x = 0 branch returning 0.
#[inline]
pub fn pow_abs(abs2: f64, q: f64) -> f64 {
    if abs2 == 0.0 {
        0.0
    } else if q == 2.0 {
        abs2
    } else if q == 1.0 {
        abs2.sqrt()
    } else if q == 4.0 {
        abs2 * abs2
    } else if q == 3.0 {
        abs2 * abs2.sqrt()
    } else {
        (0.5 * q * abs2.ln()).exp()
    }
}

/// Three-point stencil of Δ_γ: (Δ_γ f)_i = lo_i f_{i−1} + dg_i f_i + up_i f_{i+1}.
#[derive(Debug, Clone)]
pub struct LaplacianGamma {
    pub gamma: f64,
    pub lo: Vec<f64>,
    pub dg: Vec<f64>,
    pub up: Vec<f64>,
}

impl LaplacianGamma {
    pub fn new(grid: &RadialGrid, gamma: f64) -> Self {
        let n = grid.n;
        let h2 = grid.h * grid.h;
        let e = grid.d as i32 - 1;
        let mut lo = vec![0.0; n];
        let mut up = vec![0.0; n];
        let mut dg = vec![0.0; n];
        for i in 0..n {
            let ri = grid.r[i];
            let scale = 1.0 / (ri.powi(e) * h2);
            let inner = (i as f64 * grid.h).powi(e) * scale;
            let outer = ((i + 1) as f64 * grid.h).powi(e) * scale;
            lo[i] = if i == 0 { 0.0 } else { inner };
            up[i] = outer;
            dg[i] = -(inner + outer) - gamma / (ri * ri);
        }
        Self { gamma, lo, dg, up }
    }

    pub fn apply_into<T: Amp>(&self, f: &[T], out: &mut [T]) {
        let n = f.len();
        for i in 0..n {
            let mut acc = f[i] * self.dg[i];
            if i > 0 {
                acc = acc + f[i - 1] * self.lo[i];
            }
            if i + 1 < n {
                acc = acc + f[i + 1] * self.up[i];
            }
            out[i] = acc;
        }
    }

    pub fn apply<T: Amp>(&self, f: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); f.len()];
        self.apply_into(f, &mut out);
        out
    }

    /// Gershgorin bound on the spectrum of −Δ_γ after symmetrizing by the quadrature weights.
    pub fn spectral_bound(&self, grid: &RadialGrid) -> f64 {
        let n = grid.n;
        let mut best: f64 = 0.0;
        for i in 0..n {
            let mut row = (-self.dg[i]).abs();
            if i > 0 {
                row += (self.lo[i] * self.up[i - 1]).sqrt();
            }
            if i + 1 < n {
                row += (self.up[i] * self.lo[i + 1]).sqrt();
            }
            best = best.max(row);
        }
        best
    }
}

/// Complex samples on a shared grid.
#[derive(Debug, Clone)]
pub struct RadialField {
    pub grid: Arc<RadialGrid>,
    pub values: Vec<C64>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(LabError::Domain(format!(
                "field has {} samples but the grid has {} nodes",
                values.len(),
                grid.n
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.n;
        Self { grid, values: vec![C64::new(0.0, 0.0); n] }
    }

    pub fn from_real(grid: Arc<RadialGrid>, re: &[f64]) -> Result<Self> {
        Self::new(grid, re.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> C64) -> Self {
        let values = grid.r.iter().map(|&r| f(r)).collect();
        Self { grid, values }
    }

    /// Index of the first non-finite sample, if any.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.values.iter().position(|z| !(z.re.is_finite() && z.im.is_finite()))
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.first_non_finite() {
            None => Ok(()),
            Some(i) => Err(LabError::Numerical(format!(
                "non-finite sample at node {i} (r = {})",
                self.grid.r[i]
            ))),
        }
    }

    pub fn l2_sq(&self) -> f64 {
        self.grid.l2_sq(&self.values)
    }

    pub fn lp_pow(&self, q: f64) -> f64 {
        self.grid.lp_pow(&self.values, q)
    }

    pub fn kinetic_gamma(&self, gamma: f64) -> f64 {
        self.grid.kinetic_gamma(&self.values, gamma)
    }

    pub fn apply_laplacian_gamma(&self, gamma: f64) -> RadialField {
        let op = LaplacianGamma::new(&self.grid, gamma);
        RadialField { grid: self.grid.clone(), values: op.apply(&self.values) }
    }

    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    /// CSV with header `r,re,im`, 17 significant digits.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "r,re,im")?;
        for (r, z) in self.grid.r.iter().zip(&self.values) {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", r, z.re, z.im)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path, grid: Arc<RadialGrid>) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["r", "re", "im"] {
            return Err(LabError::Domain(format!("unexpected field header {headers:?}")));
        }
        let mut values = Vec::with_capacity(grid.n);
        for (i, row) in rdr.records().enumerate() {
            let row = row?;
            let parse = |k: usize| -> Result<f64> {
                row[k]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| LabError::Domain(format!("row {i}: {e}")))
            };
            let r = parse(0)?;
            if i >= grid.n || (r - grid.r[i]).abs() > 1e-9 * grid.r_max {
                return Err(LabError::Domain(format!("row {i}: node r = {r} does not match the grid")));
            }
            values.push(C64::new(parse(1)?, parse(2)?));
        }
        Self::new(grid, values)
    }
}

/// A phase-space point (u, ∂_t u) at time t.
#[derive(Debug, Clone)]
pub struct StateSnapshot {
    pub grid: Arc<RadialGrid>,
    pub t: f64,
    pub u: Vec<C64>,
    pub v: Vec<C64>,
}

impl StateSnapshot {
    pub fn new(grid: Arc<RadialGrid>, t: f64, u: Vec<C64>, v: Vec<C64>) -> Result<Self> {
        if u.len() != grid.n || v.len() != grid.n {
            return Err(LabError::Domain("u and v must live on the snapshot grid".into()));
        }
        Ok(Self { grid, t, u, v })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.n;
        Self { grid, t: 0.0, u: vec![C64::new(0.0, 0.0); n], v: vec![C64::new(0.0, 0.0); n] }
    }

    pub fn u_field(&self) -> RadialField {
        RadialField { grid: self.grid.clone(), values: self.u.clone() }
    }

    pub fn v_field(&self) -> RadialField {
        RadialField { grid: self.grid.clone(), values: self.v.clone() }
    }

    /// Re∫∇u ∂_t ū dx for a radial snapshot: every component vanishes by symmetry.
    pub fn momentum(&self) -> Vec<f64> {
        vec![0.0; self.grid.d]
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
