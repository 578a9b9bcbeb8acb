//! Adaptive Dormand–Prince 5(4) integrator with dense output.

use crate::error::{LabError, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step with its continuous extension.
#[derive(Debug, Clone, Copy)]
pub struct Segment<const N: usize> {
    pub x0: f64,
    pub x1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    cont: [[f64; N]; 4],
}

impl<const N: usize> Segment<N> {
    /// Dense output at x in [x0, x1].
    pub fn eval(&self, x: f64) -> [f64; N] {
        let s = (x - self.x0) / (self.x1 - self.x0);
        let s1 = 1.0 - s;
        let mut y = [0.0; N];
        for i in 0..N {
            y[i] = self.y0[i]
                + s * (self.cont[0][i]
                    + s1 * (self.cont[1][i] + s * (self.cont[2][i] + s1 * self.cont[3][i])));
        }
        y
    }
}

/// What the step observer wants next.
pub enum Flow {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-14, max_steps: 2_000_000 }
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrates y' = f(x, y) from x0 towards x_end, handing each accepted step to `observe`.
/// Returns the last accepted (x, y).
pub fn integrate<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    x0: f64,
    y0: [f64; N],
    x_end: f64,
    tol: Tolerance,
    mut observe: impl FnMut(&Segment<N>) -> Flow,
) -> Result<(f64, [f64; N])> {
    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, &y);
    let span = x_end - x0;
    let mut h = (span.abs() * 1e-6).max(1e-12) * span.signum();
    let mut err_prev: f64 = 1e-4;
    for _ in 0..tol.max_steps {
        if (x_end - x) * span.signum() <= 0.0 {
            return Ok((x, y));
        }
        if (x + h - x_end) * span.signum() > 0.0 {
            h = x_end - x;
        }
        let k2 = f(x + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = f(x + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(x + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(x + C5 * h, &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(
            x + h,
            &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y1 = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(x + h, &y1);
        let mut err = 0.0;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = tol.atol + tol.rtol * y[i].abs().max(y1[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / N as f64).sqrt();
        if !err.is_finite() {
            h *= 0.1;
            if h.abs() < 1e-300 {
                return Err(LabError::Numerical(format!("step size underflow at x = {x}")));
            }
            continue;
        }
        if err <= 1.0 {
            let mut cont = [[0.0; N]; 4];
            for i in 0..N {
                let ydiff = y1[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                cont[0][i] = ydiff;
                cont[1][i] = bspl;
                cont[2][i] = ydiff - h * k7[i] - bspl;
                cont[3][i] = h
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            let seg = Segment { x0: x, x1: x + h, y0: y, y1, cont };
            x += h;
            y = y1;
            k1 = k7;
            // PI step-size controller
            let fac = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
            h *= fac.clamp(0.2, 5.0);
            err_prev = err.max(1e-4);
            if let Flow::Stop = observe(&seg) {
                return Ok((x, y));
            }
        } else {
            h *= (0.9 * err.powf(-0.2)).max(0.2);
        }
        if h.abs() < 1e-14 * x.abs().max(1e-300) {
            return Err(LabError::Numerical(format!("step size collapsed at x = {x}")));
        }
    }
    Err(LabError::Numerical(format!("step budget exhausted at x = {x}")))
}

/// Solves a tridiagonal system in place (Thomas algorithm); `lo[0]` and `up[n−1]` are ignored.
pub fn solve_tridiagonal(lo: &[f64], dg: &[f64], up: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = dg.len();
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut b = dg[0];
    if b == 0.0 {
        return Err(LabError::Numerical("singular tridiagonal system".into()));
    }
    x[0] = rhs[0] / b;
    for i in 1..n {
        c[i] = up[i - 1] / b;
        b = dg[i] - lo[i] * c[i];
        if b == 0.0 || !b.is_finite() {
            return Err(LabError::Numerical(format!("singular tridiagonal pivot at row {i}")));
        }
        x[i] = (rhs[i] - lo[i] * x[i - 1]) / b;
    }
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c[i + 1] * next;
    }
    Ok(x)
}
