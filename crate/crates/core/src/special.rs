//! Lambert W (principal branch), the two threshold constants and a couple of
//! small numerical helpers (bisection, adaptive Simpson).

use crate::error::{Error, Result};
use std::f64::consts::E;

/// Stopping rule shared by the iterative solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iters: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs_tol: 1e-12, rel_tol: 0.0, max_iters: 200 }
    }
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64, max_iters: usize) -> Result<Self> {
        if !(abs_tol > 0.0) || !(rel_tol >= 0.0) || max_iters == 0 {
            return Err(Error::InvalidParameter(format!(
                "tolerance needs abs_tol > 0, rel_tol >= 0, max_iters >= 1 (got {abs_tol}, {rel_tol}, {max_iters})"
            )));
        }
        Ok(Tolerance { abs_tol, rel_tol, max_iters })
    }
}

/// -1/e, the branch point of W.
pub const BRANCH_POINT: f64 = -0.36787944117144233;

pub fn lambert_w0(z: f64) -> Result<f64> {
    lambert_w0_with(z, &Tolerance::default())
}

/// Principal branch W0(z), the solution w >= -1 of w e^w = z.
///
/// Bracketed Halley iteration; a Halley step that leaves the bracket is
/// replaced by a bisection step, so convergence does not depend on the seed.
pub fn lambert_w0_with(z: f64, tol: &Tolerance) -> Result<f64> {
    if z.is_nan() || z < BRANCH_POINT - tol.abs_tol {
        return Err(Error::Domain { op: "lambert_w0", value: z });
    }
    if z <= BRANCH_POINT {
        return Ok(-1.0);
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z.abs() < 1e-4 {
        // series; keeps relative accuracy for tiny arguments
        let z2 = z * z;
        return Ok(z - z2 + 1.5 * z2 * z - 8.0 / 3.0 * z2 * z2 + 125.0 / 24.0 * z2 * z2 * z);
    }

    let (mut lo, mut hi) = if z < 0.0 { (-1.0, 0.0) } else { (0.0, (1.0 + z).ln().max(1.0)) };
    let mut w = if z < 0.0 {
        let p = (2.0 * (1.0 + E * z)).sqrt();
        (-1.0 + p - p * p / 3.0).clamp(lo, hi)
    } else {
        let l = (1.0 + z).ln();
        l - (1.0 + l).ln() * l / (2.0 + l)
    };

    for _ in 0..tol.max_iters {
        let ew = w.exp();
        let f = w * ew - z;
        if f == 0.0 {
            return Ok(w);
        }
        if f > 0.0 {
            hi = w;
        } else {
            lo = w;
        }
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let mut next = w - f / denom;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        let step = (next - w).abs();
        w = next;
        if step <= 4.0 * f64::EPSILON * (1.0 + w.abs()) || hi - lo <= 4.0 * f64::EPSILON * (1.0 + w.abs()) {
            let resid = (w * w.exp() - z).abs();
            if resid <= tol.abs_tol.max(tol.rel_tol * z.abs()).max(8.0 * f64::EPSILON * z.abs()) {
                return Ok(w);
            }
        }
    }
    let resid = (w * w.exp() - z).abs();
    if resid <= tol.abs_tol.max(tol.rel_tol * z.abs()) {
        Ok(w)
    } else {
        Err(Error::NonConvergence { op: "lambert_w0", iters: tol.max_iters })
    }
}

/// W0'(z) = W0(z) / (z (1 + W0(z))), with the limit value 1 at z = 0.
pub fn lambert_w0_derivative(z: f64) -> Result<f64> {
    if z.is_nan() || z <= BRANCH_POINT {
        return Err(Error::Domain { op: "lambert_w0_derivative", value: z });
    }
    if z.abs() < 1e-4 {
        let z2 = z * z;
        return Ok(1.0 - 2.0 * z + 4.5 * z2 - 32.0 / 3.0 * z2 * z + 625.0 / 24.0 * z2 * z2);
    }
    let w = lambert_w0(z)?;
    Ok(w / (z * (1.0 + w)))
}

/// theta = 1 + W0(-2 e^-2) / 2 ~ 0.7968, where P(z) leaves the constant 2.
pub fn theta_threshold() -> f64 {
    1.0 + 0.5 * lambert_w0(-2.0 * (-2.0f64).exp()).expect("argument inside the domain")
}

/// beta, the fixed point of z -> 1 - e^{-1/z} in (0, 1); ~ 0.7406.
pub fn beta_threshold() -> f64 {
    let h = |z: f64| z - 1.0 + (-1.0 / z).exp();
    bisect(h, 0.5, 1.0, &Tolerance { abs_tol: 1e-15, rel_tol: 0.0, max_iters: 200 })
        .expect("sign change on [0.5, 1]")
}

/// Plain bisection for a sign change of `f` on `[lo, hi]`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: &Tolerance) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Domain { op: "bisect", value: lo });
    }
    for _ in 0..tol.max_iters {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo <= tol.abs_tol.max(tol.rel_tol * mid.abs()) {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(Error::NonConvergence { op: "bisect", iters: tol.max_iters })
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
///
/// Stops refining a panel once the Richardson estimate is below its share of
/// `tol`; gives up with an error after `max_evals` evaluations.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, max_evals: usize) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut evals = 3usize;
    let out = simpson_rec(&f, a, b, fa, fm, fb, whole, tol, 50, &mut evals, max_evals);
    if evals > max_evals {
        return Err(Error::NonConvergence { op: "adaptive_simpson", iters: evals });
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
    evals: &mut usize,
    max_evals: usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    *evals += 2;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || *evals > max_evals || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, evals, max_evals)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, evals, max_evals)
}
