//! Closed-form price-of-anarchy bounds and the curves built from them.

use crate::error::{Error, Result};
use crate::special::{beta_threshold, lambert_w0, theta_threshold};
use std::f64::consts::E;

fn w0(z: f64) -> f64 {
    // arguments here are always >= -1/e up to rounding
    lambert_w0(z.max(crate::special::BRANCH_POINT)).expect("argument clamped to the domain")
}

/// `P(z)`: 2 up to `theta`, then `1 + z / (1 + W0(-e^{-z-1}))`.
pub fn bound_p(z: f64) -> f64 {
    if z > theta_threshold() {
        1.0 + z / (1.0 + w0(-(-z - 1.0).exp()))
    } else {
        2.0
    }
}

/// Single type `t`, no budgets, no reserves.
pub fn bound_q_common(t: f64) -> f64 {
    if t <= 0.0 {
        2.0
    } else if t >= 1.0 - 1.0 / E {
        E / (E - 1.0)
    } else {
        1.0 - (1.0 - t) * (1.0 - t).ln() / t
    }
}

fn check_unit(name: &'static str, x: f64, closed_top: bool) -> Result<()> {
    let ok = x >= 0.0 && if closed_top { x <= 1.0 } else { x < 1.0 };
    if ok {
        Ok(())
    } else {
        Err(Error::Domain { op: name, value: x })
    }
}

/// Single type `t` with reserve gap `eta`.
pub fn bound_pt_eta(t: f64, eta: f64) -> Result<f64> {
    check_unit("bound_pt_eta (t)", t, true)?;
    check_unit("bound_pt_eta (eta)", eta, false)?;
    if t == 0.0 {
        return Ok(2.0 - eta);
    }
    if t > 1.0 - 1.0 / E && eta < (1.0 - E * (1.0 - t)) / t {
        return Ok(E / (E - 1.0 + t * eta));
    }
    Ok(1.0 + (1.0 - t) * ((1.0 - t * eta) / (1.0 - t)).ln() / t)
}

/// `zeta(eta) = 2 - eta + W0(-(1-eta)^2 e^{eta-2})`.
pub fn zeta(eta: f64) -> Result<f64> {
    check_unit("zeta", eta, false)?;
    Ok(2.0 - eta + w0(-(1.0 - eta).powi(2) * (eta - 2.0).exp()))
}

/// Types {0, 1} with reserve gap `eta`: `(1 - eta) zeta / (zeta - 1)`.
pub fn bound_q_eta(eta: f64) -> Result<f64> {
    let z = zeta(eta)?;
    Ok((1.0 - eta) * z / (z - 1.0))
}

/// All types at least `t_min >= beta`: `1 / (t_min (1 - e^{-1/t_min}))`.
pub fn bound_min_type(t_min: f64) -> Result<f64> {
    if !(t_min >= beta_threshold() - 1e-12 && t_min <= 1.0) {
        return Err(Error::Domain { op: "bound_min_type", value: t_min });
    }
    Ok(1.0 / (t_min * (1.0 - (-1.0 / t_min).exp())))
}

/// One sample of a named curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub x: f64,
    pub value: f64,
    pub curve: String,
}

pub const CURVES: [&str; 3] = ["fig1a", "fig1b", "q_eta"];

/// `fig1a`: `P(t)` and the single-type bound against `t` (200 points).
/// `fig1b`: `P_t(eta)` for `t` in {0, 0.3, 0.7, 1} against `eta`.
/// `q_eta`: the two-type reserve bound against `eta`.
pub fn curve(name: &str, points: usize) -> Result<Vec<CurvePoint>> {
    if points < 2 {
        return Err(Error::InvalidParameter("a curve needs at least 2 points".into()));
    }
    let grid = |hi: f64| (0..points).map(move |k| hi * k as f64 / (points - 1) as f64);
    let pt = |x: f64, value: f64, curve: &str| CurvePoint { x, value, curve: curve.into() };
    let mut out = Vec::new();
    match name {
        "fig1a" => {
            for x in grid(1.0) {
                out.push(pt(x, bound_p(x), "P"));
                out.push(pt(x, bound_q_common(x), "Q"));
            }
        }
        "fig1b" => {
            for t in [0.0, 0.3, 0.7, 1.0] {
                for x in grid(0.99) {
                    out.push(pt(x, bound_pt_eta(t, x)?, &format!("P_{t}")));
                }
            }
        }
        "q_eta" => {
            for x in grid(0.99) {
                out.push(pt(x, bound_q_eta(x)?, "Q_eta"));
            }
        }
        other => return Err(Error::InvalidParameter(format!("unknown curve {other:?}; known: {CURVES:?}"))),
    }
    Ok(out)
}

/// Writes `x,value,curve` rows.
pub fn write_curve_csv<W: std::io::Write>(w: W, pts: &[CurvePoint]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["x", "value", "curve"])?;
    for p in pts {
        wr.write_record([p.x.to_string(), p.value.to_string(), p.curve.clone()])?;
    }
    wr.flush()?;
    Ok(())
}
