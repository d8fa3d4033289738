use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_ur, ln_gamma};

use crate::analytic_wf::{analyticity_radius, RadiusEstimate, TaylorInput};
use crate::error::{invalid, Result};
use crate::quadrature::gauss_legendre;
use crate::special::tricomi_u;

/// Largest order within the double-precision budget of the Cauchy route.
pub const K_MAX: usize = 24;

/// Relative disagreement between the routes that flags a row.
pub const ROUTE_TOLERANCE: f64 = 1e-6;

const CAUCHY_NODES: usize = 128;
const Y_MAX: f64 = 14.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeRow {
    pub k: usize,
    /// Cauchy integral of the y-representation.
    pub cauchy: f64,
    /// √π cos(πk/2) Γ(k+1) U(½, (k+5)/2, ½).
    pub closed: f64,
    pub rel_diff: f64,
    /// |g^{(k)}| r^k/(k! max|g|) on the Cauchy circle; the size of the
    /// coefficient relative to the data it was extracted from.
    pub cauchy_scale: f64,
    pub radius: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub rows: Vec<DerivativeRow>,
    pub radius: RadiusEstimate,
    /// (k, (|g^{(k)}(0)|/k!)^{1/k}) over even k ≥ 2, closed-form route.
    pub roots: Vec<(usize, f64)>,
}

/// g(z) = ∫ (z² + 1/(y² + 1))^{-1} e^{-y²/2} dy, evaluated off the poles
/// z = ±i/√(1 + y²).
pub fn g_complex(z: C64) -> C64 {
    let rule = gauss_legendre(16);
    let (x, w) = (&rule.0, &rule.1);
    let panels = 56;
    let width = Y_MAX / panels as f64;
    let mut acc = C64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * width;
        for (s, wt) in x.iter().zip(w.iter()) {
            let y = mid + 0.5 * width * s;
            let q = 1.0 + y * y;
            acc += q * (-0.5 * y * y).exp() / (z * z * q + 1.0) * (wt * 0.5 * width);
        }
    }
    2.0 * acc
}

/// The closed form, exactly zero for odd k where cos(πk/2) vanishes.
pub fn g_derivative_closed(k: usize) -> f64 {
    if !k.is_multiple_of(2) {
        return 0.0;
    }
    let sign = if (k / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    PI.sqrt() * sign * gamma(k as f64 + 1.0) * tricomi_u(0.5, (k as f64 + 5.0) / 2.0, 0.5)
}

/// Circle radius for order k. Poles inside |z| = r come from |y| > Y with
/// r = 1/√(1 + Y²), costing about Q(n + 3/2, Y²/2) relative error for
/// k = 2n; rounding costs about ε·max|g|/(|a_k| r^k). The lower bound
/// |a_{2n}| ≥ √(2π)(2n+1)!! stands in for the unknown coefficient.
fn cauchy_radius(k: usize) -> f64 {
    let n = (k / 2) as f64;
    let ln_a = 0.5 * (2.0 * PI).ln() + ln_double_factorial(2.0 * n + 1.0);
    let mut best = (f64::INFINITY, 0.2);
    for i in 0..400 {
        let r = 0.04 + 0.0004 * i as f64;
        let y2 = 1.0 / (r * r) - 1.0;
        let tail = gamma_ur(n + 1.5, 0.5 * y2);
        let round = 1e-16 * 6.0 * (-ln_a - k as f64 * r.ln()).exp();
        let err = tail + round;
        if err < best.0 {
            best = (err, r);
        }
    }
    best.1
}

fn ln_double_factorial(m: f64) -> f64 {
    // (2n+1)!! = (2n+1)!/(2^n n!)
    let n = (m - 1.0) / 2.0;
    ln_gamma(m + 1.0) - n * 2f64.ln() - ln_gamma(n + 1.0)
}

/// g^{(k)}(0) = k!/(2π) ∫ g(r e^{iθ}) e^{-ikθ} dθ / r^k on a node set
/// offset by half a step so no node sits on the imaginary axis. Returns
/// the derivative and max|g| on the circle.
fn cauchy_derivative(k: usize, r: f64) -> (f64, f64) {
    let n = CAUCHY_NODES;
    let mut acc = C64::new(0.0, 0.0);
    let mut scale: f64 = 0.0;
    for j in 0..n {
        let th = 2.0 * PI * (j as f64 + 0.5) / n as f64;
        let v = g_complex(C64::from_polar(r, th));
        scale = scale.max(v.norm());
        acc += v * C64::from_polar(1.0, -(k as f64) * th);
    }
    let a_k = acc.re / n as f64 / r.powi(k as i32);
    ((ln_gamma(k as f64 + 1.0)).exp() * a_k, scale)
}

pub fn counterexample_g(k_max: usize) -> Result<CounterexampleReport> {
    if k_max > K_MAX {
        return Err(invalid(
            "k_max",
            format!("at most {K_MAX} within the precision budget"),
        ));
    }
    if k_max < 8 {
        return Err(invalid(
            "k_max",
            "need at least eight orders for a radius trend",
        ));
    }
    let mut rows = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        // Odd orders reuse the neighbouring even radius.
        let r = cauchy_radius(k - k % 2);
        let (cauchy, scale) = cauchy_derivative(k, r);
        let closed = g_derivative_closed(k);
        let kf = k as f64;
        let cauchy_scale =
            (cauchy.abs().ln() - ln_gamma(kf + 1.0) + kf * r.ln() - scale.ln()).exp();
        let (rel_diff, flagged) = if k % 2 == 0 {
            let d = (cauchy - closed).abs() / closed.abs();
            (d, !(d <= ROUTE_TOLERANCE))
        } else {
            (f64::NAN, !(cauchy_scale <= ROUTE_TOLERANCE))
        };
        rows.push(DerivativeRow {
            k,
            cauchy,
            closed,
            rel_diff,
            cauchy_scale,
            radius: r,
            flagged,
        });
    }
    let closed: Vec<f64> = rows.iter().map(|r| r.closed).collect();
    let radius = analyticity_radius(TaylorInput::Derivatives(&closed), 0.0, 1.0, k_max)?;
    let roots = rows
        .iter()
        .filter(|r| r.k >= 2 && r.k % 2 == 0)
        .map(|r| {
            let kf = r.k as f64;
            (r.k, ((r.closed.abs().ln() - ln_gamma(kf + 1.0)) / kf).exp())
        })
        .collect();
    Ok(CounterexampleReport {
        rows,
        radius,
        roots,
    })
}
