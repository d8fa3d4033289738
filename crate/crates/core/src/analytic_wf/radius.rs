use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// How the Taylor coefficients are obtained.
pub enum TaylorInput<'a> {
    /// Complex evaluator: Cauchy integrals on a circle.
    Complex(&'a (dyn Fn(C64) -> C64 + Sync)),
    /// Real evaluator: Richardson-extrapolated central differences.
    Real(&'a (dyn Fn(f64) -> f64 + Sync)),
    /// Derivatives f^{(k)}(center), k = 0, 1, …
    Derivatives(&'a [f64]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Trend {
    /// |a_k|^{-1/k} keeps growing: entire or larger than the probe.
    Increasing,
    /// |a_k|^{-1/k} keeps shrinking: radius tends to zero.
    Decreasing,
    Stable,
    /// Too few reliable orders to tell.
    Unstable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusEstimate {
    /// Estimated radius of convergence; +∞ for an entire-looking trend.
    pub radius: f64,
    pub trend: Trend,
    /// (k, |a_k|^{-1/k}) over the reliable orders.
    pub roots: Vec<(usize, f64)>,
    /// Highest order whose coefficient was trusted.
    pub orders_used: usize,
}

fn cauchy_coefficients(
    f: &(dyn Fn(C64) -> C64 + Sync),
    center: f64,
    r: f64,
    k_max: usize,
) -> (Vec<f64>, f64) {
    let n = (4 * k_max).next_power_of_two().max(64);
    let mut buf: Vec<C64> = (0..n)
        .map(|j| f(C64::new(center, 0.0) + C64::from_polar(r, 2.0 * PI * j as f64 / n as f64)))
        .collect();
    let scale = buf.iter().map(|v| v.norm()).fold(0.0, f64::max);
    FftPlanner::<f64>::new()
        .plan_fft_forward(n)
        .process(&mut buf);
    // a_k r^k = (1/n) Σ f_j e^{-2πijk/n}
    let coeffs = (0..=k_max).map(|k| buf[k].norm() / n as f64).collect();
    (coeffs, scale)
}

/// Central differences of order k at step s (k ≤ 12).
fn central_difference(f: &(dyn Fn(f64) -> f64 + Sync), c: f64, k: usize, s: f64) -> f64 {
    // Δ^k with half-steps: Σ (−1)^j C(k, j) f(c + (k/2 − j) s).
    let mut binom = 1.0;
    let mut acc = 0.0;
    for j in 0..=k {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binom * f(c + (k as f64 / 2.0 - j as f64) * s);
        binom = binom * (k - j) as f64 / (j + 1) as f64;
    }
    acc / s.powi(k as i32)
}

fn richardson_derivative(f: &(dyn Fn(f64) -> f64 + Sync), c: f64, k: usize, s: f64) -> (f64, f64) {
    let d1 = central_difference(f, c, k, s);
    let d2 = central_difference(f, c, k, s / 2.0);
    let d3 = central_difference(f, c, k, s / 4.0);
    let e1 = (4.0 * d2 - d1) / 3.0;
    let e2 = (4.0 * d3 - d2) / 3.0;
    let best = (16.0 * e2 - e1) / 15.0;
    (best, (best - e2).abs())
}

fn factorial_ln(k: usize) -> f64 {
    (1..=k).map(|i| (i as f64).ln()).sum()
}

/// Root-test estimate of the radius of convergence at `center`.
///
/// `disc_radius` is the Cauchy circle (complex input) or the finite
/// difference step scale (real input); `k_max` bounds the order.
pub fn analyticity_radius(
    input: TaylorInput<'_>,
    center: f64,
    disc_radius: f64,
    k_max: usize,
) -> Result<RadiusEstimate> {
    if !(disc_radius > 0.0) || !center.is_finite() {
        return Err(invalid("disc_radius", "must be positive"));
    }
    if k_max < 4 {
        return Err(invalid("k_max", "need at least four orders"));
    }
    // ln|a_k| for trusted orders.
    let mut logs: Vec<(usize, f64)> = Vec::new();
    match input {
        TaylorInput::Complex(f) => {
            let (c, scale) = cauchy_coefficients(f, center, disc_radius, k_max);
            let floor = 1e-12 * scale;
            for (k, &v) in c.iter().enumerate().skip(1) {
                if v > floor {
                    logs.push((k, v.ln() - k as f64 * disc_radius.ln()));
                }
            }
        }
        TaylorInput::Real(f) => {
            for k in 1..=k_max.min(12) {
                let (d, err) = richardson_derivative(f, center, k, disc_radius);
                if !(err <= 1e-3 * d.abs()) {
                    break;
                }
                if d != 0.0 {
                    logs.push((k, d.abs().ln() - factorial_ln(k)));
                }
            }
        }
        TaylorInput::Derivatives(d) => {
            for (k, &v) in d.iter().enumerate().take(k_max + 1).skip(1) {
                if v != 0.0 && v.is_finite() {
                    logs.push((k, v.abs().ln() - factorial_ln(k)));
                }
            }
        }
    }
    let roots: Vec<(usize, f64)> = logs
        .iter()
        .map(|&(k, l)| (k, (-l / k as f64).exp()))
        .collect();
    let orders_used = logs.last().map_or(0, |p| p.0);
    if logs.len() < 3 {
        // Coefficients vanish below the floor almost at once: entire-like.
        let radius = if logs.is_empty() {
            f64::INFINITY
        } else {
            roots.last().map_or(f64::INFINITY, |p| p.1)
        };
        return Ok(RadiusEstimate {
            radius,
            trend: Trend::Unstable,
            roots,
            orders_used,
        });
    }
    let tail = &logs[logs.len() / 2..];
    let tail = if tail.len() < 2 {
        &logs[logs.len() - 2..]
    } else {
        tail
    };
    // ln|a_k| ≈ c − k ln R over the upper half of the orders.
    let n = tail.len() as f64;
    let mk = tail.iter().map(|p| p.0 as f64).sum::<f64>() / n;
    let ml = tail.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = tail.iter().map(|p| (p.0 as f64 - mk).powi(2)).sum();
    let sxy: f64 = tail.iter().map(|p| (p.0 as f64 - mk) * (p.1 - ml)).sum();
    let slope = sxy / sxx;
    let fitted = (-slope).exp();
    let rt: Vec<f64> = roots[roots.len() / 2..].iter().map(|p| p.1).collect();
    let up = rt.windows(2).all(|w| w[1] > w[0] * (1.0 + 1e-6));
    let down = rt.windows(2).all(|w| w[1] < w[0] * (1.0 - 1e-6));
    let trend = if up && rt.len() >= 2 {
        Trend::Increasing
    } else if down && rt.len() >= 2 {
        Trend::Decreasing
    } else {
        Trend::Stable
    };
    let radius = match trend {
        Trend::Increasing if fitted > 5.0 * disc_radius => f64::INFINITY,
        Trend::Decreasing => rt.last().copied().unwrap_or(fitted).min(fitted),
        _ => fitted,
    };
    Ok(RadiusEstimate {
        radius,
        trend,
        roots,
        orders_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lorentzian_radius_is_one() {
        let f = |z: C64| 1.0 / (1.0 + z * z);
        let r = analyticity_radius(TaylorInput::Complex(&f), 0.0, 0.5, 40).unwrap();
        assert!((r.radius - 1.0).abs() < 0.1, "{r:?}");
        let g = |x: f64| 1.0 / (1.0 + x * x);
        let r = analyticity_radius(TaylorInput::Real(&g), 0.0, 0.05, 8).unwrap();
        assert!((r.radius - 1.0).abs() < 0.1, "{r:?}");
    }

    #[test]
    fn exponential_is_entire() {
        let f = |z: C64| z.exp();
        let r = analyticity_radius(TaylorInput::Complex(&f), 0.0, 1.0, 40).unwrap();
        assert!(r.radius.is_infinite(), "{r:?}");
        assert_eq!(r.trend, Trend::Increasing);
    }

    #[test]
    fn shifted_pole() {
        // 1/(z − 2) seen from 0.5: radius 1.5.
        let f = |z: C64| 1.0 / (z - 2.0);
        let r = analyticity_radius(TaylorInput::Complex(&f), 0.5, 1.0, 40).unwrap();
        assert!((r.radius - 1.5).abs() < 0.05, "{r:?}");
    }

    #[test]
    fn factorial_growth_decreases() {
        // f^{(k)}(0) = (k!)² gives |a_k|^{-1/k} = (k!)^{-1/k} → 0.
        let d: Vec<f64> = (0..=20)
            .map(|k| (1..=k).map(|i| i as f64).product::<f64>().powi(2))
            .collect();
        let r = analyticity_radius(TaylorInput::Derivatives(&d), 0.0, 1.0, 20).unwrap();
        assert_eq!(r.trend, Trend::Decreasing);
        assert!(r.radius < 0.2, "{r:?}");
    }
}
