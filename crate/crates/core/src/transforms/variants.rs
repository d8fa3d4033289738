use num_complex::Complex64 as C64;

use super::fbi::{alpha_h, window_radius, FbiSource};
use super::PhasePoint;
use crate::error::{invalid, Result};
use crate::phase_core::SampledFamily;
use crate::quadrature::gl_composite;

/// T_{μ,h}u(x,ξ) = μ^{d/4}α_h ∫ e^{-μ(x−y)²/2h} e^{i(x−y)·ξ/h} u(y) dy,
/// evaluated through T_{μ,h}u = μ^{-d/2} T_{h/μ}u(x, ξ/μ).
pub fn fbi_modified(f: &SampledFamily, pt: &PhasePoint, h: f64, mu: f64) -> Result<C64> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(invalid("mu", format!("{mu} must be positive")));
    }
    let d = f.dim();
    let xi: Vec<f64> = pt.xi.iter().map(|v| v / mu).collect();
    // The identity applies to the rung-h member, so freeze it before changing scale.
    Ok(FbiSource::Family(f.frozen(h)).eval(h / mu, &pt.x, &xi) * mu.powf(-(d as f64) / 2.0))
}

/// T_{μ,h} by direct quadrature of its defining integral (d = 1); the
/// independent route used to check [`fbi_modified`].
pub fn fbi_modified_direct(f: &SampledFamily, pt: &PhasePoint, h: f64, mu: f64) -> Result<C64> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(invalid("mu", format!("{mu} must be positive")));
    }
    if f.dim() != 1 {
        return Err(invalid("f", "direct route is one-dimensional"));
    }
    let (x, xi) = (pt.x[0], pt.xi[0]);
    let r = window_radius(h / mu);
    let sup = f.support_at(h);
    let lo = (x - r).max(sup.lo[0]);
    let hi = (x + r).min(sup.hi[0]);
    if !(lo < hi) {
        return Ok(C64::new(0.0, 0.0));
    }
    let w = xi.abs() / h + f.bandwidth(h) + (83.0 * mu / h).sqrt();
    let panels = ((hi - lo) * w / 20.0).ceil().max(1.0) as usize;
    let v = gl_composite(lo, hi, panels, 24, |y| {
        let s = x - y;
        f.eval1(h, y) * C64::from_polar((-mu * s * s / (2.0 * h)).exp(), s * xi / h)
    });
    Ok(v * mu.powf(0.25) * alpha_h(h, 1))
}

/// Classical FBI T_a u(x,ξ) = ∫ e^{-a|x−y|²/2} u(y) e^{-iξ·(y−x)} dy with
/// a = |ξ|. It is the h = 1/|ξ| slice of the semiclassical transform at the
/// unit covector ξ/|ξ|, with α_h divided out.
pub fn fbi_classical(u: &SampledFamily, x: &[f64], xi: &[f64]) -> Result<C64> {
    let n = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n == 0.0 {
        return Err(invalid("xi", "ξ = 0 has no direction"));
    }
    if x.len() != u.dim() || xi.len() != u.dim() {
        return Err(invalid("x", "dimension mismatch"));
    }
    let h = 1.0 / n;
    let unit: Vec<f64> = xi.iter().map(|v| v / n).collect();
    Ok(FbiSource::Family(u.clone()).eval(h, x, &unit) / alpha_h(h, u.dim()))
}
