use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::fbi::Flagged;
use crate::error::{invalid, Error, Result};
use crate::phase_core::SampledFamily;
use crate::quadrature::gl_composite;

/// F_h f(ξ) = (2πh)^{-d/2} ∫ f(x) e^{-ix·ξ/h} dx (d = 1).
///
/// Cached families are summed on their grid (the trapezoid rule is spectrally
/// accurate for families that vanish smoothly at the grid ends); otherwise
/// composite Gauss–Legendre panels over the rung's support, split at
/// breakpoints.
pub fn semiclassical_fourier(f: &SampledFamily, h: f64, xi: &[f64]) -> Result<Flagged<C64>> {
    if f.dim() != 1 || xi.len() != 1 {
        return Err(invalid(
            "f",
            "semiclassical_fourier is implemented for d = 1",
        ));
    }
    if !(h > 0.0) || !xi[0].is_finite() {
        return Err(invalid("h", "h must be positive and ξ finite"));
    }
    let xi = xi[0];
    let pref = (2.0 * PI * h).powf(-0.5);
    if let Some(g) = f.cached(h) {
        let n = g.values.len();
        let mut acc = C64::new(0.0, 0.0);
        for (i, v) in g.values.iter().enumerate() {
            let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
            acc += v * C64::from_polar(w, -g.node(i) * xi / h);
        }
        let edge = g.values[0].norm() + g.values[n - 1].norm();
        let l1: f64 = g.values.iter().map(|v| v.norm()).sum::<f64>() * g.step;
        return Ok(Flagged {
            value: acc * g.step * pref,
            tail_warning: edge * g.step > 1e-10 * l1,
        });
    }
    let s = f.support_at(h);
    if !s.is_bounded() {
        return Err(Error::WindowTooSmall(
            "unbounded support needs a cached or bounded family".into(),
        ));
    }
    let (lo, hi) = (s.lo[0], s.hi[0]);
    let w = xi.abs() / h + f.bandwidth(h);
    let mut breaks = vec![lo];
    breaks.extend(
        f.breakpoints()
            .iter()
            .copied()
            .filter(|b| *b > lo && *b < hi),
    );
    breaks.push(hi);
    let mut acc = C64::new(0.0, 0.0);
    let mut l1 = 0.0;
    for seg in breaks.windows(2) {
        let panels = ((seg[1] - seg[0]) * w / 20.0).ceil().max(1.0) as usize;
        acc += gl_composite(seg[0], seg[1], panels, 24, |x| {
            f.eval1(h, x) * C64::from_polar(1.0, -x * xi / h)
        });
        l1 += gl_composite(seg[0], seg[1], panels, 24, |x| {
            C64::new(f.eval1(h, x).norm(), 0.0)
        })
        .re;
    }
    let edge = f.eval1(h, lo).norm() + f.eval1(h, hi).norm();
    Ok(Flagged {
        value: acc * pref,
        tail_warning: edge * h.sqrt() > 1e-10 * l1,
    })
}
