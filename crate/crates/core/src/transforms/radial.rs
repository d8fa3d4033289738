use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::fbi::window_radius;
use crate::error::{invalid, Result};
use crate::phase_core::SampledFamily;
use crate::quadrature::{gauss_legendre, gl_composite};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialResult {
    pub value: C64,
    pub h_lo: f64,
    pub h_hi: f64,
    /// False when the small-h end never settled; `value` is then a partial sum.
    pub converged: bool,
}

const H_HI: f64 = 1e3;

/// Σ_{ξ=±1}(1 + ξ(h/i)∂_x)T_h u(x,ξ) with the x-derivative taken on the
/// kernel analytically; the two directions combine to
/// α_h ∫ e^{-s²/2h}(4cos(s/h) − 2s·sin(s/h)) u(x−s) ds.
fn combined_transform(u: &SampledFamily, x: f64, h: f64) -> C64 {
    let sup = u.support_at(1.0);
    let r = window_radius(h);
    let lo = (-r).max(x - sup.hi[0]);
    let hi = r.min(x - sup.lo[0]);
    if !(lo < hi) {
        return C64::new(0.0, 0.0);
    }
    let w = 1.0 / h + u.bandwidth(1.0) + (83.0 / h).sqrt();
    let mut breaks = vec![lo];
    breaks.extend(
        u.breakpoints()
            .iter()
            .map(|b| x - b)
            .filter(|s| *s > lo && *s < hi),
    );
    breaks.sort_by(f64::total_cmp);
    breaks.push(hi);
    let mut acc = C64::new(0.0, 0.0);
    for seg in breaks.windows(2) {
        let panels = ((seg[1] - seg[0]) * w / 20.0).ceil().max(1.0) as usize;
        acc += gl_composite(seg[0], seg[1], panels, 24, |s| {
            let k = (-s * s / (2.0 * h)).exp() * (4.0 * (s / h).cos() - 2.0 * s * (s / h).sin());
            u.eval1(1.0, x - s) * k
        });
    }
    acc * super::fbi::alpha_h(h, 1)
}

/// u(x) = 2^{-3/2}π^{-1/4} Σ_{ξ=±1} ∫₀^∞ h^{-5/4}(1 + ξ(h/i)∂_x)T_h u(x,ξ) dh
/// for an h-independent u (evaluated at h = 1) in one dimension.
///
/// The h-integral runs over ln h with Gauss–Legendre panels on
/// [h_lo, 10³]; beyond 10³ the integrand is expanded in 1/h, which gives the
/// tail (L/H − M₂/2H²)/π with L = ∫u and M₂ = ∫(x−y)²u(y)dy. The lower end
/// is pushed down until the last decade contributes less than 1e-7 of the
/// running total.
pub fn fbi_radial_reconstruct(u: &SampledFamily, x: f64) -> Result<RadialResult> {
    if u.dim() != 1 {
        return Err(invalid(
            "u",
            "radial reconstruction is implemented for d = 1",
        ));
    }
    let sup = u.support_at(1.0);
    if !sup.is_bounded() {
        return Err(invalid("u", "needs a bounded support box"));
    }
    let pref = 2f64.powf(-1.5) * PI.powf(-0.25);
    let integrand = |h: f64| combined_transform(u, x, h) * h.powf(-1.25) * pref;
    let rule = gauss_legendre(20);
    let span = |a: f64, b: f64| -> C64 {
        // ∫_{e^a}^{e^b} g(h) dh = ∫_a^b g(e^v) e^v dv, panels of width ≤ 0.25.
        let panels = ((b - a) / 0.25).ceil().max(1.0) as usize;
        let width = (b - a) / panels as f64;
        let mut acc = C64::new(0.0, 0.0);
        for p in 0..panels {
            let mid = a + width * (p as f64 + 0.5);
            for (s, w) in rule.0.iter().zip(&rule.1) {
                let v = mid + 0.5 * width * s;
                let h = v.exp();
                acc += integrand(h) * (h * w * 0.5 * width);
            }
        }
        acc
    };

    let (lo, hi) = (sup.lo[0], sup.hi[0]);
    let panels = ((hi - lo) * u.bandwidth(1.0) / 20.0).ceil().max(8.0) as usize;
    let mass = gl_composite(lo, hi, panels, 24, |y| u.eval1(1.0, y));
    let m2 = gl_composite(lo, hi, panels, 24, |y| u.eval1(1.0, y) * (x - y) * (x - y));
    let tail = (mass / H_HI - m2 / (2.0 * H_HI * H_HI)) / PI;

    let mut h_lo: f64 = 1e-2;
    let mut total = span(h_lo.ln(), H_HI.ln()) + tail;
    let mut converged = false;
    while h_lo > 1e-6 {
        let next: f64 = h_lo / 10.0;
        let piece = span(next.ln(), h_lo.ln());
        total += piece;
        h_lo = next;
        if piece.norm() <= 1e-7 * total.norm().max(1e-300) || piece.norm() < 1e-300 {
            converged = true;
            break;
        }
    }
    Ok(RadialResult {
        value: total,
        h_lo,
        h_hi: H_HI,
        converged,
    })
}
