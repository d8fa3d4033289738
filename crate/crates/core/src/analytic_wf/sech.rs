use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};
use crate::phase_core::SampledFamily;
use crate::quadrature::gl_composite;

/// K(z) = ¼ sech(πz/2), holomorphic on |Im z| < 1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SechKernel;

impl SechKernel {
    pub fn eval(&self, z: C64) -> C64 {
        sech_kernel(z)
    }

    /// ∫ K(x + iy) dx over a window of half-width `l`.
    pub fn line_integral(&self, y: f64, l: f64) -> C64 {
        let panels = (4.0 * l).ceil() as usize;
        gl_composite(-l, l, panels, 24, |x| sech_kernel(C64::new(x, y)))
    }
}

/// ¼ sech(πz/2), written with decaying exponentials so large |Re z| cannot
/// overflow.
pub fn sech_kernel(z: C64) -> C64 {
    let w = z * (PI / 2.0);
    let w = if w.re < 0.0 { -w } else { w };
    let e = (-w).exp();
    0.5 * e / (1.0 + e * e)
}

const TAIL: f64 = 40.0;

/// Panel edges on [lo, hi], graded geometrically towards `c` on the scale `eps`.
fn graded_breaks(lo: f64, hi: f64, c: f64, eps: f64, extra: &[f64]) -> Vec<f64> {
    let mut b = vec![lo, hi];
    let mut d = eps;
    while d < hi - lo {
        for p in [c - d, c + d] {
            if p > lo && p < hi {
                b.push(p);
            }
        }
        d *= 2.0;
    }
    if c > lo && c < hi {
        b.push(c);
    }
    b.extend(extra.iter().copied().filter(|p| *p > lo && *p < hi));
    b.sort_by(f64::total_cmp);
    b.dedup();
    b
}

/// K_u(z) = ∫ K(z − x) u(x) dx for an h-independent family (evaluated at
/// h = 1) and |Im z| < 1.
pub fn sech_decompose(u: &SampledFamily, z: C64) -> Result<C64> {
    if u.dim() != 1 {
        return Err(invalid("u", "the sech decomposition is one-dimensional"));
    }
    if !(z.im.abs() < 1.0) || !z.re.is_finite() {
        return Err(Error::OutsideDomain(format!(
            "Im z = {} is outside the strip |Im z| < 1",
            z.im
        )));
    }
    let s = u.support();
    let lo = (z.re - TAIL).max(s.lo[0]);
    let hi = (z.re + TAIL).min(s.hi[0]);
    if !(lo < hi) {
        return Ok(C64::new(0.0, 0.0));
    }
    // The kernel's nearest poles sit at x = Re z, Im x = Im z ∓ 1.
    let dist = (1.0 - z.im.abs()).max(1e-300);
    let breaks = graded_breaks(lo, hi, z.re, dist, u.breakpoints());
    let mut acc = C64::new(0.0, 0.0);
    for w in breaks.windows(2) {
        let panels = ((w[1] - w[0]) / 0.25).ceil().max(1.0) as usize;
        acc += gl_composite(w[0], w[1], panels, 24, |x| {
            sech_kernel(z - x) * u.eval1(1.0, x)
        });
    }
    Ok(acc)
}

/// u(x) recovered as lim_{ε→0} [K_u(x + i(1−ε)) + K_u(x − i(1−ε))], with
/// Richardson extrapolation over ε, ε/2, ε/4 (the sum is analytic in ε when
/// u is analytic near x).
pub fn sech_reconstruct(u: &SampledFamily, x: f64, eps: f64) -> Result<C64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid("eps", "must lie in (0, 1)"));
    }
    let r = |e: f64| -> Result<C64> {
        Ok(sech_decompose(u, C64::new(x, 1.0 - e))? + sech_decompose(u, C64::new(x, -(1.0 - e)))?)
    };
    let (a, b, c) = (r(eps)?, r(eps / 2.0)?, r(eps / 4.0)?);
    let ab = 2.0 * b - a;
    let bc = 2.0 * c - b;
    Ok((4.0 * bc - ab) / 3.0)
}
