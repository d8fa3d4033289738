use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use super::bump::smooth_step;
use crate::error::{invalid, Result};
use crate::phase_core::{AxisBox, GridCache, HLadder, SampledFamily};
use crate::quadrature::gl_composite_real;

/// f̂(k): one on |k| ≤ k_flat, zero for |k| ≥ k_max, C^∞ in between.
pub fn plateau_spectrum(k: f64, k_flat: f64, k_max: f64) -> f64 {
    smooth_step((k_max - k.abs()) / (k_max - k_flat))
}

/// f(x) = (1/2π)∫ f̂(k) e^{ikx} dk by Gauss–Legendre.
pub fn band_limited_value(x: f64, k_flat: f64, k_max: f64) -> f64 {
    let panels = 8 + (x.abs() * (k_max - k_flat) / 4.0).ceil() as usize;
    let flat = if x == 0.0 {
        k_flat
    } else {
        (x * k_flat).sin() / x
    };
    let ramp = gl_composite_real(k_flat, k_max, panels, 32, |k| {
        plateau_spectrum(k, k_flat, k_max) * (k * x).cos()
    });
    (flat + ramp) / PI
}

/// The h-independent function with Fourier support in [−k_max, k_max],
/// truncated to |x| ≤ half_width. Each rung of `ladder` is tabulated by one
/// inverse FFT of f̂ on a period of `period`.
pub fn band_limited_family(
    k_flat: f64,
    k_max: f64,
    half_width: f64,
    ladder: &HLadder,
    xi_max: f64,
) -> Result<SampledFamily> {
    if !(0.0 <= k_flat && k_flat < k_max && k_max.is_finite()) {
        return Err(invalid("k_max", "need 0 ≤ k_flat < k_max"));
    }
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(invalid("half_width", "must be positive"));
    }
    let base = SampledFamily::fixed(1, AxisBox::interval(-half_width, half_width), move |x| {
        C64::new(band_limited_value(x[0], k_flat, k_max), 0.0)
    })?
    .with_bandwidth(move |_| k_max);
    let period = 100.0 * half_width;
    let mut caches = HashMap::new();
    let mut planner = FftPlanner::<f64>::new();
    for &h in ladder.rungs() {
        let want = crate::phase_core::cache_step(h, xi_max, k_max);
        let n = ((period / want).ceil() as usize).next_power_of_two();
        let dx = period / n as f64;
        let dk = 2.0 * PI / period;
        let mut buf: Vec<C64> = (0..n)
            .map(|m| {
                let k = if m <= n / 2 {
                    m as f64
                } else {
                    m as f64 - n as f64
                } * dk;
                C64::new(plateau_spectrum(k, k_flat, k_max) * dk / (2.0 * PI), 0.0)
            })
            .collect();
        planner.plan_fft_inverse(n).process(&mut buf);
        let half = (half_width / dx).floor() as i64;
        let values = (-half..=half)
            .map(|j| C64::new(buf[j.rem_euclid(n as i64) as usize].re, 0.0))
            .collect();
        caches.insert(
            h.to_bits(),
            GridCache {
                lo: -(half as f64) * dx,
                step: dx,
                values,
            },
        );
    }
    Ok(base.with_caches(caches))
}
