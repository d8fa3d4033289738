use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::fbi::window_radius;
use super::PhasePoint;
use crate::error::{invalid, Result};
use crate::phase_core::{AxisBox, SampledFamily};

/// ψ_{x₀,ξ₀,h}(y) = (πh)^{-d/4} e^{-|y−x₀|²/2h} e^{i(y−x₀)·ξ₀/h}.
pub fn coherent_value(center: &PhasePoint, h: f64, y: &[f64]) -> C64 {
    let d = center.dim() as f64;
    let mut r2 = 0.0;
    let mut phase = 0.0;
    for i in 0..center.dim() {
        let s = y[i] - center.x[i];
        r2 += s * s;
        phase += s * center.xi[i];
    }
    C64::from_polar((PI * h).powf(-d / 4.0) * (-r2 / (2.0 * h)).exp(), phase / h)
}

fn check(center: &PhasePoint) -> Result<()> {
    if !(1..=2).contains(&center.dim()) || center.xi.len() != center.dim() {
        return Err(invalid("center", "phase point must have d = 1 or 2"));
    }
    if !center.is_finite() {
        return Err(invalid("center", "non-finite coordinates"));
    }
    Ok(())
}

fn radius_box(center: &PhasePoint, h: f64) -> AxisBox {
    let r = window_radius(h);
    AxisBox {
        lo: center.x.iter().map(|v| v - r).collect(),
        hi: center.x.iter().map(|v| v + r).collect(),
    }
}

/// The coherent state at a single scale h, supported on x₀ ± R_h.
pub fn coherent_state(center: &PhasePoint, h: f64) -> Result<SampledFamily> {
    check(center)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid("h", format!("{h} must be positive")));
    }
    let c = center.clone();
    let xi = center.xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(
        SampledFamily::new(center.dim(), radius_box(center, h), move |_, y| {
            coherent_value(&c, h, y)
        })?
        .with_bandwidth(move |hh| xi / hh + (92.0 / hh).sqrt()),
    )
}

/// The family h ↦ ψ_{x₀,ξ₀,h}, truncated at x₀ ± R_h on each rung.
pub fn coherent_family(center: &PhasePoint) -> Result<SampledFamily> {
    check(center)?;
    let c = center.clone();
    let c2 = center.clone();
    let xi = center.xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(SampledFamily::new(
        center.dim(),
        AxisBox::everywhere(center.dim()),
        move |h, y| {
            let r = window_radius(h);
            if y.iter().zip(&c.x).any(|(a, b)| (a - b).abs() > r) {
                C64::new(0.0, 0.0)
            } else {
                coherent_value(&c, h, y)
            }
        },
    )?
    .with_support_at(move |h| radius_box(&c2, h))
    .with_bandwidth(move |h| xi / h + (92.0 / h).sqrt()))
}
