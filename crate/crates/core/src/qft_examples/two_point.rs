use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::spectral::SpectralMeasure;
use crate::error::{invalid, Error, Result};
use crate::quadrature::gauss_legendre;
use crate::special::bessel_k0;
use crate::transforms::{alpha_h, FbiSource};

/// 1+1 free two-point function of mass m at separation (t − iε, x):
/// K₀(m√(x² + (ε + it)²))/2π. The square root is principal: its argument
/// only meets the real axis at t = 0, where it is positive.
pub fn two_point_mass(m: f64, z: [f64; 2], eps: f64) -> C64 {
    let [t, x] = z;
    let tau = C64::new(eps, t);
    let s = (tau * tau + x * x).sqrt();
    bessel_k0(s * m) / (2.0 * PI)
}

/// W(z) = ∫ w_{2,m}(t − iε, x) dρ(m).
pub fn two_point_kl(rho: &SpectralMeasure, z: [f64; 2], eps: f64) -> Result<C64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(invalid("epsilon", "the regulator must be positive"));
    }
    if !(z[0].is_finite() && z[1].is_finite()) {
        return Err(Error::NonFinite("two_point_kl z"));
    }
    if z[0].hypot(z[1]) < eps {
        return Err(invalid("z", format!("within ε = {eps} of the cone tip")));
    }
    if rho.atoms.iter().any(|a| a.0 == 0.0) || rho.density.as_ref().is_some_and(|d| d.m0() == 0.0) {
        return Err(invalid(
            "rho",
            "massless 1+1 two-point function is infrared divergent",
        ));
    }
    let mut acc: C64 = rho
        .atoms
        .iter()
        .map(|&(m, w)| w * two_point_mass(m, z, eps))
        .sum();
    if let Some(d) = &rho.density {
        // K₀ decays like e^{-m Re s}; panels follow that scale.
        let (lo, hi) = (d.m0(), rho.cutoff());
        let rule = gauss_legendre(20);
        let (x, wts) = (&rule.0, &rule.1);
        let mut a = lo;
        while a < hi {
            let b = (a + 0.5 * (1.0 + a.sqrt())).min(hi);
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            for (s, w) in x.iter().zip(wts.iter()) {
                let m = mid + half * s;
                acc += two_point_mass(m, z, eps) * (rho.sigma(m) * w * half);
            }
            a = b;
        }
    }
    Ok(acc)
}

/// The momentum-space route ∫ dk e^{ikx − ω(ε + it)}/(4πω), ω = √(k² + m²),
/// with k = m sinh s so that dk/ω = ds.
pub fn two_point_momentum(m: f64, z: [f64; 2], eps: f64) -> Result<C64> {
    if !(m > 0.0 && eps > 0.0) {
        return Err(invalid("m", "mass and regulator must be positive"));
    }
    let [t, x] = z;
    let tau = C64::new(eps, t);
    // e^{-mε cosh s} < e^{-40} beyond s_max.
    let s_max = (40.0 / (m * eps)).max(1.0).acosh() + 1.0;
    let rate = m * (x.abs() + t.abs() + eps);
    let rule = gauss_legendre(16);
    let (nodes, wts) = (&rule.0, &rule.1);
    let mut acc = C64::new(0.0, 0.0);
    let mut a = 0.0;
    while a < s_max {
        let b = (a + (2.0 / (rate * a.cosh())).min(0.25)).min(s_max);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for (u, w) in nodes.iter().zip(wts.iter()) {
            let s = mid + half * u;
            acc += (m * x * s.sinh()).cos() * (-tau * m * s.cosh()).exp() * (w * half);
        }
        a = b;
    }
    Ok(acc / (2.0 * PI))
}

/// FBI transform in t of t ↦ W(t − i0, x₀) for an atomic measure. Per
/// atom, W = ∫_m^∞ cos(k x₀)/(2πk) e^{-iωt} dω, and each e^{-iωt} has
/// T_h = √(2πh) e^{-iωt₀} e^{-(η + hω)²/2h}; with ω = m cosh s the weight
/// loses its 1/k singularity.
pub fn two_point_time_source(rho: &SpectralMeasure, x0: f64) -> Result<FbiSource> {
    if rho.density.is_some() {
        return Err(invalid(
            "rho",
            "the time-slice FBI is implemented for atomic measures",
        ));
    }
    if rho.atoms.iter().any(|a| a.0 == 0.0) {
        return Err(invalid("rho", "massless atoms are infrared divergent"));
    }
    if !x0.is_finite() {
        return Err(Error::NonFinite("x0"));
    }
    let atoms = rho.atoms.clone();
    Ok(FbiSource::closed(1, move |h, t, eta| {
        let pre = alpha_h(h, 1) * (2.0 * PI * h).sqrt() / (2.0 * PI);
        atoms
            .iter()
            .map(|&(m, w)| w * pre * atom_time_fbi(m, x0, h, t[0], eta[0]))
            .sum()
    }))
}

fn atom_time_fbi(m: f64, x0: f64, h: f64, t0: f64, eta: f64) -> C64 {
    let centre = (-eta / h).max(m);
    let spread = (80.0 / h).sqrt();
    let lo = (centre - spread).max(m);
    let hi = centre + spread;
    let (s_lo, s_hi) = ((lo / m).acosh(), (hi / m).acosh());
    let rate = x0.abs() + t0.abs();
    let rule = gauss_legendre(12);
    let (nodes, wts) = (&rule.0, &rule.1);
    let mut acc = C64::new(0.0, 0.0);
    let mut a = s_lo;
    while a < s_hi {
        let om = m * a.cosh();
        // Resolve both the phase and the Gaussian, measured in s.
        let ds = (1.5 / (om * rate + 1e-12))
            .min(0.5 / (om * h.sqrt()))
            .min(0.1);
        let b = (a + ds).min(s_hi);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for (u, w) in nodes.iter().zip(wts.iter()) {
            let s = mid + half * u;
            let om = m * s.cosh();
            let g = (-(eta + h * om).powi(2) / (2.0 * h)).exp();
            acc += C64::from_polar(g * (m * x0 * s.sinh()).cos(), -om * t0) * (w * half);
        }
        a = b;
    }
    acc
}
