//! Special functions not covered by statrs: principal Lambert W, complex K₀,
//! Kummer M and Tricomi U for real arguments, spherical Bessel j_k.

use num_complex::Complex64 as C64;
use statrs::function::gamma::gamma;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Principal branch W₀(x) for x ≥ −1/e.
pub fn lambert_w0(x: f64) -> f64 {
    let e_inv = (-1.0f64).exp();
    assert!(x >= -e_inv - 1e-15, "lambert_w0 domain: {x}");
    if x == 0.0 {
        return 0.0;
    }
    let mut w = if x < -0.3 {
        let p = (2.0 * (1.0 + std::f64::consts::E * x)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0
    } else if x < 3.0 {
        (1.0 + x).ln() * 0.8
    } else {
        let l = x.ln();
        l - l.ln()
    };
    // Halley iteration.
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-300 {
            break;
        }
        let dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= dw;
        if dw.abs() <= 1e-16 * (1.0 + w.abs()) {
            break;
        }
    }
    w
}

/// Modified Bessel function K₀(z), principal branch, Re z > 0 or z on the
/// imaginary axis away from 0.
pub fn bessel_k0(z: C64) -> C64 {
    if z.norm() <= 2.0 {
        k0_series(z)
    } else {
        k0_continued_fraction(z)
    }
}

fn k0_series(z: C64) -> C64 {
    let q = z * z / 4.0;
    let mut term = C64::new(1.0, 0.0);
    let mut i0 = term;
    let mut harm = 0.0;
    let mut tail = C64::new(0.0, 0.0);
    for k in 1..60 {
        term *= q / (k * k) as f64;
        harm += 1.0 / k as f64;
        i0 += term;
        tail += term * harm;
        if term.norm() < 1e-18 * i0.norm() {
            break;
        }
    }
    -((z / 2.0).ln() + EULER_GAMMA) * i0 + tail
}

/// Steed's method for the second continued fraction (Temme); converges for
/// |z| ≳ 2 in the closed right half plane.
fn k0_continued_fraction(z: C64) -> C64 {
    let one = C64::new(1.0, 0.0);
    let a1 = 0.25; // ν² − 1/4 with sign, ν = 0: a₁ = 1/4
    let mut b = 2.0 * (one + z);
    let mut d = one / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = C64::new(0.0, 0.0);
    let mut q2 = one;
    let mut a = -a1;
    let mut q = C64::new(a1, 0.0);
    let mut c = C64::new(a1, 0.0);
    let mut s = one + q * delh;
    for i in 2..100_000 {
        a -= (2 * (i - 1)) as f64;
        c = -c * a / i as f64;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = one / (b + a * d);
        delh = (b * d - one) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if dels.norm() < 1e-17 * s.norm() {
            break;
        }
    }
    (std::f64::consts::PI / (2.0 * z)).sqrt() * (-z).exp() / s
}

/// 1/Γ(x), exactly zero at the poles.
pub fn recip_gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.round() {
        0.0
    } else {
        1.0 / gamma(x)
    }
}

/// Kummer's M(a, b, z) by its power series; terminates when a is a
/// non-positive integer.
pub fn kummer_m(a: f64, b: f64, z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..2000 {
        let kf = k as f64;
        term *= (a + kf) / (b + kf) * z / (kf + 1.0);
        sum += term;
        if term == 0.0 || term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Tricomi's U(a, b, z) for non-integer b through the connection formula
/// U = Γ(1−b)/Γ(a−b+1)·M(a,b,z) + Γ(b−1)/Γ(a)·z^{1−b}·M(a−b+1, 2−b, z).
///
/// When a−b+1 is a non-positive integer the first term vanishes identically
/// and the second is a terminating polynomial, so the result carries no
/// cancellation at all.
pub fn tricomi_u(a: f64, b: f64, z: f64) -> f64 {
    assert!(b != b.round(), "tricomi_u: integer b is not supported");
    assert!(z > 0.0, "tricomi_u: z must be positive");
    let first = gamma(1.0 - b) * recip_gamma(a - b + 1.0);
    let second = gamma(b - 1.0) * recip_gamma(a) * z.powf(1.0 - b);
    let mut u = second * kummer_m(a - b + 1.0, 2.0 - b, z);
    if first != 0.0 {
        u += first * kummer_m(a, b, z);
    }
    u
}

/// Spherical Bessel functions j_0..=j_n at real x.
pub fn spherical_jn(n: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    let ax = x.abs();
    if ax < 1e-300 {
        out[0] = 1.0;
        return out;
    }
    if ax >= n as f64 + 1.0 {
        // Upward recurrence is stable above the turning point.
        out[0] = x.sin() / x;
        if n >= 1 {
            out[1] = x.sin() / (x * x) - x.cos() / x;
        }
        for k in 1..n {
            out[k + 1] = (2 * k + 1) as f64 / x * out[k] - out[k - 1];
        }
        return out;
    }
    if ax < 0.5 {
        // Power series j_k(x) = x^k/(2k+1)!! Σ (−x²/2)^m / (m! (2k+3)(2k+5)…).
        let mut pref = 1.0;
        for (k, slot) in out.iter_mut().enumerate() {
            if k > 0 {
                pref *= x / (2 * k + 1) as f64;
            }
            let mut term = 1.0;
            let mut sum = 1.0;
            for m in 1..40 {
                term *= -x * x / (2.0 * m as f64 * (2 * k + 2 * m + 1) as f64);
                sum += term;
                if term.abs() < 1e-18 * sum.abs() {
                    break;
                }
            }
            *slot = pref * sum;
        }
        return out;
    }
    // Miller's backward recurrence normalised by j_0.
    let start = n + 20 + (ax as usize);
    let mut jp1 = 0.0;
    let mut j = 1e-300;
    let mut vals = vec![0.0; start + 1];
    vals[start] = j;
    for k in (1..=start).rev() {
        let jm1 = (2 * k + 1) as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        vals[k - 1] = j;
        if j.abs() > 1e250 {
            for v in vals.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
            j *= 1e-250;
            jp1 *= 1e-250;
        }
    }
    let scale = (x.sin() / x) / vals[0];
    for k in 0..=n {
        out[k] = vals[k] * scale;
    }
    out
}
