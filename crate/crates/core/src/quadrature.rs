//! Gauss–Legendre rules, adaptive Gauss–Kronrod and Filon–Legendre panels.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64 as C64;

use crate::special::spherical_jn;

type Rule = Arc<(Vec<f64>, Vec<f64>)>;

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> Rule {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().expect("rule cache").get(&n) {
        return r.clone();
    }
    let rule = Arc::new(compute_gl(n));
    cache.lock().expect("rule cache").insert(n, rule.clone());
    rule
}

fn compute_gl(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (z * p1 - p0) / (z * z - 1.0))
}

/// Legendre polynomials P_0..=P_n at z.
pub fn legendre_all(n: usize, z: f64) -> Vec<f64> {
    let mut p = vec![0.0; n + 1];
    p[0] = 1.0;
    if n > 0 {
        p[1] = z;
    }
    for k in 2..=n {
        p[k] = ((2 * k - 1) as f64 * z * p[k - 1] - (k - 1) as f64 * p[k - 2]) / k as f64;
    }
    p
}

/// Composite Gauss–Legendre over `panels` equal panels of [a, b].
pub fn gl_composite(a: f64, b: f64, panels: usize, order: usize, f: impl Fn(f64) -> C64) -> C64 {
    let rule = gauss_legendre(order);
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let mut acc = C64::new(0.0, 0.0);
    for p in 0..panels {
        let lo = a + width * p as f64;
        let half = 0.5 * width;
        let mid = lo + half;
        for (x, w) in rule.0.iter().zip(&rule.1) {
            acc += f(mid + half * x) * (w * half);
        }
    }
    acc
}

/// Real-valued convenience wrapper of [`gl_composite`].
pub fn gl_composite_real(
    a: f64,
    b: f64,
    panels: usize,
    order: usize,
    f: impl Fn(f64) -> f64,
) -> f64 {
    gl_composite(a, b, panels, order, |x| C64::new(f(x), 0.0)).re
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(a: f64, b: f64, f: &impl Fn(f64) -> C64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let (f1, f2) = (f(c - h * XGK[j]), f(c + h * XGK[j]));
        k += (f1 + f2) * WGK[j];
        if j % 2 == 1 {
            g += (f1 + f2) * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Adaptive Gauss–Kronrod (7/15) with bisection; returns value and error estimate.
pub fn adaptive(f: impl Fn(f64) -> C64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> (C64, f64) {
    let mut stack = vec![(a, b, 0u32)];
    let (whole, _) = gk15(a, b, &f);
    let target = abs_tol.max(rel_tol * whole.norm());
    let mut total = C64::new(0.0, 0.0);
    let mut err = 0.0;
    while let Some((lo, hi, depth)) = stack.pop() {
        let (v, e) = gk15(lo, hi, &f);
        let share = target * (hi - lo) / (b - a);
        if e <= share || depth >= 40 || (hi - lo) < 1e-13 * (b - a).abs() {
            total += v;
            err += e;
        } else {
            let m = 0.5 * (lo + hi);
            stack.push((lo, m, depth + 1));
            stack.push((m, hi, depth + 1));
        }
    }
    (total, err)
}

/// Real-valued convenience wrapper of [`adaptive`].
pub fn adaptive_real(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    adaptive(|x| C64::new(f(x), 0.0), a, b, abs_tol, rel_tol)
        .0
        .re
}

/// ∫_a^b f(x) e^{-iωx} dx with f expanded in Legendre polynomials on the
/// panel and the oscillatory moments done exactly:
/// ∫_{-1}^{1} P_k(s) e^{-iθs} ds = 2(−i)^k j_k(θ).
pub fn filon_panel(f: &impl Fn(f64) -> f64, a: f64, b: f64, omega: f64, degree: usize) -> C64 {
    let n = degree + 1;
    let rule = gauss_legendre(n + 4);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut coeff = vec![0.0; n];
    for (s, w) in rule.0.iter().zip(&rule.1) {
        let fv = f(mid + half * s);
        let p = legendre_all(degree, *s);
        for k in 0..n {
            coeff[k] += w * fv * p[k];
        }
    }
    let theta = omega * half;
    let j = spherical_jn(degree, theta);
    let mut acc = C64::new(0.0, 0.0);
    let mut mi = C64::new(1.0, 0.0);
    for k in 0..n {
        acc += mi * (coeff[k] * (2 * k + 1) as f64 / 2.0 * 2.0 * j[k]);
        mi *= C64::new(0.0, -1.0);
    }
    acc * half * C64::from_polar(1.0, -omega * mid)
}

/// Filon–Legendre over the given breakpoints.
pub fn filon(f: impl Fn(f64) -> f64, breaks: &[f64], omega: f64, degree: usize) -> C64 {
    breaks
        .windows(2)
        .map(|w| filon_panel(&f, w[0], w[1], omega, degree))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        let r = gauss_legendre(10);
        let s: f64 = r.0.iter().zip(&r.1).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
        assert!((r.1.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_a_peak() {
        let v = adaptive_real(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-12, 1e-12);
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((v - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn filon_matches_closed_form() {
        // ∫_0^1 x e^{-iωx} dx
        for &w in &[0.0, 0.3, 10.0, 400.0] {
            let v = filon(|x| x, &[0.0, 0.5, 1.0], w, 8);
            let exact = if w == 0.0 {
                C64::new(0.5, 0.0)
            } else {
                let i = C64::new(0.0, 1.0);
                let e = (-i * w).exp();
                (e * (1.0 + i * w) - 1.0) / (w * w)
            };
            assert!((v - exact).norm() < 1e-13, "ω={w}: {v} vs {exact}");
        }
    }
}
