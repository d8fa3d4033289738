use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::PhasePoint;
use crate::error::{invalid, Result};
use crate::phase_core::{GridCache, SampledFamily};
use crate::quadrature::gl_composite;

/// Relative size of the Gaussian window where it is cut off.
pub const EPS_CUT: f64 = 1e-18;

/// R_h = √(2h·ln(1/ε_cut)).
pub fn window_radius(h: f64) -> f64 {
    (2.0 * h * (1.0 / EPS_CUT).ln()).sqrt()
}

/// α_h = 2^{-d/2}(πh)^{-3d/4}.
pub fn alpha_h(h: f64, d: usize) -> f64 {
    let d = d as f64;
    2f64.powf(-d / 2.0) * (PI * h).powf(-0.75 * d)
}

/// A value together with the "support box too small" heuristic.
#[derive(Debug, Clone, PartialEq)]
pub struct Flagged<T> {
    pub value: T,
    pub tail_warning: bool,
}

type ClosedFbi = Arc<dyn Fn(f64, &[f64], &[f64]) -> C64 + Send + Sync>;

/// Anything with an FBI transform: sampled families, finite measures,
/// trigonometric sums, or an explicit closed form.
#[derive(Clone)]
pub enum FbiSource {
    Family(SampledFamily),
    /// Σ a_j δ_{x_j}.
    PointMasses {
        dim: usize,
        atoms: Vec<(Vec<f64>, C64)>,
    },
    /// Σ a_j e^{i⟨ω_j, y⟩}.
    Trig {
        dim: usize,
        terms: Vec<(Vec<f64>, C64)>,
    },
    Closed {
        dim: usize,
        f: ClosedFbi,
    },
}

impl fmt::Debug for FbiSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FbiSource::Family(s) => f.debug_tuple("Family").field(s).finish(),
            FbiSource::PointMasses { atoms, .. } => {
                f.debug_struct("PointMasses").field("atoms", atoms).finish()
            }
            FbiSource::Trig { terms, .. } => {
                f.debug_struct("Trig").field("terms", &terms.len()).finish()
            }
            FbiSource::Closed { dim, .. } => f.debug_struct("Closed").field("dim", dim).finish(),
        }
    }
}

impl From<SampledFamily> for FbiSource {
    fn from(f: SampledFamily) -> Self {
        FbiSource::Family(f)
    }
}

impl FbiSource {
    pub fn closed(
        dim: usize,
        f: impl Fn(f64, &[f64], &[f64]) -> C64 + Send + Sync + 'static,
    ) -> Self {
        FbiSource::Closed {
            dim,
            f: Arc::new(f),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            FbiSource::Family(f) => f.dim(),
            FbiSource::PointMasses { dim, .. }
            | FbiSource::Trig { dim, .. }
            | FbiSource::Closed { dim, .. } => *dim,
        }
    }

    /// T_h at one phase point.
    pub fn eval(&self, h: f64, x: &[f64], xi: &[f64]) -> C64 {
        match self {
            FbiSource::Family(f) => match f.dim() {
                1 => direct_1d(f, h, x[0], xi[0]),
                _ => direct_2d(f, h, x, xi),
            },
            FbiSource::PointMasses { dim, atoms } => {
                let a = alpha_h(h, *dim);
                atoms
                    .iter()
                    .map(|(p, w)| {
                        let (mut r2, mut ph) = (0.0, 0.0);
                        for i in 0..*dim {
                            let s = x[i] - p[i];
                            r2 += s * s;
                            ph += s * xi[i];
                        }
                        w * C64::from_polar(a * (-r2 / (2.0 * h)).exp(), ph / h)
                    })
                    .sum()
            }
            FbiSource::Trig { dim, terms } => {
                let a = alpha_h(h, *dim) * (2.0 * PI * h).powf(*dim as f64 / 2.0);
                terms
                    .iter()
                    .map(|(w, c)| {
                        let (mut r2, mut ph) = (0.0, 0.0);
                        for i in 0..*dim {
                            let s = xi[i] - h * w[i];
                            r2 += s * s;
                            ph += w[i] * x[i];
                        }
                        let e = -r2 / (2.0 * h);
                        if e < -745.0 {
                            C64::new(0.0, 0.0)
                        } else {
                            c * C64::from_polar(a * e.exp(), ph)
                        }
                    })
                    .sum()
            }
            FbiSource::Closed { f, .. } => f(h, x, xi),
        }
    }

    /// T_h on the grid xs × xis (d = 1), indexed [ix][iξ]. Uniform ξ rows use
    /// one FFT per x; uniform x columns use an FFT convolution per ξ; other
    /// shapes and non-smooth families fall back to direct quadrature.
    pub fn grid(&self, h: f64, xs: &[f64], xis: &[f64]) -> Vec<Vec<C64>> {
        if let FbiSource::Family(f) = self {
            if f.dim() == 1 && fft_friendly(f, h) {
                if xis.len() >= 8 && xis.len() >= xs.len() && is_uniform(xis) {
                    return xs.par_iter().map(|&x| xi_line_fft(f, h, x, xis)).collect();
                }
                if xs.len() >= 8 && is_uniform(xs) {
                    let cols: Vec<Vec<C64>> = xis
                        .par_iter()
                        .map(|&xi| x_line_conv(f, h, xs, xi))
                        .collect();
                    return (0..xs.len())
                        .map(|i| cols.iter().map(|c| c[i]).collect())
                        .collect();
                }
            }
        }
        xs.par_iter()
            .map(|&x| xis.iter().map(|&xi| self.eval(h, &[x], &[xi])).collect())
            .collect()
    }
}

fn is_uniform(v: &[f64]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let d = v[1] - v[0];
    d > 0.0
        && v.windows(2)
            .all(|w| ((w[1] - w[0]) - d).abs() <= 1e-9 * d.abs())
}

/// Uniform trapezoid sums are spectrally accurate only when the family is
/// smooth and vanishes at the edges of its support.
fn fft_friendly(f: &SampledFamily, h: f64) -> bool {
    if !f.breakpoints().is_empty() || f.cached(h).is_some() {
        return false;
    }
    let s = f.support_at(h);
    if !s.is_bounded() {
        return true;
    }
    let edge = f.eval1(h, s.lo[0]).norm().max(f.eval1(h, s.hi[0]).norm());
    let mid = f.eval1(h, 0.5 * (s.lo[0] + s.hi[0])).norm();
    edge <= 1e-15 * mid.max(1e-300) || edge == 0.0
}

#[inline]
fn kernel(s: f64, xi: f64, h: f64) -> C64 {
    C64::from_polar((-s * s / (2.0 * h)).exp(), s * xi / h)
}

/// Highest angular frequency the quadrature must resolve.
fn omega(f: &SampledFamily, h: f64, xi: f64) -> f64 {
    xi.abs() / h + f.bandwidth(h) + (83.0 / h).sqrt()
}

fn trapezoid_cache(g: &GridCache, h: f64, x: f64, xi: f64) -> C64 {
    let r = window_radius(h);
    let i0 = (((x - r - g.lo) / g.step).floor().max(0.0)) as usize;
    let i1 = ((((x + r - g.lo) / g.step).ceil()) as isize).clamp(0, g.values.len() as isize - 1)
        as usize;
    let mut acc = C64::new(0.0, 0.0);
    for i in i0..=i1.min(g.values.len().saturating_sub(1)) {
        let y = g.node(i);
        acc += g.values[i] * kernel(x - y, xi, h);
    }
    acc * g.step
}

fn direct_1d(f: &SampledFamily, h: f64, x: f64, xi: f64) -> C64 {
    let a = alpha_h(h, 1);
    if let Some(g) = f.cached(h) {
        return trapezoid_cache(g, h, x, xi) * a;
    }
    let r = window_radius(h);
    let sup = f.support_at(h);
    let lo = (x - r).max(sup.lo[0]);
    let hi = (x + r).min(sup.hi[0]);
    if !(lo < hi) {
        return C64::new(0.0, 0.0);
    }
    let w = omega(f, h, xi);
    let mut breaks = vec![lo];
    breaks.extend(
        f.breakpoints()
            .iter()
            .copied()
            .filter(|b| *b > lo && *b < hi),
    );
    breaks.push(hi);
    let mut acc = C64::new(0.0, 0.0);
    for seg in breaks.windows(2) {
        let panels = ((seg[1] - seg[0]) * w / 20.0).ceil().max(1.0) as usize;
        acc += gl_composite(seg[0], seg[1], panels, 24, |y| {
            f.eval1(h, y) * kernel(x - y, xi, h)
        });
    }
    acc * a
}

fn direct_2d(f: &SampledFamily, h: f64, x: &[f64], xi: &[f64]) -> C64 {
    let r = window_radius(h);
    let sup = f.support_at(h);
    let lo: Vec<f64> = (0..2).map(|i| (x[i] - r).max(sup.lo[i])).collect();
    let hi: Vec<f64> = (0..2).map(|i| (x[i] + r).min(sup.hi[i])).collect();
    if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
        return C64::new(0.0, 0.0);
    }
    let xin = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
    let w = omega(f, h, xin);
    let p0 = ((hi[0] - lo[0]) * w / 20.0).ceil().max(1.0) as usize;
    let p1 = ((hi[1] - lo[1]) * w / 20.0).ceil().max(1.0) as usize;
    let v = gl_composite(lo[0], hi[0], p0, 24, |s| {
        gl_composite(lo[1], hi[1], p1, 24, |t| {
            let (a, b) = (x[0] - s, x[1] - t);
            f.eval(h, &[s, t])
                * C64::from_polar(
                    (-(a * a + b * b) / (2.0 * h)).exp(),
                    (a * xi[0] + b * xi[1]) / h,
                )
        })
    });
    v * alpha_h(h, 2)
}

/// Uniform-grid step resolving frequencies up to `omega` with the Gaussian
/// window's aliasing margin.
fn trapezoid_step(omega: f64, h: f64) -> f64 {
    2.0 * PI / (omega + (92.0 / h).sqrt())
}

/// One FFT for a whole uniform ξ-row at fixed x.
fn xi_line_fft(f: &SampledFamily, h: f64, x: f64, xis: &[f64]) -> Vec<C64> {
    let n_out = xis.len();
    let dxi = xis[1] - xis[0];
    let xi0 = xis[0];
    let r = window_radius(h);
    let xi_abs = xi0.abs().max(xis[n_out - 1].abs());
    let dy_req = trapezoid_step(omega(f, h, xi_abs), h);
    // Virtual refinement so the FFT period 2πh/Δξ' covers the window 2R.
    let m = ((2.0 * r * dxi) / (2.0 * PI * h)).ceil().max(1.0) as usize;
    let dxi_v = dxi / m as f64;
    let n_min = (2.0 * PI * h / (dxi_v * dy_req)).ceil() as usize;
    let n = n_min.max(n_out * m).next_power_of_two();
    let dy = 2.0 * PI * h / (n as f64 * dxi_v);
    let half = 0.5 * n as f64 * dy;
    let sup = f.support_at(h);
    let mut buf: Vec<C64> = (0..n)
        .map(|k| {
            let s = half - k as f64 * dy; // x − y_k
            let y = x - s;
            if s.abs() > r || !sup.contains(&[y]) {
                C64::new(0.0, 0.0)
            } else {
                f.eval1(h, y) * C64::from_polar((-s * s / (2.0 * h)).exp() * dy, s * xi0 / h)
            }
        })
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let a = alpha_h(h, 1);
    (0..n_out)
        .map(|j| {
            let l = j * m;
            buf[l] * C64::from_polar(a, half * l as f64 * dxi_v / h)
        })
        .collect()
}

/// FFT convolution of the family with the FBI kernel along a uniform x-column.
fn x_line_conv(f: &SampledFamily, h: f64, xs: &[f64], xi: f64) -> Vec<C64> {
    let dx = xs[1] - xs[0];
    let r = window_radius(h);
    let dy_req = trapezoid_step(omega(f, h, xi), h);
    let m = (dx / dy_req).ceil().max(1.0) as usize;
    let dy = dx / m as f64;
    let kr = (r / dy).ceil() as usize;
    let y0 = xs[0] - kr as f64 * dy;
    let ny = (xs.len() - 1) * m + 2 * kr + 1;
    let nk = 2 * kr + 1;
    let size = (ny + nk - 1).next_power_of_two();
    let sup = f.support_at(h);
    let mut a: Vec<C64> = (0..size)
        .map(|k| {
            let y = y0 + k as f64 * dy;
            if k < ny && sup.contains(&[y]) {
                f.eval1(h, y)
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    // Kernel K(s) = e^{-s²/2h} e^{isξ/h} at s = (j − kr)·dy.
    let mut b: Vec<C64> = (0..size)
        .map(|j| {
            if j < nk {
                kernel((j as f64 - kr as f64) * dy, xi, h)
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(size);
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (p, q) in a.iter_mut().zip(&b) {
        *p *= q;
    }
    planner.plan_fft_inverse(size).process(&mut a);
    let scale = alpha_h(h, 1) * dy / size as f64;
    // (a*b)[n] = Σ_k a[k] b[n−k]; x_j = y0 + (j·m + kr)·dy needs n − k − kr = j·m + kr − k.
    (0..xs.len()).map(|j| a[j * m + 2 * kr] * scale).collect()
}

fn tail_warning(f: &SampledFamily, h: f64) -> bool {
    let s = f.support_at(h);
    if !s.is_bounded() || f.dim() != 1 {
        return false;
    }
    let (lo, hi) = (s.lo[0], s.hi[0]);
    let n = 400;
    let dx = (hi - lo) / n as f64;
    let l1: f64 = (0..=n)
        .map(|i| f.eval1(h, lo + i as f64 * dx).norm())
        .sum::<f64>()
        * dx;
    let edge = f.eval1(h, lo).norm() + f.eval1(h, hi).norm();
    edge * h.sqrt() > 1e-10 * l1
}

/// T_h f at a single phase point.
pub fn fbi_point(src: &FbiSource, h: f64, pt: &PhasePoint) -> C64 {
    src.eval(h, &pt.x, &pt.xi)
}

/// T_h f at a list of phase points. Points sharing x whose momenta form a
/// uniform row are evaluated with one FFT.
pub fn fbi_forward(f: &SampledFamily, pts: &[PhasePoint], h: f64) -> Result<Flagged<Vec<C64>>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid("h", format!("{h} must be positive")));
    }
    if pts
        .iter()
        .any(|p| p.dim() != f.dim() || p.xi.len() != f.dim() || !p.is_finite())
    {
        return Err(invalid(
            "pts",
            "phase points must be finite and match the family's dimension",
        ));
    }
    let src = FbiSource::Family(f.clone());
    let mut out = vec![C64::new(0.0, 0.0); pts.len()];
    let mut done = vec![false; pts.len()];
    if f.dim() == 1 && fft_friendly(f, h) {
        let mut groups: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (i, p) in pts.iter().enumerate() {
            groups.entry(p.x[0].to_bits()).or_default().push(i);
        }
        for idx in groups.values().filter(|g| g.len() >= 8) {
            let mut sorted = idx.clone();
            sorted.sort_by(|&a, &b| pts[a].xi[0].total_cmp(&pts[b].xi[0]));
            let xis: Vec<f64> = sorted.iter().map(|&i| pts[i].xi[0]).collect();
            if is_uniform(&xis) {
                let vals = xi_line_fft(f, h, pts[sorted[0]].x[0], &xis);
                for (k, &i) in sorted.iter().enumerate() {
                    out[i] = vals[k];
                    done[i] = true;
                }
            }
        }
    }
    let rest: Vec<(usize, C64)> = (0..pts.len())
        .into_par_iter()
        .filter(|i| !done[*i])
        .map(|i| (i, src.eval(h, &pts[i].x, &pts[i].xi)))
        .collect();
    for (i, v) in rest {
        out[i] = v;
    }
    Ok(Flagged {
        value: out,
        tail_warning: tail_warning(f, h),
    })
}

/// Grid evaluation for any source (d = 1), see [`FbiSource::grid`].
pub fn fbi_batch(src: &FbiSource, h: f64, xs: &[f64], xis: &[f64]) -> Vec<Vec<C64>> {
    src.grid(h, xs, xis)
}
