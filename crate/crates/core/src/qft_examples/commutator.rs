use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::phase_core::{AxisBox, SampledFamily};
use crate::quadrature::gauss_legendre;
use crate::spacetime::{Grid, Region};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PropagatorKind {
    Ret,
    Adv,
    /// Pauli–Jordan G_ret − G_adv.
    Pj,
}

const PANELS: usize = 4;
const ORDER: usize = 12;

/// ½∫∫ f over the backward light-cone triangle of (t, x), clipped to the
/// support box. Clipping corners become breakpoints in s so that each panel
/// integrates a smooth function.
fn ret_value(f: &(dyn Fn(f64, f64) -> C64 + Sync), sup: [f64; 4], t: f64, x: f64) -> C64 {
    let [t_lo, t_hi, x_lo, x_hi] = sup;
    let top = t.min(t_hi);
    if top <= t_lo {
        return C64::new(0.0, 0.0);
    }
    let mut cuts = vec![t_lo, top];
    for c in [t - (x - x_lo).abs(), t - (x_hi - x).abs()] {
        if c > t_lo && c < top {
            cuts.push(c);
        }
    }
    cuts.sort_by(f64::total_cmp);
    let rule = gauss_legendre(ORDER);
    let (nodes, wts) = (&rule.0, &rule.1);
    let mut acc = C64::new(0.0, 0.0);
    for seg in cuts.windows(2) {
        let width = (seg[1] - seg[0]) / PANELS as f64;
        for p in 0..PANELS {
            let mid = seg[0] + (p as f64 + 0.5) * width;
            for (u, w) in nodes.iter().zip(wts.iter()) {
                let s = mid + 0.5 * width * u;
                let (a, b) = ((x - (t - s)).max(x_lo), (x + (t - s)).min(x_hi));
                if b <= a {
                    continue;
                }
                let inner = inner_integral(f, s, a, b, x_hi - x_lo);
                acc += inner * (w * 0.5 * width);
            }
        }
    }
    0.5 * acc
}

fn inner_integral(f: &(dyn Fn(f64, f64) -> C64 + Sync), s: f64, a: f64, b: f64, scale: f64) -> C64 {
    let rule = gauss_legendre(ORDER);
    let (nodes, wts) = (&rule.0, &rule.1);
    let panels = ((PANELS as f64) * (b - a) / scale).ceil().max(1.0) as usize;
    let width = (b - a) / panels as f64;
    let mut acc = C64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        for (u, w) in nodes.iter().zip(wts.iter()) {
            acc += f(s, mid + 0.5 * width * u) * (w * 0.5 * width);
        }
    }
    acc
}

fn support_box(f: &SampledFamily) -> Result<[f64; 4]> {
    if f.dim() != 2 {
        return Err(invalid("f", "sources live on the (t, x) plane"));
    }
    let b = f.support();
    let v = [b.lo[0], b.hi[0], b.lo[1], b.hi[1]];
    if v.iter().any(|c| !c.is_finite()) {
        return Err(invalid("f", "source must have a bounded support box"));
    }
    Ok(v)
}

fn propagate(
    f: &SampledFamily,
    sup: [f64; 4],
    kind: PropagatorKind,
    h: f64,
    t: f64,
    x: f64,
) -> C64 {
    let fwd = |s: f64, y: f64| f.eval(h, &[s, y]);
    // G_adv f(t, x) = G_ret(f∘R)(−t, x) with R(t, x) = (−t, x).
    let back = |s: f64, y: f64| f.eval(h, &[-s, y]);
    let mirrored = [-sup[1], -sup[0], sup[2], sup[3]];
    match kind {
        PropagatorKind::Ret => ret_value(&fwd, sup, t, x),
        PropagatorKind::Adv => ret_value(&back, mirrored, -t, x),
        PropagatorKind::Pj => ret_value(&fwd, sup, t, x) - ret_value(&back, mirrored, -t, x),
    }
}

/// G f for the massless 1+1 wave operator □ = ∂_t² − ∂_x², by the
/// d'Alembert formula. The result is evaluated on demand.
pub fn commutator_1p1(f: &SampledFamily, kind: PropagatorKind) -> Result<SampledFamily> {
    let sup = support_box(f)?;
    let reach = AxisBox::new(
        vec![
            if kind == PropagatorKind::Ret {
                sup[0]
            } else {
                f64::NEG_INFINITY
            },
            f64::NEG_INFINITY,
        ],
        vec![
            if kind == PropagatorKind::Adv {
                sup[1]
            } else {
                f64::INFINITY
            },
            f64::INFINITY,
        ],
    )?;
    let f = f.clone();
    SampledFamily::new(2, reach, move |h, p| {
        propagate(&f, sup, kind, h, p[0], p[1])
    })
}

/// G f sampled at the cell centres of a grid.
#[derive(Debug, Clone, Serialize)]
pub struct PropagatorGrid {
    pub kind: PropagatorKind,
    pub grid: Grid,
    pub h: f64,
    /// Row-major, row i at time t_i.
    pub values: Vec<C64>,
    /// The support of G f reaches the grid edge.
    pub clipped: bool,
}

/// Relative level below which a value counts as outside the support.
pub const SUPPORT_LEVEL: f64 = 1e-12;

impl PropagatorGrid {
    pub fn compute(f: &SampledFamily, kind: PropagatorKind, grid: &Grid, h: f64) -> Result<Self> {
        let sup = support_box(f)?;
        if !(h > 0.0) {
            return Err(invalid("h", "must be positive"));
        }
        let values: Vec<C64> = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                propagate(
                    f,
                    sup,
                    kind,
                    h,
                    grid.t_at(k / grid.nx),
                    grid.x_at(k % grid.nx),
                )
            })
            .collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("propagator values"));
        }
        let mut out = Self {
            kind,
            grid: grid.clone(),
            h,
            values,
            clipped: false,
        };
        out.clipped = out.support().touches_edge();
        Ok(out)
    }

    pub fn value(&self, i: usize, j: usize) -> C64 {
        self.values[i * self.grid.nx + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Cells with |G f| above SUPPORT_LEVEL times the maximum.
    pub fn support(&self) -> Region {
        let cut = SUPPORT_LEVEL * self.max_abs();
        let mask = self.values.iter().map(|v| v.norm() > cut).collect();
        Region::from_mask(&self.grid, mask).expect("same grid")
    }

    /// sup over interior cells of |□_Δ(G f) − f| with the centred
    /// five-point stencil; only meaningful for RET and ADV.
    pub fn wave_residual(&self, f: &SampledFamily) -> f64 {
        let g = &self.grid;
        let (dt2, dx2) = (g.dt() * g.dt(), g.dx() * g.dx());
        let sign = if self.kind == PropagatorKind::Pj {
            0.0
        } else {
            1.0
        };
        (1..g.nt - 1)
            .into_par_iter()
            .map(|i| {
                let mut worst: f64 = 0.0;
                for j in 1..g.nx - 1 {
                    let u = self.value(i, j);
                    let utt = (self.value(i + 1, j) + self.value(i - 1, j) - 2.0 * u) / dt2;
                    let uxx = (self.value(i, j + 1) + self.value(i, j - 1) - 2.0 * u) / dx2;
                    let r = utt - uxx - sign * f.eval(self.h, &[g.t_at(i), g.x_at(j)]);
                    worst = worst.max(r.norm());
                }
                worst
            })
            .reduce(|| 0.0, f64::max)
    }
}

/// Cells of a grid where the source is nonzero at the cell centre.
pub fn source_support(f: &SampledFamily, grid: &Grid, h: f64) -> Region {
    Region::from_fn(grid, |t, x| f.eval(h, &[t, x]).norm() > 0.0)
}

/// (1 − u²/r²)⁴ on |u| < r: piecewise polynomial, so the d'Alembert
/// quadrature is exact up to rounding when breakpoints align.
pub fn poly_bump(u: f64, r: f64) -> f64 {
    let q = 1.0 - (u / r).powi(2);
    if q <= 0.0 {
        0.0
    } else {
        q.powi(4)
    }
}

/// p(t − t_c)p(x − x_c) with p = poly_bump(·, r).
pub fn product_bump(center: [f64; 2], r: f64) -> Result<SampledFamily> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid("r", "radius must be positive"));
    }
    let b = AxisBox::rect(
        (center[0] - r, center[0] + r),
        (center[1] - r, center[1] + r),
    );
    SampledFamily::fixed(2, b, move |p| {
        C64::new(
            poly_bump(p[0] - center[0], r) * poly_bump(p[1] - center[1], r),
            0.0,
        )
    })
}
