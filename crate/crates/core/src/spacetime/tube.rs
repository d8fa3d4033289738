use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::model::{CausalClass, SpacetimeModel};
use crate::error::{invalid, Error, Result};
use crate::phase_core::AxisBox;
use crate::wf_calculus::{
    conormal_of_hypersurface, ucp_predicates, Cell, Cone, ConicSet, Hypersurface, UcpVerdict,
};

type CurveFn = Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>;

/// A polyline whose segments are future timelike at their midpoints.
#[derive(Debug, Clone, Serialize)]
pub struct TimelikeCurve {
    pub vertices: Vec<[f64; 2]>,
    pub classes: Vec<CausalClass>,
    /// Smallest normalised g(v, v)/|v|² over the segments.
    pub min_margin: f64,
}

impl TimelikeCurve {
    pub fn new(model: &SpacetimeModel, vertices: Vec<[f64; 2]>, cone_margin: f64) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(invalid("vertices", "a curve needs two vertices"));
        }
        let mut classes = Vec::with_capacity(vertices.len() - 1);
        let mut min_margin = f64::INFINITY;
        for w in vertices.windows(2) {
            let mid = [0.5 * (w[0][0] + w[1][0]), 0.5 * (w[0][1] + w[1][1])];
            let v = [w[1][0] - w[0][0], w[1][1] - w[0][1]];
            let class = model.classify_vector(mid, v)?;
            let margin = model.vector_margin(mid, v);
            if class != CausalClass::TimelikeFuture || margin < cone_margin {
                return Err(invalid(
                    "vertices",
                    format!(
                        "segment at ({}, {}) is {class:?} with margin {margin:.3e}",
                        mid[0], mid[1]
                    ),
                ));
            }
            min_margin = min_margin.min(margin);
            classes.push(class);
        }
        Ok(Self {
            vertices,
            classes,
            min_margin,
        })
    }
}

/// A homotopy γ_s(τ), τ ∈ [0, 1], with closed-form τ-derivatives.
#[derive(Clone)]
pub struct CurveFamily {
    pub name: String,
    gamma: CurveFn,
    d1: CurveFn,
    d2: CurveFn,
}

impl fmt::Debug for CurveFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CurveFamily({})", self.name)
    }
}

impl CurveFamily {
    pub fn new(
        name: impl Into<String>,
        gamma: impl Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static,
        d1: impl Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static,
        d2: impl Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            gamma: Arc::new(gamma),
            d1: Arc::new(d1),
            d2: Arc::new(d2),
        }
    }

    /// The constant family p → q.
    pub fn straight(p: [f64; 2], q: [f64; 2]) -> Self {
        let v = [q[0] - p[0], q[1] - p[1]];
        Self::new(
            "straight",
            move |_, tau| [p[0] + tau * v[0], p[1] + tau * v[1]],
            move |_, _| v,
            |_, _| [0.0, 0.0],
        )
    }

    /// x = s (a/2) t (t − T) for t = Tτ: fixed ends (0, 0) and (T, 0),
    /// curvature s·a at the midpoint. Timelike while aT/2 < 1.
    pub fn bent(duration: f64, accel: f64) -> Self {
        let (tt, a) = (duration, accel);
        Self::new(
            format!("bent T = {tt}, a = {a}"),
            move |s, tau| {
                let t = tt * tau;
                [t, 0.5 * s * a * t * (t - tt)]
            },
            move |s, tau| [tt, s * a * tt * (tt * tau - 0.5 * tt)],
            move |s, _| [0.0, s * a * tt * tt],
        )
    }

    pub fn point(&self, s: f64, tau: f64) -> [f64; 2] {
        (self.gamma)(s, tau)
    }

    pub fn velocity(&self, s: f64, tau: f64) -> [f64; 2] {
        (self.d1)(s, tau)
    }

    pub fn acceleration(&self, s: f64, tau: f64) -> [f64; 2] {
        (self.d2)(s, tau)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

/// One side of ∂T_s: c(τ) = γ_s(τ) ± δ n(τ), n the Euclidean unit normal
/// (the exponential map of the flat chart metric).
#[derive(Debug, Clone)]
pub struct TubeBoundary {
    pub s: f64,
    pub side: Side,
    pub delta: f64,
    family: CurveFamily,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundarySample {
    pub tau: f64,
    pub t: f64,
    pub x: f64,
    /// Unit conormal (ξ_t, ξ_x).
    pub xi: [f64; 2],
    pub class: CausalClass,
}

impl TubeBoundary {
    fn frame(&self, tau: f64) -> ([f64; 2], [f64; 2], [f64; 2]) {
        let g = self.family.point(self.s, tau);
        let v = self.family.velocity(self.s, tau);
        let a = self.family.acceleration(self.s, tau);
        let speed = v[0].hypot(v[1]);
        let n = [-v[1] / speed, v[0] / speed];
        // n' = R (v/|v|)' with (v/|v|)' = a/|v| − v (v·a)/|v|³.
        let va = v[0] * a[0] + v[1] * a[1];
        let u = [
            a[0] / speed - v[0] * va / speed.powi(3),
            a[1] / speed - v[1] * va / speed.powi(3),
        ];
        let dn = [-u[1], u[0]];
        let k = self.side.sign() * self.delta;
        (
            [g[0] + k * n[0], g[1] + k * n[1]],
            [v[0] + k * dn[0], v[1] + k * dn[1]],
            n,
        )
    }

    pub fn point(&self, tau: f64) -> [f64; 2] {
        self.frame(tau).0
    }

    pub fn tangent(&self, tau: f64) -> [f64; 2] {
        self.frame(tau).1
    }

    /// Unit covector annihilating the tangent.
    pub fn conormal(&self, tau: f64) -> [f64; 2] {
        let d = self.tangent(tau);
        let m = d[0].hypot(d[1]);
        [-d[1] / m, d[0] / m]
    }

    fn tau_at(&self, t: f64) -> f64 {
        let (mut a, mut b) = (0.0, 1.0);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if self.point(m)[0] < t {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.point(0.0)[0], self.point(1.0)[0])
    }

    /// {x = F(t)}; valid inside `window()`, where t is monotone along c.
    pub fn hypersurface(&self) -> Result<Hypersurface> {
        let (me, me2) = (self.clone(), self.clone());
        let graph = move |t: f64| {
            let (t0, t1) = me.t_range();
            let tau = me.tau_at(t.clamp(t0, t1));
            let c = me.point(tau);
            let d = me.tangent(tau);
            // Straight continuation past the ends.
            let slope = d[1] / d[0];
            c[1] + slope * (t - c[0])
        };
        let slope = move |t: f64| {
            let (t0, t1) = me2.t_range();
            let d = me2.tangent(me2.tau_at(t.clamp(t0, t1)));
            d[1] / d[0]
        };
        Hypersurface::new(
            format!("tube boundary s = {}, {:?}", self.s, self.side),
            2,
            move |p| p[1] - graph(p[0]),
            move |p| vec![-slope(p[0]), 1.0],
        )
    }

    /// Box around the boundary, trimmed away from the caps at the ends.
    pub fn window(&self) -> AxisBox {
        let (t0, t1) = self.t_range();
        let trim = 0.02 * (t1 - t0);
        let xs: Vec<f64> = (0..=64).map(|k| self.point(k as f64 / 64.0)[1]).collect();
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let pad = 0.05 * (hi - lo).max(t1 - t0);
        AxisBox::rect((t0 + trim, t1 - trim), (lo - pad, hi + pad))
    }

    /// Sampled level-set table: points and conormals along the boundary.
    pub fn table(&self, model: &SpacetimeModel, n: usize) -> Result<Vec<BoundarySample>> {
        (0..=n)
            .map(|k| {
                let tau = k as f64 / n as f64;
                let c = self.point(tau);
                let xi = self.conormal(tau);
                Ok(BoundarySample {
                    tau,
                    t: c[0],
                    x: c[1],
                    xi,
                    class: model.cone_classify(c, xi)?,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct TubeSlice {
    pub s: f64,
    pub curve: TimelikeCurve,
    pub sides: [TubeBoundary; 2],
}

#[derive(Debug, Clone)]
pub struct TubeSweep {
    pub delta: f64,
    pub slices: Vec<TubeSlice>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TubeConfig {
    pub s_samples: usize,
    pub tau_samples: usize,
    pub cone_margin: f64,
}

impl Default for TubeConfig {
    fn default() -> Self {
        Self {
            s_samples: 11,
            tau_samples: 400,
            cone_margin: 1e-6,
        }
    }
}

/// Tubes of radius δ around γ_s for s on a uniform sample of [0, 1]. Each
/// γ_s must be timelike, and each boundary side must be an immersed
/// timelike curve: future-directed tangent, spacelike conormal.
pub fn tube_sweep(
    model: &SpacetimeModel,
    family: &CurveFamily,
    delta: f64,
    cfg: TubeConfig,
) -> Result<TubeSweep> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(invalid("delta", "radius must be positive"));
    }
    if cfg.s_samples < 2 || cfg.tau_samples < 2 {
        return Err(invalid("cfg", "need at least two samples in s and τ"));
    }
    let mut slices = Vec::with_capacity(cfg.s_samples);
    for si in 0..cfg.s_samples {
        let s = si as f64 / (cfg.s_samples - 1) as f64;
        let vertices: Vec<[f64; 2]> = (0..=cfg.tau_samples)
            .map(|k| family.point(s, k as f64 / cfg.tau_samples as f64))
            .collect();
        let curve = TimelikeCurve::new(model, vertices, cfg.cone_margin)?;
        let sides = [Side::Plus, Side::Minus].map(|side| TubeBoundary {
            s,
            side,
            delta,
            family: family.clone(),
        });
        for b in &sides {
            for k in 0..=cfg.tau_samples {
                let tau = k as f64 / cfg.tau_samples as f64;
                let c = b.point(tau);
                let t = family.point(s, tau)[0];
                if !model.contains(c) {
                    return Err(Error::OutsideDomain(format!(
                        "tube boundary leaves the chart at s = {s}, t = {t}"
                    )));
                }
                let d = b.tangent(tau);
                let ok = model.classify_vector(c, d)? == CausalClass::TimelikeFuture
                    && model.vector_margin(c, d) >= cfg.cone_margin
                    && model.cone_classify(c, b.conormal(tau))? == CausalClass::Spacelike;
                if !ok {
                    return Err(Error::TubeNotTimelike { s, t });
                }
            }
        }
        slices.push(TubeSlice { s, curve, sides });
    }
    Ok(TubeSweep { delta, slices })
}

/// The future causal covectors over a window as a conic set, one hull
/// arc per cell from a 3 × 3 sample.
pub fn forward_cone_set(model: &SpacetimeModel, window: &AxisBox, n: usize) -> Result<ConicSet> {
    if window.dim() != 2 || n == 0 {
        return Err(invalid("window", "need a 2D window and n ≥ 1"));
    }
    if !model.chart.contains_box(window) {
        return Err(Error::OutsideDomain("window leaves the chart".into()));
    }
    let (dt, dx) = (
        (window.hi[0] - window.lo[0]) / n as f64,
        (window.hi[1] - window.lo[1]) / n as f64,
    );
    let mut cells = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (t0, x0) = (window.lo[0] + i as f64 * dt, window.lo[1] + j as f64 * dx);
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            let mut reference = None;
            for a in 0..3 {
                for b in 0..3 {
                    let (c, h) =
                        model.future_arc(t0 + 0.5 * a as f64 * dt, x0 + 0.5 * b as f64 * dx);
                    let r = *reference.get_or_insert(c);
                    let c = r + (c - r + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU)
                        - std::f64::consts::PI;
                    lo = lo.min(c - h);
                    hi = hi.max(c + h);
                }
            }
            let base = AxisBox::rect((t0, t0 + dt), (x0, x0 + dx));
            cells.push(Cell::new(base, Cone::arcs(&[(lo, hi)])?)?);
        }
    }
    ConicSet::from_cells(2, cells)
}

#[derive(Debug, Clone, Serialize)]
pub struct HolmgrenRow {
    pub s: f64,
    pub side: Side,
    pub conormal_cells: usize,
    pub verdict: UcpVerdict,
}

/// Unique-continuation predicates of the forward cone against every swept
/// boundary's conormal.
pub fn holmgren_sweep(
    model: &SpacetimeModel,
    sweep: &TubeSweep,
    n: usize,
) -> Result<Vec<HolmgrenRow>> {
    let mut rows = Vec::new();
    for slice in &sweep.slices {
        for b in &slice.sides {
            let window = b.window();
            let conormal = conormal_of_hypersurface(&b.hypersurface()?, &window, n)?;
            let w = forward_cone_set(model, &window, n)?;
            let verdict = ucp_predicates(&w, &conormal)?;
            rows.push(HolmgrenRow {
                s: slice.s,
                side: b.side,
                conormal_cells: conormal.cells.len(),
                verdict,
            });
        }
    }
    Ok(rows)
}
