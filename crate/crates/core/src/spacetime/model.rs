use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::phase_core::AxisBox;
use crate::special::lambert_w0;
use crate::wf_calculus::ConeModel;

type InvMetric = Arc<dyn Fn(f64, f64) -> [[f64; 2]; 2] + Send + Sync>;

/// Relative band around g^{-1}(ξ, ξ) = 0 treated as null.
pub const NULL_BAND: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Preset {
    Minkowski,
    Conformal,
    KruskalSlice { mass: f64 },
    Custom,
}

/// A 1+1 Lorentzian chart with coordinates (t, x), signature (+, −) and dt
/// future-positive.
#[derive(Clone)]
pub struct SpacetimeModel {
    pub name: String,
    pub preset: Preset,
    pub chart: AxisBox,
    inv: InvMetric,
}

impl fmt::Debug for SpacetimeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpacetimeModel")
            .field("name", &self.name)
            .field("preset", &self.preset)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CausalClass {
    TimelikeFuture,
    TimelikePast,
    NullFuture,
    NullPast,
    Spacelike,
    Zero,
}

impl CausalClass {
    pub fn is_future(self) -> bool {
        matches!(self, CausalClass::TimelikeFuture | CausalClass::NullFuture)
    }
}

/// r(T, X) on the Kruskal slice: (1 − r/2M) e^{r/2M} = T² − X². Lambert-W
/// start, then Newton in r.
pub fn kruskal_r(mass: f64, t: f64, x: f64) -> f64 {
    let u = t * t - x * x;
    let rs = 2.0 * mass;
    let mut r = rs * (1.0 + lambert_w0(-u / std::f64::consts::E));
    for _ in 0..50 {
        let rho = r / rs;
        let f = (1.0 - rho) * rho.exp() - u;
        let df = -rho * rho.exp() / rs;
        if df == 0.0 {
            break;
        }
        let step = f / df;
        r -= step;
        if step.abs() <= 1e-15 * r.abs().max(1e-300) {
            break;
        }
    }
    r
}

pub fn kruskal_residual(mass: f64, t: f64, x: f64) -> f64 {
    let r = kruskal_r(mass, t, x);
    let rho = r / (2.0 * mass);
    let u = t * t - x * x;
    ((1.0 - rho) * rho.exp() - u).abs() / u.abs().max(1.0)
}

impl SpacetimeModel {
    /// General chart; the inverse metric is checked on a 33 × 33 lattice.
    pub fn custom(
        name: impl Into<String>,
        chart: AxisBox,
        inv_metric: impl Fn(f64, f64) -> [[f64; 2]; 2] + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::build(name.into(), Preset::Custom, chart, Arc::new(inv_metric))
    }

    pub fn minkowski(chart: AxisBox) -> Result<Self> {
        Self::build(
            "minkowski".into(),
            Preset::Minkowski,
            chart,
            Arc::new(|_, _| [[1.0, 0.0], [0.0, -1.0]]),
        )
    }

    /// g = Ω² (dt² − dx²).
    pub fn conformal(
        chart: AxisBox,
        omega: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let inv = move |t: f64, x: f64| {
            let w = omega(t, x);
            let f = 1.0 / (w * w);
            [[f, 0.0], [0.0, -f]]
        };
        Self::build("conformal".into(), Preset::Conformal, chart, Arc::new(inv))
    }

    /// The (T, X) part of Schwarzschild-Kruskal, g = (32M³/r) e^{−r/2M}(dT² − dX²),
    /// on a box inside T² − X² < 1.
    pub fn kruskal(chart: AxisBox, mass: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(invalid("mass", "must be positive"));
        }
        let (tl, th, xl, xh) = corners(&chart)?;
        let t2 = tl.abs().max(th.abs()).powi(2);
        let x2 = if xl <= 0.0 && xh >= 0.0 {
            0.0
        } else {
            xl.abs().min(xh.abs()).powi(2)
        };
        if t2 - x2 >= 1.0 {
            return Err(Error::OutsideDomain(
                "Kruskal chart must lie in T² − X² < 1".into(),
            ));
        }
        let inv = move |t: f64, x: f64| {
            let r = kruskal_r(mass, t, x);
            let f = r * (r / (2.0 * mass)).exp() / (32.0 * mass.powi(3));
            [[f, 0.0], [0.0, -f]]
        };
        Self::build(
            format!("kruskal M = {mass}"),
            Preset::KruskalSlice { mass },
            chart,
            Arc::new(inv),
        )
    }

    /// The conformal preset with the Kruskal factor, for cross-checks.
    pub fn kruskal_as_conformal(chart: AxisBox, mass: f64) -> Result<Self> {
        Self::kruskal(chart.clone(), mass)?;
        Self::conformal(chart, move |t, x| {
            let r = kruskal_r(mass, t, x);
            (32.0 * mass.powi(3) / r * (-r / (2.0 * mass)).exp()).sqrt()
        })
    }

    fn build(name: String, preset: Preset, chart: AxisBox, inv: InvMetric) -> Result<Self> {
        let (tl, th, xl, xh) = corners(&chart)?;
        if !(tl < th && xl < xh) {
            return Err(invalid("chart", "chart box must have positive extent"));
        }
        for i in 0..=32 {
            for j in 0..=32 {
                let t = tl + (th - tl) * i as f64 / 32.0;
                let x = xl + (xh - xl) * j as f64 / 32.0;
                let m = inv(t, x);
                if m.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite("inverse metric"));
                }
                if !(m[0][0] > 0.0) {
                    return Err(invalid(
                        "inv_metric",
                        format!("dt is not timelike at ({t}, {x})"),
                    ));
                }
                if !(m[0][0] * m[1][1] - m[0][1] * m[1][0] < 0.0) {
                    return Err(invalid(
                        "inv_metric",
                        format!("signature is not (+, −) at ({t}, {x})"),
                    ));
                }
            }
        }
        Ok(Self {
            name,
            preset,
            chart,
            inv,
        })
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.chart.contains(&p)
    }

    fn check(&self, p: [f64; 2]) -> Result<()> {
        if !p.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("point"));
        }
        if !self.contains(p) {
            return Err(Error::OutsideDomain(format!(
                "({}, {}) is outside the chart",
                p[0], p[1]
            )));
        }
        Ok(())
    }

    /// g^{μν} at (t, x); no domain check.
    pub fn inv_metric(&self, t: f64, x: f64) -> [[f64; 2]; 2] {
        (self.inv)(t, x)
    }

    /// Null slopes dx/dt, lower first. Uses the adjugate of g^{-1}, so a
    /// conformal factor cancels exactly.
    pub fn null_slopes(&self, t: f64, x: f64) -> (f64, f64) {
        let m = (self.inv)(t, x);
        let (a, b, c) = (m[0][0], m[0][1], m[1][1]);
        let d = (b * b - a * c).sqrt();
        let (l1, l2) = ((b - d) / a, (b + d) / a);
        (l1.min(l2), l1.max(l2))
    }

    fn scale(m: &[[f64; 2]; 2]) -> f64 {
        m.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()))
    }

    /// Classify a covector by g^{-1}(ξ, ξ) and the pairing with dt.
    pub fn cone_classify(&self, p: [f64; 2], xi: [f64; 2]) -> Result<CausalClass> {
        self.check(p)?;
        if xi == [0.0, 0.0] {
            return Ok(CausalClass::Zero);
        }
        let m = (self.inv)(p[0], p[1]);
        let q = m[0][0] * xi[0] * xi[0] + 2.0 * m[0][1] * xi[0] * xi[1] + m[1][1] * xi[1] * xi[1];
        let time = m[0][0] * xi[0] + m[0][1] * xi[1];
        Ok(classify(
            q,
            time,
            Self::scale(&m) * (xi[0] * xi[0] + xi[1] * xi[1]),
        ))
    }

    /// Classify a tangent vector. g(v, v) has the sign of −adj(g^{-1})(v, v)
    /// because det g^{-1} < 0.
    pub fn classify_vector(&self, p: [f64; 2], v: [f64; 2]) -> Result<CausalClass> {
        self.check(p)?;
        Ok(self.vector_class_unchecked(p, v))
    }

    pub(crate) fn vector_class_unchecked(&self, p: [f64; 2], v: [f64; 2]) -> CausalClass {
        if v == [0.0, 0.0] {
            return CausalClass::Zero;
        }
        let m = (self.inv)(p[0], p[1]);
        let q = -(m[1][1] * v[0] * v[0] - 2.0 * m[0][1] * v[0] * v[1] + m[0][0] * v[1] * v[1]);
        classify(q, v[0], Self::scale(&m) * (v[0] * v[0] + v[1] * v[1]))
    }

    /// Normalised g(v, v)/|v|² (cos 2θ in Minkowski); the timelike margin.
    pub fn vector_margin(&self, p: [f64; 2], v: [f64; 2]) -> f64 {
        let m = (self.inv)(p[0], p[1]);
        let q = -(m[1][1] * v[0] * v[0] - 2.0 * m[0][1] * v[0] * v[1] + m[0][0] * v[1] * v[1]);
        q / (Self::scale(&m) * (v[0] * v[0] + v[1] * v[1]))
    }

    /// The future causal covector arc at p as (centre, half-width), angles
    /// measured by atan2(ξ₁, ξ₀).
    pub fn future_arc(&self, t: f64, x: f64) -> (f64, f64) {
        let m = (self.inv)(t, x);
        let a = 0.5 * (m[0][0] + m[1][1]);
        let b = 0.5 * (m[0][0] - m[1][1]);
        let c = m[0][1];
        let r = b.hypot(c);
        let phase = c.atan2(b);
        let half = 0.5 * (-a / r).clamp(-1.0, 1.0).acos();
        let mut centre = 0.5 * phase;
        if m[0][0] * centre.cos() + m[0][1] * centre.sin() < 0.0 {
            centre += std::f64::consts::PI;
        }
        (centre, half)
    }

    /// The same cones for the wavefront calculus.
    pub fn cone_model(&self) -> ConeModel {
        let inv = self.inv.clone();
        ConeModel::Metric(Arc::new(move |p: &[f64]| inv(p[0], p[1])))
    }

    /// Largest Kruskal residual over the given nodes; None for other presets.
    pub fn kruskal_max_residual(&self, nodes: &[[f64; 2]]) -> Option<f64> {
        match self.preset {
            Preset::KruskalSlice { mass } => Some(
                nodes
                    .iter()
                    .map(|p| kruskal_residual(mass, p[0], p[1]))
                    .fold(0.0, f64::max),
            ),
            _ => None,
        }
    }
}

fn classify(q: f64, time: f64, scale: f64) -> CausalClass {
    if q.abs() <= NULL_BAND * scale {
        if time > 0.0 {
            CausalClass::NullFuture
        } else {
            CausalClass::NullPast
        }
    } else if q > 0.0 {
        if time > 0.0 {
            CausalClass::TimelikeFuture
        } else {
            CausalClass::TimelikePast
        }
    } else {
        CausalClass::Spacelike
    }
}

pub(crate) fn corners(b: &AxisBox) -> Result<(f64, f64, f64, f64)> {
    if b.dim() != 2 {
        return Err(invalid("chart", "a (t, x) chart is two dimensional"));
    }
    if b.lo.iter().chain(&b.hi).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("chart"));
    }
    Ok((b.lo[0], b.hi[0], b.lo[1], b.hi[1]))
}
