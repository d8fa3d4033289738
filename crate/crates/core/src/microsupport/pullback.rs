use std::fmt;
use std::sync::Arc;

use super::bump::BumpFamily;
use crate::error::{invalid, Error, Result};
use crate::phase_core::{grid_nodes, AxisBox, SampledFamily};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Real-analytic change of variables x ↦ F(x) given in closed form with its
/// derivative (d = 1).
#[derive(Clone)]
pub struct AnalyticMap {
    pub name: String,
    f: RealFn,
    df: RealFn,
}

impl fmt::Debug for AnalyticMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticMap")
            .field("name", &self.name)
            .finish()
    }
}

impl AnalyticMap {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
            df: Arc::new(df),
        }
    }

    pub fn identity() -> Self {
        Self::new("identity", |x| x, |_| 1.0)
    }

    pub fn linear(a: f64) -> Self {
        Self::new(format!("{a}x"), move |x| a * x, move |_| a)
    }

    /// x + eps·sin x.
    pub fn sine_perturbed(eps: f64) -> Self {
        Self::new(
            format!("x+{eps}sin(x)"),
            move |x| x + eps * x.sin(),
            move |x| 1.0 + eps * x.cos(),
        )
    }

    pub fn apply(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn jacobian(&self, x: f64) -> f64 {
        (self.df)(x)
    }

    /// All solutions of F(x) = y in [lo, hi], by sign changes on a fine grid
    /// refined with bisection.
    pub fn preimages(&self, y: f64, lo: f64, hi: f64) -> Vec<f64> {
        let xs = grid_nodes(lo, hi, ((hi - lo) / 4000.0).max(1e-9));
        let g = |x: f64| self.apply(x) - y;
        let mut out: Vec<f64> = Vec::new();
        for w in xs.windows(2) {
            let (mut a, mut b) = (w[0], w[1]);
            let (mut ga, gb) = (g(a), g(b));
            if ga == 0.0 {
                out.push(a);
                continue;
            }
            if ga * gb > 0.0 {
                continue;
            }
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                let gm = g(m);
                if ga * gm <= 0.0 {
                    b = m;
                } else {
                    a = m;
                    ga = gm;
                }
            }
            out.push(0.5 * (a + b));
        }
        if let Some(&last) = xs.last() {
            if g(last) == 0.0 {
                out.push(last);
            }
        }
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        out
    }
}

/// χ_h·(u_h ∘ F), supported in supp χ.
pub fn pullback_family(
    u: &SampledFamily,
    map: &AnalyticMap,
    chi: &BumpFamily,
) -> Result<SampledFamily> {
    if u.dim() != 1 {
        return Err(invalid("u", "pullbacks are one-dimensional"));
    }
    let (lo, hi) = chi.support;
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(invalid("chi", "cutoff must have compact support"));
    }
    let mut slope: f64 = 0.0;
    for x in grid_nodes(lo, hi, (hi - lo) / 2000.0) {
        let (f, df) = (map.apply(x), map.jacobian(x));
        if !f.is_finite() || !df.is_finite() {
            return Err(Error::OutsideDomain(format!(
                "{} is not defined at x = {x} in supp(chi)",
                map.name
            )));
        }
        slope = slope.max(df.abs());
    }
    let inner = u.clone();
    let m = map.clone();
    let bw = u.clone();
    let composed = SampledFamily::new(1, AxisBox::interval(lo, hi), move |h, x| {
        inner.eval1(h, m.apply(x[0]))
    })?
    .with_bandwidth(move |h| slope * bw.bandwidth(h) + (92.0 / h).sqrt());
    chi.realization.product(&composed)
}

/// Maps phase points (y, η) of the target to {(x, F'(x)·η) : F(x) = y, x ∈ [lo, hi]}.
pub fn pullback_points(
    map: &AnalyticMap,
    domain: (f64, f64),
    pts: &[(f64, f64)],
) -> Vec<(f64, f64)> {
    pts.iter()
        .flat_map(|&(y, eta)| {
            map.preimages(y, domain.0, domain.1)
                .into_iter()
                .map(move |x| (x, map.jacobian(x) * eta))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preimages_of_sine_map() {
        let f = AnalyticMap::sine_perturbed(0.3);
        let r = f.preimages(0.0, -3.0, 3.0);
        assert_eq!(r.len(), 1);
        assert!(r[0].abs() < 1e-12);
        let r = f.preimages(1.0, -3.0, 3.0);
        assert!((f.apply(r[0]) - 1.0).abs() < 1e-12);
        let p = pullback_points(&AnalyticMap::linear(2.0), (-3.0, 3.0), &[(0.0, 1.0)]);
        assert_eq!(p.len(), 1);
        assert!(p[0].0.abs() < 1e-12 && (p[0].1 - 2.0).abs() < 1e-12);
    }
}
