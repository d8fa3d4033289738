use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::grid::{grid_nodes, AxisBox};
use super::ladder::HLadder;
use crate::error::{invalid, Error, Result};

type Eval = Arc<dyn Fn(f64, &[f64]) -> C64 + Send + Sync>;
type PerRung<T> = Arc<dyn Fn(f64) -> T + Send + Sync>;

/// Uniform one-dimensional samples of a family at a single rung.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCache {
    pub lo: f64,
    pub step: f64,
    pub values: Vec<C64>,
}

impl GridCache {
    pub fn node(&self, i: usize) -> f64 {
        self.lo + self.step * i as f64
    }

    pub fn hi(&self) -> f64 {
        self.node(self.values.len().saturating_sub(1))
    }
}

/// An h-indexed family of complex functions on a box in R^d.
///
/// The evaluator is authoritative. Optional per-rung grid caches hold the
/// same values on uniform grids for families whose evaluator is itself a
/// quadrature (bump families); quadrature routines prefer them when present.
#[derive(Clone)]
pub struct SampledFamily {
    dim: usize,
    support: AxisBox,
    support_at: Option<PerRung<AxisBox>>,
    eval: Eval,
    bandwidth: PerRung<f64>,
    breakpoints: Vec<f64>,
    cache: Option<Arc<HashMap<u64, GridCache>>>,
}

impl fmt::Debug for SampledFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampledFamily")
            .field("dim", &self.dim)
            .field("support", &self.support)
            .field("breakpoints", &self.breakpoints)
            .field("cached_rungs", &self.cache.as_ref().map(|c| c.len()))
            .finish()
    }
}

fn default_bandwidth(h: f64) -> f64 {
    (92.0 / h).sqrt()
}

impl SampledFamily {
    pub fn new(
        dim: usize,
        support: AxisBox,
        eval: impl Fn(f64, &[f64]) -> C64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(1..=2).contains(&dim) || support.dim() != dim {
            return Err(invalid(
                "dim",
                format!("dimension {dim} with a {}-d support box", support.dim()),
            ));
        }
        Ok(Self {
            dim,
            support,
            support_at: None,
            eval: Arc::new(eval),
            bandwidth: Arc::new(default_bandwidth),
            breakpoints: Vec::new(),
            cache: None,
        })
    }

    /// h-independent function, convenient for the analytic wavefront scans.
    pub fn fixed(
        dim: usize,
        support: AxisBox,
        f: impl Fn(&[f64]) -> C64 + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::new(dim, support, move |_, x| f(x))
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(dim, AxisBox::everywhere(dim), |_, _| C64::new(0.0, 0.0))
            .expect("valid dimension")
    }

    pub fn constant(dim: usize, c: C64) -> Self {
        Self::new(dim, AxisBox::everywhere(dim), move |_, _| c)
            .expect("valid dimension")
            .with_bandwidth(|_| 0.0)
    }

    /// Largest angular frequency (in y, radians per unit length) carried by
    /// the family at scale h, beyond the FBI window's own spread.
    pub fn with_bandwidth(mut self, b: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.bandwidth = Arc::new(b);
        self
    }

    /// Tighter per-rung support (e.g. a coherent state's Gaussian radius).
    pub fn with_support_at(mut self, s: impl Fn(f64) -> AxisBox + Send + Sync + 'static) -> Self {
        self.support_at = Some(Arc::new(s));
        self
    }

    /// Points where the family is not smooth (d = 1); quadrature splits there.
    pub fn with_breakpoints(mut self, mut pts: Vec<f64>) -> Self {
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        self.breakpoints = pts;
        self
    }

    /// Tabulates every rung of `ladder` on a uniform grid fine enough for FBI
    /// quadrature up to |ξ| = `xi_max` (d = 1 only).
    pub fn with_cache(mut self, ladder: &HLadder, xi_max: f64) -> Result<Self> {
        if self.dim != 1 {
            return Err(invalid("cache", "grid caches are one-dimensional"));
        }
        let mut map = HashMap::new();
        for &h in ladder.rungs() {
            let sup = self.support_at(h);
            if !sup.is_bounded() {
                return Err(invalid("cache", "unbounded support cannot be cached"));
            }
            let step = cache_step(h, xi_max, (self.bandwidth)(h));
            let nodes = grid_nodes(sup.lo[0], sup.hi[0], step);
            let step = if nodes.len() > 1 {
                nodes[1] - nodes[0]
            } else {
                step
            };
            let values = nodes.iter().map(|&y| (self.eval)(h, &[y])).collect();
            map.insert(
                h.to_bits(),
                GridCache {
                    lo: nodes[0],
                    step,
                    values,
                },
            );
        }
        self.cache = Some(Arc::new(map));
        Ok(self)
    }

    /// Installs precomputed per-rung grids (keyed by h bits).
    pub(crate) fn with_caches(mut self, caches: HashMap<u64, GridCache>) -> Self {
        self.cache = Some(Arc::new(caches));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support(&self) -> &AxisBox {
        &self.support
    }

    pub fn support_at(&self, h: f64) -> AxisBox {
        match &self.support_at {
            Some(s) => s(h)
                .intersect(&self.support)
                .unwrap_or_else(|| self.support.clone()),
            None => self.support.clone(),
        }
    }

    pub fn bandwidth(&self, h: f64) -> f64 {
        (self.bandwidth)(h)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn cached(&self, h: f64) -> Option<&GridCache> {
        self.cache.as_ref().and_then(|c| c.get(&h.to_bits()))
    }

    /// Value at (h, x); zero outside the support.
    pub fn eval(&self, h: f64, x: &[f64]) -> C64 {
        if self.support.contains(x) {
            (self.eval)(h, x)
        } else {
            C64::new(0.0, 0.0)
        }
    }

    pub fn eval1(&self, h: f64, x: f64) -> C64 {
        self.eval(h, &[x])
    }

    /// The rung-h member as an h-independent function; its bandwidth and
    /// support are those of rung h.
    pub fn frozen(&self, h: f64) -> SampledFamily {
        let e = self.eval.clone();
        let b = (self.bandwidth)(h);
        let mut out = self.clone();
        out.eval = Arc::new(move |_, x| e(h, x));
        out.bandwidth = Arc::new(move |_| b);
        let s = self.support_at(h);
        out.support_at = Some(Arc::new(move |_| s.clone()));
        out.cache = None;
        out
    }

    /// Pointwise product. Caches of either factor carry over, multiplied by
    /// the other factor's evaluator at the cached nodes.
    pub fn product(&self, other: &SampledFamily) -> Result<SampledFamily> {
        if self.dim != other.dim {
            return Err(invalid("product", "dimension mismatch"));
        }
        let support = self
            .support
            .intersect(&other.support)
            .ok_or(Error::EmptyRegion)?;
        let (a, b) = (self.eval.clone(), other.eval.clone());
        let (ba, bb) = (self.bandwidth.clone(), other.bandwidth.clone());
        let (sa, sb) = (self.clone(), other.clone());
        let mut out = SampledFamily::new(self.dim, support, move |h, x| a(h, x) * b(h, x))?
            .with_bandwidth(move |h| ba(h) + bb(h))
            .with_support_at(move |h| {
                let (p, q) = (sa.support_at(h), sb.support_at(h));
                p.intersect(&q).unwrap_or(p)
            });
        let mut bp = self.breakpoints.clone();
        bp.extend_from_slice(&other.breakpoints);
        out = out.with_breakpoints(bp);
        out.cache = merge_cache(self, other).or_else(|| merge_cache(other, self));
        Ok(out)
    }

    fn map_values(&self, f: fn(C64) -> C64) -> SampledFamily {
        let mut out = self.clone();
        let e = self.eval.clone();
        out.eval = Arc::new(move |h, x| f(e(h, x)));
        out.cache = self.cache.as_ref().map(|c| {
            Arc::new(
                c.iter()
                    .map(|(k, g)| {
                        let values = g.values.iter().map(|v| f(*v)).collect();
                        (
                            *k,
                            GridCache {
                                values,
                                ..g.clone()
                            },
                        )
                    })
                    .collect(),
            )
        });
        out
    }

    /// Complex conjugate family.
    pub fn conj(&self) -> SampledFamily {
        self.map_values(|v| v.conj())
    }

    /// |u_h|, used to bound quadrature round-off.
    pub fn modulus(&self) -> SampledFamily {
        self.map_values(|v| C64::new(v.norm(), 0.0))
    }

    /// Linear combination a·self + b·other on the union of supports.
    pub fn combine(&self, a: C64, other: &SampledFamily, b: C64) -> Result<SampledFamily> {
        if self.dim != other.dim {
            return Err(invalid("combine", "dimension mismatch"));
        }
        let lo = self
            .support
            .lo
            .iter()
            .zip(&other.support.lo)
            .map(|(p, q)| p.min(*q))
            .collect();
        let hi = self
            .support
            .hi
            .iter()
            .zip(&other.support.hi)
            .map(|(p, q)| p.max(*q))
            .collect();
        let (s, o) = (self.clone(), other.clone());
        let (ba, bb) = (self.bandwidth.clone(), other.bandwidth.clone());
        let (sa, sb) = (self.clone(), other.clone());
        let mut bp = self.breakpoints.clone();
        bp.extend_from_slice(&other.breakpoints);
        Ok(
            SampledFamily::new(self.dim, AxisBox::new(lo, hi)?, move |h, x| {
                a * s.eval(h, x) + b * o.eval(h, x)
            })?
            .with_bandwidth(move |h| ba(h).max(bb(h)))
            .with_support_at(move |h| {
                let (p, q) = (sa.support_at(h), sb.support_at(h));
                AxisBox {
                    lo: p.lo.iter().zip(&q.lo).map(|(u, v)| u.min(*v)).collect(),
                    hi: p.hi.iter().zip(&q.hi).map(|(u, v)| u.max(*v)).collect(),
                }
            })
            .with_breakpoints(bp),
        )
    }

    /// x ↦ u_h(x − a).
    pub fn translate(&self, a: &[f64]) -> SampledFamily {
        let a: Vec<f64> = a.to_vec();
        let shift = |b: &AxisBox, a: &[f64]| AxisBox {
            lo: b.lo.iter().zip(a).map(|(v, s)| v + s).collect(),
            hi: b.hi.iter().zip(a).map(|(v, s)| v + s).collect(),
        };
        let e = self.eval.clone();
        let a2 = a.clone();
        let mut out = self.clone();
        out.support = shift(&self.support, &a);
        out.eval = Arc::new(move |h, x| {
            let y: Vec<f64> = x.iter().zip(&a2).map(|(v, s)| v - s).collect();
            e(h, &y)
        });
        if let Some(sa) = self.support_at.clone() {
            let a3 = a.clone();
            out.support_at = Some(Arc::new(move |h| shift(&sa(h), &a3)));
        }
        if self.dim == 1 {
            out.breakpoints = self.breakpoints.iter().map(|b| b + a[0]).collect();
            out.cache = self.cache.as_ref().map(|c| {
                Arc::new(
                    c.iter()
                        .map(|(k, g)| {
                            (
                                *k,
                                GridCache {
                                    lo: g.lo + a[0],
                                    ..g.clone()
                                },
                            )
                        })
                        .collect(),
                )
            });
        }
        out
    }
}

fn merge_cache(
    cached: &SampledFamily,
    other: &SampledFamily,
) -> Option<Arc<HashMap<u64, GridCache>>> {
    let c = cached.cache.as_ref()?;
    Some(Arc::new(
        c.iter()
            .map(|(k, g)| {
                let h = f64::from_bits(*k);
                // |ξ| the cache resolved, then the step the product needs for it.
                let xi = h
                    * (2.0 * std::f64::consts::PI / g.step
                        - cached.bandwidth(h)
                        - (92.0 / h).sqrt());
                let need = cache_step(h, xi.max(0.0), cached.bandwidth(h) + other.bandwidth(h));
                let merged = if need >= g.step * (1.0 - 1e-12) {
                    let values = g
                        .values
                        .iter()
                        .enumerate()
                        .map(|(i, v)| v * other.eval(h, &[g.node(i)]))
                        .collect();
                    GridCache {
                        values,
                        ..g.clone()
                    }
                } else {
                    let nodes = grid_nodes(g.lo, g.hi(), need);
                    let step = if nodes.len() > 1 {
                        nodes[1] - nodes[0]
                    } else {
                        need
                    };
                    let values = nodes
                        .iter()
                        .map(|&y| cached.eval(h, &[y]) * other.eval(h, &[y]))
                        .collect();
                    GridCache {
                        lo: nodes[0],
                        step,
                        values,
                    }
                };
                (*k, merged)
            })
            .collect(),
    ))
}

/// Grid step resolving e^{iyξ/h} for |ξ| ≤ xi_max together with the
/// Gaussian window and the family's own bandwidth; never coarser than √h/4.
pub(crate) fn cache_step(h: f64, xi_max: f64, bandwidth: f64) -> f64 {
    let omega = xi_max / h + bandwidth + (92.0 / h).sqrt();
    (2.0 * std::f64::consts::PI / omega).min(h.sqrt() / 4.0)
}

/// sup over the region's grid nodes of (1+|x|²)^N·|f(h,x)|.
pub fn weighted_sup(f: &SampledFamily, h: f64, region: &AxisBox, weight_power: u32) -> Result<f64> {
    if region.dim() != f.dim() {
        return Err(invalid("region", "dimension mismatch"));
    }
    if region.lo.iter().zip(&region.hi).any(|(a, b)| !(a <= b)) {
        return Err(Error::EmptyRegion);
    }
    if !region.is_bounded() {
        return Err(invalid("region", "must be bounded"));
    }
    if !f.support().contains_box(region) {
        return Err(Error::OutsideDomain(
            "region is not inside the support box".into(),
        ));
    }
    let step = h.sqrt() / 4.0;
    let axes: Vec<Vec<f64>> = (0..region.dim())
        .map(|i| grid_nodes(region.lo[i], region.hi[i], step))
        .collect();
    let weight = |x: &[f64]| (1.0 + x.iter().map(|v| v * v).sum::<f64>()).powi(weight_power as i32);
    let mut best = 0.0f64;
    match axes.len() {
        1 => {
            for &x in &axes[0] {
                best = best.max(weight(&[x]) * f.eval(h, &[x]).norm());
            }
        }
        _ => {
            for &t in &axes[0] {
                for &x in &axes[1] {
                    best = best.max(weight(&[t, x]) * f.eval(h, &[t, x]).norm());
                }
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian() -> SampledFamily {
        SampledFamily::new(1, AxisBox::interval(-10.0, 10.0), |h, x| {
            C64::new((-x[0] * x[0] / (2.0 * h)).exp(), 0.0)
        })
        .unwrap()
    }

    #[test]
    fn sup_of_zero_is_zero() {
        let z = SampledFamily::zero(1);
        assert_eq!(
            weighted_sup(&z, 0.1, &AxisBox::interval(-1.0, 1.0), 3).unwrap(),
            0.0
        );
    }

    #[test]
    fn gaussian_tail_sup() {
        let v = weighted_sup(&gaussian(), 0.1, &AxisBox::interval(1.0, 2.0), 0).unwrap();
        let dense = (0..=100_000)
            .map(|i| 1.0 + i as f64 * 1e-5)
            .map(|x| (-x * x / 0.2f64).exp())
            .fold(0.0, f64::max);
        assert!((v - dense).abs() < 1e-15);
        assert!((v - 6.737_946_999_085_467e-3).abs() < 1e-12);
    }

    #[test]
    fn weight_multiplies_at_the_node() {
        let f = SampledFamily::new(1, AxisBox::interval(-5.0, 5.0), |_, x| {
            C64::new(if x[0] == 2.0 { 1.0 } else { 0.0 }, 0.0)
        })
        .unwrap();
        let r = AxisBox::interval(2.0, 2.0);
        assert_eq!(
            weighted_sup(&f, 0.1, &r, 2).unwrap(),
            25.0 * weighted_sup(&f, 0.1, &r, 0).unwrap()
        );
    }

    #[test]
    fn rejects_empty_region() {
        let r = AxisBox {
            lo: vec![1.0],
            hi: vec![0.0],
        };
        assert_eq!(
            weighted_sup(&gaussian(), 0.1, &r, 0),
            Err(Error::EmptyRegion)
        );
    }

    #[test]
    fn cache_matches_evaluator() {
        let l = HLadder::default_ladder();
        let f = gaussian()
            .with_support_at(|h| AxisBox::interval(-9.0 * h.sqrt(), 9.0 * h.sqrt()))
            .with_cache(&l, 2.0)
            .unwrap();
        for &h in l.rungs() {
            let g = f.cached(h).unwrap();
            for (i, v) in g.values.iter().enumerate() {
                let e = f.eval1(h, g.node(i));
                assert!((v - e).norm() <= 1e-12 * e.norm().max(1e-300));
            }
            assert!(g.step <= h.sqrt() / 4.0 * (1.0 + 1e-8));
        }
    }
}
