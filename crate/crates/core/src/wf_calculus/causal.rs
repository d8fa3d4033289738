use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::conic::ConicSet;
use crate::error::{invalid, Result};

type InvMetric = Arc<dyn Fn(&[f64]) -> [[f64; 2]; 2] + Send + Sync>;

/// Which covectors count as causal and future directed. Signature (+, −),
/// with dt future-positive: ξ is future causal when g^{-1}(ξ, ξ) ≥ 0 and
/// g^{-1}(ξ, dt) > 0.
#[derive(Clone)]
pub enum ConeModel {
    /// Flat R^{1+s}, covectors (ξ₀, ξ₁, …, ξ_s).
    Minkowski { spatial_dim: usize },
    /// Inverse metric on a 1+1 chart.
    Metric(InvMetric),
}

impl fmt::Debug for ConeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConeModel::Minkowski { spatial_dim } => write!(f, "Minkowski(1+{spatial_dim})"),
            ConeModel::Metric(_) => write!(f, "Metric"),
        }
    }
}

impl ConeModel {
    pub fn minkowski(spatial_dim: usize) -> Self {
        ConeModel::Minkowski { spatial_dim }
    }

    pub fn covector_len(&self) -> usize {
        match self {
            ConeModel::Minkowski { spatial_dim } => 1 + spatial_dim,
            ConeModel::Metric(_) => 2,
        }
    }

    /// (g^{-1}(ξ, ξ), g^{-1}(ξ, dt)).
    fn pairings(&self, x: &[f64], xi: &[f64]) -> (f64, f64) {
        match self {
            ConeModel::Minkowski { .. } => (
                xi[0] * xi[0] - xi[1..].iter().map(|v| v * v).sum::<f64>(),
                xi[0],
            ),
            ConeModel::Metric(g) => {
                let m = g(x);
                let q = m[0][0] * xi[0] * xi[0]
                    + 2.0 * m[0][1] * xi[0] * xi[1]
                    + m[1][1] * xi[1] * xi[1];
                (q, m[0][0] * xi[0] + m[0][1] * xi[1])
            }
        }
    }

    fn tol(xi: &[f64]) -> f64 {
        1e-12 * xi.iter().map(|v| v * v).sum::<f64>()
    }

    /// Future-directed causal (V⁺), null included; zero excluded.
    pub fn is_future_causal(&self, x: &[f64], xi: &[f64]) -> bool {
        let (q, t) = self.pairings(x, xi);
        xi.iter().any(|&v| v != 0.0) && q >= -Self::tol(xi) && t > 0.0
    }

    /// Past-directed causal (V⁻), null included; zero excluded.
    pub fn is_past_causal(&self, x: &[f64], xi: &[f64]) -> bool {
        let (q, t) = self.pairings(x, xi);
        xi.iter().any(|&v| v != 0.0) && q >= -Self::tol(xi) && t < 0.0
    }
}

/// Euclidean distance from p = (p₀, p⃗) to the closed cone {p₀ ≤ −|p⃗|}.
fn dist_to_past_cone(p: &[f64]) -> f64 {
    let r = p[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
    let t = p[0];
    if t <= -r {
        0.0
    } else if t >= r {
        // Polar region: the apex is nearest.
        (t * t + r * r).sqrt()
    } else {
        (t + r) * FRAC_1_SQRT_2
    }
}

/// The flat cone K = {(x_j, ξ_j) : Σξ_j ∈ V⁻} of the n-point spectrum
/// condition, with its Euclidean ε-collars. K ignores the base points, so
/// K and Q = pr₂K share one distance function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumCone {
    pub n: usize,
    pub spatial_dim: usize,
}

pub fn spectrum_cone(n: usize, spatial_dim: usize) -> Result<SpectrumCone> {
    if !(1..=4).contains(&n) {
        return Err(invalid("n", "spectrum cones for 1 ≤ n ≤ 4"));
    }
    Ok(SpectrumCone { n, spatial_dim })
}

impl SpectrumCone {
    fn check(&self, xis: &[Vec<f64>]) -> Result<()> {
        if xis.len() != self.n || xis.iter().any(|v| v.len() != 1 + self.spatial_dim) {
            return Err(invalid(
                "xis",
                format!(
                    "need {} covectors of length {}",
                    self.n,
                    1 + self.spatial_dim
                ),
            ));
        }
        Ok(())
    }

    fn total(&self, xis: &[Vec<f64>]) -> Vec<f64> {
        (0..=self.spatial_dim)
            .map(|k| xis.iter().map(|v| v[k]).sum())
            .collect()
    }

    /// Σξ_j ∈ V⁻ (the apex included: Q is closed).
    pub fn in_q(&self, xis: &[Vec<f64>]) -> Result<bool> {
        self.check(xis)?;
        Ok(dist_to_past_cone(&self.total(xis)) == 0.0)
    }

    /// Distance from (ξ₁, …, ξₙ) ∈ R^{n(1+s)} to Q. The cheapest way to move
    /// the sum by w spreads w evenly, so dist = dist(Σξ, V⁻)/√n.
    pub fn distance_q(&self, xis: &[Vec<f64>]) -> Result<f64> {
        self.check(xis)?;
        Ok(dist_to_past_cone(&self.total(xis)) / (self.n as f64).sqrt())
    }

    pub fn in_q_collar(&self, xis: &[Vec<f64>], eps: f64) -> Result<bool> {
        Ok(self.distance_q(xis)? <= eps)
    }

    /// K membership; base points are carried but do not constrain.
    pub fn in_k(&self, points: &[(Vec<f64>, Vec<f64>)]) -> Result<bool> {
        let xis: Vec<Vec<f64>> = points.iter().map(|p| p.1.clone()).collect();
        self.in_q(&xis)
    }

    pub fn in_k_collar(&self, points: &[(Vec<f64>, Vec<f64>)], eps: f64) -> Result<bool> {
        let xis: Vec<Vec<f64>> = points.iter().map(|p| p.1.clone()).collect();
        self.in_q_collar(&xis, eps)
    }
}

/// True iff the rightmost nonzero covector is future causal. All-zero
/// tuples are not in any wavefront set and give false.
pub fn rightmost_future_causal(points: &[(Vec<f64>, Vec<f64>)], model: &ConeModel) -> bool {
    points
        .iter()
        .rev()
        .find(|(_, xi)| xi.iter().any(|&v| v != 0.0))
        .is_some_and(|(x, xi)| model.is_future_causal(x, xi))
}

/// Unique-continuation predicates on cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UcpVerdict {
    /// W misses the conormal of S.
    pub holmgren_ok: bool,
    /// W ∩ −W = ∅.
    pub edge_ok: bool,
}

pub fn ucp_predicates(w: &ConicSet, conormal: &ConicSet) -> Result<UcpVerdict> {
    if w.dim != conormal.dim {
        return Err(invalid("conormal", "dimension differs from W"));
    }
    Ok(UcpVerdict {
        holmgren_ok: !w.intersects(conormal),
        edge_ok: !w.intersects(&w.neg()),
    })
}
