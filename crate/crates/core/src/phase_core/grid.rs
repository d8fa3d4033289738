use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Closed axis-aligned box in R^d, d = 1 or 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() || lo.len() > 2 {
            return Err(invalid(
                "box",
                "dimension must be 1 or 2 with matching corners",
            ));
        }
        if lo.iter().chain(&hi).any(|v| v.is_nan()) {
            return Err(invalid("box", "NaN corner"));
        }
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(invalid("box", "lo exceeds hi"));
        }
        Ok(Self { lo, hi })
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        Self::new(vec![lo], vec![hi]).expect("interval with lo <= hi")
    }

    pub fn rect(t: (f64, f64), x: (f64, f64)) -> Self {
        Self::new(vec![t.0, x.0], vec![t.1, x.1]).expect("rectangle with lo <= hi")
    }

    /// The whole line (or plane); quadrature clips it to the Gaussian window.
    pub fn everywhere(dim: usize) -> Self {
        Self {
            lo: vec![f64::NEG_INFINITY; dim],
            hi: vec![f64::INFINITY; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    pub fn contains_box(&self, other: &AxisBox) -> bool {
        self.dim() == other.dim()
            && (0..self.dim()).all(|i| self.lo[i] <= other.lo[i] && other.hi[i] <= self.hi[i])
    }

    pub fn intersect(&self, other: &AxisBox) -> Option<AxisBox> {
        let lo: Vec<f64> = self
            .lo
            .iter()
            .zip(&other.lo)
            .map(|(a, b)| a.max(*b))
            .collect();
        let hi: Vec<f64> = self
            .hi
            .iter()
            .zip(&other.hi)
            .map(|(a, b)| a.min(*b))
            .collect();
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            None
        } else {
            Some(AxisBox { lo, hi })
        }
    }

    /// Box grown by `r` on every side.
    pub fn inflate(&self, r: f64) -> AxisBox {
        AxisBox {
            lo: self.lo.iter().map(|v| v - r).collect(),
            hi: self.hi.iter().map(|v| v + r).collect(),
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.iter().chain(&self.hi).all(|v| v.is_finite())
    }

    /// Euclidean distance from `x` to the box (zero inside).
    pub fn distance(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(v, (a, b))| {
                let d = if v < a {
                    a - v
                } else if v > b {
                    v - b
                } else {
                    0.0
                };
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Uniform nodes from `lo` to `hi` inclusive with spacing at most `step`.
pub fn grid_nodes(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    if hi <= lo {
        return vec![lo];
    }
    let n = ((hi - lo) / step - 1e-9).ceil().max(1.0) as usize;
    (0..=n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .collect()
}
