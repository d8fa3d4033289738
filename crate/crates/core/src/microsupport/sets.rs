use serde::{Deserialize, Serialize};

/// Building block of a compact phase-space set (d = 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Primitive {
    Ball { x: f64, xi: f64, radius: f64 },
    Rect { x: (f64, f64), xi: (f64, f64) },
}

impl Primitive {
    pub fn distance(&self, x: f64, xi: f64) -> f64 {
        match *self {
            Primitive::Ball {
                x: cx,
                xi: cxi,
                radius,
            } => (((x - cx).powi(2) + (xi - cxi).powi(2)).sqrt() - radius).max(0.0),
            Primitive::Rect {
                x: (a, b),
                xi: (c, d),
            } => {
                let dx = if x < a {
                    a - x
                } else if x > b {
                    x - b
                } else {
                    0.0
                };
                let dxi = if xi < c {
                    c - xi
                } else if xi > d {
                    xi - d
                } else {
                    0.0
                };
                (dx * dx + dxi * dxi).sqrt()
            }
        }
    }
}

/// Finite union of balls and rectangles in R × R.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CompactSet {
    pub parts: Vec<Primitive>,
}

impl CompactSet {
    pub fn point(x: f64, xi: f64) -> Self {
        Self {
            parts: vec![Primitive::Ball { x, xi, radius: 0.0 }],
        }
    }

    /// {(x, 0) : x_lo ≤ x ≤ x_hi}.
    pub fn zero_section(x_lo: f64, x_hi: f64) -> Self {
        Self {
            parts: vec![Primitive::Rect {
                x: (x_lo, x_hi),
                xi: (0.0, 0.0),
            }],
        }
    }

    pub fn union(mut self, other: CompactSet) -> Self {
        self.parts.extend(other.parts);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Exact distance per primitive, minimised over the union.
    pub fn distance(&self, x: f64, xi: f64) -> f64 {
        self.parts
            .iter()
            .map(|p| p.distance(x, xi))
            .fold(f64::INFINITY, f64::min)
    }
}
