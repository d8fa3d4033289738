use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Angular snap tolerance for closed-interval comparisons.
pub const SNAP: f64 = 1e-12;

/// Longest piece used when splitting arcs into convex parts.
const PIECE: f64 = PI / 3.0;

/// A closed cone of nonzero covectors.
///
/// In the plane a direction is the angle atan2(ξ₁, ξ₀), so angle 0 is the
/// first coordinate axis. Arcs are kept split at 0, sorted and disjoint,
/// with 0 ≤ lo ≤ hi ≤ 2π.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Cone {
    Line { plus: bool, minus: bool },
    Circle { arcs: Vec<(f64, f64)> },
}

pub fn angle_of(v: &[f64]) -> f64 {
    let a = v[1].atan2(v[0]);
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if TAU - r < SNAP {
        0.0
    } else {
        r
    }
}

/// Shortest arc (start, length) containing all the given angles.
pub(crate) fn hull_of_angles(angles: &[f64]) -> Option<(f64, f64)> {
    if angles.is_empty() {
        return None;
    }
    let mut a: Vec<f64> = angles.iter().map(|&t| wrap(t)).collect();
    a.sort_by(f64::total_cmp);
    let mut best = (TAU - a[a.len() - 1] + a[0], 0usize);
    for i in 1..a.len() {
        let gap = a[i] - a[i - 1];
        if gap > best.0 {
            best = (gap, i);
        }
    }
    let start = a[best.1];
    Some((start, TAU - best.0))
}

impl Cone {
    pub fn empty(dim: usize) -> Self {
        match dim {
            1 => Cone::Line {
                plus: false,
                minus: false,
            },
            _ => Cone::Circle { arcs: Vec::new() },
        }
    }

    pub fn full(dim: usize) -> Self {
        match dim {
            1 => Cone::Line {
                plus: true,
                minus: true,
            },
            _ => Cone::Circle {
                arcs: vec![(0.0, TAU)],
            },
        }
    }

    pub fn plus() -> Self {
        Cone::Line {
            plus: true,
            minus: false,
        }
    }

    pub fn minus() -> Self {
        Cone::Line {
            plus: false,
            minus: true,
        }
    }

    /// Union of arcs given as (start, end) with end ≥ start, in radians.
    pub fn arcs(list: &[(f64, f64)]) -> Result<Self> {
        let mut out = Vec::new();
        for &(a, b) in list {
            if !a.is_finite() || !b.is_finite() || b < a - SNAP {
                return Err(invalid("arc", format!("bad arc ({a}, {b})")));
            }
            push_arc(&mut out, a, (b - a).max(0.0));
        }
        Ok(Cone::Circle {
            arcs: normalize(out),
        })
    }

    pub fn ray(angle: f64) -> Self {
        Cone::Circle {
            arcs: normalize(vec![(wrap(angle), wrap(angle))]),
        }
    }

    /// Arc of half-width `half` around `angle`.
    pub fn around(angle: f64, half: f64) -> Self {
        Cone::arcs(&[(angle - half, angle + half)]).expect("finite arc")
    }

    pub fn dim(&self) -> usize {
        match self {
            Cone::Line { .. } => 1,
            Cone::Circle { .. } => 2,
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Cone::Line { plus, minus } => !plus && !minus,
            Cone::Circle { arcs } => arcs.is_empty(),
        }
    }

    pub fn contains_angle(&self, angle: f64) -> bool {
        match self {
            Cone::Line { plus, minus } => {
                let c = angle.cos();
                (*plus && c > 0.5) || (*minus && c < -0.5)
            }
            Cone::Circle { arcs } => {
                let t = wrap(angle);
                arcs.iter().any(|&(a, b)| {
                    (t >= a - SNAP && t <= b + SNAP)
                        || (b >= TAU - SNAP && t <= SNAP)
                        || (a <= SNAP && t >= TAU - SNAP)
                })
            }
        }
    }

    /// Whether the direction of the nonzero covector `v` lies in the cone.
    pub fn contains(&self, v: &[f64]) -> bool {
        match self {
            Cone::Line { plus, minus } => (*plus && v[0] > 0.0) || (*minus && v[0] < 0.0),
            Cone::Circle { .. } => {
                if v[0] == 0.0 && v[1] == 0.0 {
                    return false;
                }
                self.contains_angle(angle_of(v))
            }
        }
    }

    pub fn neg(&self) -> Self {
        match *self {
            Cone::Line { plus, minus } => Cone::Line {
                plus: minus,
                minus: plus,
            },
            Cone::Circle { ref arcs } => {
                let mut out = Vec::new();
                for &(a, b) in arcs {
                    push_arc(&mut out, a + PI, b - a);
                }
                Cone::Circle {
                    arcs: normalize(out),
                }
            }
        }
    }

    pub fn union(&self, other: &Cone) -> Self {
        match (self, other) {
            (Cone::Line { plus: a, minus: b }, Cone::Line { plus: c, minus: d }) => Cone::Line {
                plus: *a || *c,
                minus: *b || *d,
            },
            (Cone::Circle { arcs: a }, Cone::Circle { arcs: b }) => Cone::Circle {
                arcs: normalize(a.iter().chain(b).copied().collect()),
            },
            _ => panic!("cone dimensions differ"),
        }
    }

    pub fn intersect(&self, other: &Cone) -> Self {
        match (self, other) {
            (Cone::Line { plus: a, minus: b }, Cone::Line { plus: c, minus: d }) => Cone::Line {
                plus: *a && *c,
                minus: *b && *d,
            },
            (Cone::Circle { arcs: a }, Cone::Circle { arcs: b }) => {
                let mut out = Vec::new();
                for &(p, q) in a {
                    for &(r, s) in b {
                        let lo = p.max(r);
                        let hi = q.min(s);
                        if lo <= hi + SNAP {
                            out.push((lo, hi.max(lo)));
                        }
                    }
                }
                // Touching across the 0 = 2π seam.
                let at_zero = |arcs: &[(f64, f64)]| {
                    arcs.iter().any(|&(lo, hi)| lo <= SNAP || hi >= TAU - SNAP)
                };
                if out.is_empty()
                    && at_zero(a)
                    && at_zero(b)
                    && self.contains_angle(0.0)
                    && other.contains_angle(0.0)
                {
                    out.push((0.0, 0.0));
                }
                Cone::Circle {
                    arcs: normalize(out),
                }
            }
            _ => panic!("cone dimensions differ"),
        }
    }

    /// Equality up to `tol` on every arc endpoint.
    pub fn approx_eq(&self, other: &Cone, tol: f64) -> bool {
        match (self, other) {
            (Cone::Circle { arcs: a }, Cone::Circle { arcs: b }) => {
                a.len() == b.len()
                    && a.iter()
                        .zip(b)
                        .all(|(p, q)| (p.0 - q.0).abs() <= tol && (p.1 - q.1).abs() <= tol)
            }
            _ => self == other,
        }
    }

    pub fn intersects(&self, other: &Cone) -> bool {
        !self.intersect(other).is_empty()
    }

    /// Total angular measure (d = 2) or number of signs (d = 1).
    pub fn measure(&self) -> f64 {
        match self {
            Cone::Line { plus, minus } => (*plus as u8 + *minus as u8) as f64,
            Cone::Circle { arcs } => arcs.iter().map(|(a, b)| b - a).sum(),
        }
    }

    /// Convex pieces (start, length), each shorter than π/3; arcs that the
    /// seam split are rejoined first.
    pub(crate) fn pieces(&self) -> Vec<(f64, f64)> {
        let Cone::Circle { arcs } = self else {
            return Vec::new();
        };
        let mut joined: Vec<(f64, f64)> = arcs.iter().map(|&(a, b)| (a, b - a)).collect();
        if joined.len() >= 2 {
            let first = joined[0];
            let last = joined[joined.len() - 1];
            if first.0 <= SNAP && last.0 + last.1 >= TAU - SNAP && joined.len() > 1 {
                joined.pop();
                joined[0] = (last.0, last.1 + first.1);
            }
        }
        let mut out = Vec::new();
        for (a, len) in joined {
            let n = ((len / PIECE).ceil() as usize).max(1);
            for k in 0..n {
                out.push((a + len * k as f64 / n as f64, len / n as f64));
            }
        }
        out
    }

    /// Directions of ξ + η with ξ in self and η in other, both nonzero.
    /// `None` if ξ + η = 0 is possible.
    pub fn minkowski(&self, other: &Cone) -> Option<Cone> {
        match (self, other) {
            (Cone::Line { plus: a, minus: b }, Cone::Line { plus: c, minus: d }) => {
                if (*a && *d) || (*b && *c) {
                    None
                } else {
                    Some(Cone::Line {
                        plus: *a && *c,
                        minus: *b && *d,
                    })
                }
            }
            (Cone::Circle { .. }, Cone::Circle { .. }) => {
                if self.intersects(&other.neg()) {
                    return None;
                }
                let mut out = Vec::new();
                for &(p0, pl) in &self.pieces() {
                    for &(q0, ql) in &other.pieces() {
                        // Convex pieces without antipodal pairs: the sum is the
                        // shortest arc containing both.
                        let covers = |s: f64, len: f64| {
                            [(p0, pl), (q0, ql)].iter().all(|&(a, l)| {
                                let off = wrap(a - s);
                                off + l <= len + 1e-9 || (TAU - off) < 1e-9 && l <= len + 1e-9
                            })
                        };
                        let best = [p0, q0]
                            .iter()
                            .flat_map(|&s| [p0 + pl, q0 + ql].map(move |e| (s, wrap(e - s))))
                            .filter(|&(s, len)| covers(s, len))
                            .min_by(|x, y| x.1.total_cmp(&y.1))
                            .expect("non-antipodal pieces have a hull");
                        push_arc(&mut out, best.0, best.1);
                    }
                }
                Some(Cone::Circle {
                    arcs: normalize(out),
                })
            }
            _ => panic!("cone dimensions differ"),
        }
    }
}

fn push_arc(out: &mut Vec<(f64, f64)>, start: f64, len: f64) {
    if len >= TAU - SNAP {
        out.push((0.0, TAU));
        return;
    }
    let a = wrap(start);
    let b = a + len;
    if b > TAU + SNAP {
        out.push((a, TAU));
        out.push((0.0, b - TAU));
    } else {
        out.push((a, b.min(TAU)));
    }
}

fn normalize(mut arcs: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    arcs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (a, b) in arcs {
        match out.last_mut() {
            Some(last) if a <= last.1 + SNAP => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}
