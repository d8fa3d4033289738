use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::cone::{angle_of, hull_of_angles, Cone};
use crate::analytic_wf::WfaReport;
use crate::error::{invalid, Error, Result};
use crate::microsupport::{AnalyticMap, MicrosupportMap};
use crate::phase_core::AxisBox;

/// A base box times a cone of directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub base: AxisBox,
    pub cone: Cone,
}

impl Cell {
    pub fn new(base: AxisBox, cone: Cone) -> Result<Self> {
        if base.dim() != cone.dim() {
            return Err(invalid("cell", "base and cone dimensions differ"));
        }
        if base.lo.iter().chain(&base.hi).any(|v| !v.is_finite()) {
            return Err(invalid("cell", "base boxes must be bounded"));
        }
        Ok(Self { base, cone })
    }
}

/// Finite union of cells in T*R^d ∖ 0, d = 1 or 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConicSet {
    pub dim: usize,
    pub cells: Vec<Cell>,
}

fn boxes_meet(a: &AxisBox, b: &AxisBox) -> bool {
    a.intersect(b).is_some()
}

impl ConicSet {
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            cells: Vec::new(),
        }
    }

    pub fn from_cells(dim: usize, cells: Vec<Cell>) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(invalid("dim", "conic sets live over R or R²"));
        }
        if cells.iter().any(|c| c.base.dim() != dim) {
            return Err(invalid("cells", "cell dimension differs from the set's"));
        }
        let mut s = Self { dim, cells };
        s.canonicalize();
        Ok(s)
    }

    pub fn single(base: AxisBox, cone: Cone) -> Result<Self> {
        let d = base.dim();
        Self::from_cells(d, vec![Cell::new(base, cone)?])
    }

    /// (x, ξ) with ξ ≠ 0.
    pub fn contains(&self, x: &[f64], xi: &[f64]) -> bool {
        self.cells
            .iter()
            .any(|c| c.base.contains(x) && c.cone.contains(xi))
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// The reflection (x, ξ) ↦ (x, −ξ).
    pub fn neg(&self) -> Self {
        Self {
            dim: self.dim,
            cells: self
                .cells
                .iter()
                .map(|c| Cell {
                    base: c.base.clone(),
                    cone: c.cone.neg(),
                })
                .collect(),
        }
    }

    pub fn union(&self, other: &ConicSet) -> Result<Self> {
        if self.dim != other.dim {
            return Err(invalid("union", "dimensions differ"));
        }
        Self::from_cells(
            self.dim,
            self.cells.iter().chain(&other.cells).cloned().collect(),
        )
    }

    /// Cellwise intersection; bases that only touch still meet.
    pub fn intersection(&self, other: &ConicSet) -> Result<Self> {
        if self.dim != other.dim {
            return Err(invalid("intersection", "dimensions differ"));
        }
        let mut cells = Vec::new();
        for a in &self.cells {
            for b in &other.cells {
                if let Some(base) = a.base.intersect(&b.base) {
                    let cone = a.cone.intersect(&b.cone);
                    if !cone.is_empty() {
                        cells.push(Cell { base, cone });
                    }
                }
            }
        }
        Self::from_cells(self.dim, cells)
    }

    pub fn intersects(&self, other: &ConicSet) -> bool {
        self.cells.iter().any(|a| {
            other
                .cells
                .iter()
                .any(|b| boxes_meet(&a.base, &b.base) && a.cone.intersects(&b.cone))
        })
    }

    /// Drops empty cells, unions cones over identical bases and joins
    /// equal-cone boxes whose union is again a box.
    pub fn canonicalize(&mut self) {
        self.cells.retain(|c| !c.cone.is_empty());
        loop {
            let mut merged = false;
            'outer: for i in 0..self.cells.len() {
                for j in i + 1..self.cells.len() {
                    let (a, b) = (&self.cells[i], &self.cells[j]);
                    let joined = if a.base == b.base {
                        Some(Cell {
                            base: a.base.clone(),
                            cone: a.cone.union(&b.cone),
                        })
                    } else if a.cone == b.cone {
                        box_union(&a.base, &b.base).map(|base| Cell {
                            base,
                            cone: a.cone.clone(),
                        })
                    } else {
                        None
                    };
                    if let Some(c) = joined {
                        self.cells[i] = c;
                        self.cells.swap_remove(j);
                        merged = true;
                        break 'outer;
                    }
                }
            }
            if !merged {
                break;
            }
        }
    }

    /// Conservative import of a WF_a report: every flagged (or inconclusive)
    /// direction becomes a cell around its base point. `half` is the base
    /// half-width; in the plane each direction claims its angular bin.
    pub fn from_report(r: &WfaReport, half: f64) -> Result<Self> {
        let d = r.base_points.first().map_or(1, |p| p.len());
        let bin = if d == 2 {
            std::f64::consts::PI / r.directions.len() as f64
        } else {
            0.0
        };
        let mut cells = Vec::new();
        for (i, p) in r.base_points.iter().enumerate() {
            let base = AxisBox::new(
                p.iter().map(|v| v - half).collect(),
                p.iter().map(|v| v + half).collect(),
            )?;
            let mut cone = Cone::empty(d);
            for j in r.flagged_directions(i) {
                let c = if d == 1 {
                    if r.directions[j][0] > 0.0 {
                        Cone::plus()
                    } else {
                        Cone::minus()
                    }
                } else {
                    Cone::around(r.angles[j], bin)
                };
                cone = cone.union(&c);
            }
            cells.push(Cell::new(base, cone)?);
        }
        Self::from_cells(d, cells)
    }

    /// Conservative import of the ξ ≠ 0 part of a one-dimensional scan:
    /// flagged nodes with |ξ| above `xi_floor` mark their sign over the
    /// node's x cell.
    pub fn from_scan(m: &MicrosupportMap, xi_floor: f64) -> Result<Self> {
        let half = m.window.x_step / 2.0;
        let mut cells = Vec::new();
        for (i, &x) in m.xs.iter().enumerate() {
            let mut cone = Cone::empty(1);
            for (j, &xi) in m.xis.iter().enumerate() {
                if xi.abs() > xi_floor && m.fits[i][j].verdict.flagged() {
                    cone = cone.union(&if xi > 0.0 {
                        Cone::plus()
                    } else {
                        Cone::minus()
                    });
                }
            }
            cells.push(Cell::new(AxisBox::interval(x - half, x + half), cone)?);
        }
        Self::from_cells(1, cells)
    }
}

fn box_union(a: &AxisBox, b: &AxisBox) -> Option<AxisBox> {
    let d = a.dim();
    let differing: Vec<usize> = (0..d)
        .filter(|&k| a.lo[k] != b.lo[k] || a.hi[k] != b.hi[k])
        .collect();
    match differing.as_slice() {
        [] => Some(a.clone()),
        [k] => {
            let k = *k;
            if a.lo[k] <= b.hi[k] && b.lo[k] <= a.hi[k] {
                let mut out = a.clone();
                out.lo[k] = a.lo[k].min(b.lo[k]);
                out.hi[k] = a.hi[k].max(b.hi[k]);
                Some(out)
            } else {
                None
            }
        }
        _ => None,
    }
}

type VecMap = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A smooth map R^d → R^d with closed-form Jacobian (row-major).
#[derive(Clone)]
pub struct SmoothMap {
    pub name: String,
    pub dim: usize,
    f: VecMap,
    jac: VecMap,
}

impl fmt::Debug for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothMap")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish()
    }
}

impl SmoothMap {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        jac: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(invalid("dim", "maps of R or R² only"));
        }
        Ok(Self {
            name: name.into(),
            dim,
            f: Arc::new(f),
            jac: Arc::new(jac),
        })
    }

    pub fn from_1d(m: &AnalyticMap) -> Self {
        let (a, b) = (m.clone(), m.clone());
        Self::new(
            m.name.clone(),
            1,
            move |x| vec![a.apply(x[0])],
            move |x| vec![b.jacobian(x[0])],
        )
        .expect("d = 1")
    }

    /// x ↦ Ax with A row-major 2×2.
    pub fn linear2(a: [f64; 4]) -> Self {
        Self::new(
            format!("linear {a:?}"),
            2,
            move |x| vec![a[0] * x[0] + a[1] * x[1], a[2] * x[0] + a[3] * x[1]],
            move |_| a.to_vec(),
        )
        .expect("d = 2")
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (self.f)(x)
    }

    pub fn jacobian(&self, x: &[f64]) -> Vec<f64> {
        (self.jac)(x)
    }
}

/// The four rules for combining conic sets. Every output is an upper bound.
pub enum Combine<'a> {
    /// WF(u + v) ⊆ WF(u) ∪ WF(v).
    Sum(&'a ConicSet, &'a ConicSet),
    /// WF(u ⊗ v) for one-dimensional u, v with the given supports.
    Tensor {
        u: &'a ConicSet,
        supp_u: &'a AxisBox,
        v: &'a ConicSet,
        supp_v: &'a AxisBox,
    },
    /// F*W over the domain box, split into `cells` cells per axis.
    Pullback {
        set: &'a ConicSet,
        map: &'a SmoothMap,
        domain: &'a AxisBox,
        cells: usize,
    },
    /// WF(uv) ⊆ WF(u) ∪ WF(v) ∪ (WF(u) + WF(v)).
    Product(&'a ConicSet, &'a ConicSet),
}

pub fn cs_combine(rule: Combine<'_>) -> Result<ConicSet> {
    match rule {
        Combine::Sum(a, b) => a.union(b),
        Combine::Product(a, b) => product(a, b),
        Combine::Tensor {
            u,
            supp_u,
            v,
            supp_v,
        } => tensor(u, supp_u, v, supp_v),
        Combine::Pullback {
            set,
            map,
            domain,
            cells,
        } => pullback(set, map, domain, cells),
    }
}

fn product(a: &ConicSet, b: &ConicSet) -> Result<ConicSet> {
    if a.dim != b.dim {
        return Err(invalid("product", "dimensions differ"));
    }
    let mut cells: Vec<Cell> = a.cells.iter().chain(&b.cells).cloned().collect();
    for (i, p) in a.cells.iter().enumerate() {
        for (j, q) in b.cells.iter().enumerate() {
            let Some(base) = p.base.intersect(&q.base) else {
                continue;
            };
            match p.cone.minkowski(&q.cone) {
                Some(cone) => cells.push(Cell { base, cone }),
                None => return Err(Error::ZeroSectionCollision { left: i, right: j }),
            }
        }
    }
    ConicSet::from_cells(a.dim, cells)
}

fn quadrant(plus_x: bool, plus_y: bool) -> Cone {
    use std::f64::consts::FRAC_PI_2;
    let start = match (plus_x, plus_y) {
        (true, true) => 0.0,
        (false, true) => FRAC_PI_2,
        (false, false) => 2.0 * FRAC_PI_2,
        (true, false) => 3.0 * FRAC_PI_2,
    };
    Cone::arcs(&[(start, start + FRAC_PI_2)]).expect("finite")
}

fn signs(c: &Cone) -> Vec<bool> {
    match c {
        Cone::Line { plus, minus } => {
            let mut v = Vec::new();
            if *plus {
                v.push(true);
            }
            if *minus {
                v.push(false);
            }
            v
        }
        Cone::Circle { .. } => Vec::new(),
    }
}

fn tensor(u: &ConicSet, su: &AxisBox, v: &ConicSet, sv: &AxisBox) -> Result<ConicSet> {
    if u.dim != 1 || v.dim != 1 || su.dim() != 1 || sv.dim() != 1 {
        return Err(invalid(
            "tensor",
            "tensor products of one-dimensional sets only",
        ));
    }
    let rect = |a: &AxisBox, b: &AxisBox| AxisBox::rect((a.lo[0], a.hi[0]), (b.lo[0], b.hi[0]));
    let mut cells = Vec::new();
    for p in &u.cells {
        for q in &v.cells {
            let mut cone = Cone::empty(2);
            for &s in &signs(&p.cone) {
                for &t in &signs(&q.cone) {
                    cone = cone.union(&quadrant(s, t));
                }
            }
            cells.push(Cell::new(rect(&p.base, &q.base), cone)?);
        }
        // (ξ, 0) over supp v.
        let mut cone = Cone::empty(2);
        for &s in &signs(&p.cone) {
            cone = cone.union(&Cone::ray(if s { 0.0 } else { std::f64::consts::PI }));
        }
        cells.push(Cell::new(rect(&p.base, sv), cone)?);
    }
    for q in &v.cells {
        let mut cone = Cone::empty(2);
        for &t in &signs(&q.cone) {
            cone = cone.union(&Cone::ray(if t {
                std::f64::consts::FRAC_PI_2
            } else {
                1.5 * std::f64::consts::PI
            }));
        }
        cells.push(Cell::new(rect(su, &q.base), cone)?);
    }
    ConicSet::from_cells(2, cells)
}

fn sample_points(b: &AxisBox) -> Vec<Vec<f64>> {
    let ticks = |k: usize| [b.lo[k], 0.5 * (b.lo[k] + b.hi[k]), b.hi[k]];
    match b.dim() {
        1 => ticks(0).iter().map(|&x| vec![x]).collect(),
        _ => ticks(0)
            .iter()
            .flat_map(|&x| ticks(1).map(move |y| vec![x, y]))
            .collect(),
    }
}

fn split_box(b: &AxisBox, n: usize) -> Vec<AxisBox> {
    let edges = |k: usize| -> Vec<f64> {
        (0..=n)
            .map(|i| b.lo[k] + (b.hi[k] - b.lo[k]) * i as f64 / n as f64)
            .collect()
    };
    match b.dim() {
        1 => edges(0)
            .windows(2)
            .map(|w| AxisBox::interval(w[0], w[1]))
            .collect(),
        _ => {
            let (ex, ey) = (edges(0), edges(1));
            ex.windows(2)
                .flat_map(|a| {
                    ey.windows(2)
                        .map(move |c| AxisBox::rect((a[0], a[1]), (c[0], c[1])))
                })
                .collect()
        }
    }
}

/// Bounding box of the sampled image, padded by half the largest jump
/// between neighbouring sample images.
fn image_box(map: &SmoothMap, cell: &AxisBox) -> AxisBox {
    let pts = sample_points(cell);
    let imgs: Vec<Vec<f64>> = pts.iter().map(|p| map.apply(p)).collect();
    let d = cell.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for y in &imgs {
        for k in 0..d {
            lo[k] = lo[k].min(y[k]);
            hi[k] = hi[k].max(y[k]);
        }
    }
    let mut pad: f64 = 0.0;
    for (i, a) in imgs.iter().enumerate() {
        for b in &imgs[i + 1..] {
            let dist = a
                .iter()
                .zip(b)
                .map(|(u, v)| (u - v).powi(2))
                .sum::<f64>()
                .sqrt();
            pad = pad.max(dist);
        }
    }
    let pad = 0.1 * pad;
    AxisBox {
        lo: lo.iter().map(|v| v - pad).collect(),
        hi: hi.iter().map(|v| v + pad).collect(),
    }
}

fn pullback(set: &ConicSet, map: &SmoothMap, domain: &AxisBox, n: usize) -> Result<ConicSet> {
    let d = map.dim;
    if set.dim != d || domain.dim() != d {
        return Err(invalid("pullback", "map, set and domain dimensions differ"));
    }
    if n == 0 {
        return Err(invalid("cells", "need at least one cell per axis"));
    }
    let mut cells = Vec::new();
    for (ci, cell) in split_box(domain, n).into_iter().enumerate() {
        let img = image_box(map, &cell);
        let mut cone = Cone::empty(d);
        let pts = sample_points(&cell);
        let jacs: Vec<Vec<f64>> = pts.iter().map(|p| map.jacobian(p)).collect();
        let dets: Vec<f64> = jacs
            .iter()
            .map(|j| {
                if d == 1 {
                    j[0]
                } else {
                    j[0] * j[3] - j[1] * j[2]
                }
            })
            .collect();
        let scale = jacs
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(1e-300);
        let degenerate = dets.iter().any(|v| v.abs() <= 1e-12 * scale.powi(d as i32))
            || dets.iter().any(|v| v.signum() != dets[0].signum());
        for w in &set.cells {
            if !boxes_meet(&w.base, &img) || w.cone.is_empty() {
                continue;
            }
            if degenerate {
                return Err(Error::ConormalCollision { cell: ci });
            }
            let mapped = if d == 1 {
                // Sign of f′ is constant on the cell.
                if dets[0] > 0.0 {
                    w.cone.clone()
                } else {
                    w.cone.neg()
                }
            } else {
                let mut out = Cone::empty(2);
                for (start, len) in w.cone.pieces() {
                    let mut angles = Vec::new();
                    for j in &jacs {
                        for t in [start, start + len] {
                            let (c, s) = (t.cos(), t.sin());
                            // J^T η
                            angles.push(angle_of(&[j[0] * c + j[2] * s, j[1] * c + j[3] * s]));
                        }
                    }
                    let (a, l) = hull_of_angles(&angles).expect("nonempty");
                    out = out.union(&Cone::arcs(&[(a, a + l)])?);
                }
                out
            };
            cone = cone.union(&mapped);
        }
        cells.push(Cell::new(cell, cone)?);
    }
    ConicSet::from_cells(d, cells)
}
