//! Chronological futures and pasts by row sweeps. Time is a time function
//! (dt is timelike), so I^± of a set is swept one grid row at a time. Each
//! row slice is a union of x-intervals whose endpoints ride the null
//! directions, and the mask samples it at cell centres.

use serde::{Deserialize, Serialize};

use super::model::SpacetimeModel;
use super::region::{Grid, Region};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Direction {
    Future,
    Past,
}

/// Outer widens the null slopes by half a cell of metric variation and
/// keeps cells on the null boundary; Inner narrows and drops them. The
/// exact mask lies between the two.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Bracket {
    #[default]
    Outer,
    Inner,
}

#[derive(Debug, Clone, Copy)]
pub enum Seed<'a> {
    Point([f64; 2]),
    Region(&'a Region),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FrontOptions<'a> {
    pub bracket: Bracket,
    /// Curves must stay in this region.
    pub within: Option<&'a Region>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CausalSet {
    pub region: Region,
    pub boundary_clipped: bool,
    pub warnings: Vec<String>,
}

/// Null slopes may change by at most this much between neighbouring cells
/// before the grid is flagged as too coarse.
const TURNING_LIMIT: f64 = 0.25;

pub(crate) struct Sweeper<'a> {
    model: &'a SpacetimeModel,
    grid: &'a Grid,
    bracket: Bracket,
    within: Option<&'a Region>,
}

struct Outcome {
    mask: Vec<bool>,
    clipped: bool,
}

impl<'a> Sweeper<'a> {
    pub(crate) fn new(
        model: &'a SpacetimeModel,
        grid: &'a Grid,
        bracket: Bracket,
        within: Option<&'a Region>,
    ) -> Self {
        Self {
            model,
            grid,
            bracket,
            within,
        }
    }

    fn clamp(&self, t: f64, x: f64) -> (f64, f64) {
        let c = &self.model.chart;
        (t.clamp(c.lo[0], c.hi[0]), x.clamp(c.lo[1], c.hi[1]))
    }

    /// (lower, upper) null slopes, widened or narrowed by the bracket.
    fn slopes(&self, t: f64, x: f64) -> (f64, f64) {
        let (t, x) = self.clamp(t, x);
        let (a, b) = self.model.null_slopes(t, x);
        let (t1, x1) = self.clamp(t + self.grid.dt(), x + self.grid.dx());
        let (at, bt) = self.model.null_slopes(t1, x);
        let (ax, bx) = self.model.null_slopes(t, x1);
        let w = 0.5 * ((at - a).abs().max((bt - b).abs()) + (ax - a).abs().max((bx - b).abs()));
        match self.bracket {
            Bracket::Outer => (a - w, b + w),
            Bracket::Inner if b - a > 2.0 * w => (a + w, b - w),
            Bracket::Inner => {
                let m = 0.5 * (a + b);
                (m, m)
            }
        }
    }

    /// RK4 along one edge of the front; `upper` picks the right-hand edge.
    fn ride(&self, x: f64, t0: f64, t1: f64, upper: bool) -> f64 {
        let steps = ((t1 - t0).abs() / (0.5 * self.grid.dt())).ceil().max(1.0) as usize;
        let h = (t1 - t0) / steps as f64;
        // Going back in time the left edge follows the upper slope.
        let pick = |t: f64, x: f64| {
            let (a, b) = self.slopes(t, x);
            if upper == (h > 0.0) {
                b
            } else {
                a
            }
        };
        let mut x = x;
        for k in 0..steps {
            let t = t0 + k as f64 * h;
            let k1 = pick(t, x);
            let k2 = pick(t + 0.5 * h, x + 0.5 * h * k1);
            let k3 = pick(t + 0.5 * h, x + 0.5 * h * k2);
            let k4 = pick(t + h, x + h * k3);
            x += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        }
        x
    }

    fn tol(&self) -> f64 {
        1e-9 * self.grid.dx()
    }

    fn advance(&self, front: &mut Vec<(f64, f64)>, t0: f64, t1: f64, clipped: &mut bool) {
        for iv in front.iter_mut() {
            *iv = (
                self.ride(iv.0, t0, t1, false),
                self.ride(iv.1, t0, t1, true),
            );
        }
        let (xl, xh) = self.grid.x;
        for iv in front.iter_mut() {
            if iv.0 < xl || iv.1 > xh {
                *clipped = true;
            }
            *iv = (iv.0.max(xl), iv.1.min(xh));
        }
        front.retain(|iv| iv.0 <= iv.1);
        self.merge(front);
    }

    fn merge(&self, front: &mut Vec<(f64, f64)>) {
        front.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(front.len());
        for &iv in front.iter() {
            match out.last_mut() {
                Some(last)
                    if iv.0 < last.1 || (self.bracket == Bracket::Outer && iv.0 <= last.1) =>
                {
                    last.1 = last.1.max(iv.1)
                }
                _ => out.push(iv),
            }
        }
        *front = out;
    }

    /// Cut the front down to the cells of `within` in row i.
    fn restrict(&self, front: &mut Vec<(f64, f64)>, i: usize) {
        let Some(w) = self.within else { return };
        let (x0, dx) = (self.grid.x.0, self.grid.dx());
        let mut allowed = Vec::new();
        let mut j = 0;
        while j < self.grid.nx {
            if w.get(i, j) {
                let s = j;
                while j < self.grid.nx && w.get(i, j) {
                    j += 1;
                }
                allowed.push((x0 + s as f64 * dx, x0 + j as f64 * dx));
            } else {
                j += 1;
            }
        }
        let mut out = Vec::new();
        for &(a, b) in front.iter() {
            for &(c, d) in &allowed {
                let (lo, hi) = (a.max(c), b.min(d));
                if lo <= hi {
                    out.push((lo, hi));
                }
            }
        }
        *front = out;
    }

    fn sample(&self, front: &[(f64, f64)], i: usize, mask: &mut [bool]) {
        let (x0, dx, nx) = (self.grid.x.0, self.grid.dx(), self.grid.nx);
        let tol = self.tol();
        for &(lo, hi) in front {
            let first = (((lo - x0) / dx - 0.5).floor() as isize - 1).max(0) as usize;
            let last =
                (((hi - x0) / dx - 0.5).ceil() as isize + 1).clamp(0, nx as isize - 1) as usize;
            for j in first..=last.min(nx - 1) {
                let xc = self.grid.x_at(j);
                let inside = match self.bracket {
                    Bracket::Outer => xc >= lo - tol && xc <= hi + tol,
                    Bracket::Inner => xc > lo + tol && xc < hi - tol,
                };
                if inside && self.within.is_none_or(|w| w.get(i, j)) {
                    mask[i * nx + j] = true;
                }
            }
        }
    }

    fn rows(&self, dir: Direction) -> Vec<usize> {
        match dir {
            Direction::Future => (0..self.grid.nt).collect(),
            Direction::Past => (0..self.grid.nt).rev().collect(),
        }
    }

    fn later(dir: Direction, t: f64, than: f64) -> bool {
        match dir {
            Direction::Future => t > than,
            Direction::Past => t < than,
        }
    }

    pub(crate) fn sweep_point(&self, p: [f64; 2], dir: Direction) -> (Vec<bool>, bool) {
        let mut mask = vec![false; self.grid.len()];
        let mut front = vec![(p[1], p[1])];
        let mut t_cur = p[0];
        let mut clipped = false;
        for i in self.rows(dir) {
            let t = self.grid.t_at(i);
            if !Self::later(dir, t, p[0]) {
                continue;
            }
            self.advance(&mut front, t_cur, t, &mut clipped);
            t_cur = t;
            self.restrict(&mut front, i);
            self.sample(&front, i, &mut mask);
        }
        if !front.is_empty() {
            clipped = true;
        }
        (mask, clipped)
    }

    fn sweep_region(&self, seed: &Region, dir: Direction) -> Outcome {
        let nx = self.grid.nx;
        let mut mask = vec![false; self.grid.len()];
        let mut front: Vec<(f64, f64)> = Vec::new();
        let mut t_cur: Option<f64> = None;
        let mut clipped = false;
        for i in self.rows(dir) {
            let t = self.grid.t_at(i);
            if let Some(t0) = t_cur {
                if !front.is_empty() {
                    self.advance(&mut front, t0, t, &mut clipped);
                }
                self.restrict(&mut front, i);
                self.sample(&front, i, &mut mask);
            }
            let mut seeded = false;
            for j in 0..nx {
                if seed.get(i, j) && self.within.is_none_or(|w| w.get(i, j)) {
                    mask[i * nx + j] = true;
                    let x = self.grid.x_at(j);
                    front.push((x, x));
                    seeded = true;
                }
            }
            if seeded {
                self.merge(&mut front);
            }
            if t_cur.is_some() || seeded {
                t_cur = Some(t);
            }
        }
        if !front.is_empty() {
            clipped = true;
        }
        Outcome { mask, clipped }
    }

    pub(crate) fn sweep_region_mask(&self, seed: &Region, dir: Direction) -> Vec<bool> {
        self.sweep_region(seed, dir).mask
    }
}

fn check_grid(model: &SpacetimeModel, grid: &Grid) -> Result<()> {
    if !model.chart.contains_box(&grid.bounds()) {
        return Err(Error::OutsideDomain("grid box leaves the chart".into()));
    }
    Ok(())
}

/// Warn when null slopes turn faster than the grid resolves.
pub fn resolution_warning(model: &SpacetimeModel, grid: &Grid) -> Option<String> {
    let mut worst = 0.0f64;
    for i in 0..grid.nt {
        for j in 0..grid.nx {
            let (a, b) = model.null_slopes(grid.t_at(i), grid.x_at(j));
            let mut cmp = |t: f64, x: f64| {
                let (c, d) = model.null_slopes(t, x);
                worst = worst.max((c - a).abs()).max((d - b).abs());
            };
            if i + 1 < grid.nt {
                cmp(grid.t_at(i + 1), grid.x_at(j));
            }
            if j + 1 < grid.nx {
                cmp(grid.t_at(i), grid.x_at(j + 1));
            }
        }
    }
    (worst > TURNING_LIMIT).then(|| {
        format!(
            "grid coarser than the cone turning scale: null slopes change by {worst:.3} per cell"
        )
    })
}

pub fn chronological_set(
    model: &SpacetimeModel,
    grid: &Grid,
    seed: Seed<'_>,
    dir: Direction,
) -> Result<CausalSet> {
    chronological_set_with(model, grid, seed, dir, FrontOptions::default())
}

/// I^±(seed) on the grid. An open seed region is contained in its own
/// future; a point seed is not.
pub fn chronological_set_with(
    model: &SpacetimeModel,
    grid: &Grid,
    seed: Seed<'_>,
    dir: Direction,
    opts: FrontOptions<'_>,
) -> Result<CausalSet> {
    check_grid(model, grid)?;
    if let Some(w) = opts.within {
        if &w.grid != grid {
            return Err(invalid("within", "restriction lives on another grid"));
        }
    }
    let sw = Sweeper::new(model, grid, opts.bracket, opts.within);
    let (mask, clipped) = match seed {
        Seed::Point(p) => {
            if !p.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite("seed"));
            }
            if !grid.bounds().contains(&p) {
                return Err(Error::OutsideDomain(format!(
                    "seed ({}, {}) is off the grid",
                    p[0], p[1]
                )));
            }
            sw.sweep_point(p, dir)
        }
        Seed::Region(r) => {
            if &r.grid != grid {
                return Err(invalid("seed", "seed region lives on another grid"));
            }
            if r.is_empty() {
                return Err(Error::EmptyRegion);
            }
            let o = sw.sweep_region(r, dir);
            (o.mask, o.clipped)
        }
    };
    let warnings = resolution_warning(model, grid).into_iter().collect();
    Ok(CausalSet {
        region: Region::from_mask(grid, mask)?,
        boundary_clipped: clipped,
        warnings,
    })
}

/// Whether q ∈ I⁺(p), from the unwidened null fronts of p.
pub fn is_chronological(model: &SpacetimeModel, p: [f64; 2], q: [f64; 2]) -> Result<bool> {
    for v in [p, q] {
        if !model.contains(v) {
            return Err(Error::OutsideDomain(format!(
                "({}, {}) is outside the chart",
                v[0], v[1]
            )));
        }
    }
    if q[0] <= p[0] {
        return Ok(false);
    }
    let steps = 256;
    let h = (q[0] - p[0]) / steps as f64;
    let (mut lo, mut hi) = (p[1], p[1]);
    let c = &model.chart;
    let slope =
        |t: f64, x: f64| model.null_slopes(t.clamp(c.lo[0], c.hi[0]), x.clamp(c.lo[1], c.hi[1]));
    for k in 0..steps {
        let t = p[0] + k as f64 * h;
        let rk = |x: f64, f: &dyn Fn(f64, f64) -> f64| {
            let k1 = f(t, x);
            let k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
            let k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
            let k4 = f(t + h, x + h * k3);
            x + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        };
        lo = rk(lo, &|t, x| slope(t, x).0);
        hi = rk(hi, &|t, x| slope(t, x).1);
    }
    let tol = 1e-9 * (1.0 + (q[0] - p[0]).abs());
    Ok(q[1] > lo + tol && q[1] < hi - tol)
}

/// I₀(p, q) = I⁺(p) ∩ I⁻(q) on a simply connected chart, endpoint cells
/// removed.
pub fn i_zero(model: &SpacetimeModel, grid: &Grid, p: [f64; 2], q: [f64; 2]) -> Result<CausalSet> {
    i_zero_with(model, grid, p, q, Bracket::Outer)
}

pub fn i_zero_with(
    model: &SpacetimeModel,
    grid: &Grid,
    p: [f64; 2],
    q: [f64; 2],
    bracket: Bracket,
) -> Result<CausalSet> {
    check_grid(model, grid)?;
    for v in [p, q] {
        if !grid.bounds().contains(&v) {
            return Err(Error::OutsideDomain(format!(
                "({}, {}) is off the grid",
                v[0], v[1]
            )));
        }
    }
    let mut warnings: Vec<String> = resolution_warning(model, grid).into_iter().collect();
    if !is_chronological(model, p, q)? {
        warnings.push(format!(
            "q = ({}, {}) is not chronologically after p = ({}, {})",
            q[0], q[1], p[0], p[1]
        ));
        return Ok(CausalSet {
            region: Region::empty(grid),
            boundary_clipped: false,
            warnings,
        });
    }
    let sw = Sweeper::new(model, grid, bracket, None);
    let (fut, c1) = sw.sweep_point(p, Direction::Future);
    let (past, c2) = sw.sweep_point(q, Direction::Past);
    let mask: Vec<bool> = fut.iter().zip(&past).map(|(&a, &b)| a && b).collect();
    let mut region = Region::from_mask(grid, mask)?;
    for v in [p, q] {
        if let Some((i, j)) = grid.cell_of(v) {
            region.set(i, j, false);
        }
    }
    // Both fronts leave the chart in general; only a diamond that reaches
    // the grid edge is clipped.
    let boundary_clipped = (c1 || c2) && region.touches_edge();
    Ok(CausalSet {
        region,
        boundary_clipped,
        warnings,
    })
}
