use std::io::Write;

use serde::{Deserialize, Serialize};

use super::model::corners;
use crate::error::{invalid, Error, Result};
use crate::phase_core::AxisBox;

/// Cell-centred grid over a (t, x) box. Row i holds time t_i, column j
/// position x_j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub t: (f64, f64),
    pub x: (f64, f64),
    pub nt: usize,
    pub nx: usize,
}

impl Grid {
    pub fn new(b: &AxisBox, nt: usize, nx: usize) -> Result<Self> {
        let (tl, th, xl, xh) = corners(b)?;
        if !(tl < th && xl < xh) {
            return Err(invalid("box", "grid box must have positive extent"));
        }
        if nt < 2 || nx < 2 {
            return Err(invalid("n", "grids need at least 2 × 2 cells"));
        }
        Ok(Self {
            t: (tl, th),
            x: (xl, xh),
            nt,
            nx,
        })
    }

    pub fn dt(&self) -> f64 {
        (self.t.1 - self.t.0) / self.nt as f64
    }

    pub fn dx(&self) -> f64 {
        (self.x.1 - self.x.0) / self.nx as f64
    }

    pub fn t_at(&self, i: usize) -> f64 {
        self.t.0 + (i as f64 + 0.5) * self.dt()
    }

    pub fn x_at(&self, j: usize) -> f64 {
        self.x.0 + (j as f64 + 0.5) * self.dx()
    }

    pub fn len(&self) -> usize {
        self.nt * self.nx
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bounds(&self) -> AxisBox {
        AxisBox::rect(self.t, self.x)
    }

    /// Cell containing p (upper cell on shared edges).
    pub fn cell_of(&self, p: [f64; 2]) -> Option<(usize, usize)> {
        let i = ((p[0] - self.t.0) / self.dt()).floor();
        let j = ((p[1] - self.x.0) / self.dx()).floor();
        if i < 0.0 || j < 0.0 || i >= self.nt as f64 || j >= self.nx as f64 {
            return None;
        }
        Some((i as usize, j as usize))
    }

    /// The same box at twice the resolution.
    pub fn refined(&self) -> Self {
        Self {
            nt: 2 * self.nt,
            nx: 2 * self.nx,
            ..self.clone()
        }
    }
}

/// A grid mask of cell-centred samples of an open set.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub grid: Grid,
    mask: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct RleRegion {
    grid: Grid,
    /// (row, first column, length) per run of set cells.
    runs: Vec<(usize, usize, usize)>,
}

impl Serialize for Region {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RleRegion {
            grid: self.grid.clone(),
            runs: self.runs(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Region {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = RleRegion::deserialize(d)?;
        let mut out = Region::empty(&r.grid);
        for (i, j0, len) in r.runs {
            if i >= r.grid.nt || j0 + len > r.grid.nx {
                return Err(serde::de::Error::custom("run outside the grid"));
            }
            for j in j0..j0 + len {
                out.set(i, j, true);
            }
        }
        Ok(out)
    }
}

impl Region {
    pub fn empty(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            mask: vec![false; grid.len()],
        }
    }

    pub fn full(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            mask: vec![true; grid.len()],
        }
    }

    /// Cells whose centre satisfies the predicate.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> bool) -> Self {
        let mut r = Self::empty(grid);
        for i in 0..grid.nt {
            let t = grid.t_at(i);
            for j in 0..grid.nx {
                r.mask[i * grid.nx + j] = f(t, grid.x_at(j));
            }
        }
        r
    }

    pub fn from_mask(grid: &Grid, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != grid.len() {
            return Err(invalid("mask", "length differs from the grid"));
        }
        Ok(Self {
            grid: grid.clone(),
            mask,
        })
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.mask[i * self.grid.nx + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        self.mask[i * self.grid.nx + j] = v;
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let nx = self.grid.nx;
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(k, _)| (k / nx, k % nx))
    }

    pub fn center(&self, i: usize, j: usize) -> [f64; 2] {
        [self.grid.t_at(i), self.grid.x_at(j)]
    }

    fn same_grid(&self, other: &Region) -> Result<()> {
        if self.grid != other.grid {
            return Err(invalid("region", "regions live on different grids"));
        }
        Ok(())
    }

    fn zip(&self, other: &Region, f: impl Fn(bool, bool) -> bool) -> Result<Region> {
        self.same_grid(other)?;
        let mask = self
            .mask
            .iter()
            .zip(&other.mask)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Region {
            grid: self.grid.clone(),
            mask,
        })
    }

    pub fn union(&self, other: &Region) -> Result<Region> {
        self.zip(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &Region) -> Result<Region> {
        self.zip(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &Region) -> Result<Region> {
        self.zip(other, |a, b| a && !b)
    }

    pub fn is_subset(&self, other: &Region) -> Result<bool> {
        self.same_grid(other)?;
        Ok(self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b))
    }

    fn neighbours(&self, i: usize, j: usize) -> impl Iterator<Item = Option<(usize, usize)>> + '_ {
        let (nt, nx) = (self.grid.nt as isize, self.grid.nx as isize);
        (-1isize..=1)
            .flat_map(move |di| (-1isize..=1).map(move |dj| (di, dj)))
            .filter(|&d| d != (0, 0))
            .map(move |(di, dj)| {
                let (a, b) = (i as isize + di, j as isize + dj);
                (a >= 0 && b >= 0 && a < nt && b < nx).then_some((a as usize, b as usize))
            })
    }

    /// Cells whose eight neighbours are all set; the chart edge counts as outside.
    pub fn erode(&self) -> Region {
        let mut out = Region::empty(&self.grid);
        for (i, j) in self.cells() {
            if self
                .neighbours(i, j)
                .all(|n| n.is_some_and(|(a, b)| self.get(a, b)))
            {
                out.set(i, j, true);
            }
        }
        out
    }

    /// Cells within one step (eight-neighbour) of the region.
    pub fn dilate(&self) -> Region {
        let mut out = self.clone();
        for (i, j) in self.cells() {
            for (a, b) in self.neighbours(i, j).flatten() {
                out.set(a, b, true);
            }
        }
        out
    }

    /// Set cells with at least one neighbour outside the region.
    pub fn boundary(&self) -> Region {
        let mut out = Region::empty(&self.grid);
        for (i, j) in self.cells() {
            if self
                .neighbours(i, j)
                .any(|n| !n.is_some_and(|(a, b)| self.get(a, b)))
            {
                out.set(i, j, true);
            }
        }
        out
    }

    /// Whether a set cell lies on the outer ring of the grid.
    pub fn touches_edge(&self) -> bool {
        let (nt, nx) = (self.grid.nt, self.grid.nx);
        self.cells()
            .any(|(i, j)| i == 0 || j == 0 || i + 1 == nt || j + 1 == nx)
    }

    /// Hausdorff distance in cells (Chebyshev metric on indices). Two empty
    /// masks are at distance 0, one empty mask at infinity.
    pub fn hausdorff(&self, other: &Region) -> Result<f64> {
        self.same_grid(other)?;
        match (self.is_empty(), other.is_empty()) {
            (true, true) => return Ok(0.0),
            (true, false) | (false, true) => return Ok(f64::INFINITY),
            _ => {}
        }
        Ok(directed(self, other).max(directed(other, self)))
    }

    /// (row, first column, length) per run of set cells.
    pub fn runs(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.grid.nt {
            let mut j = 0;
            while j < self.grid.nx {
                if self.get(i, j) {
                    let start = j;
                    while j < self.grid.nx && self.get(i, j) {
                        j += 1;
                    }
                    out.push((i, start, j - start));
                } else {
                    j += 1;
                }
            }
        }
        out
    }

    /// 8-bit greyscale PNG, later times at the top.
    pub fn write_png<W: Write>(&self, w: W) -> Result<()> {
        let (nt, nx) = (self.grid.nt, self.grid.nx);
        let mut enc = png::Encoder::new(w, nx as u32, nt as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Eight);
        let mut data = Vec::with_capacity(nt * nx);
        for i in (0..nt).rev() {
            data.extend((0..nx).map(|j| if self.get(i, j) { 255u8 } else { 0 }));
        }
        let io = |e: png::EncodingError| Error::Io(format!("png encoding: {e}"));
        enc.write_header()
            .map_err(io)?
            .write_image_data(&data)
            .map_err(io)?;
        Ok(())
    }
}

fn directed(a: &Region, b: &Region) -> f64 {
    let edge: Vec<(usize, usize)> = b.boundary().cells().collect();
    let mut worst = 0usize;
    for (i, j) in a.cells() {
        if b.get(i, j) {
            continue;
        }
        let d = edge
            .iter()
            .map(|&(p, q)| i.abs_diff(p).max(j.abs_diff(q)))
            .min()
            .unwrap_or(usize::MAX);
        worst = worst.max(d);
    }
    worst as f64
}
