use rayon::prelude::*;
use serde::Serialize;

use super::front::{Bracket, Direction, Sweeper};
use super::model::SpacetimeModel;
use super::region::Region;
use crate::error::{Error, Result};

/// Defensive cap; finite grids reach the fixed point long before.
pub const ENVELOPE_ITER_CAP: usize = 64;

#[derive(Debug, Clone, Serialize)]
pub struct Envelope {
    pub region: Region,
    pub iterations: usize,
    /// The cap was hit and `region` is a partial result.
    pub capped: bool,
    /// Growth reached the edge of the grid.
    pub boundary_clipped: bool,
    pub notes: Vec<String>,
}

pub fn timelike_envelope(model: &SpacetimeModel, o: &Region) -> Result<Envelope> {
    timelike_envelope_with(model, o, Bracket::Outer)
}

/// E_T(O) by fixed-point iteration. A step adds I⁺(p) ∩ I⁻(R(p)) for every
/// cell p of the one-cell erosion of A, where R(p) is what p reaches by
/// timelike curves inside that erosion; this is the union of I₀(p, q) over
/// all admissible q.
pub fn timelike_envelope_with(
    model: &SpacetimeModel,
    o: &Region,
    bracket: Bracket,
) -> Result<Envelope> {
    if o.is_empty() {
        return Err(Error::EmptyRegion);
    }
    if !model.chart.contains_box(&o.grid.bounds()) {
        return Err(Error::OutsideDomain("region grid leaves the chart".into()));
    }
    let grid = &o.grid;
    let mut a = o.clone();
    let mut iterations = 0;
    let mut capped = true;
    while iterations < ENVELOPE_ITER_CAP {
        iterations += 1;
        let interior = a.erode();
        let seeds: Vec<(usize, usize)> = interior.cells().collect();
        let restricted = Sweeper::new(model, grid, bracket, Some(&interior));
        let free = Sweeper::new(model, grid, bracket, None);
        let gained = seeds
            .par_iter()
            .map(|&(i, j)| {
                let p = interior.center(i, j);
                let (reach, _) = restricted.sweep_point(p, Direction::Future);
                if !reach.iter().any(|&b| b) {
                    return None;
                }
                let reach = Region::from_mask(grid, reach).expect("same grid");
                let (fut, _) = free.sweep_point(p, Direction::Future);
                let past = free.sweep_region_mask(&reach, Direction::Past);
                Some(
                    fut.iter()
                        .zip(&past)
                        .map(|(&x, &y)| x && y)
                        .collect::<Vec<bool>>(),
                )
            })
            .reduce(
                || None,
                |x, y| match (x, y) {
                    (Some(x), Some(y)) => Some(x.iter().zip(&y).map(|(&u, &v)| u || v).collect()),
                    (x, None) => x,
                    (None, y) => y,
                },
            );
        let next = match gained {
            Some(m) => a.union(&Region::from_mask(grid, m)?)?,
            None => a.clone(),
        };
        if next == a {
            capped = false;
            break;
        }
        a = next;
    }
    let boundary_clipped = a.difference(o)?.touches_edge();
    let notes = vec![
        "curves run in the one-cell erosion of A; endpoints on the boundary do not count"
            .to_string(),
        "I0 evaluated as I+(p) ∩ I-(q) on a simply connected chart".to_string(),
    ];
    Ok(Envelope {
        region: a,
        iterations,
        capped,
        boundary_clipped,
        notes,
    })
}
