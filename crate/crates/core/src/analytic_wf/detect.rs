use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::microsupport::{
    bump_family, floored_magnitudes, BumpKind, BumpParams, ScanConfig, QUALITY_THRESHOLD,
};
use crate::phase_core::{fit_decay, DecayFit, Verdict};
use crate::transforms::FbiSource;

/// Discretized unit sphere of covector directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Directions {
    /// {+1, −1} in one dimension.
    Line,
    /// n equally spaced angles on the circle, starting at angle 0.
    Circle(usize),
}

impl Directions {
    pub fn dim(&self) -> usize {
        match self {
            Directions::Line => 1,
            Directions::Circle(_) => 2,
        }
    }

    /// (angle, unit vector) pairs; angle is 0 or π on the line.
    pub fn list(&self) -> Vec<(f64, Vec<f64>)> {
        match *self {
            Directions::Line => vec![(0.0, vec![1.0]), (PI, vec![-1.0])],
            Directions::Circle(n) => (0..n)
                .map(|k| {
                    let a = 2.0 * PI * k as f64 / n as f64;
                    (a, vec![a.cos(), a.sin()])
                })
                .collect(),
        }
    }
}

/// Per base point and direction, the decay fit of |T_h(χu)(x, ξ̂)|.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WfaReport {
    pub base_points: Vec<Vec<f64>>,
    pub angles: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
    /// fits[point][direction]
    pub fits: Vec<Vec<DecayFit>>,
    pub quality_low: bool,
}

impl WfaReport {
    /// Inconclusive counts as flagged.
    pub fn is_flagged(&self, point: usize, dir: usize) -> bool {
        self.fits[point][dir].verdict.flagged()
    }

    pub fn flagged_directions(&self, point: usize) -> Vec<usize> {
        (0..self.directions.len())
            .filter(|&j| self.is_flagged(point, j))
            .collect()
    }

    /// Indices of base points with at least one flagged direction.
    pub fn flagged_points(&self) -> Vec<usize> {
        (0..self.base_points.len())
            .filter(|&i| !self.flagged_directions(i).is_empty())
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.flagged_points().is_empty()
    }

    /// Rows x…, angle, delta_hat, verdict.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let io = |e: csv::Error| invalid("csv", e.to_string());
        let mut wr = csv::Writer::from_writer(w);
        let d = self.base_points.first().map_or(1, |p| p.len());
        let mut head: Vec<String> = if d == 1 {
            vec!["x".into()]
        } else {
            (0..d).map(|i| format!("x{i}")).collect()
        };
        head.extend(["angle", "delta_hat", "verdict"].map(String::from));
        wr.write_record(&head).map_err(io)?;
        for (i, p) in self.base_points.iter().enumerate() {
            for (j, a) in self.angles.iter().enumerate() {
                let f = &self.fits[i][j];
                let v =
                    serde_json::to_value(f.verdict).map_err(|e| invalid("csv", e.to_string()))?;
                let mut row: Vec<String> = p.iter().map(|v| v.to_string()).collect();
                row.extend([
                    a.to_string(),
                    f.delta_hat.to_string(),
                    v.as_str().unwrap_or_default().to_string(),
                ]);
                wr.write_record(&row).map_err(io)?;
            }
        }
        wr.flush().map_err(|e| invalid("csv", e.to_string()))
    }
}

/// Scans the constant family u at every base point and direction. Sampled
/// one-dimensional families are first multiplied by a plateau cutoff equal
/// to one on the base points' hull plus a unit collar.
pub fn wfa_detect(
    u: &FbiSource,
    base_points: &[Vec<f64>],
    dirs: Directions,
    cfg: &ScanConfig,
) -> Result<WfaReport> {
    let d = dirs.dim();
    if u.dim() != d {
        return Err(invalid(
            "directions",
            format!("{d}-d directions for a {}-d distribution", u.dim()),
        ));
    }
    if base_points.is_empty()
        || base_points
            .iter()
            .any(|p| p.len() != d || p.iter().any(|v| !v.is_finite()))
    {
        return Err(invalid(
            "base_points",
            "need finite points of the distribution's dimension",
        ));
    }
    if let Directions::Circle(n) = dirs {
        if n < 4 {
            return Err(invalid("directions", "need at least four angles"));
        }
    }
    let src = match u {
        FbiSource::Family(f) if d == 1 => {
            let lo = base_points
                .iter()
                .map(|p| p[0])
                .fold(f64::INFINITY, f64::min);
            let hi = base_points
                .iter()
                .map(|p| p[0])
                .fold(f64::NEG_INFINITY, f64::max);
            let params = BumpParams {
                plateau: (lo - 1.0, hi + 1.0),
                xi_max: 1.0,
                ..BumpParams::default()
            };
            let chi = bump_family(BumpKind::Plateau, params, &cfg.ladder)?;
            FbiSource::Family(chi.realization.product(f)?)
        }
        other => other.clone(),
    };
    let list = dirs.list();
    let rungs = cfg.ladder.rungs();
    // mags[rung][point][direction]
    let mags: Vec<Vec<Vec<f64>>> = match dirs {
        Directions::Line => {
            let xs: Vec<f64> = base_points.iter().map(|p| p[0]).collect();
            rungs
                .iter()
                .map(|&h| floored_magnitudes(&src, h, &xs, &[1.0, -1.0]))
                .collect()
        }
        Directions::Circle(_) => rungs
            .iter()
            .map(|&h| {
                base_points
                    .par_iter()
                    .map(|p| list.iter().map(|(_, v)| src.eval(h, p, v).norm()).collect())
                    .collect()
            })
            .collect(),
    };
    let fits: Vec<Vec<DecayFit>> = (0..base_points.len())
        .into_par_iter()
        .map(|i| {
            (0..list.len())
                .map(|j| {
                    let s: Vec<(f64, f64)> = rungs
                        .iter()
                        .zip(&mags)
                        .map(|(&h, m)| (h, m[i][j]))
                        .collect();
                    fit_decay(&s, cfg.delta_min, cfg.rho_min)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let total = (base_points.len() * list.len()) as f64;
    let inconclusive = fits
        .iter()
        .flatten()
        .filter(|f| f.verdict == Verdict::Inconclusive)
        .count() as f64;
    Ok(WfaReport {
        base_points: base_points.to_vec(),
        angles: list.iter().map(|p| p.0).collect(),
        directions: list.into_iter().map(|p| p.1).collect(),
        fits,
        quality_low: inconclusive / total > QUALITY_THRESHOLD,
    })
}
