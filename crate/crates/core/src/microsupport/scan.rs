use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sets::CompactSet;
use crate::error::{invalid, Error, Result};
use crate::phase_core::{
    cache_step, fit_decay, grid_nodes, DecayFit, HLadder, Verdict, DEFAULT_DELTA_MIN,
    DEFAULT_RHO_MIN,
};
use crate::transforms::{FbiSource, PhaseBox};

/// Fraction of INCONCLUSIVE nodes above which a map is marked low quality.
pub const QUALITY_THRESHOLD: f64 = 0.2;

/// Phase-space scan region with its grid (d = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseWindow {
    #[serde(rename = "box")]
    pub bx: PhaseBox,
    pub x_step: f64,
    pub xi_step: f64,
}

impl PhaseWindow {
    pub fn new(bx: PhaseBox, x_step: f64, xi_step: f64) -> Result<Self> {
        let w = Self {
            bx,
            x_step,
            xi_step,
        };
        w.validate()?;
        Ok(w)
    }

    /// [−2, 2]² with step 0.1.
    pub fn default_window() -> Self {
        Self {
            bx: PhaseBox::square(2.0),
            x_step: 0.1,
            xi_step: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let b = &self.bx;
        let finite = [b.x_lo, b.x_hi, b.xi_lo, b.xi_hi]
            .iter()
            .all(|v| v.is_finite());
        if !finite || b.x_lo > b.x_hi || b.xi_lo > b.xi_hi {
            return Err(invalid("window", "box must be bounded and ordered"));
        }
        if !(self.x_step > 0.0 && self.xi_step > 0.0) {
            return Err(invalid("window", "grid steps must be positive"));
        }
        Ok(())
    }

    pub fn xs(&self) -> Vec<f64> {
        grid_nodes(self.bx.x_lo, self.bx.x_hi, self.x_step)
    }

    pub fn xis(&self) -> Vec<f64> {
        grid_nodes(self.bx.xi_lo, self.bx.xi_hi, self.xi_step)
    }
}

/// Ladder and classification thresholds shared by every scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub ladder: HLadder,
    pub weight_powers: Vec<u32>,
    pub delta_min: f64,
    pub rho_min: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            ladder: HLadder::default_ladder(),
            weight_powers: vec![0, 2, 4],
            delta_min: DEFAULT_DELTA_MIN,
            rho_min: DEFAULT_RHO_MIN,
        }
    }
}

impl ScanConfig {
    /// Configuration for analytic wave-front detection: h = 0.5·0.8^k,
    /// k < 30, down to h ≈ 6e-4. Gevrey-type decay e^{-c/√h} has local
    /// rate c/(2√h^{-1}); on the default ladder it still reads as
    /// exponential, here its fitted rate drops below δ_min.
    pub fn analytic() -> Self {
        Self {
            ladder: HLadder::new(0.5, 0.8, 30).expect("valid ladder"),
            ..Self::default()
        }
    }

    /// Parabolic rescaling for a collar of width `eps`: rungs and δ_min are
    /// both multiplied by eps². A rate δ ∝ eps² then sits at the same place
    /// relative to the ladder as δ ∝ 1 does for eps = 1.
    pub fn collar_scaled(&self, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(invalid("eps", "collar width must lie in (0, 1]"));
        }
        let s = eps * eps;
        Ok(Self {
            ladder: self.ladder.scaled(s)?,
            delta_min: self.delta_min * s,
            ..self.clone()
        })
    }

    fn weight(&self, x: f64, xi: f64) -> f64 {
        let base = 1.0 + x * x + xi * xi;
        self.weight_powers
            .iter()
            .map(|&n| base.powi(n as i32))
            .fold(0.0, f64::max)
    }
}

/// Per-node decay fits of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicrosupportMap {
    pub window: PhaseWindow,
    pub ladder: HLadder,
    pub weight_powers: Vec<u32>,
    pub delta_min: f64,
    pub xs: Vec<f64>,
    pub xis: Vec<f64>,
    /// fits[ix][iξ]
    pub fits: Vec<Vec<DecayFit>>,
    pub quality_low: bool,
}

impl MicrosupportMap {
    pub fn verdict(&self, ix: usize, ixi: usize) -> Verdict {
        self.fits[ix][ixi].verdict
    }

    pub fn classified(&self) -> Vec<Vec<Verdict>> {
        self.fits
            .iter()
            .map(|r| r.iter().map(|f| f.verdict).collect())
            .collect()
    }

    /// Nodes whose verdict is not EXP_SMALL.
    pub fn flagged(&self) -> Vec<(f64, f64)> {
        self.nodes_where(|v| v.flagged())
    }

    pub fn nodes_where(&self, pred: impl Fn(Verdict) -> bool) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for (ix, row) in self.fits.iter().enumerate() {
            for (ixi, f) in row.iter().enumerate() {
                if pred(f.verdict) {
                    out.push((self.xs[ix], self.xis[ixi]));
                }
            }
        }
        out
    }

    /// Index of the node nearest to (x, ξ).
    pub fn nearest(&self, x: f64, xi: f64) -> (usize, usize) {
        let near = |v: &[f64], t: f64| {
            (0..v.len())
                .min_by(|&a, &b| (v[a] - t).abs().total_cmp(&(v[b] - t).abs()))
                .unwrap_or(0)
        };
        (near(&self.xs, x), near(&self.xis, xi))
    }

    pub fn inconclusive_fraction(&self) -> f64 {
        let n = self.xs.len() * self.xis.len();
        self.nodes_where(|v| v == Verdict::Inconclusive).len() as f64 / n.max(1) as f64
    }

    /// Rows x, xi, delta_hat, r2, verdict.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| invalid("csv", e.to_string());
        wr.write_record(["x", "xi", "delta_hat", "r2", "verdict"])
            .map_err(io)?;
        for (ix, row) in self.fits.iter().enumerate() {
            for (ixi, f) in row.iter().enumerate() {
                let verdict =
                    serde_json::to_value(f.verdict).map_err(|e| invalid("csv", e.to_string()))?;
                wr.write_record([
                    self.xs[ix].to_string(),
                    self.xis[ixi].to_string(),
                    f.delta_hat.to_string(),
                    f.r_squared.to_string(),
                    verdict.as_str().unwrap_or_default().to_string(),
                ])
                .map_err(io)?;
            }
        }
        wr.flush().map_err(|e| invalid("csv", e.to_string()))
    }
}

/// Relative size of quadrature round-off against the FBI of |u|.
pub(crate) const NOISE_FLOOR: f64 = 1e-13;

/// |T_h u| on xs × xis. For sampled families, values below round-off
/// (relative to T_h|u|(x, 0), which bounds every |T_h u(x, ·)|) are set to
/// zero so the fit reads them as underflow.
pub(crate) fn floored_magnitudes(
    src: &FbiSource,
    h: f64,
    xs: &[f64],
    xis: &[f64],
) -> Vec<Vec<f64>> {
    let floor: Vec<f64> = match src {
        FbiSource::Family(f) => FbiSource::Family(f.modulus())
            .grid(h, xs, &[0.0])
            .iter()
            .map(|r| NOISE_FLOOR * r[0].norm())
            .collect(),
        _ => vec![0.0; xs.len()],
    };
    src.grid(h, xs, xis)
        .iter()
        .zip(&floor)
        .map(|(row, &fl)| {
            row.iter()
                .map(|t| if t.norm() <= fl { 0.0 } else { t.norm() })
                .collect()
        })
        .collect()
}

/// Weighted magnitudes on the window, indexed [rung][ix][iξ].
fn weighted_layers(
    src: &FbiSource,
    cfg: &ScanConfig,
    xs: &[f64],
    xis: &[f64],
) -> Vec<Vec<Vec<f64>>> {
    cfg.ladder
        .rungs()
        .iter()
        .map(|&h| {
            floored_magnitudes(src, h, xs, xis)
                .into_iter()
                .zip(xs)
                .map(|(row, &x)| {
                    row.into_iter()
                        .zip(xis)
                        .map(|(m, &xi)| cfg.weight(x, xi) * m)
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn check_source(src: &FbiSource, window: &PhaseWindow, cfg: &ScanConfig) -> Result<()> {
    if src.dim() != 1 {
        return Err(invalid("u", "scans are one-dimensional"));
    }
    window.validate()?;
    if cfg.weight_powers.is_empty() {
        return Err(invalid(
            "weight_powers",
            "at least one weight power is required",
        ));
    }
    if let FbiSource::Family(f) = src {
        let xi_max = window.bx.xi_lo.abs().max(window.bx.xi_hi.abs());
        for &h in cfg.ladder.rungs() {
            if let Some(g) = f.cached(h) {
                let need = cache_step(h, xi_max, f.bandwidth(h));
                if g.step > need * (1.0 + 1e-9) {
                    return Err(Error::WindowTooSmall(format!(
                        "grid cache at h = {h} (step {}) does not resolve |xi| = {xi_max}",
                        g.step
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Classifies every window node by fitting the weighted FBI magnitude over
/// the ladder.
pub fn microsupport_scan(
    src: &FbiSource,
    window: &PhaseWindow,
    cfg: &ScanConfig,
) -> Result<MicrosupportMap> {
    check_source(src, window, cfg)?;
    // A point of the microsupport flags a ball of radius about √(4 δ_min);
    // coarser grids can step over it entirely.
    let reach = 4.0 * cfg.delta_min.sqrt();
    if window.x_step > reach || window.xi_step > reach {
        return Err(Error::WindowTooSmall(format!(
            "steps ({}, {}) exceed {reach:.3}, the flagged radius at delta_min = {}",
            window.x_step, window.xi_step, cfg.delta_min
        )));
    }
    let (xs, xis) = (window.xs(), window.xis());
    let layers = weighted_layers(src, cfg, &xs, &xis);
    let rungs = cfg.ladder.rungs();
    let fits: Vec<Vec<DecayFit>> = (0..xs.len())
        .into_par_iter()
        .map(|ix| {
            (0..xis.len())
                .map(|ixi| {
                    let samples: Vec<(f64, f64)> = rungs
                        .iter()
                        .zip(&layers)
                        .map(|(&h, l)| (h, l[ix][ixi]))
                        .collect();
                    fit_decay(&samples, cfg.delta_min, cfg.rho_min)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut map = MicrosupportMap {
        window: *window,
        ladder: cfg.ladder.clone(),
        weight_powers: cfg.weight_powers.clone(),
        delta_min: cfg.delta_min,
        xs,
        xis,
        fits,
        quality_low: false,
    };
    map.quality_low = map.inconclusive_fraction() > QUALITY_THRESHOLD;
    Ok(map)
}

/// Fits the per-rung supremum of the weighted FBI magnitude over window
/// nodes at distance > eps from K.
pub fn uniform_small_check(
    src: &FbiSource,
    k: &CompactSet,
    eps: f64,
    window: &PhaseWindow,
    cfg: &ScanConfig,
) -> Result<DecayFit> {
    check_source(src, window, cfg)?;
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(invalid("eps", "collar width must be positive"));
    }
    if k.is_empty() {
        return Err(invalid("K", "empty set"));
    }
    let (xs, xis) = (window.xs(), window.xis());
    let meets = xs
        .iter()
        .any(|&x| xis.iter().any(|&xi| k.distance(x, xi) <= eps));
    let outside: Vec<(usize, usize)> = (0..xs.len())
        .flat_map(|i| (0..xis.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| k.distance(xs[i], xis[j]) > eps)
        .collect();
    if !meets || outside.is_empty() {
        return Err(Error::WindowTooSmall(format!(
            "window does not contain the eps = {eps} collar of K"
        )));
    }
    let layers = weighted_layers(src, cfg, &xs, &xis);
    let samples: Vec<(f64, f64)> = cfg
        .ladder
        .rungs()
        .iter()
        .zip(&layers)
        .map(|(&h, l)| (h, outside.iter().map(|&(i, j)| l[i][j]).fold(0.0, f64::max)))
        .collect();
    // A supremum of exponentials is convex in 1/h and only its last segment
    // is the asymptotic rate: fit the small-h half of the ladder.
    let keep = (samples.len() / 2)
        .max(HLadder::MIN_RUNGS)
        .min(samples.len());
    fit_decay(&samples[samples.len() - keep..], cfg.delta_min, cfg.rho_min)
}
