use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::phase_core::{AxisBox, HLadder, SampledFamily};
use crate::transforms::window_radius;

/// C^∞ step: 0 for t ≤ 0, 1 for t ≥ 1, built from e^{-1/t}.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BumpKind {
    PointGaussian,
    Plateau,
    TimeStep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BumpParams {
    /// Centre of POINT_GAUSSIAN.
    pub center: f64,
    /// The set K on which PLATEAU equals one.
    pub plateau: (f64, f64),
    /// b = 1 on K + [−R, R].
    pub radius: f64,
    /// Width of b's transition to zero.
    pub transition: f64,
    /// Support radius δ_b of the mollifier cutoff χ̃.
    pub mollifier: f64,
    /// χ̃ = 1 on |s| ≤ mollifier_flat.
    pub mollifier_flat: f64,
    /// TIME_STEP: 1 for t ≥ δ, 0 for t ≤ −δ.
    pub delta: f64,
    /// Largest |ξ| the realization must resolve.
    pub xi_max: f64,
}

impl Default for BumpParams {
    fn default() -> Self {
        Self {
            center: 0.0,
            plateau: (-1.0, 1.0),
            radius: 1.25,
            transition: 0.5,
            mollifier: 1.0,
            mollifier_flat: 0.6,
            delta: 0.5,
            xi_max: 2.0,
        }
    }
}

/// χ_h = c_h^{-1}·(χ̃ G_h) * b in one dimension, with the convolution taken
/// by the trapezoid rule on a grid through s = 0.
#[derive(Debug, Clone, Copy)]
struct Plateau1d {
    k: (f64, f64),
    r: f64,
    w: f64,
    db: f64,
    flat: f64,
    xi_max: f64,
}

impl Plateau1d {
    fn b(&self, x: f64) -> f64 {
        let (lo, hi) = (self.k.0 - self.r, self.k.1 + self.r);
        smooth_step((x - lo + self.w) / self.w) * smooth_step((hi + self.w - x) / self.w)
    }

    fn chi_tilde(&self, s: f64) -> f64 {
        smooth_step((self.db - s.abs()) / (self.db - self.flat))
    }

    /// Mollifier step: resolves the Gaussian and pushes the grid alias of the
    /// discrete convolution beyond |ξ| = 2·xi_max + 4.
    fn sigma(&self, h: f64) -> f64 {
        (h.sqrt() / 4.0).min(2.0 * PI * h / (2.0 * self.xi_max + 4.0))
    }

    fn span(&self, h: f64) -> f64 {
        self.db.min(window_radius(h))
    }

    fn gauss(h: f64, s: f64) -> f64 {
        (-s * s / (2.0 * h)).exp() / (2.0 * PI * h).sqrt()
    }

    fn weights(&self, h: f64) -> (f64, Vec<(f64, f64)>) {
        let sig = self.sigma(h);
        let n = (self.span(h) / sig).floor() as i64;
        let w: Vec<(f64, f64)> = (-n..=n)
            .map(|j| {
                let s = j as f64 * sig;
                (s, self.chi_tilde(s) * Self::gauss(h, s) * sig)
            })
            .collect();
        let c = w.iter().map(|p| p.1).sum();
        (c, w)
    }

    fn value(&self, h: f64, x: f64) -> f64 {
        let span = self.span(h);
        let (lo, hi) = (self.k.0 - self.r, self.k.1 + self.r);
        if x - span >= lo && x + span <= hi {
            return 1.0;
        }
        if x + span <= lo - self.w || x - span >= hi + self.w {
            return 0.0;
        }
        let (c, w) = self.weights(h);
        w.iter().map(|&(s, wt)| wt * self.b(x - s)).sum::<f64>() / c
    }

    /// 1 − c_h, summed without cancellation.
    fn defect(&self, h: f64) -> f64 {
        let sig = self.sigma(h);
        let span = self.span(h);
        let n = (40.0 * h.sqrt() / sig).ceil() as i64;
        (-n..=n)
            .map(|j| {
                let s = j as f64 * sig;
                let kept = if s.abs() <= span {
                    self.chi_tilde(s)
                } else {
                    0.0
                };
                (1.0 - kept) * Self::gauss(h, s) * sig
            })
            .sum()
    }

    fn support(&self) -> (f64, f64) {
        (
            self.k.0 - self.r - self.w - self.db,
            self.k.1 + self.r + self.w + self.db,
        )
    }

    /// Closed set on which the construction is exactly one.
    fn ones(&self) -> (f64, f64) {
        (self.k.0 - self.r + self.db, self.k.1 + self.r - self.db)
    }
}

/// A bump family together with the sets it is built around.
#[derive(Debug, Clone)]
pub struct BumpFamily {
    pub kind: BumpKind,
    pub params: BumpParams,
    pub realization: SampledFamily,
    /// Interval on which the family equals one (the centre point for
    /// POINT_GAUSSIAN; [start, ∞) for TIME_STEP is reported with +∞).
    pub ones: (f64, f64),
    /// Closed support; −∞/+∞ where unbounded.
    pub support: (f64, f64),
    profile: Option<Plateau1d>,
}

impl BumpFamily {
    /// 1 − c_h for the mollifier normalization; zero for POINT_GAUSSIAN.
    pub fn normalization_defect(&self, h: f64) -> f64 {
        self.profile.map_or(0.0, |p| p.defect(h))
    }
}

fn check(params: &BumpParams) -> Result<()> {
    let p = params;
    let all = [
        p.center,
        p.plateau.0,
        p.plateau.1,
        p.radius,
        p.transition,
        p.mollifier,
        p.mollifier_flat,
        p.delta,
        p.xi_max,
    ];
    if all.iter().any(|v| !v.is_finite()) {
        return Err(invalid("params", "non-finite bump parameter"));
    }
    if !(p.radius > 0.0) || !(p.mollifier > 0.0) || !(p.transition > 0.0) {
        return Err(invalid(
            "params",
            "radius, transition and mollifier support must be positive",
        ));
    }
    if !(0.0..p.mollifier).contains(&p.mollifier_flat) {
        return Err(invalid("mollifier_flat", "must lie in [0, mollifier)"));
    }
    if !(p.xi_max > 0.0) {
        return Err(invalid("xi_max", "must be positive"));
    }
    Ok(())
}

/// Builds the bump family as the existence proofs construct it and caches
/// every rung of `ladder`.
pub fn bump_family(kind: BumpKind, params: BumpParams, ladder: &HLadder) -> Result<BumpFamily> {
    check(&params)?;
    let p = params.clone();
    match kind {
        BumpKind::Plateau => {
            if p.plateau.0 > p.plateau.1 {
                return Err(invalid("plateau", "K must be a non-empty interval"));
            }
            if p.radius <= p.mollifier {
                return Err(invalid(
                    "radius",
                    "plateau radius must exceed the mollifier support so that χ_h = 1 near K",
                ));
            }
            let pl = Plateau1d {
                k: p.plateau,
                r: p.radius,
                w: p.transition,
                db: p.mollifier,
                flat: p.mollifier_flat,
                xi_max: p.xi_max,
            };
            let (lo, hi) = pl.support();
            let realization = SampledFamily::new(1, AxisBox::interval(lo, hi), move |h, x| {
                C64::new(pl.value(h, x[0]), 0.0)
            })?
            .with_cache(ladder, p.xi_max)?;
            Ok(BumpFamily {
                kind,
                params,
                realization,
                ones: pl.ones(),
                support: (lo, hi),
                profile: Some(pl),
            })
        }
        BumpKind::PointGaussian => {
            let (c, db, flat) = (p.center, p.mollifier, p.mollifier_flat);
            let cut = move |s: f64| smooth_step((db - s.abs()) / (db - flat));
            let realization =
                SampledFamily::new(1, AxisBox::interval(c - db, c + db), move |h, x| {
                    let s = x[0] - c;
                    C64::new(cut(s) * (-s * s / (2.0 * h)).exp(), 0.0)
                })?
                .with_cache(ladder, p.xi_max)?;
            Ok(BumpFamily {
                kind,
                params,
                realization,
                ones: (c, c),
                support: (c - db, c + db),
                profile: None,
            })
        }
        BumpKind::TimeStep => {
            if !(p.delta > 0.0) {
                return Err(invalid("delta", "must be positive"));
            }
            // Unscaled profile: one on a neighbourhood of [0, 1], zero below −1.
            let pl = Plateau1d {
                k: (0.0, 1.0),
                r: 0.4,
                w: 0.2,
                db: 0.35,
                flat: 0.25,
                xi_max: p.xi_max * p.delta,
            };
            let d = p.delta;
            let rho = move |h: f64, t: f64| {
                let tau = t / d;
                if tau > 1.0 {
                    1.0
                } else {
                    pl.value(h, tau)
                }
            };
            let lo = pl.support().0 * d;
            let realization = SampledFamily::new(
                1,
                AxisBox::new(vec![lo], vec![f64::INFINITY])?,
                move |h, x| C64::new(rho(h, x[0]), 0.0),
            )?;
            Ok(BumpFamily {
                kind,
                params,
                realization,
                ones: (pl.ones().0 * d, f64::INFINITY),
                support: (lo, f64::INFINITY),
                profile: Some(pl),
            })
        }
    }
}
