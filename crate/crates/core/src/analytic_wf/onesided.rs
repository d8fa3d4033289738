use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::detect::{wfa_detect, Directions};
use super::radius::{analyticity_radius, RadiusEstimate, TaylorInput};
use super::signal::Distribution1d;
use crate::error::{invalid, Result};
use crate::microsupport::ScanConfig;
use crate::phase_core::DecayFit;

/// Which covector half-lines at x₀ carry WF_a.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Side {
    /// ξ > 0 only.
    Upper,
    /// ξ < 0 only.
    Lower,
    Both,
    None,
}

impl Side {
    fn from_flags(up: bool, down: bool) -> Self {
        match (up, down) {
            (true, true) => Side::Both,
            (true, false) => Side::Upper,
            (false, true) => Side::Lower,
            (false, false) => Side::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneSided {
    pub side: Side,
    pub disagree: bool,
    /// FBI fits in directions +1, −1.
    pub fbi: [DecayFit; 2],
    /// Radius estimates of K_u around x₀ + i(1−ε₀) and x₀ − i(1−ε₀).
    pub sech: [RadiusEstimate; 2],
    /// Half-lines flagged by each detector: (ξ > 0, ξ < 0).
    pub fbi_sides: (bool, bool),
    pub sech_sides: (bool, bool),
}

/// Distance of the probe centres from the strip edges Im z = ±1.
const PROBE: f64 = 0.2;

/// Runs the FBI detector and the sech-kernel detector at x₀ and reconciles
/// them.
///
/// Convention: under T_h's phase e^{i(x−y)ξ/h}, e^{iωt} (ω > 0) peaks at
/// ξ = hω, so a boundary value from the upper half-plane has its WF_a on
/// ξ > 0. Its K_u continues past Im z = 1 and is singular at x₀ − i. A
/// singularity at x₀ + i therefore marks ξ < 0.
pub fn one_sided_check(u: &Distribution1d, x0: f64, cfg: &ScanConfig) -> Result<OneSided> {
    if u.fbi.dim() != 1 {
        return Err(invalid("u", "one-sided checks are one-dimensional"));
    }
    let report = wfa_detect(&u.fbi, &[vec![x0]], Directions::Line, cfg)?;
    let fbi_sides = (report.is_flagged(0, 0), report.is_flagged(0, 1));
    let probe = |sign: f64| -> Result<RadiusEstimate> {
        let z0 = C64::new(x0, sign * (1.0 - PROBE));
        let f = |w: C64| {
            u.sech_transform(z0 + w)
                .unwrap_or(C64::new(f64::NAN, f64::NAN))
        };
        analyticity_radius(TaylorInput::Complex(&f), 0.0, 0.8 * PROBE, 32)
    };
    let (top, bottom) = (probe(1.0)?, probe(-1.0)?);
    let singular = |r: &RadiusEstimate| r.radius < 1.5 * PROBE;
    let sech_sides = (singular(&bottom), singular(&top));
    let disagree = fbi_sides != sech_sides;
    let side = if disagree {
        Side::Both
    } else {
        Side::from_flags(fbi_sides.0, fbi_sides.1)
    };
    let fits = [report.fits[0][0].clone(), report.fits[0][1].clone()];
    Ok(OneSided {
        side,
        disagree,
        fbi: fits,
        sech: [top, bottom],
        fbi_sides,
        sech_sides,
    })
}
