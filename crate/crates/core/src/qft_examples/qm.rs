use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::analytic_wf::{wfa_detect, Directions, WfaReport};
use crate::error::{invalid, Error, Result};
use crate::microsupport::ScanConfig;
use crate::phase_core::{fit_decay, DecayFit, HLadder};
use crate::quadrature::gl_composite;
use crate::transforms::{alpha_h, window_radius, FbiSource};
use crate::wf_calculus::{rightmost_future_causal, ConeModel};

/// A quantum-mechanical model given by spectral data: eigenvalues of H,
/// the matrix of x in the eigenbasis, the exponent α of U(t) = e^{-itH^α}
/// and a state ψ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedQM {
    pub eigenvalues: Vec<f64>,
    /// Row-major N × N.
    pub position: Vec<Vec<f64>>,
    pub alpha: f64,
    pub state: Vec<C64>,
}

impl TruncatedQM {
    pub fn new(
        eigenvalues: Vec<f64>,
        position: Vec<Vec<f64>>,
        alpha: f64,
        state: Vec<C64>,
    ) -> Result<Self> {
        let n = eigenvalues.len();
        if n == 0 {
            return Err(invalid("eigenvalues", "empty spectrum"));
        }
        if !(eigenvalues[0] > 0.0)
            || eigenvalues.windows(2).any(|w| !(w[0] < w[1]))
            || eigenvalues.iter().any(|l| !l.is_finite())
        {
            return Err(invalid(
                "eigenvalues",
                "need 0 < λ₀ < λ₁ < … (spectral gap)",
            ));
        }
        if position.len() != n || position.iter().any(|r| r.len() != n) {
            return Err(invalid("position", format!("need a {n} × {n} matrix")));
        }
        for a in 0..n {
            for b in 0..a {
                if (position[a][b] - position[b][a]).abs() > 1e-14 * (1.0 + position[a][b].abs()) {
                    return Err(invalid("position", format!("not symmetric at ({a}, {b})")));
                }
            }
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(invalid("alpha", "need 0 < α ≤ 1"));
        }
        if state.len() != n || state.iter().any(|c| !c.is_finite()) {
            return Err(invalid("state", format!("need {n} finite coefficients")));
        }
        Ok(Self {
            eigenvalues,
            position,
            alpha,
            state,
        })
    }

    /// λₙ = n + ½ with the oscillator's x_{n,n+1} = √((n+1)/2) and ψ = e₀.
    pub fn harmonic(n: usize, alpha: f64) -> Result<Self> {
        let ev = (0..n).map(|k| k as f64 + 0.5).collect();
        let mut x = vec![vec![0.0; n]; n];
        for k in 0..n.saturating_sub(1) {
            let v = ((k + 1) as f64 / 2.0).sqrt();
            x[k][k + 1] = v;
            x[k + 1][k] = v;
        }
        Self::new(ev, x, alpha, basis(n, 0))
    }

    /// Oscillator spectrum with every matrix element present:
    /// x_{ab} = 1/(1 + |a − b|)². Tridiagonal x keeps every correlator a
    /// short trigonometric sum; this one couples all levels.
    pub fn dense(n: usize, alpha: f64) -> Result<Self> {
        let ev = (0..n).map(|k| k as f64 + 0.5).collect();
        let x = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| 1.0 / (1.0 + a.abs_diff(b) as f64).powi(2))
                    .collect()
            })
            .collect();
        Self::new(ev, x, alpha, basis(n, 0))
    }

    pub fn with_state(mut self, state: Vec<C64>) -> Result<Self> {
        if state.len() != self.len() {
            return Err(invalid("state", "length differs from the truncation"));
        }
        self.state = state;
        Self::new(self.eigenvalues, self.position, self.alpha, self.state)
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// λₙ^α, the frequencies of U(t).
    pub fn frequencies(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .map(|l| l.powf(self.alpha))
            .collect()
    }

    pub fn state_norm(&self) -> f64 {
        self.state.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

pub fn basis(n: usize, k: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); n];
    if k < n {
        v[k] = C64::new(1.0, 0.0);
    }
    v
}

/// Normalized vector with coefficients e^{-εn}: slowly decaying, so the
/// correlators it probes look rough until h drops below about ε.
pub fn rough_vector(n: usize, eps: f64) -> Vec<C64> {
    let v: Vec<f64> = (0..n).map(|k| (-eps * k as f64).exp()).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| C64::new(x / norm, 0.0)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QmRung {
    pub h: f64,
    pub quadrature: f64,
    pub closed: f64,
    pub rel_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QmProfile {
    pub t0: f64,
    pub eta: f64,
    pub window: f64,
    pub rungs: Vec<QmRung>,
    pub max_rel_err: f64,
    /// Decay fit of the quadrature norms.
    pub fit: DecayFit,
}

/// Half-width of the t-window used when none is given.
pub const DEFAULT_QM_WINDOW: f64 = 8.0;

/// ‖T_h(U(t)ψ)(t₀, η)‖ two ways. The quadrature integrates
/// e^{-(t−t₀)²/2h} e^{-iωt} e^{-i(t−t₀)η/h} per level over [t₀ − W, t₀ + W],
/// with the line moved to Im(t − t₀) = −(hω + η), through the saddle. On the
/// real line the integrand is O(1) while the result can be e^{-30} and
/// below, which double precision cannot resolve; the shifted line carries
/// no cancellation. The closed form is α_h√(2πh)(Σ|cₙ|²e^{-(hλₙ^α+η)²/h})^{1/2}.
pub fn qm_fbi_profile(
    model: &TruncatedQM,
    t0: f64,
    eta: f64,
    ladder: &HLadder,
    window: f64,
) -> Result<QmProfile> {
    if !(t0.is_finite() && eta.is_finite()) {
        return Err(Error::NonFinite("qm_fbi_profile"));
    }
    let norm = model.state_norm();
    if !((norm - 1.0).abs() < 1e-10) {
        return Err(invalid(
            "state",
            format!("state must be normalized, has norm {norm}"),
        ));
    }
    let need = window_radius(ladder.h_max());
    if !(window >= need) {
        return Err(Error::WindowTooSmall(format!(
            "half-width {window} below the Gaussian reach {need:.3} at h = {}",
            ladder.h_max()
        )));
    }
    let freqs = model.frequencies();
    let i = C64::new(0.0, 1.0);
    let rungs: Vec<QmRung> = ladder
        .rungs()
        .iter()
        .map(|&h| {
            let pre = alpha_h(h, 1);
            let mut quad_sq = 0.0;
            let mut closed_sq = 0.0;
            for (c, &om) in model.state.iter().zip(&freqs) {
                if c.norm_sqr() == 0.0 {
                    continue;
                }
                let shift = C64::new(0.0, -(h * om + eta));
                let panels = (2.0 * window / h.sqrt()).ceil() as usize;
                let integral = gl_composite(-window, window, panels, 16, |u| {
                    let s = shift + u;
                    let t = s + t0;
                    (-(s * s) / (2.0 * h) - i * om * t - i * s * eta / h).exp()
                });
                quad_sq += (pre * c * integral).norm_sqr();
                closed_sq += c.norm_sqr() * (-(h * om + eta).powi(2) / h).exp();
            }
            let quadrature = quad_sq.sqrt();
            let closed = pre * (2.0 * PI * h).sqrt() * closed_sq.sqrt();
            let rel_err = if closed > 0.0 {
                (quadrature - closed).abs() / closed
            } else {
                quadrature
            };
            QmRung {
                h,
                quadrature,
                closed,
                rel_err,
            }
        })
        .collect();
    let max_rel_err = rungs.iter().map(|r| r.rel_err).fold(0.0, f64::max);
    let samples: Vec<(f64, f64)> = rungs.iter().map(|r| (r.h, r.quadrature)).collect();
    let fit = fit_decay(
        &samples,
        crate::phase_core::DEFAULT_DELTA_MIN,
        crate::phase_core::DEFAULT_RHO_MIN,
    )?;
    Ok(QmProfile {
        t0,
        eta,
        window,
        rungs,
        max_rel_err,
        fit,
    })
}

/// Σ aⱼ e^{i⟨ω, t⟩} form of ⟨φ, x(t₁)···x(tₘ)ψ⟩. With x(t) = U(−t)xU(t),
/// the chain a₀ → a₁ → … → aₘ (a₀ paired with φ, aₘ with ψ) contributes
/// φ̄_{a₀} x_{a₀a₁}···x_{aₘ₋₁aₘ} c_{aₘ} with ωⱼ = λ_{aⱼ₋₁}^α − λ_{aⱼ}^α.
pub fn correlator_terms(
    model: &TruncatedQM,
    probe: &[C64],
    m: usize,
) -> Result<Vec<(Vec<f64>, C64)>> {
    let n = model.len();
    if !(1..=3).contains(&m) {
        return Err(invalid("m", "correlators are built for m ∈ {1, 2, 3}"));
    }
    if probe.len() != n {
        return Err(invalid("probe", "length differs from the truncation"));
    }
    let freqs = model.frequencies();
    // Partial chains ending at a given level: (frequencies so far, amplitude).
    let mut chains: Vec<(usize, Vec<f64>, C64)> = (0..n)
        .filter(|&a| probe[a].norm_sqr() > 0.0)
        .map(|a| (a, Vec::new(), probe[a].conj()))
        .collect();
    for _ in 0..m {
        let mut next = Vec::new();
        for (a, om, amp) in &chains {
            for b in 0..n {
                let x = model.position[*a][b];
                if x == 0.0 {
                    continue;
                }
                let mut o = om.clone();
                o.push(freqs[*a] - freqs[b]);
                next.push((b, o, amp * x));
            }
        }
        chains = next;
    }
    let mut merged: HashMap<Vec<u64>, (Vec<f64>, C64)> = HashMap::new();
    for (a, om, amp) in chains {
        let c = model.state[a];
        if c.norm_sqr() == 0.0 {
            continue;
        }
        let key = om
            .iter()
            .map(|w| ((w * 1e9).round() as i64) as u64)
            .collect();
        let e = merged.entry(key).or_insert((om, C64::new(0.0, 0.0)));
        e.1 += amp * c;
    }
    let mut terms: Vec<(Vec<f64>, C64)> = merged
        .into_values()
        .filter(|t| t.1.norm_sqr() > 0.0)
        .collect();
    terms.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite frequencies"));
    Ok(terms)
}

/// A flagged direction outside the allowed cone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub point: Vec<f64>,
    pub direction: Vec<f64>,
    /// Angle outside the nested cone, radians; 0 in one dimension.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorReport {
    pub m: usize,
    pub terms: usize,
    pub report: WfaReport,
    /// Flagged directions whose rightmost nonzero entry is negative.
    pub rightmost_findings: Vec<Finding>,
    /// Flagged directions more than one angular bin outside
    /// {ξₘ ≥ 0, ξₘ₋₁ + ξₘ ≥ 0, …}.
    pub cone_findings: Vec<Finding>,
    pub flagged: usize,
}

impl CorrelatorReport {
    pub fn contained(&self) -> bool {
        self.rightmost_findings.is_empty() && self.cone_findings.is_empty()
    }
}

/// Whether every tail sum ξⱼ + … + ξₘ is ≥ 0.
pub fn in_nested_cone(xi: &[f64]) -> bool {
    let mut s = 0.0;
    xi.iter().rev().all(|v| {
        s += v;
        s >= -1e-12
    })
}

/// The one-dimensional future cone [0, ∞) applied to the
/// rightmost nonzero covector of a tuple.
pub fn rightmost_verdict(points: &[f64], xi: &[f64]) -> bool {
    let tuple: Vec<(Vec<f64>, Vec<f64>)> = points
        .iter()
        .zip(xi)
        .map(|(&t, &x)| (vec![t], vec![x]))
        .collect();
    rightmost_future_causal(&tuple, &ConeModel::minkowski(0))
}

/// Angle by which a 2-d direction lies outside the nested cone, which is the
/// arc [0, 3π/4] of angles atan2(ξ₂, ξ₁).
fn nested_excess_2d(xi: &[f64]) -> f64 {
    let a = xi[1].atan2(xi[0]);
    let hi = 0.75 * PI;
    if (-1e-12..=hi + 1e-12).contains(&a) {
        return 0.0;
    }
    let a = if a < 0.0 { a + 2.0 * PI } else { a };
    (a - hi).min(2.0 * PI - a)
}

/// Detects WF_a of the m-point correlator on R^m and checks every flagged
/// direction against the future cones.
pub fn qm_correlator_wfa(
    model: &TruncatedQM,
    probe: &[C64],
    m: usize,
    base_points: &[Vec<f64>],
    dirs: Directions,
    cfg: &ScanConfig,
) -> Result<CorrelatorReport> {
    if m > 2 {
        return Err(invalid("m", "direction scans run on R¹ and R²"));
    }
    if dirs.dim() != m {
        return Err(invalid(
            "directions",
            format!("{m}-point correlators need {m}-d directions"),
        ));
    }
    let terms = correlator_terms(model, probe, m)?;
    let n_terms = terms.len();
    let src = FbiSource::Trig { dim: m, terms };
    let report = wfa_detect(&src, base_points, dirs, cfg)?;
    let bin = match dirs {
        Directions::Line => 0.0,
        Directions::Circle(n) => 2.0 * PI / n as f64,
    };
    let mut rightmost_findings = Vec::new();
    let mut cone_findings = Vec::new();
    let mut flagged = 0;
    for (p, point) in report.base_points.iter().enumerate() {
        for d in report.flagged_directions(p) {
            flagged += 1;
            let xi = &report.directions[d];
            let finding = |excess| Finding {
                point: point.clone(),
                direction: xi.clone(),
                excess,
            };
            if !rightmost_verdict(point, xi) {
                rightmost_findings.push(finding(0.0));
            }
            let excess = if m == 1 {
                if in_nested_cone(xi) {
                    0.0
                } else {
                    PI
                }
            } else {
                nested_excess_2d(xi)
            };
            if excess > bin + 1e-9 {
                cone_findings.push(finding(excess));
            }
        }
    }
    Ok(CorrelatorReport {
        m,
        terms: n_terms,
        report,
        rightmost_findings,
        cone_findings,
        flagged,
    })
}
