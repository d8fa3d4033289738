use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const DEFAULT_DELTA_MIN: f64 = 0.05;
pub const DEFAULT_RHO_MIN: f64 = 0.98;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    ExpSmall,
    NotExpSmall,
    Inconclusive,
}

impl Verdict {
    /// Conservative reading used by the wavefront detectors: anything not
    /// certified small counts as present.
    pub fn flagged(self) -> bool {
        self != Verdict::ExpSmall
    }
}

/// Fit of |g(h)| ≈ C·h^p·e^{-δ/h} over a ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    #[serde(with = "lossless_f64")]
    pub delta_hat: f64,
    #[serde(with = "lossless_f64")]
    pub log_c_hat: f64,
    pub r_squared: f64,
    pub verdict: Verdict,
    /// Exponent of the power-law prefactor absorbed by the fit.
    pub power: f64,
    /// Rungs that survived the underflow cut.
    pub rungs_used: usize,
}

impl DecayFit {
    pub fn is_exp_small(&self) -> bool {
        self.verdict == Verdict::ExpSmall
    }
}

/// Non-finite sentinels survive JSON as strings; finite values use the
/// shortest round-trip representation.
mod lossless_f64 {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(de::Error::custom(format!("bad float sentinel {other}"))),
            },
        }
    }
}

/// Ordinary least squares with intercept; returns coefficients
/// (intercept first) and the coefficient of determination.
fn least_squares(features: &[&[f64]], y: &[f64]) -> (Vec<f64>, f64) {
    let n = y.len();
    let k = features.len() + 1;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let y_mean = mean(y);
    let means: Vec<f64> = features.iter().map(|f| mean(f)).collect();
    // Centred and scaled normal equations keep the 1/h and ln h columns
    // well conditioned.
    let cols: Vec<Vec<f64>> = features
        .iter()
        .zip(&means)
        .map(|(f, m)| f.iter().map(|v| v - m).collect())
        .collect();
    let scale: Vec<f64> = cols
        .iter()
        .map(|c| {
            c.iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt()
                .max(f64::MIN_POSITIVE)
        })
        .collect();
    let m = k - 1;
    let mut a = vec![vec![0.0; m + 1]; m];
    for i in 0..m {
        for j in 0..m {
            a[i][j] = cols[i]
                .iter()
                .zip(&cols[j])
                .map(|(p, q)| p * q)
                .sum::<f64>()
                / (scale[i] * scale[j]);
        }
        a[i][m] = cols[i]
            .iter()
            .zip(y)
            .map(|(p, q)| p * (q - y_mean))
            .sum::<f64>()
            / scale[i];
    }
    let beta_scaled = gauss_solve(a);
    let beta: Vec<f64> = beta_scaled.iter().zip(&scale).map(|(b, s)| b / s).collect();
    let intercept = y_mean - beta.iter().zip(&means).map(|(b, m)| b * m).sum::<f64>();
    let ss_tot: f64 = y.iter().map(|v| (v - y_mean).powi(2)).sum();
    let ss_res: f64 = (0..n)
        .map(|r| {
            let pred = intercept
                + beta
                    .iter()
                    .zip(features)
                    .map(|(b, f)| b * f[r])
                    .sum::<f64>();
            (y[r] - pred).powi(2)
        })
        .sum();
    let r2 = if ss_tot <= f64::EPSILON * f64::EPSILON * n as f64 * (1.0 + y_mean * y_mean) {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    let mut coef = vec![intercept];
    coef.extend(beta);
    (coef, r2)
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn gauss_solve(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let m = a.len();
    for c in 0..m {
        let p = (c..m)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap_or(c);
        a.swap(c, p);
        let piv = a[c][c];
        if piv.abs() < 1e-14 {
            continue;
        }
        for r in 0..m {
            if r != c {
                let f = a[r][c] / piv;
                for j in c..=m {
                    a[r][j] -= f * a[c][j];
                }
            }
        }
    }
    (0..m)
        .map(|i| {
            if a[i][i].abs() < 1e-14 {
                0.0
            } else {
                a[i][m] / a[i][i]
            }
        })
        .collect()
}

/// Decides whether a magnitude sequence over an h-ladder is exponentially
/// small.
///
/// The main model is ln m = c − δ/h + p·ln h. The free power p absorbs the
/// polynomial prefactors that weights and normalisations put in front of
/// e^{-δ/h}; without it a two-parameter fit of √h·e^{-δ/h} overestimates δ by
/// about 10% on the default ladder.
pub fn fit_decay(samples: &[(f64, f64)], delta_min: f64, rho_min: f64) -> Result<DecayFit> {
    if samples.len() < 8 {
        return Err(invalid(
            "samples",
            format!("{} samples, need at least 8", samples.len()),
        ));
    }
    if samples
        .iter()
        .any(|(h, m)| !h.is_finite() || !m.is_finite())
    {
        return Err(Error::NonFinite("fit_decay samples"));
    }
    if samples.iter().any(|(h, m)| *h <= 0.0 || *m < 0.0) {
        return Err(invalid(
            "samples",
            "h must be positive and magnitudes non-negative",
        ));
    }
    let mut s: Vec<(f64, f64)> = samples.to_vec();
    s.sort_by(|a, b| b.0.total_cmp(&a.0));
    if s.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(invalid("samples", "duplicate h"));
    }

    let (h_star, m_star) = s
        .iter()
        .copied()
        .fold((0.0, 0.0), |acc, p| if p.1 > acc.1 { p } else { acc });
    if m_star == 0.0 {
        return Ok(DecayFit {
            delta_hat: f64::INFINITY,
            log_c_hat: f64::NEG_INFINITY,
            r_squared: 1.0,
            verdict: Verdict::ExpSmall,
            power: 0.0,
            rungs_used: 0,
        });
    }
    let thr = 100.0 * f64::EPSILON * m_star;
    let kept: Vec<(f64, f64)> = s.iter().copied().filter(|p| p.1 > thr).collect();

    if kept.len() < 5 {
        // Underflow envelope: every rung below h* that vanished bounds δ from below.
        let bound = s
            .iter()
            .filter(|(h, m)| *m <= thr && *h < h_star)
            .map(|(h, _)| (m_star / thr).ln() / (1.0 / h - 1.0 / h_star))
            .fold(f64::NAN, f64::max);
        let (delta_hat, verdict) = if bound.is_nan() {
            (0.0, Verdict::Inconclusive)
        } else if bound >= delta_min {
            (bound, Verdict::ExpSmall)
        } else {
            (bound, Verdict::Inconclusive)
        };
        return Ok(DecayFit {
            delta_hat,
            log_c_hat: m_star.ln() + delta_hat / h_star,
            r_squared: 1.0,
            verdict,
            power: 0.0,
            rungs_used: kept.len(),
        });
    }

    let y: Vec<f64> = kept.iter().map(|p| p.1.ln()).collect();
    let neg_inv: Vec<f64> = kept.iter().map(|p| -1.0 / p.0).collect();
    let log_h: Vec<f64> = kept.iter().map(|p| p.0.ln()).collect();

    let (full, r2_full) = least_squares(&[&neg_inv, &log_h], &y);
    let (_, r2_exp) = least_squares(&[&neg_inv], &y);
    let (_, r2_poly) = least_squares(&[&log_h], &y);

    let delta = full[1].max(0.0);
    let verdict = if delta >= delta_min && r2_full >= rho_min {
        Verdict::ExpSmall
    } else if delta < delta_min / 2.0 && r2_poly >= r2_exp {
        Verdict::NotExpSmall
    } else {
        Verdict::Inconclusive
    };
    Ok(DecayFit {
        delta_hat: delta,
        log_c_hat: full[0],
        r_squared: r2_full,
        verdict,
        power: full[2],
        rungs_used: kept.len(),
    })
}
