use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Strictly decreasing scales h_k in (0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct HLadder {
    rungs: Vec<f64>,
}

impl HLadder {
    pub const MIN_RUNGS: usize = 8;

    /// Geometric ladder h_max·ratio^k, k = 0..count.
    pub fn new(h_max: f64, ratio: f64, count: usize) -> Result<Self> {
        if !(h_max > 0.0 && h_max <= 1.0) {
            return Err(invalid("h_max", format!("{h_max} not in (0, 1]")));
        }
        if !(0.5..=0.95).contains(&ratio) {
            return Err(invalid("ratio", format!("{ratio} not in [0.5, 0.95]")));
        }
        if count < Self::MIN_RUNGS {
            return Err(invalid("count", format!("{count} < {}", Self::MIN_RUNGS)));
        }
        // Repeated multiplication rather than powi: powi may be constant-folded
        // with different rounding, and rungs are compared bitwise.
        let rungs = std::iter::successors(Some(h_max), |h| Some(h * ratio))
            .take(count)
            .collect();
        Ok(Self { rungs })
    }

    /// Validates an explicit rung list.
    pub fn from_rungs(rungs: Vec<f64>) -> Result<Self> {
        if rungs.len() < Self::MIN_RUNGS {
            return Err(invalid(
                "rungs",
                format!("{} rungs, need {}", rungs.len(), Self::MIN_RUNGS),
            ));
        }
        if rungs.iter().any(|h| !(*h > 0.0 && *h <= 1.0)) {
            return Err(invalid("rungs", "every rung must lie in (0, 1]"));
        }
        for w in rungs.windows(2) {
            let r = w[1] / w[0];
            if !(0.5 - 1e-12..=0.95 + 1e-12).contains(&r) {
                return Err(invalid(
                    "rungs",
                    format!("consecutive ratio {r} outside [0.5, 0.95]"),
                ));
            }
        }
        Ok(Self { rungs })
    }

    /// h_max = 0.5, ratio 0.8, 16 rungs.
    pub fn default_ladder() -> Self {
        Self::new(0.5, 0.8, 16).expect("default ladder is valid")
    }

    /// Every rung multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Self::from_rungs(self.rungs.iter().map(|h| h * lambda).collect())
    }

    pub fn rungs(&self) -> &[f64] {
        &self.rungs
    }

    pub fn len(&self) -> usize {
        self.rungs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rungs.is_empty()
    }

    pub fn h_min(&self) -> f64 {
        *self.rungs.last().expect("ladder is never empty")
    }

    pub fn h_max(&self) -> f64 {
        self.rungs[0]
    }
}

impl Default for HLadder {
    fn default() -> Self {
        Self::default_ladder()
    }
}

impl TryFrom<Vec<f64>> for HLadder {
    type Error = crate::error::Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::from_rungs(v)
    }
}

impl From<HLadder> for Vec<f64> {
    fn from(l: HLadder) -> Self {
        l.rungs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_rungs() {
        let l = HLadder::new(0.5, 0.8, 12).unwrap();
        assert_eq!(&l.rungs()[..3], &[0.5, 0.4, 0.5 * 0.8 * 0.8]);
        assert!((l.rungs()[2] - 0.32).abs() < 1e-15);
    }

    #[test]
    fn halving_ladder_bottom() {
        let l = HLadder::new(1.0, 0.5, 8).unwrap();
        assert_eq!(l.h_min(), 1.0 / 128.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(HLadder::new(0.5, 0.99, 12).is_err());
        assert!(HLadder::new(1.5, 0.8, 12).is_err());
        assert!(HLadder::new(0.5, 0.8, 7).is_err());
        assert!(HLadder::from_rungs(vec![0.5, 0.4, 0.41, 0.3, 0.2, 0.15, 0.1, 0.08]).is_err());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let l = HLadder::new(0.37, 0.77, 16).unwrap();
        let s = serde_json::to_string(&l).unwrap();
        let back: HLadder = serde_json::from_str(&s).unwrap();
        for (a, b) in l.rungs().iter().zip(back.rungs()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
