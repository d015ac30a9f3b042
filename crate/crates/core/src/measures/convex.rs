//! Absolutely continuous measures whose densities are cosine series.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of indices past the start on which convexity is verified numerically.
pub const CONVEXITY_PROBE: usize = 10_000;

/// Relative safety margin applied to numerically computed shift constants.
pub const SHIFT_MARGIN: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ConvexRule {
    /// `a_n = 1 / ln(n + offset)`, `offset > 1`.
    InvLog {
        #[serde(default = "default_offset")]
        offset: f64,
    },
    /// `a_n = (1 + n)^(-exponent)`.
    Power { exponent: f64 },
    /// `a_n = ratio^n`, `0 < ratio < 1`.
    Geometric { ratio: f64 },
}

fn default_offset() -> f64 {
    2.0
}

/// Positive convex null sequence `(a_n)_{n >= start}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexSeq {
    #[serde(flatten)]
    pub rule: ConvexRule,
    #[serde(default)]
    pub start: usize,
}

impl ConvexSeq {
    pub fn inv_log() -> Self {
        ConvexSeq {
            rule: ConvexRule::InvLog { offset: 2.0 },
            start: 0,
        }
    }

    pub fn power(exponent: f64) -> Self {
        ConvexSeq {
            rule: ConvexRule::Power { exponent },
            start: 0,
        }
    }

    pub fn geometric(ratio: f64) -> Self {
        ConvexSeq {
            rule: ConvexRule::Geometric { ratio },
            start: 0,
        }
    }

    pub fn starting_at(mut self, start: usize) -> Self {
        self.start = start;
        self
    }

    /// Value from the rule, for `n >= start`.
    pub fn rule_value(&self, n: usize) -> f64 {
        let nf = n as f64;
        match self.rule {
            ConvexRule::InvLog { offset } => 1.0 / (nf + offset).ln(),
            ConvexRule::Power { exponent } => (1.0 + nf).powf(-exponent),
            ConvexRule::Geometric { ratio } => ratio.powf(nf),
        }
    }

    /// Value with the linear backward extension below `start`.
    pub fn value(&self, n: usize) -> f64 {
        if n >= self.start {
            return self.rule_value(n);
        }
        let a0 = self.rule_value(self.start);
        let a1 = self.rule_value(self.start + 1);
        a0 + (self.start - n) as f64 * (a0 - a1)
    }

    pub fn second_difference(&self, n: usize) -> f64 {
        self.value(n) + self.value(n + 2) - 2.0 * self.value(n + 1)
    }

    /// Check positivity, monotonicity and convexity on a finite window.
    pub fn validate(&self) -> Result<()> {
        match self.rule {
            ConvexRule::InvLog { offset } if offset <= 1.0 => {
                return Err(Error::validation("convex_ac: inv_log offset must exceed 1"))
            }
            ConvexRule::Power { exponent } if exponent <= 0.0 => {
                return Err(Error::validation("convex_ac: power exponent must be positive"))
            }
            ConvexRule::Geometric { ratio } if !(0.0 < ratio && ratio < 1.0) => {
                return Err(Error::validation("convex_ac: geometric ratio must lie in (0, 1)"))
            }
            _ => {}
        }
        for n in self.start..self.start + CONVEXITY_PROBE {
            let a = self.value(n);
            // geometric rules leave the normal range long before the probe ends
            if a > 0.0 && a < 1e-280 {
                break;
            }
            if !(a > 0.0) || self.value(n + 1) > a {
                return Err(Error::validation(format!(
                    "convex_ac: sequence must be positive and non-increasing (index {n})"
                )));
            }
            let d2 = self.second_difference(n);
            // rounding noise on nearly linear stretches
            if d2 < -1e-15 * a {
                return Err(Error::ConvexityViolation { index: n, value: d2 });
            }
        }
        Ok(())
    }

    /// Low-frequency polynomial `a_0/2 + sum_{1<=n<start} a_n cos(2 pi n x)` of
    /// the extended sequence, sampled on `m` points.
    pub fn head_polynomial(&self, m: usize) -> Vec<f64> {
        (0..m)
            .map(|i| {
                let x = i as f64 / m as f64;
                self.value(0) / 2.0
                    + (1..self.start)
                        .map(|n| self.value(n) * (2.0 * PI * n as f64 * x).cos())
                        .sum::<f64>()
            })
            .collect()
    }
}

/// Compiled convex measure: `d nu = f / ||f||_1 dx` with
/// `f = C + sum_{n >= start} a_n cos(2 pi n x)` (and `C = a_0 / 2` when `start = 0`).
#[derive(Clone, Debug)]
pub struct ConvexMeasure {
    pub seq: ConvexSeq,
    /// Zeroth Fourier coefficient of the unnormalised density.
    pub constant: f64,
}

impl ConvexMeasure {
    pub fn new(seq: ConvexSeq) -> Result<Self> {
        seq.validate()?;
        let constant = if seq.start == 0 {
            seq.value(0) / 2.0
        } else {
            let m = (64 * seq.start).max(1024);
            let sup = seq
                .head_polynomial(m)
                .into_iter()
                .fold(0.0f64, |acc, v| acc.max(v.abs()));
            sup * (1.0 + SHIFT_MARGIN)
        };
        Ok(ConvexMeasure { seq, constant })
    }

    pub fn coefficient(&self, n: i64) -> f64 {
        let k = n.unsigned_abs() as usize;
        if k == 0 {
            1.0
        } else if k < self.seq.start {
            0.0
        } else {
            self.seq.value(k) / (2.0 * self.constant)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CosineRule {
    /// `b_n = 1 / ln n` on odd `n >= 3`.
    OddInvLog,
    /// `b_n = 1 / ln n` on even `n >= 2`.
    EvenInvLog,
}

impl CosineRule {
    pub fn value(&self, n: u64) -> f64 {
        let parity = match self {
            CosineRule::OddInvLog => n >= 3 && !n.is_multiple_of(2),
            CosineRule::EvenInvLog => n >= 2 && n.is_multiple_of(2),
        };
        if parity {
            1.0 / (n as f64).ln()
        } else {
            0.0
        }
    }
}

/// Density `shift + sum_n b_n cos(2 pi n x)` normalised to a probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CosineSeries {
    pub rule: CosineRule,
    pub shift: f64,
}

impl CosineSeries {
    pub fn validate(&self) -> Result<()> {
        let largest = (2..4).map(|n| self.rule.value(n)).fold(0.0, f64::max);
        if !(self.shift > 0.0) || largest > 2.0 * self.shift {
            return Err(Error::validation(
                "cosine_series: shift must be positive and dominate the coefficients",
            ));
        }
        Ok(())
    }

    pub fn coefficient(&self, n: i64) -> f64 {
        if n == 0 {
            1.0
        } else {
            self.rule.value(n.unsigned_abs()) / (2.0 * self.shift)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules_are_convex() {
        for seq in [
            ConvexSeq::inv_log(),
            ConvexSeq::power(0.5),
            ConvexSeq::geometric(0.5),
            ConvexSeq::inv_log().starting_at(5),
        ] {
            seq.validate().unwrap();
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ConvexSeq::geometric(1.5).validate().is_err());
        assert!(ConvexSeq::power(-1.0).validate().is_err());
    }

    #[test]
    fn backward_extension_is_linear() {
        let seq = ConvexSeq::power(0.5).starting_at(3);
        let d = seq.value(3) - seq.value(4);
        assert!((seq.value(2) - seq.value(3) - d).abs() < 1e-15);
        assert!((seq.value(0) - seq.value(3) - 3.0 * d).abs() < 1e-14);
        assert!(seq.second_difference(1).abs() < 1e-14);
    }

    #[test]
    fn coefficients_from_start_zero() {
        let m = ConvexMeasure::new(ConvexSeq::inv_log()).unwrap();
        assert_eq!(m.coefficient(0), 1.0);
        let want = (2.0f64).ln() / (12.0f64).ln();
        assert!((m.coefficient(10) - want).abs() < 1e-15);
        assert_eq!(m.coefficient(-10), m.coefficient(10));
    }

    #[test]
    fn shifted_start_has_gap() {
        let m = ConvexMeasure::new(ConvexSeq::inv_log().starting_at(4)).unwrap();
        assert_eq!(m.coefficient(2), 0.0);
        assert!(m.coefficient(4) > 0.0 && m.coefficient(4) <= 1.0);
    }
}
