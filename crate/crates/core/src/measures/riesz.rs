//! Riesz products over lacunary frequencies.
//!
//! For frequencies with `n_{k+1} >= q n_k`, `q > 3`, every integer has at
//! most one expansion `m = sum eps_j n_j` with `eps_j` in `{-1, 0, 1}`, and
//! the Fourier-Stieltjes coefficient of the product measure at `m` is
//! `prod (a_j / 2)^{|eps_j|}` (zero when no expansion exists).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest frequency we are willing to materialise; keeps `sum n_k` inside `i64`.
const FREQUENCY_CAP: u64 = 1 << 60;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum FrequencyRule {
    /// `n_k = first * ratio^(k-1)`.
    Geometric { first: u64, ratio: u64 },
    /// Explicit strictly increasing list; the product has exactly these factors.
    List { values: Vec<u64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum AmplitudeRule {
    /// `a_k = 1 / ln(k + 2)`.
    InvLog,
    Constant { value: f64 },
    /// `a_k = k^(-exponent)`.
    Power { exponent: f64 },
    /// `a_k = ratio^k`.
    Geometric { ratio: f64 },
    List { values: Vec<f64> },
}

impl AmplitudeRule {
    /// Amplitude of the `k`-th factor, `k >= 1`.
    pub fn amplitude(&self, k: usize) -> Option<f64> {
        let kf = k as f64;
        match self {
            AmplitudeRule::InvLog => Some(1.0 / (kf + 2.0).ln()),
            AmplitudeRule::Constant { value } => Some(*value),
            AmplitudeRule::Power { exponent } => Some(kf.powf(-exponent)),
            AmplitudeRule::Geometric { ratio } => Some(ratio.powi(k as i32)),
            AmplitudeRule::List { values } => values.get(k - 1).copied(),
        }
    }
}

/// Parameters of a Riesz product `prod (1 + a_k cos(2 pi n_k x))`.
///
/// With `depth = Some(K)` (or a finite frequency list) the measure is the
/// finite product of the first `K` factors, an absolutely continuous
/// probability. Otherwise it is the infinite product, whose coefficients are
/// evaluated exactly by taking enough factors for the requested frequency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RieszSpec {
    pub frequencies: FrequencyRule,
    pub amplitudes: AmplitudeRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
}

impl RieszSpec {
    pub fn geometric(first: u64, ratio: u64, amplitudes: AmplitudeRule) -> Self {
        RieszSpec {
            frequencies: FrequencyRule::Geometric { first, ratio },
            amplitudes,
            depth: None,
        }
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = Some(depth);
        self
    }
}

/// Validated, materialised Riesz product.
#[derive(Clone, Debug)]
pub struct RieszProduct {
    frequencies: Vec<i64>,
    amplitudes: Vec<f64>,
    /// Whether the product stops after `frequencies.len()` factors.
    finite: bool,
    ratio: f64,
}

impl RieszProduct {
    pub fn new(spec: &RieszSpec) -> Result<Self> {
        let mut freqs: Vec<u64> = match &spec.frequencies {
            FrequencyRule::Geometric { first, ratio } => {
                if *first == 0 {
                    return Err(Error::validation("riesz: first frequency must be positive"));
                }
                if *ratio <= 3 {
                    return Err(Error::validation(format!(
                        "riesz: lacunarity ratio {ratio} must be > 3"
                    )));
                }
                let mut out = vec![*first];
                while let Some(next) = out.last().unwrap().checked_mul(*ratio) {
                    if next > FREQUENCY_CAP {
                        break;
                    }
                    out.push(next);
                }
                out
            }
            FrequencyRule::List { values } => values.clone(),
        };
        let mut finite = matches!(spec.frequencies, FrequencyRule::List { .. });
        if let Some(depth) = spec.depth {
            if depth > freqs.len() {
                return Err(Error::validation(format!(
                    "riesz: depth {depth} exceeds the {} available factors",
                    freqs.len()
                )));
            }
            freqs.truncate(depth);
            finite = true;
        }
        if freqs.is_empty() {
            return Err(Error::validation("riesz: no frequencies"));
        }
        if freqs[0] == 0 || freqs.iter().any(|&f| f > FREQUENCY_CAP) {
            return Err(Error::validation("riesz: frequencies must lie in [1, 2^60]"));
        }
        let mut ratio = f64::INFINITY;
        for w in freqs.windows(2) {
            let r = w[1] as f64 / w[0] as f64;
            // q > 3 is equivalent to n_{k+1} > 3 n_k for integers.
            if w[1] <= 3 * w[0] {
                return Err(Error::validation(format!(
                    "riesz: lacunarity violated, {} / {} = {r} is not > 3",
                    w[1], w[0]
                )));
            }
            ratio = ratio.min(r);
        }
        let mut amplitudes = Vec::with_capacity(freqs.len());
        for k in 1..=freqs.len() {
            let a = spec.amplitudes.amplitude(k).ok_or_else(|| {
                Error::validation(format!("riesz: missing amplitude for factor {k}"))
            })?;
            if !(a.is_finite() && a.abs() <= 1.0 && a != 0.0) {
                return Err(Error::validation(format!(
                    "riesz: amplitude a_{k} = {a} must lie in [-1, 1] \\ {{0}}"
                )));
            }
            amplitudes.push(a);
        }
        Ok(RieszProduct {
            frequencies: freqs.into_iter().map(|f| f as i64).collect(),
            amplitudes,
            finite,
            ratio,
        })
    }

    pub fn frequencies(&self) -> &[i64] {
        &self.frequencies
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn is_finite(&self) -> bool {
        self.finite
    }

    /// Smallest observed ratio `n_{k+1} / n_k` (infinite for a single factor).
    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    /// Largest `|m|` whose coefficient is determined by the stored factors.
    ///
    /// For a finite product every integer is covered. For the infinite
    /// product we keep one spare factor: any expansion that uses factor
    /// `K + 1` or later has modulus at least `n_{K+1} - sum_{k<=K} n_k`.
    pub fn exact_bound(&self) -> i64 {
        if self.finite {
            return i64::MAX;
        }
        let k = self.frequencies.len();
        let head: i64 = self.frequencies[..k - 1].iter().sum();
        self.frequencies[k - 1] - head - 1
    }

    /// Number of factors needed so that every `|m| <= bound` is represented exactly.
    pub fn depth_for(&self, bound: i64) -> Result<usize> {
        let bound = bound.abs();
        if self.finite {
            return Ok(self.frequencies.len());
        }
        let mut head = 0i64;
        for (k, &f) in self.frequencies.iter().enumerate() {
            if f - head > bound {
                return Ok(k);
            }
            head += f;
        }
        Err(Error::OutOfRange {
            requested: bound,
            bound: self.exact_bound(),
        })
    }

    /// Sign vector of the lacunary expansion of `m`, or `None`.
    ///
    /// The returned vector covers every factor with `n_j <= 2|m|`; beyond
    /// those the signs are necessarily zero.
    pub fn decompose(&self, m: i64) -> Result<Option<Vec<i8>>> {
        if m == 0 {
            return Ok(Some(Vec::new()));
        }
        if m.abs() > self.exact_bound() {
            return Err(Error::OutOfRange {
                requested: m,
                bound: self.exact_bound(),
            });
        }
        let target = m.unsigned_abs() as u128;
        let top = self
            .frequencies
            .iter()
            .take_while(|&&f| f as u128 <= 2 * target)
            .count();
        let mut signs = vec![0i8; top];
        let mut rest = m as i128;
        for j in (0..top).rev() {
            let f = self.frequencies[j] as i128;
            // sum_{i<j} n_i < n_j / 2, so the sign at level j is forced.
            if 2 * rest.abs() > f {
                let s = rest.signum();
                signs[j] = s as i8;
                rest -= s * f;
            }
        }
        if rest != 0 {
            return Ok(None);
        }
        Ok(Some(signs))
    }

    pub fn coefficient(&self, m: i64) -> Result<f64> {
        Ok(match self.decompose(m)? {
            None => 0.0,
            Some(signs) => signs
                .iter()
                .zip(&self.amplitudes)
                .filter(|(s, _)| **s != 0)
                .map(|(_, a)| a / 2.0)
                .product(),
        })
    }

    /// Density of the first `depth` factors at `x`.
    pub fn partial_density(&self, depth: usize, x: f64) -> f64 {
        self.frequencies
            .iter()
            .zip(&self.amplitudes)
            .take(depth)
            .map(|(&n, &a)| {
                let phase = ((n as f64) * x).rem_euclid(1.0);
                1.0 + a * (2.0 * std::f64::consts::PI * phase).cos()
            })
            .product()
    }
}

/// Unique lacunary expansion of `m`, see [`RieszProduct::decompose`].
pub fn riesz_decompose(spec: &RieszSpec, m: i64) -> Result<Option<Vec<i8>>> {
    RieszProduct::new(spec)?.decompose(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn powers_of_four(depth: usize) -> RieszProduct {
        let spec = RieszSpec::geometric(4, 4, AmplitudeRule::Constant { value: 0.5 })
            .with_depth(depth);
        RieszProduct::new(&spec).unwrap()
    }

    #[test]
    fn decompose_small_values() {
        let r = powers_of_four(3);
        assert_eq!(r.decompose(20).unwrap(), Some(vec![1, 1]));
        assert_eq!(r.decompose(12).unwrap(), Some(vec![-1, 1]));
        assert_eq!(r.decompose(-12).unwrap(), Some(vec![1, -1]));
        assert_eq!(r.decompose(0).unwrap(), Some(vec![]));
        assert_eq!(r.decompose(5).unwrap(), None);
    }

    #[test]
    fn coefficient_values() {
        let r = powers_of_four(3);
        assert_eq!(r.coefficient(4).unwrap(), 0.25);
        assert_eq!(r.coefficient(5).unwrap(), 0.0);
        assert_eq!(r.coefficient(0).unwrap(), 1.0);
        assert_eq!(r.coefficient(84).unwrap(), 0.25 * 0.25 * 0.25);
        assert_eq!(r.coefficient(-44).unwrap(), 0.25 * 0.25 * 0.25);
        // beyond the finite product's reach
        assert_eq!(r.coefficient(85).unwrap(), 0.0);
    }

    #[test]
    fn lacunarity_is_enforced() {
        let spec = RieszSpec {
            frequencies: FrequencyRule::List { values: vec![4, 12] },
            amplitudes: AmplitudeRule::Constant { value: 0.5 },
            depth: None,
        };
        assert!(RieszProduct::new(&spec).is_err());
        let spec = RieszSpec {
            frequencies: FrequencyRule::List { values: vec![4, 13] },
            ..spec
        };
        assert!(RieszProduct::new(&spec).is_ok());
    }

    #[test]
    fn amplitudes_are_checked() {
        let spec = RieszSpec::geometric(4, 4, AmplitudeRule::Constant { value: 1.5 });
        assert!(RieszProduct::new(&spec).is_err());
        let spec = RieszSpec::geometric(4, 4, AmplitudeRule::Constant { value: 0.0 });
        assert!(RieszProduct::new(&spec).is_err());
    }

    #[test]
    fn infinite_product_range() {
        let spec = RieszSpec::geometric(4, 4, AmplitudeRule::InvLog);
        let r = RieszProduct::new(&spec).unwrap();
        assert!(!r.is_finite());
        assert!(r.exact_bound() > 1 << 58);
        assert_eq!(r.depth_for(4).unwrap(), 1);
        assert_eq!(r.depth_for(20).unwrap(), 2);
        assert!(matches!(
            r.decompose(i64::MAX),
            Err(Error::OutOfRange { .. })
        ));
    }
}
