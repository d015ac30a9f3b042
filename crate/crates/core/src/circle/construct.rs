//! Non-negative densities from convex coefficient sequences, and the
//! odd/even cosine-series pair whose convolution is Lebesgue measure.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::GridFunction;
use crate::error::{Error, Result};
use crate::measures::{ConvexMeasure, ConvexSeq, CosineRule, CosineSeries, SpectralMeasure, SHIFT_MARGIN};

/// Longest linear continuation we are willing to materialise.
pub const MAX_SUPPORT: usize = 1 << 22;

/// Density `C + sum_{n >= start} a_n cos(2 pi n x)` sampled on a grid.
#[derive(Clone, Debug)]
pub struct NonnegDensity {
    /// Unnormalised density; its coefficients are `C` at 0 and `a~_n / 2` at `+-n`.
    pub grid: GridFunction,
    /// Zeroth coefficient, equal to the `L^1` norm of the density.
    pub constant: f64,
    /// Coefficients agree with `a_n / 2` for `n <= truncation`.
    pub truncation: usize,
    /// Last non-zero coefficient of the linear continuation.
    pub support_end: usize,
    pub min_sample: f64,
}

impl NonnegDensity {
    /// Samples of the probability density `f / ||f||_1`.
    pub fn probability_samples(&self) -> Vec<f64> {
        self.grid.samples().iter().map(|z| z.re / self.constant).collect()
    }
}

/// Sequence used by the construction: the (backward-extended) convex
/// sequence up to `truncation`, then its tangent line down to zero.
///
/// The continuation keeps every second difference non-negative, so
/// `a~_0/2 + sum a~_n cos = (1/2) sum (n+1) D2 a~_n K_n` is a finite
/// non-negative combination of Fejer kernels.
pub fn continued_sequence(seq: &ConvexSeq, truncation: usize) -> Result<Vec<f64>> {
    let t = truncation.max(seq.start + 1).max(1);
    let mut a: Vec<f64> = (0..=t).map(|n| seq.value(n)).collect();
    let slope = a[t] - a[t - 1];
    if a[t] > 0.0 {
        if !(slope < 0.0) {
            return Err(Error::Construction(format!(
                "sequence is flat at n = {t}; cannot close the tail"
            )));
        }
        let extra = (a[t] / -slope).floor() as usize;
        if t + extra > MAX_SUPPORT {
            return Err(Error::Construction(format!(
                "linear continuation from n = {t} needs {extra} more terms; lower the truncation"
            )));
        }
        for k in 1..=extra {
            let v = a[t] + k as f64 * slope;
            if v <= 0.0 {
                break;
            }
            a.push(v);
        }
    }
    Ok(a)
}

/// Non-negative density whose coefficients are proportional to `a_n`.
pub fn build_nonneg_from_convex(seq: &ConvexSeq, truncation: usize, m: usize) -> Result<NonnegDensity> {
    let measure = ConvexMeasure::new(seq.clone())?;
    let a = continued_sequence(seq, truncation)?;
    let end = a.len() - 1;
    let start = seq.start;
    let constant = measure.constant;
    let grid_len = m.max((2 * end + 2).next_power_of_two());
    let grid = GridFunction::from_coefficient_fn(end, grid_len, |n| {
        let k = n.unsigned_abs() as usize;
        let v = if k == 0 {
            constant
        } else if k < start {
            0.0
        } else {
            a[k] / 2.0
        };
        Complex64::new(v, 0.0)
    })?;
    let min_sample = grid.samples().iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    Ok(NonnegDensity {
        grid,
        constant,
        truncation: truncation.max(start + 1),
        support_end: end,
        min_sample,
    })
}

/// Direct Fejer-kernel evaluation of `(1/2) sum_n (n+1) D2 a_n K_n(x)` for a
/// finitely supported sequence; used as an independent check of the FFT route.
pub fn fejer_sum(a: &[f64], x: f64) -> f64 {
    let get = |n: usize| a.get(n).copied().unwrap_or(0.0);
    (0..a.len())
        .map(|n| {
            let d2 = get(n) + get(n + 2) - 2.0 * get(n + 1);
            (n + 1) as f64 * d2 * super::kernels::fejer_value(n, x)
        })
        .sum::<f64>()
        / 2.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairSide {
    pub rule: CosineRule,
    /// Minimum of the degree-`D` cosine sum on a 4x refined grid, before shifting.
    pub raw_min: f64,
    pub shift: f64,
    /// Minimum of the shifted degree-`D` density on a 16x refined grid.
    pub refined_min: f64,
    /// Shift the same recipe produces at degree `2D`; growth signals an
    /// unbounded infinite series.
    pub shift_at_double_degree: f64,
}

/// The two measures and their degree-`D` densities.
#[derive(Clone, Debug)]
pub struct ProductPair {
    pub degree: usize,
    pub nu1: SpectralMeasure,
    pub nu2: SpectralMeasure,
    pub density1: GridFunction,
    pub density2: GridFunction,
    pub side1: PairSide,
    pub side2: PairSide,
}

impl ProductPair {
    /// Largest `|(nu1 * nu2)^(n) - delta_{n,0}|` over `|n| <= n_max`, from the oracles.
    pub fn convolution_defect(&self, n_max: i64) -> Result<f64> {
        let conv = SpectralMeasure::convolution(&self.nu1, &self.nu2);
        let mut worst: f64 = 0.0;
        for n in -n_max..=n_max {
            let want = if n == 0 { 1.0 } else { 0.0 };
            worst = worst.max((conv.coefficient(n)? - want).norm());
        }
        Ok(worst)
    }

    /// Same defect computed from the FFT coefficients of the grid densities.
    pub fn grid_convolution_defect(&self, n_max: i64) -> f64 {
        let n_max = n_max.min(self.degree as i64);
        let c1 = self.density1.coefficient(0).re;
        let c2 = self.density2.coefficient(0).re;
        (-n_max..=n_max)
            .map(|n| {
                let v = self.density1.coefficient(n) * self.density2.coefficient(n) / (c1 * c2);
                let want = if n == 0 { 1.0 } else { 0.0 };
                (v - want).norm()
            })
            .fold(0.0, f64::max)
    }
}

fn cosine_sum(rule: &CosineRule, degree: usize, m: usize) -> Result<GridFunction> {
    GridFunction::from_coefficient_fn(degree, m, |n| Complex64::new(rule.value(n.unsigned_abs()) / 2.0, 0.0))
}

fn min_re(g: &GridFunction) -> f64 {
    g.samples().iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
}

fn side(rule: CosineRule, degree: usize, m: usize) -> Result<(PairSide, GridFunction)> {
    let raw = cosine_sum(&rule, degree, m)?;
    let raw_min = min_re(&raw.resample(4 * m)?);
    let largest = rule.value(2).max(rule.value(3));
    let shift = ((1.0 + SHIFT_MARGIN) * (-raw_min)).max(largest / 2.0);
    let density = GridFunction::from_coefficient_fn(degree, m, |n| {
        if n == 0 {
            Complex64::new(shift, 0.0)
        } else {
            raw.coefficient(n)
        }
    })?;
    let refined_min = min_re(&density.resample(16 * m)?);
    if refined_min < -1e-9 * shift {
        return Err(Error::Construction(format!(
            "{rule:?}: shifted density dips to {refined_min:e} on the refined grid"
        )));
    }
    let doubled = cosine_sum(&rule, 2 * degree, 2 * m)?;
    let shift_at_double_degree = ((1.0 + SHIFT_MARGIN) * (-min_re(&doubled.resample(8 * m)?))).max(largest / 2.0);
    Ok((
        PairSide {
            rule,
            raw_min,
            shift,
            refined_min,
            shift_at_double_degree,
        },
        density,
    ))
}

/// Odd-frequency and even-frequency `1/log n` cosine series, each shifted by
/// a numerically determined constant computed from its degree-`D` truncation.
///
/// The oracles `nu1`, `nu2` carry the full infinite coefficient sequences
/// normalised by those shifts; `density1`, `density2` are the degree-`D`
/// probability densities (unnormalised: zeroth coefficient = shift).
pub fn product_pair(degree: usize) -> Result<ProductPair> {
    if degree < 4 {
        return Err(Error::validation("product_pair: degree must be at least 4"));
    }
    let m = (16 * degree).next_power_of_two();
    let (side1, density1) = side(CosineRule::OddInvLog, degree, m)?;
    let (side2, density2) = side(CosineRule::EvenInvLog, degree, m)?;
    let nu1 = SpectralMeasure::cosine_series(CosineSeries {
        rule: CosineRule::OddInvLog,
        shift: side1.shift,
    })?;
    let nu2 = SpectralMeasure::cosine_series(CosineSeries {
        rule: CosineRule::EvenInvLog,
        shift: side2.shift,
    })?;
    Ok(ProductPair {
        degree,
        nu1,
        nu2,
        density1,
        density2,
        side1,
        side2,
    })
}
