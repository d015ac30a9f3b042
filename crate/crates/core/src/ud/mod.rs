//! Uniform distribution mod 1 of `(n_k x)` for `nu`-typical `x`.

pub mod sample;

use std::collections::HashMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::series::{analyze_terms, SeriesConfig, SeriesVerdict};
use crate::error::{Error, Result};
use crate::measures::SpectralMeasure;

pub use sample::{sample, sample_with, SampleOptions, DEFAULT_RIESZ_BOUND};

/// Distinct positive integers `n_1 < n_2 < ...`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SequenceSpec {
    /// `n_k = a + b k`, `k >= 1`.
    Arith { a: i64, b: i64 },
    List { values: Vec<i64> },
    /// Gaps drawn uniformly from `1..=d`, starting at `start`.
    BoundedGap {
        d: u64,
        seed: u64,
        #[serde(default = "one")]
        start: i64,
    },
}

fn one() -> i64 {
    1
}

impl SequenceSpec {
    /// First `n` terms.
    pub fn generate(&self, n: usize) -> Result<Vec<i64>> {
        let out: Vec<i64> = match self {
            SequenceSpec::Arith { a, b } => {
                if *b < 1 || a + b < 1 {
                    return Err(Error::validation("arith sequence: need b >= 1 and a + b >= 1"));
                }
                (1..=n as i64).map(|k| a + b * k).collect()
            }
            SequenceSpec::List { values } => {
                if values.len() < n {
                    return Err(Error::validation(format!(
                        "list sequence has {} terms, {n} requested",
                        values.len()
                    )));
                }
                let mut v = values[..n].to_vec();
                v.sort_unstable();
                if v.first().is_some_and(|x| *x < 1) || v.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::validation("list sequence must hold distinct positive integers"));
                }
                v
            }
            SequenceSpec::BoundedGap { d, seed, start } => {
                if *d < 1 || *start < 1 {
                    return Err(Error::validation("bounded_gap sequence: need d >= 1 and start >= 1"));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut cur = *start;
                (0..n)
                    .map(|i| {
                        if i > 0 {
                            cur += rng.gen_range(1..=*d as i64);
                        }
                        cur
                    })
                    .collect()
            }
        };
        Ok(out)
    }

    /// Declared bound on consecutive gaps, when the rule has one.
    pub fn gap_bound(&self) -> Option<u64> {
        match self {
            SequenceSpec::Arith { b, .. } => Some(*b as u64),
            SequenceSpec::BoundedGap { d, .. } => Some(*d),
            SequenceSpec::List { values } => {
                let mut v = values.clone();
                v.sort_unstable();
                v.windows(2).map(|w| (w[1] - w[0]) as u64).max()
            }
        }
    }
}

fn e(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t.rem_euclid(1.0))
}

/// `S_N(x, m) = (1/N) sum_{k <= N} e(m n_k x)` for precomputed `n_k`.
pub fn weyl_sum_terms(x: f64, m: i64, terms: &[i64]) -> Result<Complex64> {
    if m == 0 {
        return Err(Error::validation("weyl_sum: frequency must be non-zero"));
    }
    if terms.is_empty() {
        return Err(Error::validation("weyl_sum: N must be at least 1"));
    }
    let s: Complex64 = terms.iter().map(|&n| e(((m * n) as f64 * x).rem_euclid(1.0))).sum();
    Ok(s / terms.len() as f64)
}

pub fn weyl_sum(x: f64, m: i64, seq: &SequenceSpec, n: usize) -> Result<Complex64> {
    weyl_sum_terms(x, m, &seq.generate(n)?)
}

/// Star discrepancy `sup_t |#{x_k < t}/N - t|` of points reduced mod 1.
pub fn discrepancy(points: &[f64]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::validation("discrepancy: no points"));
    }
    let mut v: Vec<f64> = points.iter().map(|x| x.rem_euclid(1.0)).collect();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    Ok(v.iter()
        .enumerate()
        .map(|(i, x)| ((i + 1) as f64 / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max))
}

/// `V_N(t) = #{(k, j) : k, j <= N, n_k - n_j = t}`.
pub fn difference_multiplicity(terms: &[i64]) -> HashMap<i64, usize> {
    let mut out = HashMap::new();
    for &a in terms {
        for &b in terms {
            *out.entry(a - b).or_insert(0) += 1;
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapBoundPoint {
    pub n: usize,
    /// `(1/N^3) |sum_{k, j <= N} nu(m (n_k - n_j))|`.
    pub actual: f64,
    /// `(1/N^2) sum_{|t| <= span} |nu(m t)|` from `V_N(t) <= N`.
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelReport {
    pub frequency: i64,
    pub n_max: usize,
    pub series: SeriesVerdict,
    /// Largest imaginary part of a partial sum of the series.
    pub max_imaginary: f64,
    pub fast_path: bool,
    pub gap_bound: Vec<GapBoundPoint>,
}

/// Largest `n_N - n_1` for which the coefficient table is materialised.
const SPAN_LIMIT: i64 = 10_000_000;

/// `sum_N (1/N^3) sum_{k, j <= N} nu(m (n_k - n_j))`, built incrementally.
pub fn del_series(m: &SpectralMeasure, seq: &SequenceSpec, freq: i64, n_max: usize) -> Result<DelReport> {
    if n_max < 2 {
        return Err(Error::validation("del_series: N_max must be at least 2"));
    }
    if freq == 0 {
        return Err(Error::validation("del_series: frequency must be non-zero"));
    }
    let terms = seq.generate(n_max)?;
    let span = terms[n_max - 1] - terms[0];
    if span > SPAN_LIMIT {
        return Err(Error::validation(format!(
            "del_series: n_N - n_1 = {span} exceeds {SPAN_LIMIT}; lower N_max"
        )));
    }
    freq.checked_mul(span)
        .ok_or_else(|| Error::validation("del_series: m (n_N - n_1) overflows"))?;
    // nu(m t) and nu(-m t) for t = 0..=span, kept separate so the imaginary parts are a real check.
    let table: Vec<Complex64> = (0..=span)
        .into_par_iter()
        .map(|t| m.coefficient(freq * t))
        .collect::<Result<_>>()?;
    let mirror: Vec<Complex64> = (0..=span)
        .into_par_iter()
        .map(|t| m.coefficient(-freq * t))
        .collect::<Result<_>>()?;
    let fast_path = matches!(seq, SequenceSpec::Arith { .. });
    let stride = match seq {
        SequenceSpec::Arith { b, .. } => *b as usize,
        _ => 1,
    };
    let nu0 = table[0];
    let mut double = Complex64::new(0.0, 0.0);
    let mut window = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    let mut out = Vec::with_capacity(n_max);
    let mut max_imaginary: f64 = 0.0;
    let mut imaginary_sum = 0.0;
    for nn in 1..=n_max {
        let k = nn - 1;
        // Pairs (N, j) and (j, N) with j < N, plus the diagonal entry.
        let cross = if fast_path {
            if k > 0 {
                window.0 += table[k * stride];
                window.1 += mirror[k * stride];
            }
            window
        } else {
            let mut c = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for j in 0..k {
                let t = (terms[k] - terms[j]) as usize;
                c.0 += table[t];
                c.1 += mirror[t];
            }
            c
        };
        double += nu0 + cross.0 + cross.1;
        imaginary_sum += double.im / (nn as f64).powi(3);
        max_imaginary = max_imaginary.max(imaginary_sum.abs());
        out.push(double.re / (nn as f64).powi(3));
    }
    let marks = crate::criteria::series::checkpoints(n_max);
    let mut cumulative = Vec::with_capacity(span as usize + 1);
    let mut acc = 0.0;
    for (t, v) in table.iter().enumerate() {
        acc += if t == 0 { v.norm() } else { 2.0 * v.norm() };
        cumulative.push(acc);
    }
    let gap_bound = marks
        .iter()
        .map(|&nn| {
            let s = (terms[nn - 1] - terms[0]) as usize;
            GapBoundPoint {
                n: nn,
                actual: out[nn - 1].abs(),
                bound: cumulative[s] / (nn as f64).powi(2),
            }
        })
        .collect();
    let series = analyze_terms(format!("del(m = {freq})"), &out, &SeriesConfig::default());
    Ok(DelReport {
        frequency: freq,
        n_max,
        series,
        max_imaginary,
        fast_path,
        gap_bound,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UdConfig {
    pub samples: usize,
    pub n: usize,
    pub frequencies: Vec<i64>,
    pub seed: u64,
    pub weyl_threshold: f64,
    pub discrepancy_threshold: f64,
}

impl Default for UdConfig {
    fn default() -> Self {
        UdConfig {
            samples: 100,
            n: 100_000,
            frequencies: vec![1],
            seed: 7,
            weyl_threshold: 0.05,
            discrepancy_threshold: 0.02,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub index: usize,
    pub x: f64,
    /// `max_m |S_N(x, m)|` over the configured frequencies.
    pub weyl_max: f64,
    pub discrepancy: f64,
    pub passes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
    pub max: f64,
}

fn quantiles(values: &[f64]) -> Quantiles {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let at = |q: f64| v[((v.len() - 1) as f64 * q).round() as usize];
    Quantiles {
        q05: at(0.05),
        q50: at(0.5),
        q95: at(0.95),
        max: *v.last().expect("non-empty"),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UdReport {
    pub config: UdConfig,
    pub gap_bound: Option<u64>,
    pub rows: Vec<SampleRow>,
    pub weyl: Quantiles,
    pub discrepancy: Quantiles,
    pub passing: usize,
    pub failure_fraction: f64,
}

/// Weyl sums and discrepancy of `(n_k x)_{k <= N}` for `x` drawn from `nu`.
pub fn ud_experiment(m: &SpectralMeasure, seq: &SequenceSpec, cfg: &UdConfig) -> Result<UdReport> {
    if cfg.samples == 0 || cfg.n == 0 {
        return Err(Error::validation("ud_experiment: samples and N must be positive"));
    }
    if cfg.frequencies.is_empty() || cfg.frequencies.contains(&0) {
        return Err(Error::validation("ud_experiment: frequencies must be non-empty and non-zero"));
    }
    let xs = sample(m, cfg.samples, cfg.seed)?;
    let terms = seq.generate(cfg.n)?;
    let rows: Vec<SampleRow> = xs
        .par_iter()
        .enumerate()
        .map(|(index, &x)| {
            let mut weyl_max: f64 = 0.0;
            for &f in &cfg.frequencies {
                weyl_max = weyl_max.max(weyl_sum_terms(x, f, &terms)?.norm());
            }
            let pts: Vec<f64> = terms.iter().map(|&n| (n as f64 * x).rem_euclid(1.0)).collect();
            let disc = discrepancy(&pts)?;
            Ok(SampleRow {
                index,
                x,
                weyl_max,
                discrepancy: disc,
                passes: weyl_max <= cfg.weyl_threshold && disc <= cfg.discrepancy_threshold,
            })
        })
        .collect::<Result<_>>()?;
    let passing = rows.iter().filter(|r| r.passes).count();
    let weyl = quantiles(&rows.iter().map(|r| r.weyl_max).collect::<Vec<_>>());
    let disc = quantiles(&rows.iter().map(|r| r.discrepancy).collect::<Vec<_>>());
    Ok(UdReport {
        config: cfg.clone(),
        gap_bound: seq.gap_bound(),
        failure_fraction: 1.0 - passing as f64 / rows.len() as f64,
        passing,
        rows,
        weyl,
        discrepancy: disc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::series::Verdict;
    use crate::measures::{AmplitudeRule, RieszSpec};

    const NAT: SequenceSpec = SequenceSpec::Arith { a: 0, b: 1 };

    #[test]
    fn weyl_examples() {
        assert!((weyl_sum(0.0, 3, &NAT, 17).unwrap() - 1.0).norm() < 1e-15);
        assert!(weyl_sum(0.25, 1, &NAT, 4).unwrap().norm() < 1e-15);
        for n in 1..40 {
            assert!(weyl_sum(0.25, 1, &NAT, n).unwrap().norm() <= 2f64.sqrt() / n as f64 + 1e-14);
            assert!((weyl_sum(0.25, 4, &NAT, n).unwrap() - 1.0).norm() < 1e-12);
        }
        assert!(weyl_sum(0.1, 0, &NAT, 3).is_err());
    }

    #[test]
    fn discrepancy_examples() {
        assert!((discrepancy(&[0.0, 0.25, 0.5, 0.75]).unwrap() - 0.25).abs() < 1e-15);
        assert!(discrepancy(&[0.3; 50]).unwrap() > 0.69);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        for n in [1000usize, 10_000] {
            let pts: Vec<f64> = (1..=n).map(|k| k as f64 * phi).collect();
            let d = discrepancy(&pts).unwrap();
            assert!(d <= 2.0 * (n as f64).ln() / n as f64, "{n} {d}");
            assert!(d >= 0.5 / n as f64);
        }
    }

    #[test]
    fn sequences() {
        let g = SequenceSpec::BoundedGap { d: 3, seed: 1, start: 5 }.generate(500).unwrap();
        assert!(g.windows(2).all(|w| (1..=3).contains(&(w[1] - w[0]))));
        assert!(SequenceSpec::List { values: vec![3, 1, 3] }.generate(3).is_err());
        let v = difference_multiplicity(&g[..200]);
        assert!(v.values().all(|&c| c <= 200));
    }

    #[test]
    fn del_lebesgue_and_dirac() {
        let r = del_series(&SpectralMeasure::lebesgue(), &NAT, 1, 100_000).unwrap();
        assert_eq!(r.series.verdict, Verdict::Converges);
        let pi2 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((r.series.total() - pi2).abs() < 1e-3, "{}", r.series.total());
        let r = del_series(&SpectralMeasure::dirac(0.0), &NAT, 1, 100_000).unwrap();
        assert_eq!(r.series.verdict, Verdict::Diverges);
    }

    #[test]
    fn del_general_path_matches_fast_path() {
        let m = SpectralMeasure::riesz(RieszSpec::geometric(4, 4, AmplitudeRule::InvLog)).unwrap();
        let fast = del_series(&m, &NAT, 1, 300).unwrap();
        let list = SequenceSpec::List {
            values: (1..=300).collect(),
        };
        let slow = del_series(&m, &list, 1, 300).unwrap();
        assert!(fast.fast_path && !slow.fast_path);
        assert!((fast.series.total() - slow.series.total()).abs() < 1e-12);
        assert!(slow.max_imaginary < 1e-12);
        for p in &slow.gap_bound {
            assert!(p.actual <= p.bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn del_riesz_bounded_gap_converges() {
        let m = SpectralMeasure::riesz(RieszSpec::geometric(4, 4, AmplitudeRule::InvLog)).unwrap();
        let seq = SequenceSpec::BoundedGap { d: 3, seed: 2, start: 1 };
        let r = del_series(&m, &seq, 1, 20_000).unwrap();
        assert_eq!(r.series.verdict, Verdict::Converges, "{:?}", r.series.note);
    }

    #[test]
    fn dirac_experiment_fails() {
        let cfg = UdConfig {
            samples: 20,
            n: 1000,
            ..UdConfig::default()
        };
        let r = ud_experiment(&SpectralMeasure::dirac(0.0), &NAT, &cfg).unwrap();
        assert_eq!(r.passing, 0);
        let r = ud_experiment(&SpectralMeasure::lebesgue(), &NAT, &UdConfig { n: 20_000, ..cfg }).unwrap();
        assert!(r.passing >= 18);
    }
}
