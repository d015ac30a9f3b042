//! Seeded i.i.d. draws from spectral measures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circle::build_nonneg_from_convex;
use crate::error::{Error, Result};
use crate::measures::{MeasureSpec, SpectralMeasure};

/// Ternary digits drawn per Cantor sample; `3^-34` is below `f64` resolution on `[0, 1)`.
const CANTOR_DIGITS: usize = 34;
/// Coefficient range the Riesz sampler reproduces exactly by default.
pub const DEFAULT_RIESZ_BOUND: i64 = 100_000;
const CONVEX_TRUNCATION: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleOptions {
    /// The truncated Riesz density keeps enough factors that its coefficients
    /// agree with the infinite product for `|m| <= riesz_bound`.
    pub riesz_bound: i64,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions {
            riesz_bound: DEFAULT_RIESZ_BOUND,
        }
    }
}

pub fn sample(m: &SpectralMeasure, count: usize, seed: u64) -> Result<Vec<f64>> {
    sample_with(m, count, seed, &SampleOptions::default())
}

fn child_seed(seed: u64, tag: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(tag.wrapping_mul(0xBF58_476D_1CE4_E5B9) ^ 0x94D0_49BB_1331_11EB)
}

pub fn sample_with(m: &SpectralMeasure, count: usize, seed: u64, opts: &SampleOptions) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match m.spec() {
        MeasureSpec::Lebesgue => Ok((0..count).map(|_| rng.gen_range(0.0..1.0)).collect()),
        MeasureSpec::Dirac { x0 } => Ok(vec![x0.rem_euclid(1.0); count]),
        MeasureSpec::Cantor => Ok((0..count)
            .map(|_| {
                let mut x = 0.0;
                let mut scale = 1.0;
                for _ in 0..CANTOR_DIGITS {
                    scale /= 3.0;
                    if rng.gen_bool(0.5) {
                        x += scale;
                    }
                }
                x
            })
            .collect()),
        MeasureSpec::Riesz(_) => {
            let rp = m.as_riesz().expect("riesz measure");
            let depth = rp.depth_for(opts.riesz_bound)?;
            let envelope: f64 = rp.amplitudes()[..depth].iter().map(|a| 1.0 + a.abs()).product();
            let mut out = Vec::with_capacity(count);
            while out.len() < count {
                let x: f64 = rng.gen_range(0.0..1.0);
                let u: f64 = rng.gen_range(0.0..1.0);
                if u * envelope <= rp.partial_density(depth, x) {
                    out.push(x);
                }
            }
            Ok(out)
        }
        MeasureSpec::ConvexAc(seq) => {
            let dens = build_nonneg_from_convex(seq, CONVEX_TRUNCATION, 0)?;
            let p = dens.probability_samples();
            let cells = p.len();
            let mut cdf = Vec::with_capacity(cells);
            let mut acc = 0.0;
            for v in &p {
                acc += v.max(0.0);
                cdf.push(acc);
            }
            Ok((0..count)
                .map(|_| {
                    let u: f64 = rng.gen_range(0.0..acc);
                    let cell = cdf.partition_point(|c| *c <= u).min(cells - 1);
                    let lo = if cell == 0 { 0.0 } else { cdf[cell - 1] };
                    let frac = if cdf[cell] > lo { (u - lo) / (cdf[cell] - lo) } else { 0.5 };
                    // Cells are centred on the grid points j / M.
                    ((cell as f64 + frac - 0.5) / cells as f64).rem_euclid(1.0)
                })
                .collect())
        }
        MeasureSpec::Mixture { .. } => {
            let parts = m.as_mixture().expect("mixture");
            let labels: Vec<usize> = (0..count)
                .map(|_| {
                    let u: f64 = rng.gen_range(0.0..1.0);
                    let mut acc = 0.0;
                    for (i, (w, _)) in parts.iter().enumerate() {
                        acc += w;
                        if u < acc {
                            return i;
                        }
                    }
                    parts.len() - 1
                })
                .collect();
            let mut draws = Vec::with_capacity(parts.len());
            for (i, (_, part)) in parts.iter().enumerate() {
                let need = labels.iter().filter(|&&l| l == i).count();
                draws.push(sample_with(part, need, child_seed(seed, i as u64), opts)?.into_iter());
            }
            Ok(labels.iter().map(|&l| draws[l].next().expect("counted")).collect())
        }
        MeasureSpec::Convolution { left, right } => {
            let a = sample_with(&SpectralMeasure::from_spec((**left).clone())?, count, child_seed(seed, 1), opts)?;
            let b = sample_with(&SpectralMeasure::from_spec((**right).clone())?, count, child_seed(seed, 2), opts)?;
            Ok(a.iter().zip(&b).map(|(x, y)| (x + y).rem_euclid(1.0)).collect())
        }
        MeasureSpec::Power { base, k } => {
            let base = SpectralMeasure::from_spec((**base).clone())?;
            let mut acc = vec![0.0; count];
            for i in 0..*k {
                let s = sample_with(&base, count, child_seed(seed, i as u64 + 1), opts)?;
                acc.iter_mut().zip(s).for_each(|(a, x)| *a = (*a + x).rem_euclid(1.0));
            }
            Ok(acc)
        }
        MeasureSpec::Reflected { base } => {
            let s = sample_with(&SpectralMeasure::from_spec((**base).clone())?, count, seed, opts)?;
            Ok(s.into_iter().map(|x| (-x).rem_euclid(1.0)).collect())
        }
        MeasureSpec::CosineSeries(_) => Err(Error::validation(
            "sample: cosine_series measures have no sampler (their density is not materialised)",
        )),
    }
}
