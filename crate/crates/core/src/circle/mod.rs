//! Convolution operators on the circle realised as Fourier multipliers.
//!
//! `P_nu f = nu * f` acts on coefficients by `(P_nu f)^(n) = nu(n) f(n)`.
//! Norms are evaluated by grid quadrature, so everything here yields lower
//! bounds on operator norms, never upper bounds.

pub mod construct;
pub mod grid;
pub mod kernels;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::SpectralMeasure;

pub use construct::{
    build_nonneg_from_convex, continued_sequence, fejer_sum, product_pair, NonnegDensity, PairSide,
    ProductPair,
};
pub use grid::{dirichlet_grid, fejer, Authority, GridFunction};
pub use kernels::{dirichlet, dirichlet_norm, fejer_value};

/// `nu * f` for a trigonometric polynomial `f`.
pub fn apply_multiplier(m: &SpectralMeasure, f: &GridFunction) -> Result<GridFunction> {
    let d = f.degree() as i64;
    let nu = m.coefficients(-d, d)?;
    Ok(f.map_coefficients(|n| nu[(n + d) as usize]))
}

/// `||D_N||_p` by quadrature on at least `64 N` points.
pub fn kernel_norms(n: usize, p: f64) -> Result<f64> {
    dirichlet_norm(n, p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformErgodicity {
    pub n_max: usize,
    /// `min_{0 < |n| <= N} |nu(n) - 1|`.
    pub margin: f64,
    pub argmin: i64,
    pub uniformly_ergodic: bool,
    pub note: String,
}

pub fn uniform_ergodicity_check(m: &SpectralMeasure, n: usize) -> Result<UniformErgodicity> {
    if n < 1 {
        return Err(Error::validation("uniform_ergodicity_check: N must be at least 1"));
    }
    let nn = n as i64;
    let vals = m.coefficients(-nn, nn)?;
    let mut margin = f64::INFINITY;
    let mut argmin = 0;
    for (i, v) in vals.iter().enumerate() {
        let k = i as i64 - nn;
        if k == 0 {
            continue;
        }
        let gap = (v - 1.0).norm();
        if gap < margin {
            margin = gap;
            argmin = k;
        }
    }
    Ok(UniformErgodicity {
        n_max: n,
        margin,
        argmin,
        uniformly_ergodic: margin > 1e-12,
        note: format!("only 0 < |n| <= {n} inspected; the infimum over all n may be smaller"),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Witness {
    Constant,
    /// `g(x) = e(a x) D_N(b x)`.
    Dirichlet { a: i64, b: i64, degree: usize },
    /// Random polynomial of the given degree, drawn from a fixed stream.
    Random { degree: usize, draw: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormLowerBound {
    pub p: f64,
    pub q: f64,
    pub n_max: usize,
    /// Best `||nu * f||_q / ||f||_p` found.
    pub ratio: f64,
    pub witness: Witness,
    pub candidates: usize,
}

const SHIFTS: [i64; 3] = [0, 1, 2];
const DILATIONS: [i64; 3] = [1, 2, 3];
const RANDOM_DRAWS: usize = 4;

/// Dyadic degrees up to `n_max`; the family only grows with `n_max`.
fn dyadic_degrees(n_max: usize) -> Vec<usize> {
    std::iter::successors(Some(1usize), |d| Some(d * 2))
        .take_while(|d| *d <= n_max)
        .collect()
}

fn test_function(w: &Witness) -> (usize, Box<dyn Fn(i64) -> Complex64>) {
    match *w {
        Witness::Constant => (0, Box::new(|_| Complex64::new(1.0, 0.0))),
        Witness::Dirichlet { a, b, degree } => {
            let top = (a.abs() + b * degree as i64) as usize;
            let d = degree as i64;
            (
                top,
                Box::new(move |k| {
                    let j = k - a;
                    if j % b == 0 && (j / b).abs() <= d {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                }),
            )
        }
        Witness::Random { degree, draw } => {
            let mut rng = ChaCha8Rng::seed_from_u64(((degree as u64) << 16) ^ draw as u64);
            let coeffs: Vec<Complex64> = (0..=2 * degree)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let d = degree as i64;
            (degree, Box::new(move |k| coeffs[(k + d) as usize]))
        }
    }
}

fn ratio_for(m: &SpectralMeasure, w: &Witness, p: f64, q: f64) -> Result<f64> {
    let (top, f) = test_function(w);
    let grid = (16 * top + 16).next_power_of_two();
    let g = GridFunction::from_coefficient_fn(top, grid, f)?;
    let out = apply_multiplier(m, &g)?;
    Ok(out.norm(q) / g.norm(p))
}

/// Largest `||nu * f||_q / ||f||_p` over shifted, dilated Dirichlet kernels
/// and seeded random polynomials of dyadic degree `<= N`.
pub fn multiplier_norm_lower_bound(m: &SpectralMeasure, p: f64, q: f64, n: usize) -> Result<NormLowerBound> {
    if !(p >= 1.0 && q > p && q.is_finite()) {
        return Err(Error::validation(format!(
            "multiplier_norm_lower_bound: need 1 <= p < q < inf, got p = {p}, q = {q}"
        )));
    }
    let mut family = vec![Witness::Constant];
    for degree in dyadic_degrees(n) {
        for a in SHIFTS {
            for b in DILATIONS {
                family.push(Witness::Dirichlet { a, b, degree });
            }
        }
        for draw in 0..RANDOM_DRAWS {
            family.push(Witness::Random { degree, draw });
        }
    }
    let ratios: Vec<f64> = family
        .par_iter()
        .map(|w| ratio_for(m, w, p, q))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, r) in ratios.iter().enumerate() {
        if *r > ratios[best] {
            best = i;
        }
    }
    Ok(NormLowerBound {
        p,
        q,
        n_max: n,
        ratio: ratios[best],
        witness: family[best].clone(),
        candidates: family.len(),
    })
}
