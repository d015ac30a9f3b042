//! Dirichlet and Fejer kernels and their `L^p` norms on the circle.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Oversampling factor for quadrature of `|D_N|^p`.
pub const KERNEL_OVERSAMPLING: usize = 64;

const CHUNK: usize = 1 << 14;

/// `D_N(x) = sum_{|k| <= N} e(k x)`.
pub fn dirichlet(n: usize, x: f64) -> f64 {
    let s = (PI * x).sin();
    if s.abs() < 1e-300 {
        // x is an integer
        return (2 * n + 1) as f64;
    }
    (PI * (2 * n + 1) as f64 * x).sin() / s
}

/// Fejer kernel `K_n = (1/(n+1)) sum_{j<=n} D_j`, non-negative with mean one.
pub fn fejer_value(n: usize, x: f64) -> f64 {
    let s = (PI * x).sin();
    let m = (n + 1) as f64;
    if s.abs() < 1e-300 {
        return m;
    }
    let t = (PI * m * x).sin();
    t * t / (m * s * s)
}

/// `||D_N||_p` with respect to normalised Lebesgue measure, by the trapezoid
/// rule on `64 N` points (at least 4096).
pub fn dirichlet_norm(n: usize, p: f64) -> Result<f64> {
    if n == 0 {
        return Ok(1.0);
    }
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::validation(format!("kernel norm: p = {p} must lie in [1, inf)")));
    }
    if p == 2.0 {
        return Ok(((2 * n + 1) as f64).sqrt());
    }
    let m = (KERNEL_OVERSAMPLING * n).max(4096);
    Ok(grid_mean(m, |x| dirichlet(n, x).abs().powf(p)).powf(1.0 / p))
}

/// Same as [`dirichlet_norm`] but on an explicit number of grid points.
pub fn dirichlet_norm_on(n: usize, p: f64, m: usize) -> f64 {
    grid_mean(m, |x| dirichlet(n, x).abs().powf(p)).powf(1.0 / p)
}

/// Mean of `f` over the grid `j / m`, reduced in fixed-size chunks so the
/// result does not depend on the thread count.
pub(crate) fn grid_mean(m: usize, f: impl Fn(f64) -> f64 + Sync) -> f64 {
    let chunks: Vec<f64> = (0..m.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(m);
            (lo..hi).map(|j| f(j as f64 / m as f64)).sum::<f64>()
        })
        .collect();
    chunks.iter().sum::<f64>() / m as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parseval() {
        for n in [1, 7, 50] {
            let got = dirichlet_norm_on(n, 2.0, 8 * n + 3);
            assert!((got * got - (2 * n + 1) as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn fejer_mean_is_one() {
        for n in [0, 3, 40] {
            let mean = grid_mean(4 * n + 8, |x| fejer_value(n, x));
            assert!((mean - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sub_two_norm_scaling() {
        let ratios: Vec<f64> = [10, 100, 1000]
            .iter()
            .map(|&n| dirichlet_norm(n, 1.5).unwrap().powf(1.5) / (n as f64).sqrt())
            .collect();
        let spread = ratios.iter().cloned().fold(0.0, f64::max)
            / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread < 1.2, "{ratios:?}");
    }
}
