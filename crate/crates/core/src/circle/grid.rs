//! Trigonometric polynomials held as coefficients and as uniform-grid samples.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::kernels::{dirichlet, fejer_value};
use crate::error::{Error, Result};

/// Which representation was supplied; the other one is derived from it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Authority {
    Coefficients,
    Samples,
}

/// Function on the circle with coefficients `c_n`, `|n| <= degree`, and
/// samples at `x_j = j / M`, `M >= 2 degree + 1`.
#[derive(Clone, Debug)]
pub struct GridFunction {
    degree: usize,
    coeffs: Vec<Complex64>,
    samples: Vec<Complex64>,
    authority: Authority,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn check_grid(degree: usize, m: usize) -> Result<()> {
    if m < 2 * degree + 1 {
        return Err(Error::validation(format!(
            "grid of {m} points cannot carry degree {degree} (need at least {})",
            2 * degree + 1
        )));
    }
    Ok(())
}

/// `f(j/M) = sum_n c_n e(n j / M)`.
fn synthesize(coeffs: &[Complex64], degree: usize, m: usize) -> Vec<Complex64> {
    let mut buf = vec![zero(); m];
    for (i, c) in coeffs.iter().enumerate() {
        let n = i as i64 - degree as i64;
        buf[n.rem_euclid(m as i64) as usize] += c;
    }
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
    buf
}

/// `c_n = (1/M) sum_j f(j/M) e(-n j / M)` for `|n| <= degree`.
fn analyze(samples: &[Complex64], degree: usize) -> Vec<Complex64> {
    let m = samples.len();
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    (-(degree as i64)..=degree as i64)
        .map(|n| buf[n.rem_euclid(m as i64) as usize] * scale)
        .collect()
}

impl GridFunction {
    /// `coeffs[n + degree] = c_n`.
    pub fn from_coefficients(degree: usize, coeffs: Vec<Complex64>, m: usize) -> Result<Self> {
        check_grid(degree, m)?;
        if coeffs.len() != 2 * degree + 1 {
            return Err(Error::validation(format!(
                "expected {} coefficients for degree {degree}, got {}",
                2 * degree + 1,
                coeffs.len()
            )));
        }
        let samples = synthesize(&coeffs, degree, m);
        Ok(GridFunction {
            degree,
            coeffs,
            samples,
            authority: Authority::Coefficients,
        })
    }

    pub fn from_coefficient_fn(
        degree: usize,
        m: usize,
        f: impl Fn(i64) -> Complex64,
    ) -> Result<Self> {
        let d = degree as i64;
        Self::from_coefficients(degree, (-d..=d).map(f).collect(), m)
    }

    /// Coefficients are read off by the DFT, exact when the samples come from
    /// a polynomial of degree at most `degree`.
    pub fn from_samples(samples: Vec<Complex64>, degree: usize) -> Result<Self> {
        check_grid(degree, samples.len())?;
        let coeffs = analyze(&samples, degree);
        Ok(GridFunction {
            degree,
            coeffs,
            samples,
            authority: Authority::Samples,
        })
    }

    pub fn from_real_fn(degree: usize, m: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let samples = (0..m)
            .map(|j| Complex64::new(f(j as f64 / m as f64), 0.0))
            .collect();
        Self::from_samples(samples, degree)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn grid_len(&self) -> usize {
        self.samples.len()
    }

    pub fn authority(&self) -> Authority {
        self.authority
    }

    /// `c_n`, zero beyond the degree.
    pub fn coefficient(&self, n: i64) -> Complex64 {
        if n.unsigned_abs() as usize > self.degree {
            return zero();
        }
        self.coeffs[(n + self.degree as i64) as usize]
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn real_samples(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.re).collect()
    }

    pub fn max_imaginary(&self) -> f64 {
        self.samples.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// Same polynomial on a grid of `m` points.
    pub fn resample(&self, m: usize) -> Result<Self> {
        Self::from_coefficients(self.degree, self.coeffs.clone(), m)
    }

    /// Map every coefficient `c_n` to `w(n) c_n`; the result is authoritative in coefficients.
    pub fn map_coefficients(&self, w: impl Fn(i64) -> Complex64) -> Self {
        let d = self.degree as i64;
        let coeffs: Vec<Complex64> = self
            .coeffs
            .iter()
            .zip(-d..=d)
            .map(|(c, n)| c * w(n))
            .collect();
        let samples = synthesize(&coeffs, self.degree, self.samples.len());
        GridFunction {
            degree: self.degree,
            coeffs,
            samples,
            authority: Authority::Coefficients,
        }
    }

    /// `||f||_p` by the trapezoid rule; `p = inf` gives the grid maximum.
    pub fn norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
        }
        let m = self.samples.len() as f64;
        let s: f64 = self
            .samples
            .iter()
            .map(|z| if p == 2.0 { z.norm_sqr() } else { z.norm().powf(p) })
            .sum();
        (s / m).powf(1.0 / p)
    }

    pub fn mean(&self) -> Complex64 {
        self.samples.iter().sum::<Complex64>() / self.samples.len() as f64
    }

    /// Largest discrepancy after a samples -> coefficients -> samples round trip.
    pub fn round_trip_error(&self) -> f64 {
        let coeffs = analyze(&self.samples, self.degree);
        let back = synthesize(&coeffs, self.degree, self.samples.len());
        back.iter()
            .zip(&self.samples)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Dirichlet kernel `D_N` on `m` points.
pub fn dirichlet_grid(n: usize, m: usize) -> Result<GridFunction> {
    check_grid(n, m)?;
    let samples = (0..m)
        .map(|j| Complex64::new(dirichlet(n, j as f64 / m as f64), 0.0))
        .collect();
    let mut g = GridFunction::from_samples(samples, n)?;
    g.authority = Authority::Coefficients;
    Ok(g)
}

/// Fejer kernel `K_n` on `m` points.
pub fn fejer(n: usize, m: usize) -> Result<GridFunction> {
    check_grid(n, m)?;
    let samples = (0..m)
        .map(|j| Complex64::new(fejer_value(n, j as f64 / m as f64), 0.0))
        .collect();
    let mut g = GridFunction::from_samples(samples, n)?;
    g.authority = Authority::Coefficients;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let g = GridFunction::from_coefficient_fn(20, 64, |n| {
            Complex64::new(1.0 / (1 + n.abs()) as f64, 0.1 * n as f64)
        })
        .unwrap();
        assert!(g.round_trip_error() < 1e-12);
        let h = GridFunction::from_samples(g.samples().to_vec(), 20).unwrap();
        for n in -20..=20 {
            assert!((h.coefficient(n) - g.coefficient(n)).norm() < 1e-12);
        }
    }

    #[test]
    fn kernels_have_expected_coefficients() {
        let d = dirichlet_grid(6, 40).unwrap();
        let k = fejer(6, 40).unwrap();
        for n in -6i64..=6 {
            assert!((d.coefficient(n).re - 1.0).abs() < 1e-12);
            let want = 1.0 - n.abs() as f64 / 7.0;
            assert!((k.coefficient(n).re - want).abs() < 1e-12);
        }
        assert!((d.norm(2.0).powi(2) - 13.0).abs() < 1e-10);
    }

    #[test]
    fn real_functions_are_hermitian() {
        let g = GridFunction::from_real_fn(8, 32, |x| (2.0 * std::f64::consts::PI * 3.0 * x).cos() + x * x).unwrap();
        for n in 1..=8 {
            assert!((g.coefficient(n) - g.coefficient(-n).conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn undersized_grid_rejected() {
        assert!(GridFunction::from_coefficient_fn(10, 20, |_| zero()).is_err());
    }
}
