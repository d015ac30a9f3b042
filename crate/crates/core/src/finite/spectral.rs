//! Aperiodicity certificates, convergence rates and the peripheral spectrum.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::cyclic::{period_and_classes, shifted_projection, CyclicDecomposition};
use super::norm::{l1_operator_norm, l2_operator_norm, opnorm_with, Constraint, NormEstimate, NormOptions};
use super::operator::{matrix_power, weighted_norm, FiniteOperator};
use crate::error::{Error, Result};

/// `||P||_{2->4} < 2^{1/4}` forces `d = 1`.
pub fn threshold_l4() -> f64 {
    2f64.powf(0.25)
}

/// `||P||_{2->3} < 2^{1/6}` forces `d = 1`.
pub fn threshold_l3() -> f64 {
    2f64.powf(1.0 / 6.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateTest {
    pub q: f64,
    pub threshold: f64,
    pub norm: NormEstimate,
    pub fires: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AperiodicityCertificate {
    pub l2_l4: CertificateTest,
    pub l2_l3: CertificateTest,
    pub certified_aperiodic: bool,
    pub period: usize,
}

fn certificate_test(op: &FiniteOperator, q: f64, threshold: f64, classes: &[Vec<usize>]) -> Result<CertificateTest> {
    let opts = NormOptions {
        stop_at: Some(threshold),
        classes: classes.to_vec(),
        ..NormOptions::default()
    };
    let norm = opnorm_with(op, 2.0, q, &opts)?;
    let converged = norm.exact || norm.agreeing >= 2;
    let fires = converged && norm.value + norm.uncertainty < threshold;
    Ok(CertificateTest {
        q,
        threshold,
        norm,
        fires,
    })
}

/// Certify `d = 1` from either norm threshold; a certificate on a periodic operator is a breach.
pub fn aperiodicity_certificate(op: &FiniteOperator) -> Result<AperiodicityCertificate> {
    let dec = period_and_classes(op)?;
    let l2_l4 = certificate_test(op, 4.0, threshold_l4(), &dec.classes)?;
    let l2_l3 = certificate_test(op, 3.0, threshold_l3(), &dec.classes)?;
    let certified_aperiodic = l2_l4.fires || l2_l3.fires;
    if certified_aperiodic && dec.period != 1 {
        return Err(Error::breach(format!(
            "norm certificate claims aperiodicity but the period is {}",
            dec.period
        )));
    }
    Ok(AperiodicityCertificate {
        l2_l4,
        l2_l3,
        certified_aperiodic,
        period: dec.period,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub c: f64,
    pub rho: f64,
    /// RMS residual of the log-linear fit.
    pub residual: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRate {
    pub period: usize,
    pub n_max: usize,
    /// `||P^{nd} - E_d||_{1->1}` for `n = 1..=n_max`.
    pub norms_l1: Vec<f64>,
    pub norms_l2: Vec<f64>,
    pub fit_l1: RateFit,
    pub fit_l2: RateFit,
    /// `||P^d||_{2->2}` on functions with zero mean on every class.
    pub rho_gap: f64,
}

/// Values below this carry too much relative rounding error to enter the fit.
const FLOOR: f64 = 1e-10;

/// Least squares of `log y_n = log C + n log rho` over the points above the rounding floor.
pub fn fit_rate(ys: &[f64]) -> RateFit {
    let pts: Vec<(f64, f64)> = ys
        .iter()
        .enumerate()
        .filter(|(_, y)| **y > FLOOR)
        .map(|(i, y)| ((i + 1) as f64, y.ln()))
        .collect();
    match pts.len() {
        0 => RateFit {
            c: 0.0,
            rho: 0.0,
            residual: 0.0,
            points: 0,
        },
        1 => RateFit {
            c: 0.0,
            rho: ys[0].max(0.0),
            residual: 0.0,
            points: 1,
        },
        k => {
            let kf = k as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / kf;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / kf;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            let slope = sxy / sxx;
            let icpt = my - slope * mx;
            let residual = (pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum::<f64>() / kf).sqrt();
            RateFit {
                c: icpt.exp(),
                rho: slope.exp(),
                residual,
                points: k,
            }
        }
    }
}

pub fn convergence_rate(op: &FiniteOperator, dec: &CyclicDecomposition, n_max: usize) -> Result<ConvergenceRate> {
    let d = dec.period;
    let pd = matrix_power(op.matrix(), d as u32);
    let e = shifted_projection(op, dec, 0);
    let mu = op.mu();
    let mut power = pd.clone();
    let mut norms_l1 = Vec::with_capacity(n_max);
    let mut norms_l2 = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        let diff = &power - &e;
        norms_l1.push(l1_operator_norm(mu, &diff));
        norms_l2.push(l2_operator_norm(mu, &diff));
        power = &power * &pd;
    }
    let gap = opnorm_with(
        &op.power(d as u32),
        2.0,
        2.0,
        &NormOptions {
            constraint: Constraint::ClassMeanZero(dec.clone()),
            ..NormOptions::default()
        },
    )?;
    Ok(ConvergenceRate {
        period: d,
        n_max,
        fit_l1: fit_rate(&norms_l1),
        fit_l2: fit_rate(&norms_l2),
        norms_l1,
        norms_l2,
        rho_gap: gap.value,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootCheck {
    pub k: usize,
    pub re: f64,
    pub im: f64,
    /// `||P f - lambda f||_inf`.
    pub residual: f64,
    /// `|f_lambda|` is constant one.
    pub unit_modulus: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnimodularReport {
    pub period: usize,
    pub roots: Vec<RootCheck>,
    /// Computed eigenvalues with modulus within `1e-6` of one.
    pub peripheral: Vec<(f64, f64)>,
    /// Every peripheral eigenvalue is a `d`-th root of unity, each found once.
    pub only_roots: bool,
    pub passed: bool,
}

pub const EIGEN_TOLERANCE: f64 = 1e-10;

/// `f_lambda = sum_j conj(lambda)^j 1_{A_j}` is a `lambda`-eigenfunction for every `d`-th root.
pub fn unimodular_eigencheck(op: &FiniteOperator, dec: &CyclicDecomposition) -> Result<UnimodularReport> {
    let d = dec.period;
    let n = op.n();
    let s = op.matrix();
    let mut roots = Vec::with_capacity(d);
    for k in 0..d {
        let lambda = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / d as f64);
        let f: Vec<Complex64> = dec
            .labels
            .iter()
            .map(|&j| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * ((k * j) % d) as f64 / d as f64))
            .collect();
        let mut residual: f64 = 0.0;
        for i in 0..n {
            let pf: Complex64 = (0..n).map(|j| f[j] * s[(i, j)]).sum();
            residual = residual.max((pf - lambda * f[i]).norm());
        }
        if residual > EIGEN_TOLERANCE {
            return Err(Error::breach(format!(
                "P f != lambda f for the root k = {k} of order {d} (residual {residual:e})"
            )));
        }
        roots.push(RootCheck {
            k,
            re: lambda.re,
            im: lambda.im,
            residual,
            unit_modulus: f.iter().all(|z| (z.norm() - 1.0).abs() < 1e-14),
        });
    }
    let eig = s.clone().complex_eigenvalues();
    let peripheral: Vec<Complex64> = eig.iter().copied().filter(|z| z.norm() > 1.0 - 1e-6).collect();
    let mut hits = vec![0usize; d];
    let mut stray = false;
    for z in &peripheral {
        let angle = z.arg().rem_euclid(2.0 * std::f64::consts::PI) * d as f64 / (2.0 * std::f64::consts::PI);
        let k = angle.round();
        if (angle - k).abs() > 1e-6 {
            stray = true;
        } else {
            hits[k as usize % d] += 1;
        }
    }
    let only_roots = !stray && hits.iter().all(|&h| h == 1);
    Ok(UnimodularReport {
        period: d,
        roots,
        peripheral: peripheral.iter().map(|z| (z.re, z.im)).collect(),
        only_roots,
        passed: only_roots,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitResiduals {
    pub n: usize,
    pub j: usize,
    pub l1: f64,
    pub l2: f64,
    /// Same for `P*`, whose limit shifts classes by `-j`.
    pub dual_l1: f64,
    pub dual_l2: f64,
}

fn iterate(s: &DMatrix<f64>, f: &[f64], times: usize) -> Vec<f64> {
    let n = f.len();
    let mut v = f.to_vec();
    for _ in 0..times {
        v = (0..n).map(|i| (0..n).map(|k| s[(i, k)] * v[k]).sum()).collect();
    }
    v
}

/// Distance from `P^{nd+j} f` to `d sum_l (int_{A_l} f) 1_{A_{l+j}}`, and the dual analogue.
pub fn limit_residuals(
    op: &FiniteOperator,
    dec: &CyclicDecomposition,
    f: &[f64],
    n: usize,
    j: usize,
) -> Result<LimitResiduals> {
    if f.len() != op.n() {
        return Err(Error::validation(format!(
            "limit_residuals: f has {} entries, operator has {} states",
            f.len(),
            op.n()
        )));
    }
    let steps = n * dec.period + j;
    let mu = op.mu();
    let dist = |a: &[f64], b: &[f64], p: f64| {
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        weighted_norm(mu, &diff, p)
    };
    let fwd = iterate(op.matrix(), f, steps);
    let target = shifted_projection(op, dec, j as i64) * nalgebra::DVector::from_column_slice(f);
    let dual = op.dual();
    let back = iterate(dual.matrix(), f, steps);
    let dual_target = shifted_projection(op, dec, -(j as i64)) * nalgebra::DVector::from_column_slice(f);
    Ok(LimitResiduals {
        n,
        j,
        l1: dist(&fwd, target.as_slice(), 1.0),
        l2: dist(&fwd, target.as_slice(), 2.0),
        dual_l1: dist(&back, dual_target.as_slice(), 1.0),
        dual_l2: dist(&back, dual_target.as_slice(), 2.0),
    })
}
