//! Numerical hyperboundedness diagnostics built on a measure's coefficient oracle.
//!
//! Every series is reported with its raw partial sums next to the heuristic
//! verdict, so a reader can overrule the fit. Sufficient conditions are never
//! claimed to be complete: `Inconclusive` is a normal outcome.

pub mod series;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle::kernels::dirichlet_norm;
use crate::error::{Error, Result};
use crate::measures::{AmplitudeRule, MeasureSpec, RieszProduct, RieszSpec, SpectralMeasure};

pub use series::{
    analyze_terms, checkpoints, finite_series, Checkpoint, SeriesConfig, SeriesVerdict, Verdict,
};

/// Default largest index of the criterion series.
pub const DEFAULT_N_MAX: usize = 100_000;

/// Coefficients `nu(n)` and `nu(-n)` for `1 <= n <= len`.
#[derive(Clone, Debug)]
pub struct CoefficientTable {
    pub zero: Complex64,
    pub pos: Vec<Complex64>,
    pub neg: Vec<Complex64>,
}

impl CoefficientTable {
    pub fn new(m: &SpectralMeasure, len: usize) -> Result<Self> {
        let len = len as i64;
        if let Some(bound) = m.frequency_bound() {
            if len > bound {
                return Err(Error::OutOfRange {
                    requested: len,
                    bound,
                });
            }
        }
        let pos = m.coefficients(1, len)?;
        let mut neg = m.coefficients(-len, -1)?;
        neg.reverse();
        Ok(CoefficientTable {
            zero: m.coefficient(0)?,
            pos,
            neg,
        })
    }

    pub fn len(&self) -> usize {
        self.pos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pos.is_empty()
    }

    /// `|nu(n)|^s + |nu(-n)|^s` for `n = 1..=len`.
    pub fn two_sided_powers(&self, s: f64) -> Vec<f64> {
        self.pos
            .par_iter()
            .zip(self.neg.par_iter())
            .map(|(a, b)| pow_abs(*a, s) + pow_abs(*b, s))
            .collect()
    }
}

fn pow_abs(z: Complex64, s: f64) -> f64 {
    if s == 2.0 {
        z.norm_sqr()
    } else {
        z.norm().powf(s)
    }
}

/// Wiener average `(1/(2N+1)) sum_{|n|<=N} |nu(n)|^2`.
pub fn wiener_average(m: &SpectralMeasure, n: usize) -> Result<f64> {
    let table = CoefficientTable::new(m, n)?;
    Ok(wiener_from(&table, n))
}

fn wiener_from(t: &CoefficientTable, n: usize) -> f64 {
    let sum: f64 = t.zero.norm_sqr()
        + t.pos[..n].iter().map(|z| z.norm_sqr()).sum::<f64>()
        + t.neg[..n].iter().map(|z| z.norm_sqr()).sum::<f64>();
    sum / (2 * n + 1) as f64
}

/// `sum_{n != 0} |nu(n)|^2 / |n|`.
pub fn ht_series(m: &SpectralMeasure, n: usize) -> Result<SeriesVerdict> {
    if n < 2 {
        return Err(Error::validation("ht_series: N must be at least 2"));
    }
    Ok(ht_from(&CoefficientTable::new(m, n)?, n))
}

fn ht_from(t: &CoefficientTable, n: usize) -> SeriesVerdict {
    let terms: Vec<f64> = t.two_sided_powers(2.0)[..n]
        .iter()
        .enumerate()
        .map(|(i, s)| s / (i + 1) as f64)
        .collect();
    analyze_terms("|nu(n)|^2 / |n|", &terms, &SeriesConfig::default())
}

/// `sum_{n != 0} |nu(n)|^2 / (|n|^{2(p-1)/p} log^{1+eps}(1+|n|))`.
pub fn hr_series(m: &SpectralMeasure, p: f64, eps: f64, n: usize) -> Result<SeriesVerdict> {
    check_hr(p, eps)?;
    Ok(hr_from(&CoefficientTable::new(m, n)?, p, eps, n))
}

fn check_hr(p: f64, eps: f64) -> Result<()> {
    if !(p > 1.0 && p < 2.0) {
        return Err(Error::validation(format!("hr_series: p = {p} must lie in (1, 2)")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::validation(format!("hr_series: eps = {eps} must be positive")));
    }
    Ok(())
}

fn hr_from(t: &CoefficientTable, p: f64, eps: f64, n: usize) -> SeriesVerdict {
    let power = 2.0 * (p - 1.0) / p;
    let terms: Vec<f64> = t.two_sided_powers(2.0)[..n]
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let k = (i + 1) as f64;
            s / (k.powf(power) * (1.0 + k).ln().powf(1.0 + eps))
        })
        .collect();
    analyze_terms(
        format!("|nu(n)|^2 / (|n|^{power:.4} log^{:.3}(1+|n|)), p = {p}", 1.0 + eps),
        &terms,
        &SeriesConfig::default(),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaSummability {
    pub alpha: f64,
    /// `max{1, 2 alpha / (alpha + 2)}`: convergence means `P` maps `L^p` to `L^2`.
    pub implied_p: f64,
    pub series: SeriesVerdict,
}

pub fn implied_p(alpha: f64) -> f64 {
    (2.0 * alpha / (alpha + 2.0)).max(1.0)
}

/// `sum_{n != 0} |nu(n)|^alpha`.
pub fn alpha_summability(m: &SpectralMeasure, alpha: f64, n: usize) -> Result<AlphaSummability> {
    check_alpha(alpha)?;
    let series = match riesz_factor_series(m, alpha, n) {
        Some(s) => s,
        None => power_from(&CoefficientTable::new(m, n)?, alpha, n),
    };
    Ok(AlphaSummability {
        alpha,
        implied_p: implied_p(alpha),
        series,
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::validation(format!("alpha = {alpha} must be positive")));
    }
    Ok(())
}

fn power_from(t: &CoefficientTable, s: f64, n: usize) -> SeriesVerdict {
    let terms = t.two_sided_powers(s)[..n].to_vec();
    analyze_terms(format!("|nu(n)|^{s}"), &terms, &SeriesConfig::default())
}

/// For an infinite Riesz product,
/// `sum_m |nu(m)|^s = prod_j (1 + 2 (|a_j|/2)^s)`, so the coefficient series
/// converges exactly when the factor series `sum_j 2 (|a_j|/2)^s` does.
fn riesz_factor_series(m: &SpectralMeasure, s: f64, n: usize) -> Option<SeriesVerdict> {
    let MeasureSpec::Riesz(spec) = m.spec() else {
        return None;
    };
    let product = m.as_riesz()?;
    let rule = format!("2 (|a_j|/2)^{s} over Riesz factors j");
    if product.is_finite() {
        let terms: Vec<f64> = product
            .amplitudes()
            .iter()
            .map(|a| 2.0 * (a.abs() / 2.0).powf(s))
            .collect();
        return Some(finite_series(rule, &terms));
    }
    let terms = amplitude_terms(&spec.amplitudes, n, |a| 2.0 * (a.abs() / 2.0).powf(s));
    Some(analyze_terms(rule, &terms, &SeriesConfig::default()))
}

fn amplitude_terms(rule: &AmplitudeRule, n: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
    (1..=n)
        .map(|j| rule.amplitude(j).map_or(0.0, &f))
        .collect()
}

/// `sum_{j <= N} a_j^{2k}`: divergence means the `k`-fold convolution power
/// of the Riesz product is singular.
pub fn power_singularity_check(spec: &RieszSpec, k: u32, n: usize) -> Result<SeriesVerdict> {
    if k == 0 {
        return Err(Error::validation("power_singularity_check: k must be at least 1"));
    }
    let product = RieszProduct::new(spec)?;
    let rule = format!("a_j^{}", 2 * k);
    let f = |a: f64| a.abs().powi(2 * k as i32);
    if product.is_finite() {
        let terms: Vec<f64> = product.amplitudes().iter().map(|&a| f(a)).collect();
        return Ok(finite_series(rule, &terms));
    }
    Ok(analyze_terms(
        rule,
        &amplitude_terms(&spec.amplitudes, n, f),
        &SeriesConfig::default(),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowParams {
    pub p: f64,
    pub q: f64,
    /// Hypothesised bound on `||P||_{L^p -> L^q}`.
    pub norm_cap: f64,
    pub a: i64,
    pub b: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowRow {
    pub n: usize,
    /// `sum_{|k|<=n} |nu(a + b k)|^2`.
    pub lhs: f64,
    /// `cap^2 ||D_n||^2 (2n+1)^{..}`, the bound implied by the hypothesis.
    pub rhs: f64,
    pub violated: bool,
    /// `sum_{|k|<=n} |nu(a + b k)|^r` and its bound `cap^r ||D_n||_p^r` (only for `p < 2`).
    pub r_lhs: Option<f64>,
    pub r_rhs: Option<f64>,
    pub r_violated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub params: WindowParams,
    /// Exponent actually used on the `q` side (`q` is capped at 2 when `p < 2`).
    pub q_effective: f64,
    pub r: Option<f64>,
    pub rows: Vec<WindowRow>,
    /// Every `n` at which the hypothesis is refuted.
    pub violations: Vec<usize>,
    /// Smallest `C^2` with `lhs <= C^2 cap^2 n^{2(p-1)/p} (2n+1)^{(2-q)/q}` at every row
    /// (`p >= 2`: the dual form `n^{2/q} (2n+1)^{(p-2)/p}`).
    pub implied_constant: f64,
}

fn window_marks(n_max: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut decade = 10usize;
    while decade <= n_max {
        for f in [1, 2, 5] {
            if f * decade <= n_max {
                out.push(f * decade);
            }
        }
        decade *= 10;
    }
    if out.last() != Some(&n_max) {
        out.push(n_max);
    }
    out
}

/// Necessary conditions for `||P||_{L^p -> L^q} <= cap` from windowed
/// coefficient sums along `a + b k`.
///
/// The bound uses the exact Dirichlet kernel norm in place of the asymptotic
/// `C_p N^{(p-1)/p}`, so every reported violation is a genuine refutation.
pub fn window_bound_check(
    m: &SpectralMeasure,
    params: WindowParams,
    n_max: usize,
) -> Result<WindowReport> {
    let WindowParams {
        p,
        q,
        norm_cap,
        a,
        b,
    } = params;
    if !(p >= 1.0 && q > p && p.is_finite()) {
        return Err(Error::validation(format!(
            "window_bound_check: need 1 <= p < q, got p = {p}, q = {q}"
        )));
    }
    if !(norm_cap >= 1.0) || b < 1 || n_max < 1 {
        return Err(Error::validation(
            "window_bound_check: need norm_cap >= 1, b >= 1, N >= 1",
        ));
    }
    let small_p = p < 2.0;
    let q_eff = if small_p { q.min(2.0) } else { q };
    let r = (small_p && q_eff > 1.0).then(|| q_eff / (q_eff - 1.0));
    let nn = n_max as i64;
    let coeffs: Vec<(f64, f64)> = (0..=nn)
        .into_par_iter()
        .map(|k| {
            let up = m.coefficient(a + b * k)?;
            let down = if k == 0 { Complex64::new(0.0, 0.0) } else { m.coefficient(a - b * k)? };
            let r_part = r.map_or(0.0, |r| pow_abs(up, r) + pow_abs(down, r));
            Ok((up.norm_sqr() + down.norm_sqr(), r_part))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    let mut implied: f64 = 0.0;
    let mut acc = 0.0;
    let mut acc_r = 0.0;
    let mut next = 0usize;
    for mark in window_marks(n_max) {
        while next <= mark {
            acc += coeffs[next].0;
            acc_r += coeffs[next].1;
            next += 1;
        }
        let nf = mark as f64;
        let width = (2 * mark + 1) as f64;
        let (rhs, scale) = if small_p {
            let d = dirichlet_norm(mark, p)?;
            (
                norm_cap.powi(2) * d * d * width.powf((2.0 - q_eff) / q_eff),
                nf.powf(2.0 * (p - 1.0) / p) * width.powf((2.0 - q_eff) / q_eff),
            )
        } else {
            let qd = q / (q - 1.0);
            let d = dirichlet_norm(mark, qd)?;
            (
                norm_cap.powi(2) * d * d * width.powf((p - 2.0) / p),
                nf.powf(2.0 / q) * width.powf((p - 2.0) / p),
            )
        };
        implied = implied.max(acc / (norm_cap.powi(2) * scale));
        let (r_lhs, r_rhs, r_violated) = match r {
            Some(r) => {
                let bound = (norm_cap * dirichlet_norm(mark, p)?).powf(r);
                (Some(acc_r), Some(bound), acc_r > bound * (1.0 + 1e-12))
            }
            None => (None, None, false),
        };
        let violated = acc > rhs * (1.0 + 1e-12);
        if violated || r_violated {
            violations.push(mark);
        }
        rows.push(WindowRow {
            n: mark,
            lhs: acc,
            rhs,
            violated,
            r_lhs,
            r_rhs,
            r_violated,
        });
    }
    Ok(WindowReport {
        params,
        q_effective: q_eff,
        r,
        rows,
        violations,
        implied_constant: implied,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KornerReport {
    pub n_max: usize,
    /// Smallest `C` with `|nu(n)|^2 <= C (1/n) sum_{k=n+1}^{2n} |nu(k)|^2`
    /// for `1 <= n <= N` (infinite when some window is empty).
    pub constant: f64,
    pub holds: bool,
    pub worst_n: Option<usize>,
    /// Fitted `d` in `|nu(n)|^2 ~ n^{-d}` from dyadic block maxima.
    pub decay_exponent: Option<f64>,
    /// Smallest `k` with `k d > 1`, i.e. `sum |nu(n)|^{2k}` converges under the fitted decay.
    pub implied_power: Option<u32>,
}

pub fn korner_condition(m: &SpectralMeasure, n: usize) -> Result<KornerReport> {
    if n < 2 {
        return Err(Error::validation("korner_condition: N must be at least 2"));
    }
    Ok(korner_from(&CoefficientTable::new(m, 2 * n)?, n))
}

fn korner_from(t: &CoefficientTable, n: usize) -> KornerReport {
    let sq: Vec<f64> = t.pos[..2 * n].iter().map(|z| z.norm_sqr()).collect();
    let mut prefix = vec![0.0; 2 * n + 1];
    for (i, s) in sq.iter().enumerate() {
        prefix[i + 1] = prefix[i] + s;
    }
    let mut constant: f64 = 0.0;
    let mut worst = None;
    for k in 1..=n {
        let lhs = sq[k - 1];
        if lhs == 0.0 {
            continue;
        }
        let window = (prefix[2 * k] - prefix[k]) / k as f64;
        let ratio = if window > 0.0 { lhs / window } else { f64::INFINITY };
        if ratio > constant {
            constant = ratio;
            worst = Some(k);
        }
        if constant.is_infinite() {
            break;
        }
    }
    let decay = block_max_decay(&sq[..n]);
    let implied_power = decay.filter(|d| *d > 0.0).map(|d| (1.0 / d).floor() as u32 + 1);
    KornerReport {
        n_max: n,
        constant,
        holds: constant.is_finite(),
        worst_n: worst,
        decay_exponent: decay,
        implied_power,
    }
}

fn block_max_decay(sq: &[f64]) -> Option<f64> {
    let n = sq.len();
    let mut start = (n / 1000).max(8);
    let mut pts = Vec::new();
    while 2 * start - 1 <= n {
        let mx = sq[start - 1..2 * start - 1].iter().cloned().fold(0.0, f64::max);
        if mx > 0.0 {
            pts.push(((start as f64 * 2f64.sqrt()).ln(), mx.ln()));
        }
        start *= 2;
    }
    if pts.len() < 3 {
        return None;
    }
    let k = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (sx / k, sy / k);
    let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), p| {
        (a + (p.0 - mx) * (p.1 - my), b + (p.0 - mx).powi(2))
    });
    Some(-num / den)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarrisPower {
    pub k: Option<u32>,
    pub series: Vec<SeriesVerdict>,
}

/// Smallest `k <= k_max` for which `sum |nu(n)|^{2k}` is judged convergent.
pub fn harris_power_check(m: &SpectralMeasure, k_max: u32, n: usize) -> Result<HarrisPower> {
    if k_max == 0 {
        return Err(Error::validation("harris_power_check: k_max must be at least 1"));
    }
    let table = if m.as_riesz().is_some() {
        None
    } else {
        Some(CoefficientTable::new(m, n)?)
    };
    Ok(harris_from(m, table.as_ref(), k_max, n))
}

fn harris_from(m: &SpectralMeasure, t: Option<&CoefficientTable>, k_max: u32, n: usize) -> HarrisPower {
    let mut series = Vec::new();
    for k in 1..=k_max {
        let s = 2.0 * k as f64;
        let v = match riesz_factor_series(m, s, n) {
            Some(v) => v,
            None => power_from(t.expect("coefficient table"), s, n),
        };
        let done = v.verdict == Verdict::Converges;
        series.push(v);
        if done {
            return HarrisPower { k: Some(k), series };
        }
    }
    HarrisPower { k: None, series }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    pub n_max: usize,
    pub hr_ps: Vec<f64>,
    pub eps: f64,
    pub alphas: Vec<f64>,
    pub k_max: u32,
    /// A Wiener average above this, with no visible decay, is read as an atom.
    pub atom_threshold: f64,
    /// Largest `|nu(n)|` on `(N/10, N]` still counted as decayed.
    pub rajchman_threshold: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            n_max: DEFAULT_N_MAX,
            hr_ps: vec![1.2, 1.5, 1.9],
            eps: 0.1,
            alphas: vec![1.0, 2.0, 3.0, 4.0, 6.0, 8.0],
            k_max: 8,
            atom_threshold: 1e-3,
            rajchman_threshold: 0.25,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", content = "witness", rename_all = "snake_case")]
pub enum Overall {
    NotHyperbounded(String),
    Hyperbounded(String),
    Inconclusive(String),
}

impl Overall {
    pub fn is_hyperbounded(&self) -> bool {
        matches!(self, Overall::Hyperbounded(_))
    }

    pub fn is_not_hyperbounded(&self) -> bool {
        matches!(self, Overall::NotHyperbounded(_))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HrEntry {
    pub p: f64,
    pub eps: f64,
    pub series: SeriesVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WienerPoint {
    pub n: usize,
    pub average: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub measure: String,
    pub wiener: Vec<WienerPoint>,
    pub has_atoms: bool,
    pub rajchman: bool,
    pub ht: SeriesVerdict,
    pub hr: Vec<HrEntry>,
    pub alpha_summability: Vec<AlphaSummability>,
    pub korner: KornerReport,
    pub harris_power: HarrisPower,
    pub overall: Overall,
}

pub fn classify(m: &SpectralMeasure) -> Result<Classification> {
    classify_with(m, &ClassifyConfig::default())
}

pub fn classify_with(m: &SpectralMeasure, cfg: &ClassifyConfig) -> Result<Classification> {
    let n = cfg.n_max;
    if n < 100 {
        return Err(Error::validation("classify: n_max must be at least 100"));
    }
    for &p in &cfg.hr_ps {
        check_hr(p, cfg.eps)?;
    }
    for &a in &cfg.alphas {
        check_alpha(a)?;
    }
    let table = CoefficientTable::new(m, 2 * n)?;

    let wiener: Vec<WienerPoint> = checkpoints(n)
        .into_iter()
        .map(|k| WienerPoint {
            n: k,
            average: wiener_from(&table, k),
        })
        .collect();
    let has_atoms = atoms_visible(&wiener, cfg.atom_threshold);
    let tail_max = table.pos[n / 10..n]
        .iter()
        .chain(table.neg[n / 10..n].iter())
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let rajchman = tail_max <= cfg.rajchman_threshold;

    let ht = ht_from(&table, n);
    let hr: Vec<HrEntry> = cfg
        .hr_ps
        .iter()
        .map(|&p| HrEntry {
            p,
            eps: cfg.eps,
            series: hr_from(&table, p, cfg.eps, n),
        })
        .collect();
    let alpha_summability: Vec<AlphaSummability> = cfg
        .alphas
        .iter()
        .map(|&alpha| AlphaSummability {
            alpha,
            implied_p: implied_p(alpha),
            series: riesz_factor_series(m, alpha, n).unwrap_or_else(|| power_from(&table, alpha, n)),
        })
        .collect();
    let korner = korner_from(&table, n);
    let harris_power = harris_from(m, Some(&table), cfg.k_max, n);

    let overall = if has_atoms {
        let last = wiener.last().map_or(0.0, |w| w.average);
        Overall::NotHyperbounded(format!("atom: Wiener average {last:.4e} does not decay"))
    } else if ht.verdict == Verdict::Diverges {
        Overall::NotHyperbounded("ht series diverges".into())
    } else if let Some(h) = hr.iter().rev().find(|h| h.series.verdict == Verdict::Diverges) {
        Overall::NotHyperbounded(format!("hr series diverges at p = {}, eps = {}", h.p, h.eps))
    } else if let Some(a) = alpha_summability
        .iter()
        .find(|a| a.series.verdict == Verdict::Converges)
    {
        Overall::Hyperbounded(format!(
            "alpha = {}: maps L^{} to L^2",
            a.alpha, a.implied_p
        ))
    } else {
        Overall::Inconclusive("no criterion decided".into())
    };

    Ok(Classification {
        measure: m.kind_name().to_string(),
        wiener,
        has_atoms,
        rajchman,
        ht,
        hr,
        alpha_summability,
        korner,
        harris_power,
        overall,
    })
}

/// Atoms show up as a Wiener average that stays put as `N` grows; a
/// continuous measure drives it to zero at some polynomial or log rate.
fn atoms_visible(w: &[WienerPoint], threshold: f64) -> bool {
    let last = match w.last() {
        Some(l) => l,
        None => return false,
    };
    if last.average <= threshold {
        return false;
    }
    let first = &w[0];
    if first.n == last.n || first.average <= 0.0 {
        return true;
    }
    let slope = (last.average / first.average).ln() / (last.n as f64 / first.n as f64).ln();
    slope > -0.1
}
