//! Partial sums of non-negative series with a heuristic convergence verdict.
//!
//! Terms `t_n` are grouped into dyadic blocks inside the window
//! `[N / 1000, N]`. The block sums are fitted to
//! `log B(X) = c + e log X - gamma log log X`, which is exact (up to lower
//! order corrections) for terms `n^{-beta} (log n)^{-gamma}` with
//! `e = 1 - beta`. The verdict compares `beta` with 1 and, on the boundary,
//! `gamma` with 1.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Converges,
    Diverges,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesConfig {
    /// Required distance of the fitted power exponent from 1.
    pub margin: f64,
    /// Required distance of the fitted log exponent from 1 when the power
    /// exponent sits on the boundary.
    pub log_margin: f64,
    /// Width of the fitting window in decades below `N`.
    pub window_decades: f64,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig {
            margin: 0.025,
            log_margin: 0.25,
            window_decades: 3.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub n: usize,
    pub partial_sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesVerdict {
    pub rule: String,
    pub n_max: usize,
    pub checkpoints: Vec<Checkpoint>,
    /// Fitted slope `e` of `log(term * n)` against `log n`; terms decay like `n^{e-1}`.
    pub tail_exponent: Option<f64>,
    /// Fitted power of `1 / log n` in the terms.
    pub log_exponent: Option<f64>,
    /// Extrapolated remainder `sum_{n > N} t_n` from the fitted model.
    pub tail_estimate: Option<f64>,
    pub verdict: Verdict,
    pub note: String,
}

impl SeriesVerdict {
    pub fn total(&self) -> f64 {
        self.checkpoints.last().map_or(0.0, |c| c.partial_sum)
    }

    /// Partial sum at the largest checkpoint not exceeding `n`.
    pub fn partial_sum_at(&self, n: usize) -> Option<f64> {
        self.checkpoints
            .iter()
            .take_while(|c| c.n <= n)
            .last()
            .map(|c| c.partial_sum)
    }
}

/// Logarithmically spaced checkpoints `10^2, 10^3, ...` up to and including `n_max`.
pub fn checkpoints(n_max: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut c = 100usize;
    while c < n_max {
        out.push(c);
        c *= 10;
    }
    out.push(n_max);
    out
}

/// Build a verdict from `terms[i] = t_{i+1}`, `i < n_max`.
pub fn analyze_terms(rule: impl Into<String>, terms: &[f64], cfg: &SeriesConfig) -> SeriesVerdict {
    let n_max = terms.len();
    let marks = checkpoints(n_max.max(1));
    let mut sums = Vec::with_capacity(marks.len());
    let mut acc = 0.0;
    let mut next = 0;
    for (i, t) in terms.iter().enumerate() {
        acc += t;
        while next < marks.len() && marks[next] == i + 1 {
            sums.push(Checkpoint {
                n: i + 1,
                partial_sum: acc,
            });
            next += 1;
        }
    }
    if sums.is_empty() {
        sums.push(Checkpoint {
            n: n_max,
            partial_sum: acc,
        });
    }
    let mut out = SeriesVerdict {
        rule: rule.into(),
        n_max,
        checkpoints: sums,
        tail_exponent: None,
        log_exponent: None,
        tail_estimate: None,
        verdict: Verdict::Inconclusive,
        note: String::new(),
    };
    fit_tail(terms, cfg, &mut out);
    out
}

/// Verdict for a series with finitely many non-zero terms.
pub fn finite_series(rule: impl Into<String>, terms: &[f64]) -> SeriesVerdict {
    let total: f64 = terms.iter().sum();
    SeriesVerdict {
        rule: rule.into(),
        n_max: terms.len(),
        checkpoints: vec![Checkpoint {
            n: terms.len(),
            partial_sum: total,
        }],
        tail_exponent: None,
        log_exponent: None,
        tail_estimate: Some(0.0),
        verdict: Verdict::Converges,
        note: "finitely many non-zero terms".into(),
    }
}

fn fit_tail(terms: &[f64], cfg: &SeriesConfig, out: &mut SeriesVerdict) {
    let n_max = terms.len();
    if terms.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        out.note = "terms must be finite and non-negative".into();
        return;
    }
    let lo = ((n_max as f64) / 10f64.powf(cfg.window_decades)).max(8.0) as usize;
    let mut blocks = Vec::new();
    let mut start = lo;
    while 2 * start - 1 <= n_max {
        let end = 2 * start;
        let sum: f64 = terms[start - 1..end - 1].iter().sum();
        blocks.push((start, end, sum));
        start = end;
    }
    if blocks.len() < 5 {
        if blocks.iter().all(|b| b.2 == 0.0) && terms[lo.min(n_max) - 1..].iter().all(|&t| t == 0.0) {
            out.verdict = Verdict::Converges;
            out.tail_estimate = Some(0.0);
            out.note = "no mass in the tail window".into();
        } else {
            out.note = format!("too few terms to fit a tail (N = {n_max})");
        }
        return;
    }
    if blocks.iter().all(|b| b.2 == 0.0) {
        out.verdict = Verdict::Converges;
        out.tail_estimate = Some(0.0);
        out.note = format!("all terms vanish on [{lo}, {n_max}]");
        return;
    }
    let trailing_zero = blocks.iter().rev().take_while(|b| b.2 == 0.0).count();
    if trailing_zero >= 2 {
        let last = blocks[blocks.len() - trailing_zero].0;
        out.verdict = Verdict::Converges;
        out.tail_estimate = Some(0.0);
        out.note = format!("terms vanish from n = {last} onward");
        return;
    }
    let pts: Vec<(f64, f64)> = blocks
        .iter()
        .filter(|b| b.2 > 0.0)
        .map(|&(s, e, b)| (((s as f64) * (e as f64)).sqrt().ln(), b.ln()))
        .collect();
    if pts.len() < 4 {
        out.note = "too few non-empty blocks to fit a tail".into();
        return;
    }
    let Some((c, e, gamma)) = least_squares(&pts) else {
        out.note = "degenerate tail fit".into();
        return;
    };
    out.tail_exponent = Some(e);
    out.log_exponent = Some(gamma);
    let beta = 1.0 - e;
    let (verdict, why) = if beta > 1.0 + cfg.margin {
        (Verdict::Converges, format!("terms decay like n^{:.3}", -beta))
    } else if beta < 1.0 - cfg.margin {
        (Verdict::Diverges, format!("terms decay like n^{:.3}", -beta))
    } else if gamma > 1.0 + cfg.log_margin {
        (
            Verdict::Converges,
            format!("terms decay like 1/(n log^{gamma:.2} n)"),
        )
    } else if gamma < 1.0 - cfg.log_margin {
        (
            Verdict::Diverges,
            format!("terms decay like 1/(n log^{gamma:.2} n)"),
        )
    } else {
        (
            Verdict::Inconclusive,
            format!("borderline decay: beta = {beta:.3}, log power = {gamma:.2}"),
        )
    };
    out.verdict = verdict;
    out.note = format!("{why} (fit on [{lo}, {n_max}])");
    if verdict != Verdict::Converges {
        return;
    }
    // A convergent tail cannot gain more per decade as N grows; when it does,
    // the fit is tracking structure (e.g. self-similar spikes), not decay.
    let inc = decade_increments(terms, lo);
    if inc.len() >= 2 && inc[inc.len() - 1] >= inc[inc.len() - 2] {
        out.verdict = Verdict::Inconclusive;
        out.note = format!(
            "fit suggests convergence but per-decade increments grow ({:.3e} -> {:.3e})",
            inc[inc.len() - 2],
            inc[inc.len() - 1]
        );
        return;
    }
    let x_end = blocks.last().unwrap().1 as f64;
    out.tail_estimate = if beta > 1.0 + cfg.margin {
        Some(extrapolate_tail(c, e, gamma, x_end))
    } else {
        // boundary case: pin the power exponent at the critical value
        least_squares_log(&pts).and_then(|(c0, g0)| (g0 > 1.0).then(|| extrapolate_tail(c0, 0.0, g0, x_end)))
    };
}

/// Increments of the partial sums over the decades ending at `N`, oldest first.
fn decade_increments(terms: &[f64], lo: usize) -> Vec<f64> {
    let n = terms.len();
    let mut edges = vec![n];
    while *edges.last().unwrap() / 10 >= lo.max(1) {
        let e = *edges.last().unwrap() / 10;
        edges.push(e);
    }
    edges.reverse();
    edges
        .windows(2)
        .map(|w| terms[w[0]..w[1]].iter().sum())
        .collect()
}

/// Fit of `y = c - gamma ln u` (power exponent fixed at the boundary).
fn least_squares_log(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    let k = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| -p.0.ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let (num, den) = xs.iter().zip(pts).fold((0.0, 0.0), |(a, b), (x, p)| {
        (a + (x - mx) * (p.1 - my), b + (x - mx).powi(2))
    });
    if den <= 0.0 {
        return None;
    }
    let g = num / den;
    Some((my - g * mx, g))
}

/// Least-squares fit of `y = c + e u - gamma ln u` with `u = ln X`.
fn least_squares(pts: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    let mut ata = Matrix3::<f64>::zeros();
    let mut aty = Vector3::<f64>::zeros();
    for &(u, y) in pts {
        let row = Vector3::new(1.0, u, -u.ln());
        ata += row * row.transpose();
        aty += row * y;
    }
    let sol = ata.lu().solve(&aty)?;
    sol.iter().all(|v| v.is_finite()).then(|| (sol[0], sol[1], sol[2]))
}

/// Sum of the fitted block model over dyadic blocks starting at `x0`.
fn extrapolate_tail(c: f64, e: f64, gamma: f64, x0: f64) -> f64 {
    let block = |j: f64| {
        let u = x0.ln() + (j + 0.5) * std::f64::consts::LN_2;
        (c + e * u - gamma * u.ln()).exp()
    };
    let mut total = 0.0;
    let mut j = 0.0;
    while j < 1e6 {
        let b = block(j);
        total += b;
        if b < 1e-17 * total {
            return total;
        }
        j += 1.0;
    }
    // remaining blocks behave like (a + j ln 2)^{-gamma} when e <= 0
    if e <= 0.0 && gamma > 1.0 {
        let u = x0.ln() + j * std::f64::consts::LN_2;
        total += block(j) * u / (std::f64::consts::LN_2 * (gamma - 1.0));
        total
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(f: impl Fn(f64) -> f64, n: usize) -> SeriesVerdict {
        let terms: Vec<f64> = (1..=n).map(|k| f(k as f64)).collect();
        analyze_terms("test", &terms, &SeriesConfig::default())
    }

    #[test]
    fn power_series() {
        assert_eq!(run(|n| n.powf(-1.5), 100_000).verdict, Verdict::Converges);
        assert_eq!(run(|n| n.powf(-0.9), 100_000).verdict, Verdict::Diverges);
        assert_eq!(run(|_| 1.0, 100_000).verdict, Verdict::Diverges);
        assert_eq!(run(|n| 1.0 / n, 100_000).verdict, Verdict::Diverges);
    }

    #[test]
    fn log_boundary() {
        let v = run(|n| 1.0 / (n * (n + 2.0).ln().powi(2)), 100_000);
        assert_eq!(v.verdict, Verdict::Converges);
        assert!((v.log_exponent.unwrap() - 2.0).abs() < 0.3, "{v:?}");
        let v = run(|n| 1.0 / (n * (n + 2.0).ln().powf(0.3)), 100_000);
        assert_eq!(v.verdict, Verdict::Diverges);
        let v = run(|n| n.powf(-0.947) * (n + 1.0).ln().powf(-3.1), 100_000);
        assert_eq!(v.verdict, Verdict::Diverges, "{v:?}");
    }

    #[test]
    fn tail_estimate_tracks_integral() {
        let n = 100_000usize;
        let v = run(|k| 1.0 / (k * k.ln().powi(2)).max(1e-300) * (k > 1.0) as u8 as f64, n);
        let want = 1.0 / (n as f64).ln();
        let got = v.tail_estimate.unwrap();
        assert!(got / want > 0.5 && got / want < 2.0, "{got} vs {want}");
    }

    #[test]
    fn vanishing_tail() {
        let v = run(|n| if n < 50.0 { 1.0 } else { 0.0 }, 10_000);
        assert_eq!(v.verdict, Verdict::Converges);
        assert_eq!(v.total(), 49.0);
    }

    #[test]
    fn partial_sums_monotone() {
        let v = run(|n| 1.0 / n, 100_000);
        for w in v.checkpoints.windows(2) {
            assert!(w[1].partial_sum >= w[0].partial_sum);
        }
        assert_eq!(v.checkpoints.len(), 4);
    }
}
