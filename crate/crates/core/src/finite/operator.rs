//! Finite-state bi-stochastic Markov operators.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// `(P f)_i = sum_j S_ij f_j` on `L^p(mu)` of a finite set.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteOperator {
    mu: Vec<f64>,
    s: DMatrix<f64>,
    tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: String,
    /// Offending state (row, or column for invariance).
    pub index: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub states: usize,
    pub valid: bool,
    pub ergodic: bool,
    pub violations: Vec<Violation>,
}

/// Check every bi-stochasticity requirement and strong connectivity.
pub fn validate(mu: &[f64], s: &DMatrix<f64>, tol: f64) -> ValidationReport {
    let n = mu.len();
    let mut v = Vec::new();
    let mut push = |kind: &str, index: usize, value: f64| {
        v.push(Violation {
            kind: kind.into(),
            index,
            value,
        })
    };
    if s.nrows() != n || s.ncols() != n {
        push("shape", s.nrows().max(s.ncols()), n as f64);
        return ValidationReport {
            states: n,
            valid: false,
            ergodic: false,
            violations: v,
        };
    }
    let total: f64 = mu.iter().sum();
    if (total - 1.0).abs() > tol * n.max(1) as f64 {
        push("mass", 0, total);
    }
    for (i, &m) in mu.iter().enumerate() {
        if !(m > 0.0 && m.is_finite()) {
            push("mu_positive", i, m);
        }
    }
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            let x = s[(i, j)];
            if !x.is_finite() || x < -tol {
                push("entry_negative", i * n + j, x);
            }
            row += x;
        }
        if (row - 1.0).abs() > tol * n as f64 {
            push("row_sum", i, row);
        }
    }
    for j in 0..n {
        let col: f64 = (0..n).map(|i| mu[i] * s[(i, j)]).sum();
        if (col - mu[j]).abs() > tol * n as f64 {
            push("invariance", j, col - mu[j]);
        }
    }
    let valid = v.is_empty();
    let ergodic = valid && strongly_connected(s);
    ValidationReport {
        states: n,
        valid,
        ergodic,
        violations: v,
    }
}

/// Adjacency lists of the support digraph `i -> j` when `S_ij > 0`.
pub fn support_graph(s: &DMatrix<f64>) -> Vec<Vec<usize>> {
    (0..s.nrows())
        .map(|i| (0..s.ncols()).filter(|&j| s[(i, j)] > 0.0).collect())
        .collect()
}

fn reach(adj: &[Vec<usize>], from: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(u) = stack.pop() {
        for &w in &adj[u] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

fn strongly_connected(s: &DMatrix<f64>) -> bool {
    let adj = support_graph(s);
    if adj.is_empty() {
        return false;
    }
    let fwd = reach(&adj, 0);
    let mut rev = vec![Vec::new(); adj.len()];
    for (u, out) in adj.iter().enumerate() {
        for &w in out {
            rev[w].push(u);
        }
    }
    let back = reach(&rev, 0);
    fwd.iter().zip(&back).all(|(a, b)| *a && *b)
}

impl FiniteOperator {
    pub fn new(mu: Vec<f64>, s: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(mu, s, DEFAULT_TOLERANCE)
    }

    /// Validate, then clamp tiny negative entries and renormalise rows so that `P1 = 1` exactly.
    pub fn with_tolerance(mu: Vec<f64>, mut s: DMatrix<f64>, tol: f64) -> Result<Self> {
        let report = validate(&mu, &s, tol);
        if !report.valid {
            let list: Vec<String> = report
                .violations
                .iter()
                .map(|v| format!("{} at {} ({:e})", v.kind, v.index, v.value))
                .collect();
            return Err(Error::validation(format!("operator: {}", list.join("; "))));
        }
        for i in 0..s.nrows() {
            let mut row = 0.0;
            for j in 0..s.ncols() {
                if s[(i, j)] < 0.0 {
                    s[(i, j)] = 0.0;
                }
                row += s[(i, j)];
            }
            for j in 0..s.ncols() {
                s[(i, j)] /= row;
            }
        }
        Ok(FiniteOperator { mu, s, tol })
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn validation(&self) -> ValidationReport {
        validate(&self.mu, &self.s, self.tol)
    }

    pub fn is_ergodic(&self) -> bool {
        strongly_connected(&self.s)
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|i| (0..self.n()).map(|j| self.s[(i, j)] * f[j]).sum())
            .collect()
    }

    /// `||f||_p` in `L^p(mu)`; `p = inf` is the maximum modulus.
    pub fn norm(&self, f: &[f64], p: f64) -> f64 {
        weighted_norm(&self.mu, f, p)
    }

    pub fn mean(&self, f: &[f64]) -> f64 {
        self.mu.iter().zip(f).map(|(m, x)| m * x).sum()
    }

    /// `S*_ij = mu_j S_ji / mu_i`, the adjoint in `L^2(mu)`.
    pub fn dual(&self) -> FiniteOperator {
        let n = self.n();
        let s = DMatrix::from_fn(n, n, |i, j| self.mu[j] * self.s[(j, i)] / self.mu[i]);
        FiniteOperator {
            mu: self.mu.clone(),
            s,
            tol: self.tol,
        }
    }

    /// `P^k` as an operator.
    pub fn power(&self, k: u32) -> FiniteOperator {
        FiniteOperator {
            mu: self.mu.clone(),
            s: matrix_power(&self.s, k),
            tol: self.tol,
        }
    }

    fn same_space(&self, other: &FiniteOperator) -> Result<()> {
        if self.n() != other.n()
            || self
                .mu
                .iter()
                .zip(&other.mu)
                .any(|(a, b)| (a - b).abs() > self.tol.max(other.tol))
        {
            return Err(Error::validation("operators act on different spaces (n or mu differ)"));
        }
        Ok(())
    }

    /// `P Q`: first apply `Q`, then `P`.
    pub fn compose(&self, other: &FiniteOperator) -> Result<FiniteOperator> {
        self.same_space(other)?;
        FiniteOperator::with_tolerance(self.mu.clone(), &self.s * &other.s, self.tol)
    }

    /// `(P + P*) / 2`.
    pub fn symmetrize(&self) -> FiniteOperator {
        let d = self.dual();
        FiniteOperator {
            mu: self.mu.clone(),
            s: (&self.s + &d.s) * 0.5,
            tol: self.tol,
        }
    }

    pub fn mix(parts: &[(f64, &FiniteOperator)]) -> Result<FiniteOperator> {
        let Some((_, first)) = parts.first() else {
            return Err(Error::validation("mix: no operators"));
        };
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 || parts.iter().any(|(w, _)| *w < 0.0) {
            return Err(Error::validation("mix: weights must be non-negative and sum to 1"));
        }
        let mut s = DMatrix::zeros(first.n(), first.n());
        for (w, op) in parts {
            first.same_space(op)?;
            s += &op.s * *w;
        }
        FiniteOperator::with_tolerance(first.mu.clone(), s, first.tol)
    }
}

pub fn weighted_norm(mu: &[f64], f: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return f.iter().map(|x| x.abs()).fold(0.0, f64::max);
    }
    let s: f64 = mu.iter().zip(f).map(|(m, x)| m * x.abs().powf(p)).sum();
    s.powf(1.0 / p)
}

pub fn matrix_power(s: &DMatrix<f64>, k: u32) -> DMatrix<f64> {
    let mut result = DMatrix::identity(s.nrows(), s.ncols());
    let mut base = s.clone();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    result
}

fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

/// Two halves of `n = 2m` uniform atoms; `S_ij = 2/n` across the halves.
pub fn example2(n: usize) -> Result<FiniteOperator> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::validation(format!("example2: n = {n} must be even and >= 2")));
    }
    let half = n / 2;
    let s = DMatrix::from_fn(n, n, |i, j| if (i < half) != (j < half) { 2.0 / n as f64 } else { 0.0 });
    FiniteOperator::new(uniform(n), s)
}

/// Cyclic permutation `(P f)_i = f_{i+1 mod d}`.
pub fn cycle(d: usize) -> Result<FiniteOperator> {
    if d < 1 {
        return Err(Error::validation("cycle: d must be positive"));
    }
    let s = DMatrix::from_fn(d, d, |i, j| if j == (i + 1) % d { 1.0 } else { 0.0 });
    FiniteOperator::new(uniform(d), s)
}

pub fn identity(n: usize) -> Result<FiniteOperator> {
    FiniteOperator::new(uniform(n), DMatrix::identity(n, n))
}

/// `S_ij = mu_j`: the expectation operator.
pub fn rank_one(mu: Vec<f64>) -> Result<FiniteOperator> {
    let n = mu.len();
    let s = DMatrix::from_fn(n, n, |_, j| mu[j]);
    FiniteOperator::new(mu, s)
}

/// `(1 - eps) E + eps swap` on two uniform atoms.
pub fn lazy_swap(eps: f64) -> Result<FiniteOperator> {
    let e = rank_one(uniform(2))?;
    let sw = cycle(2)?;
    FiniteOperator::mix(&[(1.0 - eps, &e), (eps, &sw)])
}

/// Scale a positive matrix so that `M = diag(mu_rows) S` has row sums
/// `row_mass` and column sums `col_mass`; returns `S` (rows sum to one).
fn sinkhorn(k: &DMatrix<f64>, row_mass: &[f64], col_mass: &[f64]) -> DMatrix<f64> {
    let (r, c) = (k.nrows(), k.ncols());
    let mut m = k.clone();
    for _ in 0..10_000 {
        for (i, target) in row_mass.iter().enumerate() {
            let s: f64 = m.row(i).sum();
            let f = target / s;
            m.row_mut(i).scale_mut(f);
        }
        let mut worst: f64 = 0.0;
        for (j, target) in col_mass.iter().enumerate() {
            let s: f64 = m.column(j).sum();
            worst = worst.max((s - target).abs() / target);
            let f = target / s;
            m.column_mut(j).scale_mut(f);
        }
        if worst < 1e-15 {
            break;
        }
    }
    DMatrix::from_fn(r, c, |i, j| m[(i, j)] / row_mass[i])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockCyclicOptions {
    pub d: usize,
    pub class_size: usize,
    /// Draw non-uniform masses inside each class (class masses stay `1/d`).
    pub uneven_mass: bool,
}

/// Ergodic operator with period exactly `d`: rows of class `c + 1` are
/// supported on class `c`, with strictly positive blocks.
pub fn random_block_cyclic(opts: BlockCyclicOptions, seed: u64) -> Result<FiniteOperator> {
    let BlockCyclicOptions {
        d,
        class_size: k,
        uneven_mass,
    } = opts;
    if d < 1 || k < 1 {
        return Err(Error::validation("random_block_cyclic: d and class_size must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = d * k;
    let mut mu = vec![0.0; n];
    for c in 0..d {
        let w: Vec<f64> = (0..k)
            .map(|_| if uneven_mass { rng.gen_range(0.2..1.0) } else { 1.0 })
            .collect();
        let t: f64 = w.iter().sum();
        for (i, wi) in w.iter().enumerate() {
            mu[c * k + i] = wi / (t * d as f64);
        }
    }
    let mut s = DMatrix::zeros(n, n);
    for c in 0..d {
        let from = (c + 1) % d;
        let raw = DMatrix::from_fn(k, k, |_, _| {
            let u: f64 = rng.gen_range(0.0..1.0);
            1e-3 + u * u * u
        });
        let rows = &mu[from * k..from * k + k];
        let cols = &mu[c * k..c * k + k];
        let block = sinkhorn(&raw, rows, cols);
        for i in 0..k {
            for j in 0..k {
                s[(from * k + i, c * k + j)] = block[(i, j)];
            }
        }
    }
    FiniteOperator::new(mu, s)
}

/// Symmetric doubly stochastic `k x k` matrix from averaged random permutations.
fn random_symmetric_stochastic(k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(k, k);
    let draws = 3;
    for draw in 0..draws {
        let mut perm: Vec<usize> = (0..k).collect();
        for i in (1..k).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        if draw == 0 {
            // A single k-cycle through the shuffled order keeps `b` irreducible.
            let order = perm.clone();
            for i in 0..k {
                perm[order[i]] = order[(i + 1) % k];
            }
        }
        for i in 0..k {
            b[(i, perm[i])] += 0.5 / draws as f64;
            b[(perm[i], i)] += 0.5 / draws as f64;
        }
    }
    b
}

/// Period-`d` chain on uniform masses whose blocks are commuting symmetric
/// polynomials of one symmetric stochastic matrix. `P^d` is then normal on
/// every class, so its norm on class-mean-zero functions is its spectral radius.
pub fn random_normal_cyclic(d: usize, class_size: usize, seed: u64) -> Result<FiniteOperator> {
    let k = class_size;
    if d < 1 || k < 2 {
        return Err(Error::validation("random_normal_cyclic: need d >= 1 and class_size >= 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = random_symmetric_stochastic(k, &mut rng);
    let b2 = &b * &b;
    let id = DMatrix::<f64>::identity(k, k);
    let n = d * k;
    let mut s = DMatrix::zeros(n, n);
    for c in 0..d {
        let lazy = rng.gen_range(0.2..0.5);
        let lin = rng.gen_range(0.3..0.7) * (1.0 - lazy);
        let quad = 1.0 - lazy - lin;
        let block = &id * lazy + &b * lin + &b2 * quad;
        let from = (c + 1) % d;
        for i in 0..k {
            for j in 0..k {
                s[(from * k + i, c * k + j)] = block[(i, j)];
            }
        }
    }
    FiniteOperator::new(uniform(n), s)
}

/// JSON form of an operator: explicit `{"mu": [...], "S": [[...]]}` or a generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperatorSpec {
    Explicit {
        mu: Vec<f64>,
        #[serde(rename = "S")]
        s: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
    Generated(Generator),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    Example2 { n: usize },
    Cycle { d: usize },
    Identity { n: usize },
    RankOne { n: usize },
    LazySwap { eps: f64 },
    RandomBlockCyclic {
        d: usize,
        seed: u64,
        #[serde(default = "default_class_size")]
        class_size: usize,
        #[serde(default)]
        uneven_mass: bool,
    },
    RandomNormalCyclic {
        d: usize,
        seed: u64,
        #[serde(default = "default_class_size")]
        class_size: usize,
    },
}

fn default_class_size() -> usize {
    4
}

impl OperatorSpec {
    pub fn build(&self) -> Result<FiniteOperator> {
        match self {
            OperatorSpec::Explicit { mu, s, tolerance } => {
                let n = mu.len();
                if s.len() != n || s.iter().any(|r| r.len() != n) {
                    return Err(Error::validation(format!("operator: S must be {n} x {n}")));
                }
                let m = DMatrix::from_fn(n, n, |i, j| s[i][j]);
                FiniteOperator::with_tolerance(mu.clone(), m, tolerance.unwrap_or(DEFAULT_TOLERANCE))
            }
            OperatorSpec::Generated(g) => match *g {
                Generator::Example2 { n } => example2(n),
                Generator::Cycle { d } => cycle(d),
                Generator::Identity { n } => identity(n),
                Generator::RankOne { n } => rank_one(uniform(n)),
                Generator::LazySwap { eps } => lazy_swap(eps),
                Generator::RandomBlockCyclic {
                    d,
                    seed,
                    class_size,
                    uneven_mass,
                } => random_block_cyclic(
                    BlockCyclicOptions {
                        d,
                        class_size,
                        uneven_mass,
                    },
                    seed,
                ),
                Generator::RandomNormalCyclic { d, seed, class_size } => {
                    random_normal_cyclic(d, class_size, seed)
                }
            },
        }
    }
}

impl From<&FiniteOperator> for OperatorSpec {
    fn from(op: &FiniteOperator) -> Self {
        let n = op.n();
        OperatorSpec::Explicit {
            mu: op.mu.clone(),
            s: (0..n).map(|i| (0..n).map(|j| op.s[(i, j)]).collect()).collect(),
            tolerance: None,
        }
    }
}
