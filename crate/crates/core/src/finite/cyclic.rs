//! Period, cyclic classes and the class-averaging projection `E_d`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::operator::{support_graph, FiniteOperator};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CyclicDecomposition {
    pub period: usize,
    /// `labels[i] = j` when state `i` lies in `A_j`; state 0 is in `A_0`.
    pub labels: Vec<usize>,
    pub classes: Vec<Vec<usize>>,
    pub class_masses: Vec<f64>,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Cyclic classes with `P 1_{A_j} = 1_{A_{j+1}}`, so rows of `A_{j+1}` are supported in `A_j`.
pub fn period_and_classes(op: &FiniteOperator) -> Result<CyclicDecomposition> {
    if !op.is_ergodic() {
        return Err(Error::validation(
            "period_and_classes: operator is not ergodic; split it with communicating_classes first",
        ));
    }
    let adj = support_graph(op.matrix());
    let n = op.n();
    let mut level = vec![usize::MAX; n];
    level[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for &w in &adj[u] {
            if level[w] == usize::MAX {
                level[w] = level[u] + 1;
                queue.push_back(w);
            }
        }
    }
    let mut d = 0;
    for (u, out) in adj.iter().enumerate() {
        for &w in out {
            d = gcd(d, (level[u] + 1).abs_diff(level[w]));
        }
    }
    let labels: Vec<usize> = level.iter().map(|&l| (d - l % d) % d).collect();
    let mut classes = vec![Vec::new(); d];
    for (i, &c) in labels.iter().enumerate() {
        classes[c].push(i);
    }
    let class_masses: Vec<f64> = classes
        .iter()
        .map(|c| c.iter().map(|&i| op.mu()[i]).sum())
        .collect();
    let dec = CyclicDecomposition {
        period: d,
        labels,
        classes,
        class_masses,
    };
    check_decomposition(op, &dec)?;
    Ok(dec)
}

fn check_decomposition(op: &FiniteOperator, dec: &CyclicDecomposition) -> Result<()> {
    let d = dec.period;
    for (i, row) in support_graph(op.matrix()).iter().enumerate() {
        for &j in row {
            if (dec.labels[j] + 1) % d != dec.labels[i] {
                return Err(Error::breach(format!("support edge {i} -> {j} leaves the cyclic order")));
            }
        }
    }
    for (c, m) in dec.class_masses.iter().enumerate() {
        if (m - 1.0 / d as f64).abs() > 1e-9 {
            return Err(Error::breach(format!("class A_{c} has mass {m}, expected 1/{d}")));
        }
    }
    Ok(())
}

/// Independent period oracle: `gcd { k <= n : tr(A^k) > 0 }` for the support adjacency matrix.
pub fn graph_period(op: &FiniteOperator) -> usize {
    let n = op.n();
    let a: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| op.matrix()[(i, j)] > 0.0).collect())
        .collect();
    let mut cur = a.clone();
    let mut g = 0;
    for k in 1..=n {
        if (0..n).any(|i| cur[i][i]) {
            g = gcd(g, k);
        }
        let next: Vec<Vec<bool>> = (0..n)
            .map(|i| (0..n).map(|j| (0..n).any(|l| cur[i][l] && a[l][j])).collect())
            .collect();
        cur = next;
    }
    g
}

/// Communicating classes of the support digraph, each closed for a bi-stochastic operator.
pub fn communicating_classes(op: &FiniteOperator) -> Vec<Vec<usize>> {
    let n = op.n();
    let adj = support_graph(op.matrix());
    let reach: Vec<Vec<bool>> = (0..n)
        .map(|s| {
            let mut seen = vec![false; n];
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(u) = stack.pop() {
                for &w in &adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            seen
        })
        .collect();
    let mut assigned = vec![false; n];
    let mut out = Vec::new();
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        let comp: Vec<usize> = (0..n).filter(|&j| reach[i][j] && reach[j][i]).collect();
        for &j in &comp {
            assigned[j] = true;
        }
        out.push(comp);
    }
    out
}

/// The operator restricted to one closed class, with renormalised masses.
pub fn restrict(op: &FiniteOperator, states: &[usize]) -> Result<FiniteOperator> {
    let mass: f64 = states.iter().map(|&i| op.mu()[i]).sum();
    let mu = states.iter().map(|&i| op.mu()[i] / mass).collect();
    let k = states.len();
    let s = DMatrix::from_fn(k, k, |a, b| op.matrix()[(states[a], states[b])]);
    FiniteOperator::with_tolerance(mu, s, op.tolerance())
}

/// `P^j E_d`: entry `(i, k)` is `d mu_k` when `label(i) = label(k) + j`.
pub fn shifted_projection(op: &FiniteOperator, dec: &CyclicDecomposition, j: i64) -> DMatrix<f64> {
    let n = op.n();
    let d = dec.period as i64;
    DMatrix::from_fn(n, n, |i, k| {
        if (dec.labels[k] as i64 + j).rem_euclid(d) == dec.labels[i] as i64 {
            d as f64 * op.mu()[k]
        } else {
            0.0
        }
    })
}

/// `E_d f = d sum_l (int_{A_l} f dmu) 1_{A_l}`.
pub fn projection_ed(op: &FiniteOperator, dec: &CyclicDecomposition) -> Result<FiniteOperator> {
    FiniteOperator::with_tolerance(op.mu().to_vec(), shifted_projection(op, dec, 0), op.tolerance())
}
