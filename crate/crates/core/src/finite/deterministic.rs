//! Deterministic sets by exhaustive subset search.

use serde::{Deserialize, Serialize};

use super::cyclic::CyclicDecomposition;
use super::operator::{matrix_power, FiniteOperator};
use crate::error::{Error, Result};

pub const DEFAULT_N_LIMIT: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantFamily {
    pub k: usize,
    pub sets: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyCheck {
    pub k: usize,
    /// `max |(P^{kM} - P^{k(M+1)})_ij|` at the last doubling.
    pub gap: f64,
    pub converges: bool,
    pub expected: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeterministicStructure {
    pub n: usize,
    /// Bitmask `b` has state `i` when bit `i` is set.
    pub sigma_d: Vec<u64>,
    pub sigma_i: Vec<InvariantFamily>,
    pub sigma_u: Vec<u64>,
    pub is_algebra: bool,
    pub invariants_deterministic: bool,
    /// Filled for ergodic operators.
    pub period: Option<usize>,
    pub matches_classes: Option<bool>,
    pub invariants_match_gcd: Option<bool>,
    pub cauchy: Vec<CauchyCheck>,
}

const TOL: f64 = 1e-9;

/// `P 1_B` when it is again an indicator.
fn step(s: &nalgebra::DMatrix<f64>, b: u64) -> Option<u64> {
    let n = s.nrows();
    let mut out = 0u64;
    for i in 0..n {
        let mut r = 0.0;
        for j in 0..n {
            if b >> j & 1 == 1 {
                r += s[(i, j)];
            }
        }
        if (r - 1.0).abs() <= TOL {
            out |= 1 << i;
        } else if r.abs() > TOL {
            return None;
        }
    }
    Some(out)
}

/// Sets whose `P`-orbit stays indicator-valued.
fn deterministic_masks(s: &nalgebra::DMatrix<f64>) -> Vec<u64> {
    let n = s.nrows();
    let total = 1usize << n;
    let next: Vec<Option<u64>> = (0..total as u64).map(|b| step(s, b)).collect();
    // 0 unknown, 1 on the current path, 2 good, 3 bad.
    let mut state = vec![0u8; total];
    for start in 0..total {
        if state[start] != 0 {
            continue;
        }
        let mut path = Vec::new();
        let mut cur = start;
        let verdict = loop {
            match state[cur] {
                1 | 2 => break 2,
                3 => break 3,
                _ => {}
            }
            state[cur] = 1;
            path.push(cur);
            match next[cur] {
                Some(b) => cur = b as usize,
                None => break 3,
            }
        };
        for p in path {
            state[p] = verdict;
        }
    }
    (0..total as u64).filter(|&b| state[b as usize] == 2).collect()
}

/// Sets with `P^k 1_A = 1_A`, tested directly on `S^k`.
fn invariant_masks(s: &nalgebra::DMatrix<f64>, k: usize) -> Vec<u64> {
    let sk = matrix_power(s, k as u32);
    let n = s.nrows();
    (0..1u64 << n)
        .filter(|&b| {
            (0..n).all(|i| {
                let r: f64 = (0..n).filter(|&j| b >> j & 1 == 1).map(|j| sk[(i, j)]).sum();
                let want = (b >> i & 1) as f64;
                (r - want).abs() <= TOL
            })
        })
        .collect()
}

fn is_algebra(sets: &[u64], n: usize) -> bool {
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let has = |b: u64| sets.binary_search(&b).is_ok();
    has(0)
        && has(full)
        && sets.iter().all(|&a| has(full & !a))
        && sets.iter().all(|&a| sets.iter().all(|&b| has(a | b)))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Unions of classes whose index set is invariant under a shift by `g`.
fn class_unions(dec: &CyclicDecomposition, g: usize) -> Vec<u64> {
    let d = dec.period;
    let class_mask: Vec<u64> = dec
        .classes
        .iter()
        .map(|c| c.iter().fold(0u64, |m, &i| m | 1 << i))
        .collect();
    let mut out: Vec<u64> = (0..1u64 << d)
        .filter(|&j| (0..d).all(|c| (j >> c & 1) == (j >> ((c + g) % d) & 1)))
        .map(|j| (0..d).filter(|&c| j >> c & 1 == 1).fold(0u64, |m, c| m | class_mask[c]))
        .collect();
    out.sort_unstable();
    out
}

/// Does `P^{nk}` converge? Repeated squaring of `P^k` until successive powers agree.
fn cauchy(op: &FiniteOperator, k: usize) -> (f64, bool) {
    let q = matrix_power(op.matrix(), k as u32);
    let mut m = q.clone();
    let mut gap = f64::INFINITY;
    for _ in 0..24 {
        let next = &m * &q;
        gap = (&next - &m).amax();
        if gap < 1e-10 {
            return (gap, true);
        }
        m = &m * &m;
    }
    (gap, false)
}

pub fn deterministic_sets(op: &FiniteOperator, n_limit: usize) -> Result<DeterministicStructure> {
    let n = op.n();
    if n > n_limit || n > 24 {
        return Err(Error::validation(format!(
            "deterministic_sets: {n} states exceeds the subset-search limit {}",
            n_limit.min(24)
        )));
    }
    let s = op.matrix();
    let sigma_d = deterministic_masks(s);
    let dual_d = deterministic_masks(op.dual().matrix());
    let sigma_u: Vec<u64> = sigma_d.iter().copied().filter(|b| dual_d.binary_search(b).is_ok()).collect();
    let dec = if op.is_ergodic() {
        Some(super::cyclic::period_and_classes(op)?)
    } else {
        None
    };
    let k_top = dec.as_ref().map_or(1, |d| d.period).max(1);
    let sigma_i: Vec<InvariantFamily> = (1..=k_top)
        .map(|k| InvariantFamily {
            k,
            sets: invariant_masks(s, k),
        })
        .collect();
    let invariants_deterministic = sigma_i
        .iter()
        .all(|f| f.sets.iter().all(|b| sigma_d.binary_search(b).is_ok()));
    let (period, matches_classes, invariants_match_gcd, cauchy_checks) = match &dec {
        Some(dec) => {
            let d = dec.period;
            let gen = class_unions(dec, 0);
            let gcd_ok = sigma_i.iter().all(|f| f.sets == class_unions(dec, gcd(f.k, d)));
            let checks = (1..=12)
                .map(|k| {
                    let (gap, converges) = cauchy(op, k);
                    CauchyCheck {
                        k,
                        gap,
                        converges,
                        expected: k % d == 0,
                    }
                })
                .collect();
            (Some(d), Some(gen == sigma_d), Some(gcd_ok), checks)
        }
        None => (None, None, None, Vec::new()),
    };
    Ok(DeterministicStructure {
        n,
        is_algebra: is_algebra(&sigma_d, n),
        sigma_d,
        sigma_i,
        sigma_u,
        invariants_deterministic,
        period,
        matches_classes,
        invariants_match_gcd,
        cauchy: cauchy_checks,
    })
}
