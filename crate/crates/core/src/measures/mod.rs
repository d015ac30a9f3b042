//! Probability measures on the circle given by their Fourier-Stieltjes
//! coefficient oracles.
//!
//! The circle is `[0, 1)` with characters `e(x) = exp(2 pi i x)` and
//! `nu(n) = int e(-n x) d nu(x)`. A measure written on `[-pi, pi)` with
//! characters `exp(i n t)` has the same coefficients under `t = 2 pi x`.

mod cantor;
mod convex;
mod riesz;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cantor::{cantor_coefficient, cantor_factors, TAIL_TOLERANCE};
pub use convex::{
    ConvexMeasure, ConvexRule, ConvexSeq, CosineRule, CosineSeries, CONVEXITY_PROBE, SHIFT_MARGIN,
};
pub use riesz::{riesz_decompose, AmplitudeRule, FrequencyRule, RieszProduct, RieszSpec};

/// Declarative description of a measure; this is the on-disk JSON schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureSpec {
    Riesz(RieszSpec),
    Cantor,
    ConvexAc(ConvexSeq),
    Dirac {
        x0: f64,
    },
    Lebesgue,
    Convolution {
        left: Box<MeasureSpec>,
        right: Box<MeasureSpec>,
    },
    Power {
        base: Box<MeasureSpec>,
        k: u32,
    },
    Mixture {
        weights: Vec<f64>,
        parts: Vec<MeasureSpec>,
    },
    Reflected {
        base: Box<MeasureSpec>,
    },
    CosineSeries(CosineSeries),
}

impl MeasureSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            MeasureSpec::Riesz(_) => "riesz",
            MeasureSpec::Cantor => "cantor",
            MeasureSpec::ConvexAc(_) => "convex_ac",
            MeasureSpec::Dirac { .. } => "dirac",
            MeasureSpec::Lebesgue => "lebesgue",
            MeasureSpec::Convolution { .. } => "convolution",
            MeasureSpec::Power { .. } => "power",
            MeasureSpec::Mixture { .. } => "mixture",
            MeasureSpec::Reflected { .. } => "reflected",
            MeasureSpec::CosineSeries(_) => "cosine_series",
        }
    }
}

#[derive(Debug)]
enum Node {
    Riesz(RieszProduct),
    Cantor,
    Convex(ConvexMeasure),
    Dirac(f64),
    Lebesgue,
    Convolution(SpectralMeasure, SpectralMeasure),
    Power(SpectralMeasure, u32),
    Mixture(Vec<(f64, SpectralMeasure)>),
    Reflected(SpectralMeasure),
    Cosine(CosineSeries),
}

#[derive(Debug)]
struct Inner {
    spec: MeasureSpec,
    node: Node,
    memo: Option<RwLock<HashMap<i64, Complex64>>>,
}

/// An immutable probability measure on the circle.
///
/// Cloning is cheap. Coefficient evaluation is pure and may be called from
/// many threads; the optional memo only stores values the oracle would
/// recompute identically.
#[derive(Clone)]
pub struct SpectralMeasure {
    inner: Arc<Inner>,
}

impl fmt::Debug for SpectralMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("SpectralMeasure")
            .field(&self.inner.spec)
            .finish()
    }
}

impl SpectralMeasure {
    pub fn from_spec(spec: MeasureSpec) -> Result<Self> {
        let node = match &spec {
            MeasureSpec::Riesz(r) => Node::Riesz(RieszProduct::new(r)?),
            MeasureSpec::Cantor => Node::Cantor,
            MeasureSpec::ConvexAc(seq) => Node::Convex(ConvexMeasure::new(seq.clone())?),
            MeasureSpec::Dirac { x0 } => {
                if !x0.is_finite() {
                    return Err(Error::validation("dirac: x0 must be finite"));
                }
                Node::Dirac(x0.rem_euclid(1.0))
            }
            MeasureSpec::Lebesgue => Node::Lebesgue,
            MeasureSpec::Convolution { left, right } => Node::Convolution(
                Self::from_spec((**left).clone())?,
                Self::from_spec((**right).clone())?,
            ),
            MeasureSpec::Power { base, k } => {
                if *k == 0 {
                    return Err(Error::validation("power: k must be positive"));
                }
                Node::Power(Self::from_spec((**base).clone())?, *k)
            }
            MeasureSpec::Mixture { weights, parts } => {
                if weights.len() != parts.len() || parts.is_empty() {
                    return Err(Error::validation(
                        "mixture: weights and parts must be non-empty and of equal length",
                    ));
                }
                if weights.iter().any(|w| !(*w >= 0.0)) {
                    return Err(Error::validation("mixture: weights must be non-negative"));
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::validation(format!(
                        "mixture: weights sum to {total}, expected 1"
                    )));
                }
                let parts = weights
                    .iter()
                    .zip(parts)
                    .map(|(w, p)| Ok((*w, Self::from_spec(p.clone())?)))
                    .collect::<Result<Vec<_>>>()?;
                Node::Mixture(parts)
            }
            MeasureSpec::Reflected { base } => {
                Node::Reflected(Self::from_spec((**base).clone())?)
            }
            MeasureSpec::CosineSeries(c) => {
                c.validate()?;
                Node::Cosine(c.clone())
            }
        };
        Ok(SpectralMeasure {
            inner: Arc::new(Inner {
                spec,
                node,
                memo: None,
            }),
        })
    }

    pub fn lebesgue() -> Self {
        Self::from_spec(MeasureSpec::Lebesgue).expect("lebesgue is always valid")
    }

    pub fn dirac(x0: f64) -> Self {
        Self::from_spec(MeasureSpec::Dirac { x0 }).expect("finite x0")
    }

    pub fn cantor() -> Self {
        Self::from_spec(MeasureSpec::Cantor).expect("cantor is always valid")
    }

    pub fn riesz(spec: RieszSpec) -> Result<Self> {
        Self::from_spec(MeasureSpec::Riesz(spec))
    }

    pub fn convex_ac(seq: ConvexSeq) -> Result<Self> {
        Self::from_spec(MeasureSpec::ConvexAc(seq))
    }

    pub fn cosine_series(series: CosineSeries) -> Result<Self> {
        Self::from_spec(MeasureSpec::CosineSeries(series))
    }

    pub fn convolution(left: &SpectralMeasure, right: &SpectralMeasure) -> Self {
        Self::compose(
            MeasureSpec::Convolution {
                left: Box::new(left.spec().clone()),
                right: Box::new(right.spec().clone()),
            },
            Node::Convolution(left.clone(), right.clone()),
        )
    }

    pub fn power(base: &SpectralMeasure, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::validation("power: k must be positive"));
        }
        Ok(Self::compose(
            MeasureSpec::Power {
                base: Box::new(base.spec().clone()),
                k,
            },
            Node::Power(base.clone(), k),
        ))
    }

    pub fn mixture(parts: &[(f64, SpectralMeasure)]) -> Result<Self> {
        let spec = MeasureSpec::Mixture {
            weights: parts.iter().map(|(w, _)| *w).collect(),
            parts: parts.iter().map(|(_, m)| m.spec().clone()).collect(),
        };
        // validation path is shared with file specs
        Self::from_spec(spec.clone())?;
        Ok(Self::compose(spec, Node::Mixture(parts.to_vec())))
    }

    pub fn reflected(base: &SpectralMeasure) -> Self {
        Self::compose(
            MeasureSpec::Reflected {
                base: Box::new(base.spec().clone()),
            },
            Node::Reflected(base.clone()),
        )
    }

    fn compose(spec: MeasureSpec, node: Node) -> Self {
        SpectralMeasure {
            inner: Arc::new(Inner {
                spec,
                node,
                memo: None,
            }),
        }
    }

    /// Copy of this measure that memoises coefficient lookups.
    pub fn memoized(&self) -> Self {
        let node = match &self.inner.node {
            Node::Riesz(r) => Node::Riesz(r.clone()),
            Node::Cantor => Node::Cantor,
            Node::Convex(c) => Node::Convex(c.clone()),
            Node::Dirac(x) => Node::Dirac(*x),
            Node::Lebesgue => Node::Lebesgue,
            Node::Convolution(a, b) => Node::Convolution(a.clone(), b.clone()),
            Node::Power(b, k) => Node::Power(b.clone(), *k),
            Node::Mixture(p) => Node::Mixture(p.clone()),
            Node::Reflected(b) => Node::Reflected(b.clone()),
            Node::Cosine(c) => Node::Cosine(c.clone()),
        };
        SpectralMeasure {
            inner: Arc::new(Inner {
                spec: self.inner.spec.clone(),
                node,
                memo: Some(RwLock::new(HashMap::new())),
            }),
        }
    }

    pub fn spec(&self) -> &MeasureSpec {
        &self.inner.spec
    }

    pub fn kind_name(&self) -> &'static str {
        self.inner.spec.kind_name()
    }

    /// The materialised Riesz product, when this is a Riesz measure.
    pub fn as_riesz(&self) -> Option<&RieszProduct> {
        match &self.inner.node {
            Node::Riesz(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_convex(&self) -> Option<&ConvexMeasure> {
        match &self.inner.node {
            Node::Convex(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_dirac(&self) -> Option<f64> {
        match &self.inner.node {
            Node::Dirac(x) => Some(*x),
            _ => None,
        }
    }

    pub fn is_lebesgue(&self) -> bool {
        matches!(self.inner.node, Node::Lebesgue)
    }

    pub fn is_cantor(&self) -> bool {
        matches!(self.inner.node, Node::Cantor)
    }

    /// Mixture components, when this is a mixture.
    pub fn as_mixture(&self) -> Option<&[(f64, SpectralMeasure)]> {
        match &self.inner.node {
            Node::Mixture(parts) => Some(parts),
            _ => None,
        }
    }

    /// Largest `|n|` the oracle can answer, if bounded.
    pub fn frequency_bound(&self) -> Option<i64> {
        match &self.inner.node {
            Node::Riesz(r) if !r.is_finite() => Some(r.exact_bound()),
            Node::Convolution(a, b) => min_bound(a.frequency_bound(), b.frequency_bound()),
            Node::Power(b, _) | Node::Reflected(b) => b.frequency_bound(),
            Node::Mixture(parts) => parts
                .iter()
                .fold(None, |acc, (_, p)| min_bound(acc, p.frequency_bound())),
            _ => None,
        }
    }

    /// Fourier-Stieltjes coefficient `nu(n)`.
    pub fn coefficient(&self, n: i64) -> Result<Complex64> {
        if let Some(memo) = &self.inner.memo {
            if let Some(v) = memo.read().expect("memo lock").get(&n) {
                return Ok(*v);
            }
            let v = self.evaluate(n)?;
            memo.write().expect("memo lock").insert(n, v);
            return Ok(v);
        }
        self.evaluate(n)
    }

    fn evaluate(&self, n: i64) -> Result<Complex64> {
        let real = |x: f64| Complex64::new(x, 0.0);
        Ok(match &self.inner.node {
            Node::Riesz(r) => real(r.coefficient(n)?),
            Node::Cantor => cantor_coefficient(n),
            Node::Convex(c) => real(c.coefficient(n)),
            Node::Dirac(x0) => {
                let phase = ((n as f64) * x0).rem_euclid(1.0);
                Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * phase)
            }
            Node::Lebesgue => real(if n == 0 { 1.0 } else { 0.0 }),
            Node::Convolution(a, b) => a.coefficient(n)? * b.coefficient(n)?,
            Node::Power(b, k) => b.coefficient(n)?.powu(*k),
            Node::Mixture(parts) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (w, p) in parts {
                    acc += p.coefficient(n)? * *w;
                }
                acc
            }
            // nu_reflected(A) = nu(-A), so its n-th coefficient is nu(-n).
            Node::Reflected(b) => b.coefficient(-n)?,
            Node::Cosine(c) => real(c.coefficient(n)),
        })
    }

    /// Coefficients for every `n` in `lo..=hi`, evaluated in parallel.
    pub fn coefficients(&self, lo: i64, hi: i64) -> Result<Vec<Complex64>> {
        (lo..=hi)
            .into_par_iter()
            .map(|n| self.coefficient(n))
            .collect()
    }

    /// `|nu(n)|^2` for `n` in `1..=n_max` summed with `n -> -n`.
    pub fn two_sided_squares(&self, n_max: i64) -> Result<Vec<f64>> {
        (1..=n_max)
            .into_par_iter()
            .map(|n| Ok(self.coefficient(n)?.norm_sqr() + self.coefficient(-n)?.norm_sqr()))
            .collect()
    }
}

fn min_bound(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zoo() -> Vec<SpectralMeasure> {
        let riesz = SpectralMeasure::riesz(RieszSpec::geometric(4, 4, AmplitudeRule::InvLog))
            .unwrap();
        let convex = SpectralMeasure::convex_ac(ConvexSeq::power(0.5)).unwrap();
        vec![
            SpectralMeasure::lebesgue(),
            SpectralMeasure::dirac(0.3),
            SpectralMeasure::cantor(),
            riesz.clone(),
            convex.clone(),
            SpectralMeasure::convolution(&riesz, &SpectralMeasure::cantor()),
            SpectralMeasure::power(&convex, 3).unwrap(),
            SpectralMeasure::mixture(&[(0.25, SpectralMeasure::dirac(0.1)), (0.75, riesz)])
                .unwrap(),
            SpectralMeasure::reflected(&SpectralMeasure::dirac(0.3)),
        ]
    }

    #[test]
    fn normalisation_symmetry_and_bound() {
        for m in zoo() {
            assert!((m.coefficient(0).unwrap() - 1.0).norm() < 1e-15, "{m:?}");
            for n in 1..=2000 {
                let a = m.coefficient(n).unwrap();
                let b = m.coefficient(-n).unwrap();
                assert!((a - b.conj()).norm() <= 1e-12, "{m:?} at {n}");
                assert!(a.norm() <= 1.0 + 1e-12, "{m:?} at {n}");
            }
        }
    }

    #[test]
    fn lebesgue_absorbs_convolution() {
        let m = SpectralMeasure::convolution(&SpectralMeasure::lebesgue(), &SpectralMeasure::cantor());
        assert_eq!(m.coefficient(0).unwrap(), Complex64::new(1.0, 0.0));
        for n in 1..100 {
            assert_eq!(m.coefficient(n).unwrap().norm(), 0.0);
        }
    }

    #[test]
    fn power_matches_pointwise_power() {
        let c = SpectralMeasure::cantor();
        let p = SpectralMeasure::power(&c, 4).unwrap();
        for n in -50..50 {
            assert_eq!(p.coefficient(n).unwrap(), c.coefficient(n).unwrap().powu(4));
        }
    }

    #[test]
    fn reflection_conjugates() {
        let d = SpectralMeasure::dirac(0.2);
        let r = SpectralMeasure::reflected(&d);
        for n in -10..10 {
            let want = SpectralMeasure::dirac(0.8).coefficient(n).unwrap();
            assert!((r.coefficient(n).unwrap() - want).norm() < 1e-12);
        }
    }

    #[test]
    fn memo_is_transparent() {
        let c = SpectralMeasure::cantor();
        let memo = c.memoized();
        for n in -300..300 {
            assert_eq!(memo.coefficient(n).unwrap(), c.coefficient(n).unwrap());
            assert_eq!(memo.coefficient(n).unwrap(), c.coefficient(n).unwrap());
        }
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"kind":"mixture","weights":[0.5,0.5],
            "parts":[{"kind":"dirac","x0":0.0},{"kind":"lebesgue"}]}"#;
        let spec: MeasureSpec = serde_json::from_str(text).unwrap();
        let m = SpectralMeasure::from_spec(spec.clone()).unwrap();
        assert_eq!(m.coefficient(3).unwrap(), Complex64::new(0.5, 0.0));
        let back: MeasureSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);

        let riesz: MeasureSpec = serde_json::from_str(
            r#"{"kind":"riesz","frequencies":{"rule":"geometric","first":4,"ratio":4},
                "amplitudes":{"rule":"inv_log"}}"#,
        )
        .unwrap();
        assert_eq!(riesz.kind_name(), "riesz");
        let convex: MeasureSpec =
            serde_json::from_str(r#"{"kind":"convex_ac","rule":"power","exponent":0.5}"#).unwrap();
        assert_eq!(convex, MeasureSpec::ConvexAc(ConvexSeq::power(0.5)));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let bad = [
            r#"{"kind":"mixture","weights":[0.5,0.6],"parts":[{"kind":"lebesgue"},{"kind":"cantor"}]}"#,
            r#"{"kind":"power","base":{"kind":"cantor"},"k":0}"#,
            r#"{"kind":"riesz","frequencies":{"rule":"list","values":[4,10]},"amplitudes":{"rule":"inv_log"}}"#,
        ];
        for text in bad {
            let spec: MeasureSpec = serde_json::from_str(text).unwrap();
            assert!(SpectralMeasure::from_spec(spec).is_err(), "{text}");
        }
    }
}
