use approx::{assert_abs_diff_eq, assert_relative_eq};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use hyperbound::circle::{apply_multiplier, multiplier_norm_lower_bound, product_pair, GridFunction};
use hyperbound::criteria::{analyze_terms, wiener_average, SeriesConfig, Verdict};
use hyperbound::finite::{
    deterministic_sets, graph_period, opnorm, period_and_classes, projection_ed, random_block_cyclic,
    random_normal_cyclic, BlockCyclicOptions, FiniteOperator,
};
use hyperbound::measures::{riesz_decompose, AmplitudeRule, ConvexSeq, RieszSpec, SpectralMeasure};
use hyperbound::ud::{del_series, difference_multiplicity, discrepancy, sample, SequenceSpec};

fn leaf() -> impl Strategy<Value = SpectralMeasure> {
    prop_oneof![
        Just(SpectralMeasure::lebesgue()),
        Just(SpectralMeasure::cantor()),
        (0.0..1.0f64).prop_map(SpectralMeasure::dirac),
        (1u64..6, 4u64..8, 0.05..1.0f64).prop_map(|(first, ratio, a)| {
            SpectralMeasure::riesz(RieszSpec::geometric(first, ratio, AmplitudeRule::Constant { value: a })).unwrap()
        }),
        (1u64..4, 4u64..7).prop_map(|(first, ratio)| {
            SpectralMeasure::riesz(RieszSpec::geometric(first, ratio, AmplitudeRule::InvLog)).unwrap()
        }),
        (0.2..2.0f64).prop_map(|s| SpectralMeasure::convex_ac(ConvexSeq::power(s)).unwrap()),
    ]
}

fn measure() -> impl Strategy<Value = SpectralMeasure> {
    leaf().prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| SpectralMeasure::convolution(&a, &b)),
            (inner.clone(), 1u32..4).prop_map(|(a, k)| SpectralMeasure::power(&a, k).unwrap()),
            (inner.clone(), inner.clone(), 0.01..0.99f64)
                .prop_map(|(a, b, w)| SpectralMeasure::mixture(&[(w, a), (1.0 - w, b)]).unwrap()),
            inner.prop_map(|a| SpectralMeasure::reflected(&a)),
        ]
    })
}

fn poly(degree: usize, seed: u64) -> GridFunction {
    GridFunction::from_coefficient_fn(degree, 16 * degree + 16, |n| {
        let t = (n as f64 + seed as f64 * 0.37).sin();
        Complex64::new(t, (t * 3.1).cos()) / (1.0 + n.abs() as f64)
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coefficients_are_hermitian_and_bounded(m in measure(), n in -10_000i64..=10_000) {
        let a = m.coefficient(n).unwrap();
        let b = m.coefficient(-n).unwrap();
        assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-12);
        assert_abs_diff_eq!(a.im, -b.im, epsilon = 1e-12);
        prop_assert!(a.norm() <= 1.0 + 1e-12);
        assert_abs_diff_eq!(m.coefficient(0).unwrap().re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn riesz_coefficients_off_zero_are_at_most_half(first in 1u64..6, ratio in 4u64..8, n in 1i64..=10_000) {
        let nu = SpectralMeasure::riesz(RieszSpec::geometric(first, ratio, AmplitudeRule::InvLog)).unwrap();
        prop_assert!(nu.coefficient(n).unwrap().norm() <= 0.5 + 1e-15);
    }

    #[test]
    fn lebesgue_absorbs(m in measure(), n in -500i64..=500) {
        let c = SpectralMeasure::convolution(&m, &SpectralMeasure::lebesgue()).coefficient(n).unwrap();
        let want = if n == 0 { 1.0 } else { 0.0 };
        assert_abs_diff_eq!(c.re, want, epsilon = 1e-12);
        assert_abs_diff_eq!(c.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn power_coefficient_is_power_of_coefficient(m in measure(), k in 1u32..6, n in -2_000i64..=2_000) {
        let p = SpectralMeasure::power(&m, k).unwrap().coefficient(n).unwrap();
        let want = m.coefficient(n).unwrap().powu(k);
        prop_assert_eq!(p, want);
    }

    #[test]
    fn decomposition_matches_enumeration(first in 1u64..4, ratio in 4u64..7, depth in 1usize..=8) {
        let spec = RieszSpec::geometric(first, ratio, AmplitudeRule::InvLog).with_depth(depth);
        let freqs: Vec<i64> = (0..depth).map(|k| (first * ratio.pow(k as u32)) as i64).collect();
        let mut table = std::collections::HashMap::new();
        for code in 0..3usize.pow(depth as u32) {
            let mut c = code;
            let mut eps = Vec::with_capacity(depth);
            let mut m = 0;
            for f in &freqs {
                let e = (c % 3) as i8 - 1;
                c /= 3;
                m += e as i64 * f;
                eps.push(e);
            }
            prop_assert!(table.insert(m, eps).is_none(), "representations must be unique");
        }
        let top = freqs.iter().sum::<i64>();
        for m in -top - 3..=top + 3 {
            let got = riesz_decompose(&spec, m).unwrap().map(|mut signs| {
                signs.resize(depth, 0);
                signs
            });
            prop_assert_eq!(got.as_ref(), table.get(&m), "m = {}", m);
        }
    }

    #[test]
    fn dirac_mass_keeps_wiener_average_up(w in prop::sample::select(vec![0.1, 0.5, 1.0]), x0 in 0.0..1.0f64, n in 10usize..2_000) {
        let parts = if w < 1.0 {
            vec![(w, SpectralMeasure::dirac(x0)), (1.0 - w, SpectralMeasure::cantor())]
        } else {
            vec![(1.0, SpectralMeasure::dirac(x0))]
        };
        let m = SpectralMeasure::mixture(&parts).unwrap();
        prop_assert!(wiener_average(&m, n).unwrap() >= w * w - 1e-12);
    }

    #[test]
    fn power_multiplier_is_repeated_application(m in measure(), k in 1u32..5, seed in 0u64..100) {
        let f = poly(24, seed);
        let once = apply_multiplier(&SpectralMeasure::power(&m, k).unwrap(), &f).unwrap();
        let mut again = f.clone();
        for _ in 0..k {
            again = apply_multiplier(&m, &again).unwrap();
        }
        for n in -24..=24 {
            prop_assert!((once.coefficient(n) - again.coefficient(n)).norm() <= 1e-14);
        }
    }

    #[test]
    fn convolution_contracts_lp(m in measure(), seed in 0u64..100) {
        let f = poly(16, seed).resample(4096).unwrap();
        let g = apply_multiplier(&m, &f).unwrap();
        for p in [1.0, 2.0, f64::INFINITY] {
            prop_assert!(g.norm(p) <= f.norm(p) * (1.0 + 1e-3), "p = {}: {} > {}", p, g.norm(p), f.norm(p));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn norm_lower_bound_grows_with_n(m in leaf(), p in 1.0..1.9f64, dq in 0.1..2.0f64) {
        let q = p + dq;
        let mut last = 0.0;
        for n in [1, 4, 16, 64] {
            let r = multiplier_norm_lower_bound(&m, p, q, n).unwrap().ratio;
            prop_assert!(r >= last, "N = {}: {} < {}", n, r, last);
            last = r;
        }
    }
}

fn random_chain() -> impl Strategy<Value = FiniteOperator> {
    prop_oneof![
        (1usize..=5, 1usize..=6, any::<bool>(), any::<u64>()).prop_map(|(d, k, uneven_mass, seed)| {
            random_block_cyclic(BlockCyclicOptions { d, class_size: k, uneven_mass }, seed).unwrap()
        }),
        (1usize..=5, 2usize..=6, any::<u64>()).prop_map(|(d, k, seed)| random_normal_cyclic(d, k, seed).unwrap()),
    ]
}

fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
    (a - b).abs().max() <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn period_matches_graph_period_and_classes_are_balanced(op in random_chain()) {
        let dec = period_and_classes(&op).unwrap();
        prop_assert_eq!(dec.period, graph_period(&op));
        for mass in &dec.class_masses {
            assert_relative_eq!(*mass, 1.0 / dec.period as f64, max_relative = 1e-10);
        }
    }

    #[test]
    fn class_projection_is_idempotent(op in random_chain()) {
        let dec = period_and_classes(&op).unwrap();
        let e = projection_ed(&op, &dec).unwrap();
        let e2 = e.compose(&e).unwrap();
        prop_assert!(close(e2.matrix(), e.matrix(), 1e-12));
    }

    #[test]
    fn markov_operators_have_unit_pp_norm(op in random_chain(), p in prop::sample::select(vec![1.0, 2.0, f64::INFINITY])) {
        let est = opnorm(&op, p, p, false).unwrap();
        assert_abs_diff_eq!(est.value, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn dual_is_an_involution_and_reverses_the_cycle(op in random_chain()) {
        let back = op.dual().dual();
        prop_assert!(close(back.matrix(), op.matrix(), 1e-12));
        let dec = period_and_classes(&op).unwrap();
        let d = dec.period;
        let dual = op.dual();
        for j in 0..d {
            let ind: Vec<f64> = dec.labels.iter().map(|&l| f64::from(u8::from(l == j))).collect();
            let prev = (j + d - 1) % d;
            let want: Vec<f64> = dec.labels.iter().map(|&l| f64::from(u8::from(l == prev))).collect();
            let got = dual.apply(&ind);
            for (a, b) in got.iter().zip(&want) {
                assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn deterministic_sets_form_an_algebra(op in random_chain().prop_filter("small", |op| op.n() <= 12)) {
        let r = deterministic_sets(&op, 16).unwrap();
        let full = (1u64 << op.n()) - 1;
        prop_assert!(r.is_algebra);
        prop_assert!(r.sigma_d.contains(&0) && r.sigma_d.contains(&full));
        for a in &r.sigma_d {
            prop_assert!(r.sigma_d.contains(&(full & !a)));
            for b in &r.sigma_d {
                prop_assert!(r.sigma_d.contains(&(a & b)));
                prop_assert!(r.sigma_d.contains(&(a | b)));
            }
        }
        for fam in &r.sigma_i {
            for s in &fam.sets {
                prop_assert!(r.sigma_d.contains(s), "invariant set {:b} of P^{} not deterministic", s, fam.k);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn del_double_sums_are_real(m in measure(), b in 1i64..5, freq in 1i64..4) {
        let r = del_series(&m, &SequenceSpec::Arith { a: 0, b }, freq, 300).unwrap();
        prop_assert!(r.max_imaginary <= 1e-12, "imaginary part {}", r.max_imaginary);
    }

    #[test]
    fn difference_counts_are_at_most_n(mut values in prop::collection::btree_set(1i64..5_000, 2..200)) {
        let terms: Vec<i64> = std::mem::take(&mut values).into_iter().collect();
        let n = terms.len();
        let counts = difference_multiplicity(&terms);
        prop_assert_eq!(counts.get(&0).copied(), Some(n));
        prop_assert_eq!(counts.values().sum::<usize>(), n * n);
        for (t, c) in &counts {
            prop_assert!(*c <= n);
            prop_assert_eq!(counts.get(&-t), Some(c));
        }
    }

    #[test]
    fn discrepancy_lies_between_its_bounds(points in prop::collection::vec(0.0..1.0f64, 1..400)) {
        let n = points.len() as f64;
        let d = discrepancy(&points).unwrap();
        prop_assert!(d >= 1.0 / (2.0 * n) - 1e-15 && d <= 1.0 + 1e-15, "D = {}", d);
    }

    #[test]
    fn sampling_is_deterministic(m in leaf(), seed in any::<u64>()) {
        let a = sample(&m, 64, seed).unwrap();
        let b = sample(&m, 64, seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.iter().all(|x| (0.0..1.0).contains(x)));
    }
}

#[test]
fn midpoint_grid_has_minimal_discrepancy() {
    for n in [1usize, 7, 100] {
        let pts: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        assert_relative_eq!(discrepancy(&pts).unwrap(), 1.0 / (2.0 * n as f64), max_relative = 1e-12);
    }
}

#[test]
fn product_pair_densities_are_probability_densities() {
    for degree in [16, 64, 256] {
        let pair = product_pair(degree).unwrap();
        for (g, nu) in [(&pair.density1, &pair.nu1), (&pair.density2, &pair.nu2)] {
            let scale = g.coefficient(0).re;
            let fine = g.resample(16 * g.grid_len()).unwrap();
            assert!(fine.real_samples().iter().all(|v| *v >= 0.0), "degree {degree}");
            let mass = fine.real_samples().iter().sum::<f64>() / fine.grid_len() as f64 / scale;
            assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-10);
            for n in 1..=degree as i64 {
                let want = g.coefficient(n).re / scale;
                assert_abs_diff_eq!(nu.coefficient(n).unwrap().re, want, epsilon = 1e-12);
            }
        }
    }
}

/// Verdicts on `sum n^{-s}` never flip between converges and diverges as `N` grows.
#[test]
fn verdicts_are_monotone_in_n() {
    for s in [0.5, 0.9, 1.0, 1.1, 1.5, 2.0, 3.0] {
        let mut seen: Option<Verdict> = None;
        for n in [1_000usize, 10_000, 100_000, 1_000_000] {
            let terms: Vec<f64> = (1..=n).map(|k| (k as f64).powf(-s)).collect();
            let v = analyze_terms(format!("n^-{s}"), &terms, &SeriesConfig::default()).verdict;
            if let Some(prev) = seen {
                assert!(
                    !(prev == Verdict::Converges && v == Verdict::Diverges)
                        && !(prev == Verdict::Diverges && v == Verdict::Converges),
                    "s = {s}: {prev:?} then {v:?} at N = {n}"
                );
            }
            if v != Verdict::Inconclusive {
                seen = Some(v);
            }
        }
    }
}
