use combdim::class_model::{FunctionFamily, ProbabilityMeasure};
use combdim::experiments::random_separated_family;
use combdim::extraction::{
    bernstein_bound, extract_coordinates, extraction_success_probability, success_curve, ExtractionError,
};
use combdim::metric_entropy::{is_separated, LpExponent};
use combdim::GeneratorKind;
use proptest::prelude::*;

fn constant_pair(n: usize) -> FunctionFamily<f64> {
    FunctionFamily::real(vec![vec![1.0; n], vec![-1.0; n]]).unwrap()
}

fn one_coordinate_pair() -> FunctionFamily<f64> {
    FunctionFamily::real(vec![vec![1.0, 0.0, 0.0, 0.0], vec![-1.0, 0.0, 0.0, 0.0]]).unwrap()
}

#[test]
fn constant_pair_matches_binomial_law() {
    // P(1 <= Bin(20, 1/8) <= 5)
    let exact = 0.899623271290639;
    let est = extraction_success_probability(&constant_pair(20), 1.9, 5, 10_000, 3).unwrap();
    let stderr = (exact * (1.0 - exact) / 10_000f64).sqrt();
    assert!((est.success_rate - exact).abs() <= 3.0 * stderr, "{} vs {exact}", est.success_rate);
    let out = extract_coordinates(&constant_pair(20), 1.9, 5, 3, 100).unwrap();
    assert!(out.attempts <= 10 && out.achieved_separation == 2.0);
}

#[test]
fn one_coordinate_pair_matches_enumeration() {
    // exact sums over the 16 indicator patterns
    let exact = [(1, 343.0 / 4096.0), (2, 27.0 / 128.0), (3, 1455.0 / 4096.0), (4, 0.5)];
    let fam = one_coordinate_pair();
    for (k, p) in exact {
        let est = extraction_success_probability(&fam, 0.99, k, 20_000, 11).unwrap();
        let stderr = (p * (1.0 - p) / 20_000f64).sqrt();
        assert!((est.success_rate - p).abs() <= 3.0 * stderr, "k={k}: {} vs {p}", est.success_rate);
    }
}

#[test]
fn success_rate_grows_with_k() {
    let curve = success_curve(&one_coordinate_pair(), 0.99, &[1, 2, 3, 4], 10_000, 5).unwrap();
    for w in curve.windows(2) {
        let slack = 3.0 * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
        assert!(w[1].success_rate + slack >= w[0].success_rate);
    }
}

#[test]
fn precondition_errors() {
    let fam = constant_pair(4);
    assert!(matches!(extract_coordinates(&fam, 1.0, 0, 0, 10), Err(ExtractionError::ZeroTargetSize)));
    assert!(matches!(extract_coordinates(&fam, 2.5, 2, 0, 10), Err(ExtractionError::NotSeparated { .. })));
    assert!(matches!(extraction_success_probability(&fam, 1.0, 2, 0, 0), Err(ExtractionError::NoTrials)));
}

fn reference_bernstein(u: f64, a: f64, b2: f64) -> f64 {
    let e = (-(u * u) / (2.0 * b2 + 2.0 * a * u / 3.0)).exp();
    if 2.0 * e > 1.0 {
        1.0
    } else {
        2.0 * e
    }
}

#[test]
fn bernstein_matches_reference() {
    assert_eq!(bernstein_bound(1.0, 0.0, 1.0), 1.0);
    assert!((bernstein_bound(10.0, 0.0, 1.0) - 2.0 * (-50f64).exp()).abs() < 1e-36);
    assert!(bernstein_bound(2.0, 1.0, 1.0) < bernstein_bound(1.0, 1.0, 1.0));
    for i in 1..=40 {
        for a in [0.0, 0.1, 1.0, 3.0] {
            for b2 in [0.0, 0.5, 1.0, 10.0] {
                let u = i as f64 * 0.37;
                if a == 0.0 && b2 == 0.0 {
                    continue;
                }
                let (x, y) = (bernstein_bound(u, a, b2), reference_bernstein(u, a, b2));
                assert!((x - y).abs() <= 1e-15 * y.max(1e-300), "{u} {a} {b2}: {x} vs {y}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn accepted_subsets_reverify(m in 2usize..12, n in 2usize..10, seed: u64, t in 0.3f64..1.0) {
        let fam = random_separated_family(m, n, GeneratorKind::UniformReal, t, seed).unwrap();
        prop_assume!(fam.len() >= 2);
        match extract_coordinates(&fam, t, 2 * n, seed, 200) {
            Ok(out) => {
                let restricted = fam.restrict(&out.subset).unwrap();
                let mu = ProbabilityMeasure::uniform(out.subset.len());
                prop_assert!(is_separated(&restricted, &mu, t / 2.0, LpExponent::L2).unwrap());
                prop_assert!(out.subset.len() <= 2 * n && out.achieved_separation > out.target_separation);
                let again = extract_coordinates(&fam, t, 2 * n, seed, 200).unwrap();
                prop_assert_eq!(again, out);
            }
            Err(ExtractionError::MaxAttempts { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}
