use combdim::class_model::{discretize, family_from_json, family_to_json, gen_random_family, uniformize, FunctionFamily, ProbabilityMeasure};
use combdim::metric_entropy::{covering_number, lp_distance, packing_number, EntropyOptions, Exactness};
use combdim::shattering::{vc_real, DEFAULT_BUDGET};
use combdim::{GeneratorKind, LpExponent};
use proptest::prelude::*;

fn kind_strategy() -> impl Strategy<Value = GeneratorKind> {
    prop_oneof![
        Just(GeneratorKind::UniformReal),
        Just(GeneratorKind::SignVectors),
        Just(GeneratorKind::ConvexHullSections),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn covering_packing_sandwich(m in 1usize..14, n in 1usize..7, kind in kind_strategy(), seed: u64, t in 0.05f64..1.5) {
        let fam = gen_random_family::<f64>(m, n, kind, seed).unwrap();
        let mu = ProbabilityMeasure::uniform(n);
        let opts = EntropyOptions::default();
        let cov = covering_number(&fam, &mu, t, &opts).unwrap().value;
        let pack = packing_number(&fam, &mu, t, &opts).unwrap().value;
        let cov_half = covering_number(&fam, &mu, t / 2.0, &opts).unwrap().value;
        prop_assert!(cov <= pack && pack <= cov_half, "{cov} {pack} {cov_half}");
    }

    #[test]
    fn packing_is_monotone_and_greedy_is_flagged(m in 1usize..14, n in 1usize..6, seed: u64, t in 0.05f64..1.0) {
        let fam = gen_random_family::<f64>(m, n, GeneratorKind::UniformReal, seed).unwrap();
        let mu = ProbabilityMeasure::uniform(n);
        let opts = EntropyOptions::default();
        let small = packing_number(&fam, &mu, t, &opts).unwrap().value;
        let large = packing_number(&fam, &mu, 1.5 * t, &opts).unwrap().value;
        prop_assert!(large <= small);
        let greedy_pack = packing_number(&fam, &mu, t, &EntropyOptions::greedy()).unwrap();
        let greedy_cov = covering_number(&fam, &mu, t, &EntropyOptions::greedy()).unwrap();
        prop_assert_eq!(greedy_pack.exactness, Exactness::LowerBound);
        prop_assert_eq!(greedy_cov.exactness, Exactness::UpperBound);
        prop_assert!(greedy_pack.value <= small);
        prop_assert!(greedy_cov.value >= covering_number(&fam, &mu, t, &opts).unwrap().value);
    }

    #[test]
    fn uniformize_preserves_distances_and_vc(m in 2usize..8, n in 1usize..5, seed: u64, raw in prop::collection::vec(1u64..6, 1..5)) {
        let n = n.min(raw.len());
        let total: u64 = raw[..n].iter().sum();
        let weights: Vec<f64> = raw[..n].iter().map(|&w| w as f64 / total as f64).collect();
        let mu = ProbabilityMeasure::new(weights).unwrap();
        let fam = gen_random_family::<f64>(m, n, GeneratorKind::UniformReal, seed).unwrap();
        let (ufam, umu) = uniformize(&fam, &mu, 1000).unwrap();
        prop_assert!(umu.is_uniform());
        for i in 0..m {
            for j in 0..m {
                let a = lp_distance(fam.row(i), fam.row(j), &mu, LpExponent::L2).unwrap();
                let b = lp_distance(ufam.row(i), ufam.row(j), &umu, LpExponent::L2).unwrap();
                prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
            }
        }
        for t in [0.1, 0.4, 0.9] {
            prop_assert_eq!(
                vc_real(&fam, t, DEFAULT_BUDGET).unwrap().dimension,
                vc_real(&ufam, t, DEFAULT_BUDGET).unwrap().dimension
            );
        }
    }

    #[test]
    fn discretization_distance_bound(m in 2usize..10, n in 1usize..7, seed: u64, t in 0.05f64..1.0) {
        let fam = gen_random_family::<f64>(m, n, GeneratorKind::UniformReal, seed).unwrap();
        let mu = ProbabilityMeasure::uniform(n);
        let d = discretize(&fam, t).unwrap();
        for i in 0..m {
            for j in 0..m {
                let orig = lp_distance(fam.row(i), fam.row(j), &mu, LpExponent::L2).unwrap();
                let disc = lp_distance(d.row(i), d.row(j), &mu, LpExponent::L2).unwrap();
                prop_assert!(disc >= 7.0 / t * orig - 1.0 - 1e-9);
                prop_assert!(disc <= 7.0 / t * orig + 1.0 + 1e-9);
            }
        }
    }

    #[test]
    fn json_round_trip(m in 1usize..6, n in 1usize..6, seed: u64) {
        let fam = gen_random_family::<f64>(m, n, GeneratorKind::UniformReal, seed).unwrap();
        let mu = ProbabilityMeasure::uniform(n);
        let text = family_to_json(&fam, &mu).unwrap();
        let (back, back_mu) = family_from_json::<f64>(&text).unwrap();
        prop_assert_eq!(&back, &fam);
        prop_assert_eq!(&back_mu, &mu);
        prop_assert_eq!(family_to_json(&back, &back_mu).unwrap(), text);
    }
}

#[test]
fn two_point_family_entropy() {
    // distance 2 in L2(uniform): packing 2 below t = 2, 1 from t = 2 on
    let fam = FunctionFamily::<f64>::real(vec![vec![1.0, 1.0], vec![-1.0, -1.0]]).unwrap();
    let mu = ProbabilityMeasure::uniform(2);
    let opts = EntropyOptions::default();
    assert_eq!(packing_number(&fam, &mu, 1.99, &opts).unwrap().value, 2);
    assert_eq!(packing_number(&fam, &mu, 2.0, &opts).unwrap().value, 1);
    assert_eq!(covering_number(&fam, &mu, 2.0, &opts).unwrap().value, 1);
    assert_eq!(covering_number(&fam, &mu, 1.99, &opts).unwrap().value, 2);
}
