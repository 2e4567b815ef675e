use combdim::class_model::{discretize, gen_random_family, ProbabilityMeasure};
use combdim::experiments::{greedy_separated_rows, random_separated_family};
use combdim::metric_entropy::{is_separated, LpExponent};
use combdim::separation_tree::{
    build_separating_tree, find_separating_coordinate, small_dev_split, validate_tree, Distribution, SplitSide,
};
use combdim::shattering::{count_shattered_centers, DEFAULT_BUDGET};
use combdim::GeneratorKind;
use proptest::prelude::*;

fn distribution() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-5.0f64..5.0, 0.01f64..1.0), 2..12).prop_map(|raw| {
        let total: f64 = raw.iter().map(|p| p.1).sum();
        raw.into_iter().map(|(v, w)| (v, w / total)).collect()
    })
}

fn golden_section_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let a = hi - r * (hi - lo);
        let b = lo + r * (hi - lo);
        if f(a) < f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    f((lo + hi) / 2.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn variance_identity(atoms in distribution()) {
        let d = Distribution::new(atoms.clone()).unwrap();
        let pair: f64 = atoms.iter().flat_map(|&(x, p)| atoms.iter().map(move |&(y, q)| p * q * (x - y) * (x - y))).sum();
        let report = d.variance();
        prop_assert!((report.pair_expectation - pair).abs() <= 1e-12 * (1.0 + pair));
        prop_assert!((pair - 2.0 * report.variance).abs() <= 1e-12 * (1.0 + pair));
        let second = |a: f64| atoms.iter().map(|&(x, p)| p * (x - a) * (x - a)).sum::<f64>();
        let inf = golden_section_min(second, -5.0, 5.0);
        prop_assert!((2.0 * inf - pair).abs() <= 1e-9);
    }

    #[test]
    fn small_deviation_split_is_sound(atoms in distribution()) {
        let d = Distribution::new(atoms.clone()).unwrap();
        prop_assume!(d.std_dev() > 1e-6);
        let cert = small_dev_split(&d).unwrap();
        prop_assert!(cert.verify(&d));
        let gap = d.std_dev() / 6.0;
        prop_assert!((cert.gap_halfwidth - gap).abs() <= 1e-15 * (1.0 + gap));
        let above: f64 = atoms.iter().filter(|a| a.0 > cert.threshold + gap).map(|a| a.1).sum();
        let below: f64 = atoms.iter().filter(|a| a.0 < cert.threshold - gap).map(|a| a.1).sum();
        let (heavy, light) = match cert.side {
            SplitSide::UpperHeavy => (above, below),
            SplitSide::LowerHeavy => (below, above),
        };
        prop_assert!(cert.beta > 0.0 && cert.beta <= 0.5);
        prop_assert!(heavy >= 1.0 - cert.beta - 1e-9);
        prop_assert!(light >= cert.beta / 2.0 - 1e-9 && light > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn separating_coordinate_has_large_deviation(m in 2usize..16, n in 1usize..7, seed: u64, t in 0.1f64..0.8) {
        let fam = random_separated_family(m, n, GeneratorKind::UniformReal, t, seed).unwrap();
        prop_assume!(fam.len() >= 2);
        let mu = ProbabilityMeasure::uniform(n);
        let split = find_separating_coordinate(&fam, &mu, t).unwrap();
        prop_assert!(split.std_dev >= t / 2.0 - 1e-12);
        let column = Distribution::uniform(&fam.column(split.coordinate)).unwrap();
        prop_assert!(split.certificate.verify(&column));
        prop_assert!(split.certificate.gap_halfwidth >= t / 12.0 - 1e-12);
    }

    #[test]
    fn tree_guarantees(m in 1usize..20, n in 1usize..7, kind in prop_oneof![Just(GeneratorKind::UniformReal), Just(GeneratorKind::SignVectors)], seed: u64, t in 0.1f64..1.0) {
        let fam = random_separated_family(m, n, kind, t, seed).unwrap();
        let mu = ProbabilityMeasure::uniform(n);
        let tree = build_separating_tree(&fam, &mu, t).unwrap();
        prop_assert!(tree.leaf_count() * tree.leaf_count() >= fam.len());
        prop_assert!(validate_tree(&tree, &fam, t / 6.0).is_ok());
    }

    #[test]
    fn centers_dominate_leaves(m in 1usize..16, n in 1usize..6, seed: u64) {
        let raw = gen_random_family::<f64>(m, n, GeneratorKind::IntegerGrid { range_max: 14 }, seed).unwrap();
        let mu = ProbabilityMeasure::uniform(n);
        let fam = raw.select_rows(&greedy_separated_rows(&raw, &mu, 6.0).unwrap());
        prop_assert!(is_separated(&fam, &mu, 6.0, LpExponent::L2).unwrap());
        let tree = build_separating_tree(&fam, &mu, 6.0).unwrap();
        prop_assert!(validate_tree(&tree, &fam, 1.0).is_ok());
        let centers = count_shattered_centers(&fam, DEFAULT_BUDGET).unwrap();
        prop_assert!(centers >= tree.leaf_count());
        prop_assert!(centers * centers >= fam.len());
    }

    #[test]
    fn discretized_separated_family_is_six_separated(m in 2usize..16, n in 1usize..7, seed: u64, t in 0.1f64..1.0) {
        let fam = random_separated_family(m, n, GeneratorKind::UniformReal, t, seed).unwrap();
        let mu = ProbabilityMeasure::uniform(n);
        prop_assert!(is_separated(&discretize(&fam, t).unwrap(), &mu, 6.0, LpExponent::L2).unwrap());
    }
}
