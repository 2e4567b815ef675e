//! Shattered centers against a direct enumeration of every support and
//! every integer level vector.

use combdim::class_model::{gen_random_family, FunctionFamily};
use combdim::shattering::{
    count_shattered_centers, enumerate_shattered_centers, enumerate_with_witnesses, vc_integer, vc_real, Center,
    DEFAULT_BUDGET,
};
use combdim::{CoordinateSubset, GeneratorKind};
use proptest::prelude::*;

fn brute_force_centers(rows: &[Vec<i64>], range_max: i64) -> Vec<Center> {
    let n = rows[0].len();
    let mut out = Vec::new();
    for mask in 0u32..1 << n {
        let support: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let d = support.len();
        let levels_count = (range_max + 1).pow(d as u32);
        for code in 0..levels_count {
            let mut c = code;
            let levels: Vec<i64> = (0..d)
                .map(|_| {
                    let h = c % (range_max + 1);
                    c /= range_max + 1;
                    h
                })
                .collect();
            let all = (0u32..1 << d).all(|pattern| {
                rows.iter().any(|f| {
                    support.iter().zip(&levels).enumerate().all(|(j, (&x, &h))| {
                        if pattern >> j & 1 == 1 {
                            f[x] > h
                        } else {
                            f[x] < h
                        }
                    })
                })
            });
            if all {
                out.push(Center::new(CoordinateSubset::new(support.clone(), n).unwrap(), levels).unwrap());
            }
        }
    }
    out.sort();
    out
}

fn integer_rows(fam: &FunctionFamily<f64>) -> Vec<Vec<i64>> {
    fam.rows().map(|r| r.iter().map(|&v| v as i64).collect()).collect()
}

#[test]
fn cube_corners_on_even_grid() {
    let fam = FunctionFamily::<f64>::integer(vec![vec![0.0, 0.0], vec![0.0, 2.0], vec![2.0, 0.0], vec![2.0, 2.0]], 2)
        .unwrap();
    let oracle = brute_force_centers(&integer_rows(&fam), 2);
    // trivial, ({0},1), ({1},1), ({0,1},(1,1))
    assert_eq!(oracle.len(), 4);
    let mut ours = enumerate_shattered_centers(&fam, 2, DEFAULT_BUDGET).unwrap();
    ours.sort();
    assert_eq!(ours, oracle);
    assert_eq!(count_shattered_centers(&fam, DEFAULT_BUDGET).unwrap(), 4);
    assert_eq!(vc_integer(&fam, DEFAULT_BUDGET).unwrap(), 2);
}

#[test]
fn small_examples() {
    let one = FunctionFamily::<f64>::integer(vec![vec![0.0], vec![2.0]], 2).unwrap();
    assert_eq!(count_shattered_centers(&one, DEFAULT_BUDGET).unwrap(), 2);
    let three = FunctionFamily::<f64>::integer(vec![vec![0.0], vec![1.0], vec![2.0]], 2).unwrap();
    assert_eq!(vc_integer(&three, DEFAULT_BUDGET).unwrap(), 1);
    let single = FunctionFamily::<f64>::integer(vec![vec![3.0, 1.0]], 4).unwrap();
    assert_eq!(vc_integer(&single, DEFAULT_BUDGET).unwrap(), 0);
    assert_eq!(enumerate_shattered_centers(&single, 0, DEFAULT_BUDGET).unwrap(), vec![Center::trivial()]);
}

#[test]
fn real_shattering_examples() {
    let cube = FunctionFamily::<f64>::real(vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![-1.0, 1.0], vec![-1.0, -1.0]])
        .unwrap();
    assert_eq!(vc_real(&cube, 2.0, DEFAULT_BUDGET).unwrap().dimension, 2);
    assert_eq!(vc_real(&cube, 2.5, DEFAULT_BUDGET).unwrap().dimension, 0);
    let square = FunctionFamily::<f64>::real(vec![vec![0.9, 0.0], vec![0.0, 0.9], vec![0.9, 0.9], vec![0.0, 0.0]])
        .unwrap();
    assert_eq!(vc_real(&square, 0.9, DEFAULT_BUDGET).unwrap().dimension, 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn enumeration_matches_brute_force(m in 1usize..9, n in 1usize..4, range in 1u32..4, seed: u64) {
        let fam = gen_random_family::<f64>(m, n, GeneratorKind::IntegerGrid { range_max: range }, seed).unwrap();
        let oracle = brute_force_centers(&integer_rows(&fam), range as i64);
        let witnesses = enumerate_with_witnesses(&fam, n, DEFAULT_BUDGET).unwrap();
        prop_assert!(witnesses.iter().all(|w| w.verify(&fam)));
        let mut ours: Vec<Center> = witnesses.into_iter().map(|w| w.center).collect();
        ours.sort();
        prop_assert_eq!(&ours, &oracle);
        prop_assert_eq!(count_shattered_centers(&fam, DEFAULT_BUDGET).unwrap(), oracle.len());
        let max_dim = oracle.iter().map(Center::dimension).max().unwrap();
        prop_assert_eq!(vc_integer(&fam, DEFAULT_BUDGET).unwrap(), max_dim);
    }

    #[test]
    fn real_vc_is_monotone_and_bounded(m in 1usize..12, n in 1usize..6, seed: u64, t in 0.05f64..1.0) {
        let fam = gen_random_family::<f64>(m, n, GeneratorKind::UniformReal, seed).unwrap();
        let low = vc_real(&fam, t, DEFAULT_BUDGET).unwrap().dimension;
        let high = vc_real(&fam, 1.7 * t, DEFAULT_BUDGET).unwrap().dimension;
        prop_assert!(high <= low && low <= n);
        prop_assert_eq!(vc_real(&fam, 2.01, DEFAULT_BUDGET).unwrap().dimension, 0);
    }
}

/// Exhaustive `vc(A, t)` over supports and attained-value levels.
fn brute_force_vc_real(rows: &[Vec<f64>], t: f64) -> usize {
    let n = rows[0].len();
    let attained: Vec<Vec<f64>> = (0..n).map(|c| rows.iter().map(|r| r[c]).collect()).collect();
    let mut best = 0;
    for mask in 1u32..1 << n {
        let support: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let d = support.len();
        if d <= best {
            continue;
        }
        let mut choice = vec![0usize; d];
        'levels: loop {
            let ok = (0u32..1 << d).all(|pattern| {
                rows.iter().any(|f| {
                    support.iter().enumerate().all(|(j, &x)| {
                        let h = attained[x][choice[j]];
                        if pattern >> j & 1 == 1 {
                            f[x] <= h
                        } else {
                            f[x] >= h + t
                        }
                    })
                })
            });
            if ok {
                best = d;
                break;
            }
            for j in 0..d {
                choice[j] += 1;
                if choice[j] < rows.len() {
                    continue 'levels;
                }
                choice[j] = 0;
            }
            break;
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn real_vc_matches_brute_force(m in 1usize..8, n in 1usize..5, seed: u64, t in 0.05f64..1.2) {
        let fam = gen_random_family::<f64>(m, n, GeneratorKind::UniformReal, seed).unwrap();
        let ours = vc_real(&fam, t, DEFAULT_BUDGET).unwrap();
        prop_assert_eq!(ours.dimension, brute_force_vc_real(&fam.to_rows(), t));
        let rows = fam.to_rows();
        for pattern in 0u32..1 << ours.dimension {
            let hit = rows.iter().any(|f| {
                ours.support.iter().zip(&ours.levels).enumerate().all(|(j, (c, &h))| {
                    if pattern >> j & 1 == 1 { f[c] <= h } else { f[c] >= h + t }
                })
            });
            prop_assert!(hit);
        }
    }
}
