use combdim::experiments::random_polyhedral_instance;
use combdim::geometry_lp::{
    cube_in_projection, ell1_lower_constant, lp_solve, point_in_hull, LpProblem, LpStatus, Relation, Sense, VPolytope,
};
use combdim::CoordinateSubset;
use proptest::prelude::*;

fn brute_force_2d(c: [f64; 2], rows: &[([f64; 2], f64)]) -> f64 {
    let mut lines: Vec<([f64; 2], f64)> = rows.to_vec();
    lines.push(([1.0, 0.0], 0.0));
    lines.push(([0.0, 1.0], 0.0));
    let feasible = |x: [f64; 2]| {
        x[0] >= -1e-9 && x[1] >= -1e-9 && rows.iter().all(|(a, b)| a[0] * x[0] + a[1] * x[1] <= b + 1e-9)
    };
    let mut best = f64::NEG_INFINITY;
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let ((a, b), (p, q)) = (lines[i], lines[j]);
            let det = a[0] * p[1] - a[1] * p[0];
            if det.abs() < 1e-12 {
                continue;
            }
            let x = [(b * p[1] - a[1] * q) / det, (a[0] * q - b * p[0]) / det];
            if feasible(x) {
                best = best.max(c[0] * x[0] + c[1] * x[1]);
            }
        }
    }
    best
}

fn cube_points() -> impl Strategy<Value = (usize, Vec<Vec<f64>>)> {
    (2usize..5).prop_flat_map(|d| (Just(d), prop::collection::vec(prop::collection::vec(-1.0f64..1.0, d), 2..7)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn simplex_matches_vertex_enumeration(
        c in prop::array::uniform2(-1.0f64..2.0),
        rows in prop::collection::vec((prop::array::uniform2(0.1f64..2.0), 1.0f64..5.0), 1..6),
    ) {
        let mut lp = LpProblem::<f64>::new(Sense::Maximize, c.to_vec());
        for (a, b) in &rows {
            lp.constrain(a.to_vec(), Relation::Le, *b);
        }
        let sol = lp_solve(&lp).unwrap();
        prop_assert_eq!(sol.status, LpStatus::Optimal);
        prop_assert!((sol.objective - brute_force_2d(c, &rows)).abs() <= 1e-9);
        prop_assert!(lp.max_violation(&sol.x) <= 1e-9);
        let again = lp_solve(&lp).unwrap();
        prop_assert_eq!(again, sol);
    }

    #[test]
    fn hull_membership(points in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 1..8), w in prop::collection::vec(0.01f64..1.0, 8)) {
        let k = points.len();
        let total: f64 = w[..k].iter().sum();
        let inside: Vec<f64> = (0..3).map(|c| points.iter().zip(&w).map(|(p, wi)| p[c] * wi / total).sum()).collect();
        let poly = VPolytope::new(3, points.clone(), false).unwrap();
        prop_assert!(point_in_hull(&poly, &inside).unwrap().inside);
        prop_assert!(!point_in_hull(&poly, &[3.0, 0.0, 0.0]).unwrap().inside);
    }

    #[test]
    fn cube_containment_is_monotone((d, points) in cube_points(), t in 0.05f64..1.5, mask in 1u32..16) {
        let poly = VPolytope::symmetric_hull(points).unwrap();
        let idx: Vec<usize> = (0..d).filter(|&i| mask >> i & 1 == 1).collect();
        prop_assume!(!idx.is_empty());
        let sigma = CoordinateSubset::new(idx, d).unwrap();
        let centred = cube_in_projection(&poly, &sigma, t, false).unwrap().is_some();
        let translated = cube_in_projection(&poly, &sigma, t, true).unwrap().is_some();
        prop_assert!(!centred || translated);
        if centred {
            prop_assert!(cube_in_projection(&poly, &sigma, t / 2.0, false).unwrap().is_some());
        }
        if translated {
            prop_assert!(cube_in_projection(&poly, &sigma, t / 2.0, true).unwrap().is_some());
        }
    }

    #[test]
    fn cube_in_dual_projection_matches_l1_constant(n in 2usize..6, seed: u64, mask in 1u32..32, tau in 0.05f64..1.5) {
        let (norm, vectors) = random_polyhedral_instance(n, n, 2 * n, seed).unwrap();
        let rows: Vec<Vec<f64>> = norm
            .functionals
            .iter()
            .map(|f| vectors.iter().map(|x| f.iter().zip(x).map(|(a, b)| a * b).sum()).collect())
            .collect();
        let body = VPolytope::symmetric_hull(rows).unwrap();
        let idx: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        prop_assume!(!idx.is_empty());
        let sigma = CoordinateSubset::new(idx, n).unwrap();
        let c = ell1_lower_constant(&norm, &vectors, &sigma).unwrap().value;
        prop_assume!((c - tau / 2.0).abs() > 1e-7);
        let fits = cube_in_projection(&body, &sigma, tau, false).unwrap().is_some();
        prop_assert_eq!(fits, c >= tau / 2.0);
    }
}

#[test]
fn unbounded_and_infeasible_programs() {
    let mut lp = LpProblem::<f64>::new(Sense::Maximize, vec![1.0, 1.0]);
    lp.constrain(vec![1.0, -1.0], Relation::Le, 1.0);
    assert_eq!(lp_solve(&lp).unwrap().status, LpStatus::Unbounded);
    let mut lp = LpProblem::<f64>::new(Sense::Minimize, vec![1.0]);
    lp.constrain(vec![1.0], Relation::Ge, 2.0).constrain(vec![1.0], Relation::Le, 1.0);
    assert_eq!(lp_solve(&lp).unwrap().status, LpStatus::Infeasible);
}
