use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{gaussian_sup_mc, GaussianError, ProcessKind, WeightFunction};
use crate::class_model::CoordinateSubset;
use crate::geometry_lp::{ell1_lower_constant, PolyhedralNorm, DEFAULT_EXPONENT_BUDGET};
use crate::Scalar;

pub const RUDELSON_MAX_N: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EltonOptions {
    pub samples: u64,
    pub seed: u64,
    pub process: ProcessKind,
    /// Cube side lengths to sweep, tried in the given order.
    pub grid: Vec<f64>,
    /// Exponent of `ln(2/t)` in the reported trade-off `s t ln^q(2/t)`.
    pub tradeoff_exponent: f64,
    pub weight: WeightFunction,
}

impl Default for EltonOptions {
    fn default() -> Self {
        Self {
            samples: 20_000,
            seed: 0,
            process: ProcessKind::Rademacher,
            grid: (1..=8).map(|k| 0.5f64.powi(k)).collect(),
            tradeoff_exponent: 1.6,
            weight: WeightFunction::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint<S> {
    pub cube_side: S,
    pub vc: usize,
    pub s: S,
    pub s_times_side: S,
    pub subset: CoordinateSubset,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EltonResult<S> {
    pub sigma: CoordinateSubset,
    /// LP-certified `l_1` lower constant on `sigma`.
    pub t: S,
    /// Side of the centred cube found in the projection of the dual body.
    pub cube_side: S,
    /// `cube_side / 2`, the constant the cube alone guarantees.
    pub half_side: S,
    /// `sqrt(|sigma| / n)`.
    pub s: S,
    /// Estimated `E || sum eps_i x_i || / n`.
    pub delta: S,
    pub delta_stderr: S,
    pub tradeoff: S,
    pub tradeoff_exponent: f64,
    pub sweep: Vec<SweepPoint<S>>,
    /// Grid point where `sqrt(vc/n ln(2/t)) / h(t)` is largest.
    pub weight_favored: Option<S>,
    pub process: ProcessKind,
    pub samples: u64,
    pub seed: u64,
    pub lp_tolerance: S,
}

/// `l_1` lower constants of coordinate subsets, computed once each.
struct Constants<'a, S: Scalar> {
    norm: &'a PolyhedralNorm<S>,
    vectors: &'a [Vec<S>],
    memo: HashMap<Vec<usize>, S>,
}

impl<'a, S: Scalar> Constants<'a, S> {
    fn fill(&mut self, sets: &[Vec<usize>]) -> Result<(), GaussianError> {
        let missing: Vec<&Vec<usize>> = sets.iter().filter(|s| !self.memo.contains_key(*s)).collect();
        let values: Vec<S> = missing
            .par_iter()
            .map(|s| {
                ell1_lower_constant(self.norm, self.vectors, &CoordinateSubset::from_sorted_unchecked((*s).clone()))
                    .map(|c| c.value)
            })
            .collect::<Result<_, _>>()?;
        for (s, v) in missing.into_iter().zip(values) {
            self.memo.insert(s.clone(), v);
        }
        Ok(())
    }

    fn passes(&self, set: &[usize], half: S) -> bool {
        self.memo[set] >= half - S::tolerance()
    }

    /// Largest subset (lexicographically first among equals) whose constant
    /// reaches `half`. Constants shrink as subsets grow, so the search is
    /// level by level over subsets all of whose one-smaller subsets pass.
    fn largest(&mut self, n: usize, half: S) -> Result<Vec<usize>, GaussianError> {
        let full: Vec<usize> = (0..n).collect();
        if n <= DEFAULT_EXPONENT_BUDGET {
            self.fill(std::slice::from_ref(&full))?;
            if self.passes(&full, half) {
                return Ok(full);
            }
        }
        let mut level: Vec<Vec<usize>> = vec![Vec::new()];
        loop {
            let mut candidates = Vec::new();
            for set in &level {
                let start = set.last().map_or(0, |&l| l + 1);
                for i in start..n {
                    let mut cand = set.clone();
                    cand.push(i);
                    let ok = cand.len() == 1
                        || (0..cand.len()).all(|d| {
                            let mut sub = cand.clone();
                            sub.remove(d);
                            level.binary_search(&sub).is_ok()
                        });
                    if ok {
                        candidates.push(cand);
                    }
                }
            }
            if candidates.is_empty() {
                break;
            }
            if candidates[0].len() > DEFAULT_EXPONENT_BUDGET {
                return Err(crate::geometry_lp::GeometryError::SubsetTooLarge {
                    size: candidates[0].len(),
                    budget: DEFAULT_EXPONENT_BUDGET,
                }
                .into());
            }
            self.fill(&candidates)?;
            let next: Vec<Vec<usize>> = candidates.into_iter().filter(|c| self.passes(c, half)).collect();
            if next.is_empty() {
                break;
            }
            level = next;
        }
        Ok(level.into_iter().next().expect("nonempty level"))
    }
}

/// Finds a coordinate set on which the vectors dominate the `l_1` norm.
///
/// With `r_j = (<f_j, x_i>)_i` for the norm functionals `f_j`,
/// `||sum a_i x_i|| = max_j |<r_j, a>|` is the support function of
/// `B = conv{+-r_j}`, and `B` projected to `sigma` contains
/// `[-tau/2, tau/2]^sigma` exactly when the `l_1` lower constant on `sigma`
/// is at least `tau/2`. The sweep therefore computes `vc(B, tau)` from
/// per-subset LP constants, picks the grid point maximizing
/// `sqrt(vc/n) tau`, and reports the constant of the chosen subset.
pub fn elton_subset<S: Scalar>(
    norm: &PolyhedralNorm<S>,
    vectors: &[Vec<S>],
    options: &EltonOptions,
) -> Result<EltonResult<S>, GaussianError> {
    let n = vectors.len();
    if n == 0 {
        return Err(GaussianError::NoPoints);
    }
    for (index, v) in vectors.iter().enumerate() {
        if v.len() != norm.dimension {
            return Err(GaussianError::Ragged { index, expected: norm.dimension, found: v.len() });
        }
        let len = norm.norm(v);
        if len > S::one() + S::of(1e-9) {
            return Err(GaussianError::OutsideUnitBall { index, norm: len.as_f64() });
        }
    }
    if options.grid.iter().any(|&g| !(g > 0.0 && g.is_finite())) {
        return Err(GaussianError::InvalidParameter("grid scales must be positive".into()));
    }

    let rows: Vec<Vec<S>> = norm
        .functionals
        .iter()
        .map(|f| vectors.iter().map(|x| f.iter().zip(x).map(|(&a, &b)| a * b).sum()).collect())
        .collect();
    let mut points: Vec<Vec<S>> = Vec::with_capacity(2 * rows.len());
    for r in &rows {
        for p in [r.clone(), r.iter().map(|&v| -v).collect()] {
            if !points.contains(&p) {
                points.push(p);
            }
        }
    }
    let sup = gaussian_sup_mc(&points, options.samples, options.seed, options.process)?;
    let nn = S::of_usize(n);
    let delta = sup.mean / nn;

    let mut constants = Constants { norm, vectors, memo: HashMap::new() };
    let mut sweep = Vec::with_capacity(options.grid.len());
    for &side in &options.grid {
        let side = S::of(side);
        let set = constants.largest(n, side / S::of(2.0))?;
        let vc = set.len();
        let s = (S::of_usize(vc) / nn).sqrt();
        sweep.push(SweepPoint {
            cube_side: side,
            vc,
            s,
            s_times_side: s * side,
            subset: CoordinateSubset::from_sorted_unchecked(set),
        });
    }
    let chosen = sweep
        .iter()
        .filter(|p| p.vc > 0)
        .fold(None::<&SweepPoint<S>>, |best, p| match best {
            Some(b) if b.s_times_side >= p.s_times_side => Some(b),
            _ => Some(p),
        })
        .ok_or(GaussianError::NothingShattered)?
        .clone();

    let certified = ell1_lower_constant(norm, vectors, &chosen.subset)?.value;
    let ln = (S::of(2.0) / certified).ln();
    let tradeoff = chosen.s * certified * S::of(ln.as_f64().powf(options.tradeoff_exponent));
    let weight_favored = sweep
        .iter()
        .filter(|p| p.cube_side < S::one())
        .filter_map(|p| {
            let tau = p.cube_side.as_f64();
            let h = options.weight.eval(tau).ok()?;
            let score = ((p.vc as f64 / n as f64) * (2.0 / tau).ln()).sqrt() / h;
            Some((p.cube_side, score))
        })
        .fold(None::<(S, f64)>, |best, (c, sc)| match best {
            Some((_, b)) if b >= sc => best,
            _ => Some((c, sc)),
        })
        .map(|(c, _)| c);

    Ok(EltonResult {
        sigma: chosen.subset.clone(),
        t: certified,
        cube_side: chosen.cube_side,
        half_side: chosen.cube_side / S::of(2.0),
        s: chosen.s,
        delta,
        delta_stderr: sup.stderr / nn,
        tradeoff,
        tradeoff_exponent: options.tradeoff_exponent,
        sweep,
        weight_favored,
        process: options.process,
        samples: options.samples,
        seed: options.seed,
        lp_tolerance: S::tolerance(),
    })
}

/// Polyhedral inner approximation of the norm with unit ball
/// `D = conv(B_1^n U (delta sqrt(n))^{-1} D_n)`, together with `x_i = e_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RudelsonInstance<S> {
    pub n: usize,
    pub delta: S,
    pub net_support: usize,
    pub norm: PolyhedralNorm<S>,
    pub vectors: Vec<Vec<S>>,
}

/// The dual ball is `D° = B_inf^n ∩ delta sqrt(n) D_n`. Its points
/// `c_k theta_S`, with `theta_S` a sign vector on a support of size `k` and
/// `c_k = min(1, delta sqrt(n / k))`, serve as functionals for
/// `k in {1, 2, ..., net_support, n}`. They lie in `D°`, so the resulting
/// norm is at most `||.||_D`: any `l_1` lower bound it certifies also holds
/// for `D`.
pub fn rudelson_example<S: Scalar>(n: usize, delta: S, net_support: usize) -> Result<RudelsonInstance<S>, GaussianError> {
    if n == 0 || n > RUDELSON_MAX_N {
        return Err(GaussianError::TooLarge { n, cap: RUDELSON_MAX_N });
    }
    let d = delta.as_f64();
    let floor = 1.0 / (n as f64).sqrt();
    if !(d >= floor - 1e-12 && d <= 1.0) {
        return Err(GaussianError::InvalidDelta { delta: d, n });
    }
    let radius = delta * S::of_usize(n).sqrt();
    let mut sizes: Vec<usize> = (1..=net_support.min(n)).collect();
    sizes.push(n);
    sizes.dedup();
    let mut functionals: Vec<Vec<S>> = Vec::new();
    for mask in 1u32..(1 << n) {
        let k = mask.count_ones() as usize;
        if !sizes.contains(&k) {
            continue;
        }
        let c = S::one().min(radius / S::of_usize(k).sqrt());
        let first = mask.trailing_zeros();
        let support: Vec<u32> = (0..n as u32).filter(|i| mask >> i & 1 == 1).collect();
        // sign patterns with a positive first entry; the norm takes |.|
        for signs in 0u32..(1 << (k - 1)) {
            let mut f = vec![S::zero(); n];
            for (pos, &i) in support.iter().enumerate() {
                let negative = i != first && signs >> (pos - 1) & 1 == 1;
                f[i as usize] = if negative { -c } else { c };
            }
            functionals.push(f);
        }
    }
    let vectors = (0..n).map(|i| (0..n).map(|k| if k == i { S::one() } else { S::zero() }).collect()).collect();
    Ok(RudelsonInstance {
        n,
        delta,
        net_support,
        norm: PolyhedralNorm { dimension: n, functionals },
        vectors,
    })
}

/// Exact `||x||_D = sup { <x, y> : |y_i| <= 1, ||y||_2 <= delta sqrt(n) }`
/// by water-filling: the largest coordinates of `|x|` get `y_i = 1`, the
/// rest `y` proportional to `|x|`.
pub fn rudelson_norm<S: Scalar>(x: &[S], delta: S) -> S {
    let r2 = delta * delta * S::of_usize(x.len());
    let mut mags: Vec<S> = x.iter().map(|v| v.abs()).filter(|&v| v > S::zero()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    if S::of_usize(mags.len()) <= r2 {
        return mags.iter().copied().sum();
    }
    let mut capped = S::zero();
    for k in 0..mags.len() {
        let room = r2 - S::of_usize(k);
        if room <= S::zero() {
            break;
        }
        let rest: S = mags[k..].iter().map(|&v| v * v).sum::<S>().sqrt();
        let lambda = room.sqrt() / rest;
        if lambda * mags[k] <= S::one() {
            return capped + room.sqrt() * rest;
        }
        capped = capped + mags[k];
    }
    capped
}

impl<S: Scalar> RudelsonInstance<S> {
    /// Largest relative shortfall `1 - ||theta||' / ||theta||_D` of the
    /// polyhedral norm over sign vectors supported on `sigma`.
    pub fn net_slack(&self, sigma: &CoordinateSubset) -> S {
        let k = sigma.len();
        if k == 0 {
            return S::zero();
        }
        let mut worst = S::zero();
        for signs in 0u32..(1 << (k - 1)) {
            let mut x = vec![S::zero(); self.n];
            for (pos, i) in sigma.iter().enumerate() {
                x[i] = if pos > 0 && signs >> (pos - 1) & 1 == 1 { -S::one() } else { S::one() };
            }
            let exact = rudelson_norm(&x, self.delta);
            worst = worst.max(S::one() - self.norm.norm(&x) / exact);
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|i| (0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect()).collect()
    }

    #[test]
    fn ell1_basis_is_fully_certified() {
        let norm = PolyhedralNorm::<f64>::ell1(4);
        let r = elton_subset(&norm, &basis(4), &EltonOptions { samples: 2000, ..Default::default() }).unwrap();
        assert_eq!(r.sigma.indices(), &[0, 1, 2, 3]);
        assert!((r.t - 1.0).abs() < 1e-9);
        assert_eq!(r.s, 1.0);
        assert_eq!(r.delta, 1.0);
    }

    #[test]
    fn identical_vectors_give_a_single_coordinate() {
        let norm = PolyhedralNorm::<f64>::ell1(3);
        let v = vec![vec![1.0, 0.0, 0.0]; 4];
        let r = elton_subset(&norm, &v, &EltonOptions { samples: 2000, ..Default::default() }).unwrap();
        assert_eq!(r.sigma.indices(), &[0]);
        assert!((r.t - 1.0).abs() < 1e-9);
        assert!((r.s - 0.5).abs() < 1e-15);
    }

    #[test]
    fn vectors_outside_ball_rejected() {
        let norm = PolyhedralNorm::<f64>::max_norm(2);
        let err = elton_subset(&norm, &[vec![1.5, 0.0]], &EltonOptions::default()).unwrap_err();
        assert!(matches!(err, GaussianError::OutsideUnitBall { index: 0, .. }));
    }

    #[test]
    fn rudelson_small_instance() {
        let inst = rudelson_example::<f64>(2, 0.8, 2).unwrap();
        // sizes {1, 2}: e_0, e_1 and 0.8 (1, +-1)
        assert_eq!(inst.norm.functionals.len(), 4);
        for f in &inst.norm.functionals {
            assert!(f.iter().all(|v| v.abs() <= 1.0));
            assert!(f.iter().map(|v| v * v).sum::<f64>().sqrt() <= 0.8 * 2f64.sqrt() + 1e-12);
        }
        assert!(rudelson_example::<f64>(13, 0.5, 2).is_err());
        assert!(rudelson_example::<f64>(4, 0.4, 2).is_err());
    }

    #[test]
    fn water_filling_norm() {
        // x = 1_sigma: min(k, R sqrt(k))
        let delta = 0.5;
        let n = 8;
        let r = delta * (n as f64).sqrt();
        for k in 1..=n {
            let mut x = vec![0.0; n];
            x[..k].iter_mut().for_each(|v| *v = 1.0);
            let expect = (k as f64).min(r * (k as f64).sqrt());
            assert!((rudelson_norm(&x, delta) - expect).abs() < 1e-12, "k = {k}");
        }
        let x = [3.0, 0.1, 0.1, 0.0];
        // R = 1: y = e_0 is optimal up to the small coordinates
        let v: f64 = rudelson_norm(&x, 0.5);
        assert!((3.0..=3.0 + 0.2).contains(&v));
    }
}
