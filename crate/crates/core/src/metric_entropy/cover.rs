//! Minimum set cover by balls (branch and bound) and the greedy cover.

pub(super) fn greedy_cover(balls: &[u128], m: usize) -> usize {
    let mut uncovered = universe(m);
    let mut count = 0;
    while uncovered != 0 {
        let best = (0..m)
            .max_by_key(|&c| ((balls[c] & uncovered).count_ones(), std::cmp::Reverse(c)))
            .expect("nonempty family");
        uncovered &= !balls[best];
        count += 1;
    }
    count
}

pub(super) fn minimum_cover(balls: &[u128], m: usize) -> usize {
    let mut best = greedy_cover(balls, m);
    search(balls, universe(m), 0, &mut best);
    best
}

fn universe(m: usize) -> u128 {
    if m == 128 {
        u128::MAX
    } else {
        (1u128 << m) - 1
    }
}

fn search(balls: &[u128], uncovered: u128, chosen: usize, best: &mut usize) {
    if uncovered == 0 {
        *best = (*best).min(chosen);
        return;
    }
    let largest = balls.iter().map(|b| (b & uncovered).count_ones()).max().unwrap_or(0);
    let need = uncovered.count_ones().div_ceil(largest.max(1)) as usize;
    if chosen + need >= *best {
        return;
    }
    // Branch on the uncovered element with the fewest centers reaching it.
    // Distances are symmetric, so the centers covering `e` form `balls[e]`.
    let mut rest = uncovered;
    let mut pivot = rest.trailing_zeros() as usize;
    while rest != 0 {
        let e = rest.trailing_zeros() as usize;
        rest &= !(1u128 << e);
        if balls[e].count_ones() < balls[pivot].count_ones() {
            pivot = e;
        }
    }
    let mut centers: Vec<usize> = (0..balls.len()).filter(|&c| balls[pivot] >> c & 1 == 1).collect();
    centers.sort_by_key(|&c| std::cmp::Reverse((balls[c] & uncovered).count_ones()));
    for c in centers {
        search(balls, uncovered & !balls[c], chosen + 1, best);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_brute_force_on_interval_balls() {
        let mut state = 12345u64;
        for m in 1..=10 {
            for _ in 0..20 {
                let points: Vec<f64> = (0..m)
                    .map(|_| {
                        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                        (state >> 11) as f64 / (1u64 << 53) as f64
                    })
                    .collect();
                let r = 0.15;
                let balls: Vec<u128> = (0..m)
                    .map(|i| (0..m).filter(|&j| (points[i] - points[j]).abs() <= r).fold(0, |a, j| a | 1 << j))
                    .collect();
                let brute = (1u32..1 << m)
                    .filter(|&s| (0..m).fold(0u128, |a, c| if s >> c & 1 == 1 { a | balls[c] } else { a }) == universe(m))
                    .map(|s| s.count_ones() as usize)
                    .min()
                    .unwrap();
                assert_eq!(minimum_cover(&balls, m), brute);
                assert!(greedy_cover(&balls, m) >= brute);
            }
        }
    }
}
