//! Maximum clique by branch and bound with greedy-coloring bounds.

pub(super) fn maximum_clique(adj: &[u128]) -> usize {
    let n = adj.len();
    if n == 0 {
        return 0;
    }
    let all = if n == 128 { u128::MAX } else { (1u128 << n) - 1 };
    let mut best = 1;
    expand(adj, 0, all, &mut best);
    best
}

fn expand(adj: &[u128], size: usize, mut candidates: u128, best: &mut usize) {
    if candidates == 0 {
        *best = (*best).max(size);
        return;
    }
    let (order, colors) = color_sort(adj, candidates);
    for k in (0..order.len()).rev() {
        if size + colors[k] <= *best {
            return;
        }
        let v = order[k];
        expand(adj, size + 1, candidates & adj[v], best);
        candidates &= !(1u128 << v);
    }
}

/// Greedy sequential coloring; returns vertices sorted by color and the
/// color (1-based) of each, which bounds the clique size of any prefix.
fn color_sort(adj: &[u128], candidates: u128) -> (Vec<usize>, Vec<usize>) {
    let mut order = Vec::with_capacity(candidates.count_ones() as usize);
    let mut colors = Vec::with_capacity(order.capacity());
    let mut uncolored = candidates;
    let mut color = 0;
    while uncolored != 0 {
        color += 1;
        let mut available = uncolored;
        while available != 0 {
            let v = available.trailing_zeros() as usize;
            available &= !(1u128 << v);
            available &= !adj[v];
            uncolored &= !(1u128 << v);
            order.push(v);
            colors.push(color);
        }
    }
    (order, colors)
}
