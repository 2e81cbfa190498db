//! K-shell (k-core index) decomposition over plain adjacency lists.

/// Core number of every node, computed by iterative minimum-degree peeling
/// (Batagelj-Zaversnik bin ordering). Isolated nodes get shell 0.
pub fn shell_numbers(adjacency: &[Vec<usize>]) -> Vec<usize> {
    let n = adjacency.len();
    if n == 0 {
        return Vec::new();
    }
    let mut degree: Vec<usize> = adjacency.iter().map(Vec::len).collect();
    let max_degree = degree.iter().copied().max().unwrap_or(0);

    // bin[d] = start offset of degree-d nodes in `order`
    let mut bin = vec![0usize; max_degree + 1];
    for &d in &degree {
        bin[d] += 1;
    }
    let mut start = 0;
    for slot in bin.iter_mut() {
        let width = *slot;
        *slot = start;
        start += width;
    }

    let mut position = vec![0usize; n];
    let mut order = vec![0usize; n];
    for v in 0..n {
        position[v] = bin[degree[v]];
        order[position[v]] = v;
        bin[degree[v]] += 1;
    }
    for d in (1..=max_degree).rev() {
        bin[d] = bin[d - 1];
    }
    bin[0] = 0;

    let mut core = vec![0usize; n];
    for idx in 0..n {
        let v = order[idx];
        core[v] = degree[v];
        for &u in &adjacency[v] {
            if degree[u] > degree[v] {
                // swap u with the first node of its degree bucket, then
                // shrink that bucket by one
                let du = degree[u];
                let pu = position[u];
                let pw = bin[du];
                let w = order[pw];
                if u != w {
                    position[u] = pw;
                    position[w] = pu;
                    order[pu] = w;
                    order[pw] = u;
                }
                bin[du] += 1;
                degree[u] -= 1;
            }
        }
    }
    core
}
