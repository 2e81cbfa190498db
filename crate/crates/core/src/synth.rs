//! Seeded planted-partition benchmark graphs for tests and experiments.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;
use crate::partition::Partition;

/// Sample a planted-partition graph: nodes are grouped into blocks of the
/// given sizes, each intra-block pair is an edge with probability `p_in` and
/// each cross-block pair with probability `p_out`. Returns the graph together
/// with the planted block partition.
pub fn planted_partition(
    sizes: &[usize],
    p_in: f64,
    p_out: f64,
    seed: u64,
) -> (Graph, Partition) {
    assert!(!sizes.is_empty() && sizes.iter().all(|&s| s > 0));
    assert!((0.0..=1.0).contains(&p_in) && (0.0..=1.0).contains(&p_out));

    let n: usize = sizes.iter().sum();
    let mut block = Vec::with_capacity(n);
    for (b, &size) in sizes.iter().enumerate() {
        block.extend(std::iter::repeat_n(b, size));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if block[u] == block[v] { p_in } else { p_out };
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    let g = Graph::from_edges(n, &edges);
    let p = Partition::from_assignment(&g, &block);
    (g, p)
}

/// Degree-corrected planted partition. Node propensities follow a Pareto
/// tail with the given exponent (minimum 1), and a pair connects with
/// probability `min(1, c * w_u * w_v)` where `c` is `c_in` inside a block
/// and `c_out` across blocks. Low exponents give hub-dominated graphs like
/// the infrastructure and online-social networks this tool targets.
pub fn degree_corrected_planted_partition(
    sizes: &[usize],
    c_in: f64,
    c_out: f64,
    tail_exponent: f64,
    seed: u64,
) -> (Graph, Partition) {
    assert!(!sizes.is_empty() && sizes.iter().all(|&s| s > 0));
    assert!(c_in >= 0.0 && c_out >= 0.0 && tail_exponent > 1.0);

    let n: usize = sizes.iter().sum();
    let mut block = Vec::with_capacity(n);
    for (b, &size) in sizes.iter().enumerate() {
        block.extend(std::iter::repeat_n(b, size));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = rng.gen_range(1e-4..1.0);
            u.powf(-1.0 / tail_exponent)
        })
        .collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let c = if block[u] == block[v] { c_in } else { c_out };
            let p = (c * weights[u] * weights[v]).min(1.0);
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    let g = Graph::from_edges(n, &edges);
    let p = Partition::from_assignment(&g, &block);
    (g, p)
}
