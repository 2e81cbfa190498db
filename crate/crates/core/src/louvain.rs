//! Greedy modularity optimization used as the built-in partition fallback
//! when no partition file is supplied.
//!
//! Multi-level local moves over an aggregated weighted graph. Node visit
//! order is a seeded shuffle and equal-gain moves go to the lowest community
//! id, so the result is fully determined by `(graph, seed)`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;
use crate::partition::{modularity, Partition};

/// Partition found by the greedy pass, reported with its modularity
/// (`None` when the graph has no edges and Q is undefined).
#[derive(Debug)]
pub struct LouvainOutcome {
    pub partition: Partition,
    pub modularity: Option<f64>,
}

const MAX_PASSES: usize = 256;

struct Level {
    /// Symmetric adjacency without self entries: `adj[u] = [(v, w), ...]`.
    adj: Vec<Vec<(usize, f64)>>,
    /// Weight collapsed inside each super-node (counted once).
    loop_weight: Vec<f64>,
    /// Weighted degree, self weight counted twice.
    degree: Vec<f64>,
}

impl Level {
    fn node_count(&self) -> usize {
        self.adj.len()
    }
}

pub fn louvain_partition(g: &Graph, seed: u64) -> LouvainOutcome {
    let n = g.node_count();
    let m = g.edge_count() as f64;
    // node index in the original graph -> current super-node
    let mut membership: Vec<usize> = (0..n).collect();

    if g.edge_count() > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut level = Level {
            adj: (0..n)
                .map(|u| g.neighbors(u).iter().map(|&v| (v, 1.0)).collect())
                .collect(),
            loop_weight: vec![0.0; n],
            degree: (0..n).map(|u| g.degree(u) as f64).collect(),
        };

        loop {
            let (node_to_comm, moved) = local_moves(&level, m, &mut rng);
            if !moved {
                break;
            }
            let compact = compact_ids(&node_to_comm);
            for slot in membership.iter_mut() {
                *slot = compact[node_to_comm[*slot]];
            }
            let next = aggregate(&level, &node_to_comm, &compact);
            if next.node_count() == level.node_count() {
                break;
            }
            level = next;
        }
    }

    let partition = Partition::from_assignment(g, &membership);
    let q = if g.edge_count() > 0 { Some(modularity(g, &partition).expect("edges present")) } else { None };
    LouvainOutcome { partition, modularity: q }
}

/// One level of repeated local-move passes. Returns the final community of
/// each level node and whether any node moved at all.
fn local_moves(level: &Level, m: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
    let n = level.node_count();
    let mut node_to_comm: Vec<usize> = (0..n).collect();
    let mut comm_degree: Vec<f64> = level.degree.clone();

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut any_move = false;
    for _ in 0..MAX_PASSES {
        let mut moved_this_pass = false;
        for &i in &order {
            let current = node_to_comm[i];
            comm_degree[current] -= level.degree[i];

            // Link weight from i to each adjacent community.
            let mut weights: Vec<(usize, f64)> = Vec::with_capacity(level.adj[i].len());
            for &(j, w) in &level.adj[i] {
                let c = node_to_comm[j];
                match weights.iter_mut().find(|(q, _)| *q == c) {
                    Some((_, acc)) => *acc += w,
                    None => weights.push((c, w)),
                }
            }
            if !weights.iter().any(|&(c, _)| c == current) {
                weights.push((current, 0.0));
            }

            // gain(c) = k_{i,c}/m - d_c * k_i / (2 m^2), with i taken out.
            let mut best_comm = current;
            let mut best_gain = f64::NEG_INFINITY;
            for &(c, k_ic) in &weights {
                let gain = k_ic / m - comm_degree[c] * level.degree[i] / (2.0 * m * m);
                if gain > best_gain || (gain == best_gain && c < best_comm) {
                    best_gain = gain;
                    best_comm = c;
                }
            }

            comm_degree[best_comm] += level.degree[i];
            node_to_comm[i] = best_comm;
            if best_comm != current {
                moved_this_pass = true;
                any_move = true;
            }
        }
        if !moved_this_pass {
            break;
        }
    }
    (node_to_comm, any_move)
}

/// Map sparse community ids to dense `0..C`, preserving id order.
fn compact_ids(node_to_comm: &[usize]) -> Vec<usize> {
    let n = node_to_comm.len();
    let mut used = vec![false; n];
    for &c in node_to_comm {
        used[c] = true;
    }
    let mut compact = vec![usize::MAX; n];
    let mut next = 0;
    for (c, &u) in used.iter().enumerate() {
        if u {
            compact[c] = next;
            next += 1;
        }
    }
    compact
}

fn aggregate(level: &Level, node_to_comm: &[usize], compact: &[usize]) -> Level {
    let count = compact.iter().filter(|&&c| c != usize::MAX).count();
    let mut loop_weight = vec![0.0; count];
    let mut pair_weight: Vec<std::collections::BTreeMap<usize, f64>> =
        vec![std::collections::BTreeMap::new(); count];

    for u in 0..level.node_count() {
        let cu = compact[node_to_comm[u]];
        loop_weight[cu] += level.loop_weight[u];
        for &(v, w) in &level.adj[u] {
            if v < u {
                continue; // each undirected pair once
            }
            let cv = compact[node_to_comm[v]];
            if cu == cv {
                loop_weight[cu] += w;
            } else {
                *pair_weight[cu.min(cv)].entry(cu.max(cv)).or_insert(0.0) += w;
            }
        }
    }

    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); count];
    for (a, row) in pair_weight.into_iter().enumerate() {
        for (b, w) in row {
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
    }
    for row in &mut adj {
        row.sort_unstable_by_key(|&(v, _)| v);
    }
    let degree: Vec<f64> = (0..count)
        .map(|c| adj[c].iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * loop_weight[c])
        .collect();

    Level { adj, loop_weight, degree }
}
