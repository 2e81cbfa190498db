//! Node-to-community partitions with precomputed aggregates, Newman
//! modularity, the mixing parameter, and community-strength categories.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// A partition of the graph's nodes into disjoint communities, with every
/// aggregate the centrality measures need precomputed once.
///
/// Community ids are dense `0..C`, assigned by first occurrence.
#[derive(Debug, Clone)]
pub struct Partition {
    assignment: Vec<usize>,
    community_sizes: Vec<usize>,
    community_total_degree: Vec<usize>,
    community_internal_edges: Vec<usize>,
    per_node_intra: Vec<usize>,
    per_node_inter: Vec<usize>,
    per_node_by_community: Vec<Vec<(usize, usize)>>,
    inter_edge_count: usize,
}

impl Partition {
    /// Build from a raw per-node community assignment. Arbitrary community
    /// ids are remapped to dense `0..C` by first occurrence in node order.
    ///
    /// Panics if `assignment.len() != g.node_count()`.
    pub fn from_assignment(g: &Graph, assignment: &[usize]) -> Partition {
        assert_eq!(assignment.len(), g.node_count(), "one community per node");
        let mut remap: HashMap<usize, usize> = HashMap::new();
        let mut dense = Vec::with_capacity(assignment.len());
        for &raw in assignment {
            let next = remap.len();
            let id = *remap.entry(raw).or_insert(next);
            dense.push(id);
        }
        let community_count = remap.len();

        let n = g.node_count();
        let mut community_sizes = vec![0usize; community_count];
        let mut community_total_degree = vec![0usize; community_count];
        for i in 0..n {
            community_sizes[dense[i]] += 1;
            community_total_degree[dense[i]] += g.degree(i);
        }

        let mut community_internal_edges = vec![0usize; community_count];
        let mut inter_edge_count = 0usize;
        for (u, v) in g.edges() {
            if dense[u] == dense[v] {
                community_internal_edges[dense[u]] += 1;
            } else {
                inter_edge_count += 1;
            }
        }

        let mut per_node_intra = vec![0usize; n];
        let mut per_node_inter = vec![0usize; n];
        let mut per_node_by_community = vec![Vec::new(); n];
        for i in 0..n {
            let mut counts: Vec<(usize, usize)> = Vec::new();
            for &j in g.neighbors(i) {
                let c = dense[j];
                match counts.iter_mut().find(|(q, _)| *q == c) {
                    Some((_, k)) => *k += 1,
                    None => counts.push((c, 1)),
                }
            }
            counts.sort_unstable();
            let own = dense[i];
            let intra = counts.iter().find(|(q, _)| *q == own).map_or(0, |&(_, k)| k);
            per_node_intra[i] = intra;
            per_node_inter[i] = g.degree(i) - intra;
            per_node_by_community[i] = counts;
        }

        Partition {
            assignment: dense,
            community_sizes,
            community_total_degree,
            community_internal_edges,
            per_node_intra,
            per_node_inter,
            per_node_by_community,
            inter_edge_count,
        }
    }

    pub fn community_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn community_count(&self) -> usize {
        self.community_sizes.len()
    }

    /// Number of nodes in community `q` (`n_cq`).
    pub fn community_size(&self, q: usize) -> usize {
        self.community_sizes[q]
    }

    /// Sum of total degrees over the members of community `q` (`d_q`).
    pub fn community_total_degree(&self, q: usize) -> usize {
        self.community_total_degree[q]
    }

    /// Number of edges with both endpoints in community `q` (`l_q`).
    pub fn community_internal_edges(&self, q: usize) -> usize {
        self.community_internal_edges[q]
    }

    pub fn intra_degree(&self, node: usize) -> usize {
        self.per_node_intra[node]
    }

    pub fn inter_degree(&self, node: usize) -> usize {
        self.per_node_inter[node]
    }

    /// Sparse per-community link counts of `node`, sorted by community id
    /// (`k_{i,cq}` for every community the node touches).
    pub fn links_by_community(&self, node: usize) -> &[(usize, usize)] {
        &self.per_node_by_community[node]
    }

    /// Number of edges whose endpoints lie in different communities.
    pub fn inter_edge_count(&self) -> usize {
        self.inter_edge_count
    }
}

/// Parse a `node_label community_label` file against an already-loaded graph.
///
/// Every graph node must be assigned exactly once; community labels are
/// remapped densely.
pub fn load_partition<R: BufRead>(reader: R, g: &Graph) -> Result<Partition> {
    let mut community_ids: HashMap<String, usize> = HashMap::new();
    let mut assigned: Vec<Option<usize>> = vec![None; g.node_count()];
    let mut any = false;

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let (node_label, community_label) = match (fields.next(), fields.next()) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected 'node community', found '{trimmed}'"),
                })
            }
        };
        let node = g.index_of_label(node_label).ok_or_else(|| Error::UnknownNodeLabel {
            label: node_label.to_string(),
            line: lineno + 1,
        })?;
        let next = community_ids.len();
        let community = *community_ids.entry(community_label.to_string()).or_insert(next);
        if let Some(previous) = assigned[node] {
            if previous != community {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("node '{node_label}' assigned to two communities"),
                });
            }
        }
        assigned[node] = Some(community);
        any = true;
    }

    if !any {
        return Err(Error::EmptyPartition);
    }
    let mut assignment = Vec::with_capacity(g.node_count());
    for (i, slot) in assigned.iter().enumerate() {
        match slot {
            Some(c) => assignment.push(*c),
            None => return Err(Error::UnassignedNode { label: g.label(i) }),
        }
    }
    Ok(Partition::from_assignment(g, &assignment))
}

pub fn load_partition_path(path: &Path, g: &Graph) -> Result<Partition> {
    let file = File::open(path)?;
    load_partition(BufReader::new(file), g)
}

/// Newman's modularity `Q = sum_q [ l_q/M - (d_q/2M)^2 ]`.
pub fn modularity(g: &Graph, p: &Partition) -> Result<f64> {
    let m = g.edge_count() as f64;
    if g.edge_count() == 0 {
        return Err(Error::ModularityUndefined);
    }
    let mut q_value = 0.0;
    for q in 0..p.community_count() {
        let l_q = p.community_internal_edges(q) as f64;
        let d_q = p.community_total_degree(q) as f64;
        let frac = d_q / (2.0 * m);
        q_value += l_q / m - frac * frac;
    }
    Ok(q_value)
}

/// Mixing parameter: fraction of inter-community link endpoints over all
/// endpoints, `mu = sum_i k_i^inter / sum_i k_i^tot`.
pub fn mixing_parameter(g: &Graph, p: &Partition) -> Result<f64> {
    if g.edge_count() == 0 {
        return Err(Error::MixingUndefined);
    }
    let inter: usize = (0..g.node_count()).map(|i| p.inter_degree(i)).sum();
    let total = 2 * g.edge_count();
    Ok(inter as f64 / total as f64)
}

/// Community-structure strength classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strength {
    Strong,
    Medium,
    Weak,
}

impl Strength {
    pub fn as_str(self) -> &'static str {
        match self {
            Strength::Strong => "strong",
            Strength::Medium => "medium",
            Strength::Weak => "weak",
        }
    }
}

/// Cut points for [`strength_category`]. `mu <= strong_max` is strong,
/// `mu >= weak_min` is weak, anything between is medium.
#[derive(Debug, Clone, Copy)]
pub struct StrengthThresholds {
    pub strong_max: f64,
    pub weak_min: f64,
}

impl Default for StrengthThresholds {
    fn default() -> Self {
        StrengthThresholds { strong_max: 0.084, weak_min: 0.410 }
    }
}

impl StrengthThresholds {
    pub fn new(strong_max: f64, weak_min: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&strong_max)
            || !(0.0..=1.0).contains(&weak_min)
            || strong_max >= weak_min
        {
            return Err(Error::InvalidConfig(format!(
                "strength thresholds out of order: strong_max={strong_max}, weak_min={weak_min}"
            )));
        }
        Ok(StrengthThresholds { strong_max, weak_min })
    }
}

pub fn strength_category(mu: f64, thresholds: &StrengthThresholds) -> Strength {
    if mu <= thresholds.strong_max {
        Strength::Strong
    } else if mu >= thresholds.weak_min {
        Strength::Weak
    } else {
        Strength::Medium
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn two_triangle_bridge() -> Graph {
        Graph::from_edges(6, &[(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)])
    }

    fn natural_partition(g: &Graph) -> Partition {
        Partition::from_assignment(g, &[0, 0, 0, 1, 1, 1])
    }

    #[test]
    fn fixture_aggregates() {
        let g = two_triangle_bridge();
        let p = natural_partition(&g);
        assert_eq!(p.community_count(), 2);
        assert_eq!((p.community_size(0), p.community_size(1)), (3, 3));
        assert_eq!(
            (p.community_internal_edges(0), p.community_internal_edges(1)),
            (3, 3)
        );
        assert_eq!(
            (p.community_total_degree(0), p.community_total_degree(1)),
            (7, 7)
        );
        assert_eq!(p.inter_edge_count(), 1);
        assert_eq!((p.intra_degree(2), p.inter_degree(2)), (2, 1));
        assert_eq!((p.intra_degree(0), p.inter_degree(0)), (2, 0));
        assert_eq!(p.links_by_community(2), &[(0, 2), (1, 1)]);
    }

    #[test]
    fn single_community_has_no_inter_links() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        let p = Partition::from_assignment(&g, &[0, 0, 0]);
        assert_eq!(p.community_count(), 1);
        for i in 0..3 {
            assert_eq!(p.inter_degree(i), 0);
        }
    }

    #[test]
    fn load_partition_fixture() {
        let g = two_triangle_bridge();
        let text = "# communities\n0 A\n1 A\n2 A\n3 B\n4 B\n5 B\n";
        let p = load_partition(Cursor::new(text), &g).unwrap();
        assert_eq!(p.community_count(), 2);
        assert_eq!(p.inter_edge_count(), 1);
    }

    #[test]
    fn load_partition_unknown_label() {
        let g = two_triangle_bridge();
        let err = load_partition(Cursor::new("0 A\nnope A\n"), &g).unwrap_err();
        match err {
            Error::UnknownNodeLabel { label, line } => {
                assert_eq!(label, "nope");
                assert_eq!(line, 2);
            }
            other => panic!("expected unknown-label error, got {other:?}"),
        }
    }

    #[test]
    fn load_partition_unassigned_node() {
        let g = two_triangle_bridge();
        let text = "0 A\n1 A\n2 A\n3 B\n4 B\n";
        let err = load_partition(Cursor::new(text), &g).unwrap_err();
        match err {
            Error::UnassignedNode { label } => assert_eq!(label, "5"),
            other => panic!("expected unassigned-node error, got {other:?}"),
        }
    }

    #[test]
    fn load_partition_empty_is_error() {
        let g = two_triangle_bridge();
        assert!(matches!(
            load_partition(Cursor::new("# only comments\n"), &g),
            Err(Error::EmptyPartition)
        ));
    }

    #[test]
    fn load_partition_conflicting_assignment_is_error() {
        let g = two_triangle_bridge();
        let err = load_partition(Cursor::new("0 A\n0 B\n"), &g).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn modularity_fixture() {
        let g = two_triangle_bridge();
        let p = natural_partition(&g);
        let q = modularity(&g, &p).unwrap();
        assert!((q - 5.0 / 14.0).abs() < 1e-12);
    }

    #[test]
    fn modularity_single_community_is_zero() {
        let g = two_triangle_bridge();
        let p = Partition::from_assignment(&g, &[0; 6]);
        assert!(modularity(&g, &p).unwrap().abs() < 1e-12);
    }

    #[test]
    fn modularity_triangle_singletons() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        let p = Partition::from_assignment(&g, &[0, 1, 2]);
        let q = modularity(&g, &p).unwrap();
        assert!((q + 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn modularity_undefined_without_edges() {
        let g = Graph::from_edges(3, &[]);
        let p = Partition::from_assignment(&g, &[0, 1, 2]);
        assert!(matches!(modularity(&g, &p), Err(Error::ModularityUndefined)));
    }

    #[test]
    fn mixing_parameter_cases() {
        let disjoint = Graph::from_edges(6, &[(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)]);
        let p = Partition::from_assignment(&disjoint, &[0, 0, 0, 1, 1, 1]);
        assert_eq!(mixing_parameter(&disjoint, &p).unwrap(), 0.0);

        let g = two_triangle_bridge();
        let p = natural_partition(&g);
        let mu = mixing_parameter(&g, &p).unwrap();
        assert!((mu - 2.0 / 14.0).abs() < 1e-12);

        let edge = Graph::from_edges(2, &[(0, 1)]);
        let p = Partition::from_assignment(&edge, &[0, 1]);
        assert_eq!(mixing_parameter(&edge, &p).unwrap(), 1.0);

        let empty = Graph::from_edges(2, &[]);
        let p = Partition::from_assignment(&empty, &[0, 1]);
        assert!(matches!(mixing_parameter(&empty, &p), Err(Error::MixingUndefined)));
    }

    #[test]
    fn mixing_equals_inter_edges_over_m() {
        let g = two_triangle_bridge();
        let p = natural_partition(&g);
        let mu = mixing_parameter(&g, &p).unwrap();
        assert_eq!(mu, p.inter_edge_count() as f64 / g.edge_count() as f64);
    }

    #[test]
    fn strength_boundaries() {
        let t = StrengthThresholds::default();
        assert_eq!(strength_category(0.05, &t), Strength::Strong);
        assert_eq!(strength_category(0.084, &t), Strength::Strong);
        assert_eq!(strength_category(0.20, &t), Strength::Medium);
        assert_eq!(strength_category(0.366, &t), Strength::Medium);
        // The gap between the published medium and weak cut points stays
        // medium so the classifier is total.
        assert_eq!(strength_category(0.40, &t), Strength::Medium);
        assert_eq!(strength_category(0.410, &t), Strength::Weak);
        assert_eq!(strength_category(0.50, &t), Strength::Weak);
    }

    #[test]
    fn strength_thresholds_validated() {
        assert!(StrengthThresholds::new(0.5, 0.4).is_err());
        assert!(StrengthThresholds::new(0.1, 1.5).is_err());
        assert!(StrengthThresholds::new(0.1, 0.4).is_ok());
    }

    /// Pairwise-sum modularity oracle:
    /// `Q = (1/2M) * sum_ij [a_ij - k_i k_j / 2M] * delta(c_i, c_j)`.
    fn modularity_pairwise(g: &Graph, p: &Partition) -> f64 {
        let two_m = 2.0 * g.edge_count() as f64;
        let n = g.node_count();
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                if p.community_of(i) != p.community_of(j) {
                    continue;
                }
                let a_ij = if g.has_edge(i, j) { 1.0 } else { 0.0 };
                total += a_ij - (g.degree(i) as f64 * g.degree(j) as f64) / two_m;
            }
        }
        total / two_m
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_graph_and_partition() -> impl Strategy<Value = (Graph, Partition)> {
            (2usize..50).prop_flat_map(|n| {
                let edges = proptest::collection::vec((0..n, 0..n), 1..120);
                let communities = proptest::collection::vec(0usize..6, n);
                (edges, communities).prop_map(move |(edges, communities)| {
                    let g = Graph::from_edges(n, &edges);
                    let p = Partition::from_assignment(&g, &communities);
                    (g, p)
                })
            })
        }

        proptest! {
            #[test]
            fn modularity_matches_pairwise_oracle((g, p) in arb_graph_and_partition()) {
                if g.edge_count() > 0 {
                    let fast = modularity(&g, &p).unwrap();
                    let oracle = modularity_pairwise(&g, &p);
                    prop_assert!((fast - oracle).abs() < 1e-9);
                    prop_assert!((-1.0..=1.0).contains(&fast));
                }
            }

            #[test]
            fn aggregates_consistent((g, p) in arb_graph_and_partition()) {
                // Recompute every aggregate from scratch.
                let n = g.node_count();
                for i in 0..n {
                    let intra = g
                        .neighbors(i)
                        .iter()
                        .filter(|&&j| p.community_of(j) == p.community_of(i))
                        .count();
                    prop_assert_eq!(p.intra_degree(i), intra);
                    prop_assert_eq!(p.intra_degree(i) + p.inter_degree(i), g.degree(i));
                    let by_comm: usize = p.links_by_community(i).iter().map(|&(_, k)| k).sum();
                    prop_assert_eq!(by_comm, g.degree(i));
                }
                let mut l = vec![0usize; p.community_count()];
                let mut inter = 0usize;
                for (u, v) in g.edges() {
                    if p.community_of(u) == p.community_of(v) {
                        l[p.community_of(u)] += 1;
                    } else {
                        inter += 1;
                    }
                }
                for (q, &expected) in l.iter().enumerate() {
                    prop_assert_eq!(p.community_internal_edges(q), expected);
                }
                prop_assert_eq!(p.inter_edge_count(), inter);
                let l_sum: usize = l.iter().sum();
                prop_assert_eq!(l_sum + inter, g.edge_count());

                if g.edge_count() > 0 {
                    let mu = mixing_parameter(&g, &p).unwrap();
                    prop_assert!((0.0..=1.0).contains(&mu));
                    prop_assert_eq!(mu, inter as f64 / g.edge_count() as f64);
                }
            }
        }
    }
}
