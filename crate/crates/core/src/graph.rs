//! Simple undirected unweighted graph: loading, validation, connectivity.
//!
//! Nodes are dense indices `0..N`. Edge-list files may use arbitrary string
//! labels; labels are interned in first-seen order and re-emitted on output.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};

/// Immutable simple undirected unweighted graph.
///
/// Invariants enforced at construction: no self-loops, no duplicate edges,
/// symmetric adjacency, sorted neighbor lists, `sum(degrees) == 2 * M`.
#[derive(Debug, Clone)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
    labels: Option<Vec<String>>,
    label_index: Option<HashMap<String, usize>>,
}

impl Graph {
    /// Build from dense-index edges. Self-loops and duplicates are dropped
    /// silently; use [`load_edge_list`] when drop counts matter.
    pub fn from_edges(node_count: usize, edges: &[(usize, usize)]) -> Graph {
        let (graph, _, _) = build(node_count, edges.to_vec(), None);
        graph
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Iterate each undirected edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    /// Original label of a dense index; the index itself when the graph was
    /// built without labels.
    pub fn label(&self, node: usize) -> String {
        match &self.labels {
            Some(labels) => labels[node].clone(),
            None => node.to_string(),
        }
    }

    pub fn index_of_label(&self, label: &str) -> Option<usize> {
        match &self.label_index {
            Some(index) => index.get(label).copied(),
            None => label.parse::<usize>().ok().filter(|&i| i < self.node_count()),
        }
    }
}

/// Options for [`load_edge_list`].
#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Restrict the loaded graph to its largest connected component.
    pub lcc_only: bool,
    /// Split fields on this character instead of any whitespace.
    pub delimiter: Option<char>,
}

/// A loaded graph together with what the loader had to discard.
#[derive(Debug)]
pub struct EdgeListLoad {
    pub graph: Graph,
    pub duplicate_edges: usize,
    pub self_loops: usize,
}

/// Parse a whitespace- (or delimiter-) separated edge list.
///
/// Lines starting with `#` or `%` are comments; each data line must carry at
/// least two tokens naming the endpoints. Labels map to dense indices in
/// first-seen order.
pub fn load_edge_list<R: BufRead>(reader: R, options: &LoadOptions) -> Result<EdgeListLoad> {
    let mut labels: Vec<String> = Vec::new();
    let mut label_index: HashMap<String, usize> = HashMap::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();

    let intern = |token: &str, labels: &mut Vec<String>, index: &mut HashMap<String, usize>| {
        if let Some(&i) = index.get(token) {
            return i;
        }
        let i = labels.len();
        labels.push(token.to_string());
        index.insert(token.to_string(), i);
        i
    };

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let (a, b) = match options.delimiter {
            Some(d) => {
                let mut fields = trimmed.split(d).map(str::trim).filter(|t| !t.is_empty());
                (fields.next(), fields.next())
            }
            None => {
                let mut fields = trimmed.split_whitespace();
                (fields.next(), fields.next())
            }
        };
        match (a, b) {
            (Some(a), Some(b)) => {
                let u = intern(a, &mut labels, &mut label_index);
                let v = intern(b, &mut labels, &mut label_index);
                edges.push((u, v));
            }
            _ => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected at least 2 fields, found '{trimmed}'"),
                })
            }
        }
    }

    if labels.is_empty() {
        return Err(Error::EmptyGraph);
    }

    let n = labels.len();
    let (graph, duplicate_edges, self_loops) = build(n, edges, Some(labels));
    let graph = if options.lcc_only { restrict_to_lcc(&graph) } else { graph };

    Ok(EdgeListLoad { graph, duplicate_edges, self_loops })
}

pub fn load_edge_list_path(path: &Path, options: &LoadOptions) -> Result<EdgeListLoad> {
    let file = File::open(path)?;
    load_edge_list(BufReader::new(file), options)
}

fn build(
    node_count: usize,
    edges: Vec<(usize, usize)>,
    labels: Option<Vec<String>>,
) -> (Graph, usize, usize) {
    let mut self_loops = 0usize;
    let mut normalized: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
    for (u, v) in edges {
        assert!(u < node_count && v < node_count, "edge endpoint out of range");
        if u == v {
            self_loops += 1;
            continue;
        }
        normalized.push((u.min(v), u.max(v)));
    }
    normalized.sort_unstable();
    let before = normalized.len();
    normalized.dedup();
    let duplicates = before - normalized.len();

    let mut adjacency = vec![Vec::new(); node_count];
    for &(u, v) in &normalized {
        adjacency[u].push(v);
        adjacency[v].push(u);
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }

    let label_index = labels.as_ref().map(|labels| {
        labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect::<HashMap<_, _>>()
    });

    let graph = Graph { adjacency, edge_count: normalized.len(), labels, label_index };
    (graph, duplicates, self_loops)
}

/// Keep only the largest connected component, re-indexing densely while
/// preserving original labels. Ties between equal-sized components go to the
/// one containing the lowest dense index.
fn restrict_to_lcc(g: &Graph) -> Graph {
    let n = g.node_count();
    let mut component = vec![usize::MAX; n];
    let mut sizes: Vec<usize> = Vec::new();
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let mut size = 0usize;
        let mut queue = VecDeque::from([start]);
        component[start] = id;
        while let Some(u) = queue.pop_front() {
            size += 1;
            for &v in g.neighbors(u) {
                if component[v] == usize::MAX {
                    component[v] = id;
                    queue.push_back(v);
                }
            }
        }
        sizes.push(size);
    }
    let best = sizes
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(id, _)| id)
        .expect("at least one component");

    let mut remap = vec![usize::MAX; n];
    let mut labels = Vec::new();
    for old in 0..n {
        if component[old] == best {
            remap[old] = labels.len();
            labels.push(g.label(old));
        }
    }
    let edges: Vec<(usize, usize)> = g
        .edges()
        .filter(|&(u, v)| component[u] == best && component[v] == best)
        .map(|(u, v)| (remap[u], remap[v]))
        .collect();
    let (graph, _, _) = build(labels.len(), edges, Some(labels));
    graph
}

/// Size of the largest connected component of the subgraph induced on the
/// nodes not in `removed`; 0 when everything is removed.
pub fn largest_connected_component(g: &Graph, removed: &HashSet<usize>) -> usize {
    let n = g.node_count();
    let mut seen = vec![false; n];
    let mut best = 0usize;
    for start in 0..n {
        if seen[start] || removed.contains(&start) {
            continue;
        }
        let mut size = 0usize;
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            size += 1;
            for &v in g.neighbors(u) {
                if !seen[v] && !removed.contains(&v) {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        best = best.max(size);
    }
    best
}

/// First and second moments of the degree distribution, `(<k>, <k^2>)`.
pub fn mean_degree_moments(g: &Graph) -> (f64, f64) {
    let n = g.node_count();
    debug_assert!(n >= 1, "moments need at least one node");
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for i in 0..n {
        let k = g.degree(i) as f64;
        sum += k;
        sum_sq += k * k;
    }
    (sum / n as f64, sum_sq / n as f64)
}
