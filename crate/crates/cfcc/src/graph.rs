//! Graph ingestion, validation, and largest-connected-component extraction.
//!
//! Graphs are simple, undirected, and positively weighted; a weight is read
//! as the conductance of the edge. External vertex labels are arbitrary
//! whitespace-free tokens; internally every graph speaks dense ids
//! `0..n-1`, assigned in sorted label order (numeric labels sort by value,
//! others lexicographically). The [`VertexMap`] carries the correspondence.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::{Error, Result};

/// One undirected edge with `u < v` and conductance `w > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

/// Immutable weighted undirected simple graph over dense vertex ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, f64)>>,
    w_min: f64,
    w_max: f64,
}

impl Graph {
    /// Builds a graph from an edge list, validating simplicity.
    ///
    /// Edges may be given in either endpoint order; they are normalized to
    /// `u < v` and sorted. Errors on out-of-range ids, self-loops, duplicate
    /// edges, and non-positive or non-finite weights.
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut norm: Vec<Edge> = Vec::with_capacity(edges.len());
        for &(a, b, w) in &edges {
            if a >= n || b >= n {
                return Err(Error::Precondition(format!(
                    "edge ({a}, {b}) out of range for n = {n}"
                )));
            }
            if a == b {
                return Err(Error::Precondition(format!("self-loop at vertex {a}")));
            }
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::Precondition(format!(
                    "edge ({a}, {b}) has non-positive weight {w}"
                )));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            norm.push(Edge { u, v, w });
        }
        norm.sort_by_key(|e| (e.u, e.v));
        if norm.windows(2).any(|p| (p[0].u, p[0].v) == (p[1].u, p[1].v)) {
            return Err(Error::Precondition("duplicate undirected edge".into()));
        }

        let mut adjacency = vec![Vec::new(); n];
        let (mut w_min, mut w_max) = (f64::INFINITY, 0.0_f64);
        for e in &norm {
            adjacency[e.u].push((e.v, e.w));
            adjacency[e.v].push((e.u, e.w));
            w_min = w_min.min(e.w);
            w_max = w_max.max(e.w);
        }
        if norm.is_empty() {
            // Harmless placeholders; no operation consults them on edgeless graphs.
            w_min = 1.0;
            w_max = 1.0;
        }
        Ok(Self {
            n,
            edges: norm,
            adjacency,
            w_min,
            w_max,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Edges normalized to `u < v`, sorted by `(u, v)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Neighbors of `u` with edge weights.
    pub fn neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency[u].len()
    }

    /// Sum of incident edge weights (the Laplacian diagonal entry).
    pub fn weighted_degree(&self, u: usize) -> f64 {
        self.adjacency[u].iter().map(|&(_, w)| w).sum()
    }

    /// Smallest edge weight (1.0 on edgeless graphs).
    pub fn w_min(&self) -> f64 {
        self.w_min
    }

    /// Largest edge weight (1.0 on edgeless graphs).
    pub fn w_max(&self) -> f64 {
        self.w_max
    }

    /// True iff the graph is connected; the empty graph is not.
    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        self.component_of(0).len() == self.n
    }

    fn component_of(&self, start: usize) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![start];
        let mut out = Vec::new();
        seen[start] = true;
        while let Some(u) = stack.pop() {
            out.push(u);
            for &(v, _) in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        out
    }
}

/// Bijection between internal ids and retained external labels.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexMap {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl VertexMap {
    fn new(labels: Vec<String>) -> Self {
        let index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        Self { labels, index }
    }

    /// Identity map with labels `"0".."n-1"`, for graphs built in memory.
    pub fn identity(n: usize) -> Self {
        Self::new((0..n).map(|i| i.to_string()).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// External label of internal id `u`.
    pub fn label(&self, u: usize) -> &str {
        &self.labels[u]
    }

    /// Internal id of an external label, if retained.
    pub fn id_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }
}

/// Orders labels numerically when both parse as integers, lexicographically
/// otherwise, with numeric labels before non-numeric ones.
fn cmp_labels(a: &str, b: &str) -> Ordering {
    match (a.parse::<i128>(), b.parse::<i128>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

/// Result of [`parse_edge_list`].
#[derive(Debug, Clone)]
pub struct ParsedEdgeList {
    pub graph: Graph,
    pub map: VertexMap,
    /// Number of self-loop lines dropped from the input.
    pub self_loops_dropped: usize,
}

/// Parses whitespace-separated edge-list text.
///
/// Each non-comment line is `u v [w]`; `#` or `%` starts a comment line and
/// blank lines are skipped. A missing weight defaults to `default_weight`.
/// Parallel edges merge by summing weights (resistors in parallel add
/// conductance); self-loops are dropped and counted. Labels are remapped to
/// dense ids in sorted order.
pub fn parse_edge_list(text: &str, default_weight: f64) -> Result<ParsedEdgeList> {
    if !default_weight.is_finite() || default_weight <= 0.0 {
        return Err(Error::Precondition(format!(
            "default weight must be positive and finite, got {default_weight}"
        )));
    }
    let mut raw: Vec<(String, String, f64)> = Vec::new();
    let mut self_loops_dropped = 0usize;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let (u, v, w) = match tokens.as_slice() {
            [u, v] => (*u, *v, default_weight),
            [u, v, w] => {
                let w: f64 = w.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("weight {w:?} is not a number"),
                })?;
                (*u, *v, w)
            }
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected `u v [w]`, got {} tokens", tokens.len()),
                })
            }
        };
        if !w.is_finite() {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("weight {w} is not finite"),
            });
        }
        if w <= 0.0 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("non-positive weight {w}"),
            });
        }
        if u == v {
            self_loops_dropped += 1;
            continue;
        }
        raw.push((u.to_string(), v.to_string(), w));
    }

    let mut labels: Vec<&str> = raw
        .iter()
        .flat_map(|(u, v, _)| [u.as_str(), v.as_str()])
        .collect();
    labels.sort_by(|a, b| cmp_labels(a, b));
    labels.dedup();
    let labels: Vec<String> = labels.into_iter().map(str::to_string).collect();
    let map = VertexMap::new(labels);

    // BTreeMap keyed by normalized endpoints merges parallel edges deterministically.
    let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (u, v, w) in &raw {
        let a = map.id_of(u).expect("label was collected");
        let b = map.id_of(v).expect("label was collected");
        let key = if a < b { (a, b) } else { (b, a) };
        *merged.entry(key).or_insert(0.0) += w;
    }
    let edges: Vec<(usize, usize, f64)> = merged.into_iter().map(|((u, v), w)| (u, v, w)).collect();
    let graph = Graph::new(map.len(), edges)?;
    Ok(ParsedEdgeList {
        graph,
        map,
        self_loops_dropped,
    })
}

/// Canonical edge-list text: one `u v w` line per edge, sorted by
/// `(min endpoint, max endpoint)`, weights printed to full precision.
///
/// Parsing the output reproduces the graph exactly.
pub fn to_edge_list(g: &Graph, map: &VertexMap) -> String {
    let mut out = String::new();
    for e in g.edges() {
        writeln!(out, "{} {} {}", map.label(e.u), map.label(e.v), e.w).expect("string write");
    }
    out
}

/// Connectivity and size diagnostics produced by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub connected: bool,
    pub n: usize,
    pub m: usize,
    pub w_min: f64,
    pub w_max: f64,
    pub min_degree: usize,
    pub max_degree: usize,
}

/// Reports connectivity (via traversal), sizes, weight and degree extremes.
pub fn validate(g: &Graph) -> Diagnostics {
    let degrees = (0..g.n()).map(|u| g.degree(u));
    Diagnostics {
        connected: g.is_connected(),
        n: g.n(),
        m: g.m(),
        w_min: g.w_min(),
        w_max: g.w_max(),
        min_degree: degrees.clone().min().unwrap_or(0),
        max_degree: degrees.max().unwrap_or(0),
    }
}

/// Extracts the largest connected component, relabeled densely.
///
/// Ties between equal-sized components go to the one containing the smallest
/// original id. The returned [`VertexMap`] maps new ids to the original
/// external labels.
pub fn largest_connected_component(g: &Graph, map: &VertexMap) -> Result<(Graph, VertexMap)> {
    if g.n() == 0 {
        return Err(Error::Precondition("empty graph".into()));
    }
    let mut comp = vec![usize::MAX; g.n()];
    let mut comp_sizes: Vec<usize> = Vec::new();
    for start in 0..g.n() {
        if comp[start] != usize::MAX {
            continue;
        }
        let c = comp_sizes.len();
        let members = g.component_of(start);
        comp_sizes.push(members.len());
        for u in members {
            comp[u] = c;
        }
    }
    // Components are discovered in order of their smallest vertex, and internal
    // ids sort like external labels, so the first maximum is the tie-break winner.
    let best = (0..comp_sizes.len())
        .max_by_key(|&c| (comp_sizes[c], std::cmp::Reverse(c)))
        .expect("nonempty graph has a component");

    let kept: Vec<usize> = (0..g.n()).filter(|&u| comp[u] == best).collect();
    let mut new_id = vec![usize::MAX; g.n()];
    for (i, &u) in kept.iter().enumerate() {
        new_id[u] = i;
    }
    let edges: Vec<(usize, usize, f64)> = g
        .edges()
        .iter()
        .filter(|e| comp[e.u] == best)
        .map(|e| (new_id[e.u], new_id[e.v], e.w))
        .collect();
    let sub = Graph::new(kept.len(), edges)?;
    let labels = kept.iter().map(|&u| map.label(u).to_string()).collect();
    Ok((sub, VertexMap::new(labels)))
}
