//! Hypergraph-to-graph encodings (clique, star, line) and a label-blind graph
//! comparison used to show where distinct hypergraphs collapse onto the same
//! graph.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;

/// Partition tag assigned by [`star_expansion`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexKind {
    Original,
    Hyperedge,
}

/// Simple undirected graph: no self loops, no parallel edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    num_vertices: usize,
    edges: BTreeSet<(usize, usize)>,
    vertex_labels: Option<Vec<VertexKind>>,
}

impl Graph {
    pub fn new(num_vertices: usize) -> Self {
        Self {
            num_vertices,
            edges: BTreeSet::new(),
            vertex_labels: None,
        }
    }

    pub fn from_edges(num_vertices: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = Self::new(num_vertices);
        for (u, v) in edges {
            if u == v {
                return Err(Error::Structure(format!("self loop on vertex {u}")));
            }
            if u >= num_vertices || v >= num_vertices {
                return Err(Error::Structure(format!(
                    "edge {u}-{v} outside {num_vertices} vertices"
                )));
            }
            g.insert(u, v);
        }
        Ok(g)
    }

    fn insert(&mut self, u: usize, v: usize) {
        debug_assert_ne!(u, v);
        self.edges.insert((u.min(v), u.max(v)));
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(min, max)` pairs in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn vertex_labels(&self) -> Option<&[VertexKind]> {
        self.vertex_labels.as_deref()
    }

    /// Edge-list text: the vertex count on the first line, then one `u v`
    /// pair per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{}\n", self.num_vertices);
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

/// Every hyperedge becomes a clique over its members.
pub fn clique_expansion(h: &Hypergraph) -> Graph {
    let mut g = Graph::new(h.num_vertices());
    for edge in h.hyperedges() {
        for (i, &u) in edge.iter().enumerate() {
            for &v in &edge[i + 1..] {
                g.insert(u, v);
            }
        }
    }
    g
}

/// Bipartite encoding: hyperedge `e` becomes vertex `|V| + e`, joined to each
/// of its members.
pub fn star_expansion(h: &Hypergraph) -> Graph {
    let n = h.num_vertices();
    let mut g = Graph::new(n + h.num_hyperedges());
    for (e, edge) in h.hyperedges().iter().enumerate() {
        for &v in edge {
            g.insert(n + e, v);
        }
    }
    let mut labels = vec![VertexKind::Original; n];
    labels.resize(n + h.num_hyperedges(), VertexKind::Hyperedge);
    g.vertex_labels = Some(labels);
    g
}

/// One vertex per hyperedge; two are adjacent iff their hyperedges share a
/// member.
pub fn line_conversion(h: &Hypergraph) -> Graph {
    let inc = h.incidence();
    let mut g = Graph::new(h.num_hyperedges());
    for v in 0..h.num_vertices() {
        let edges = inc.edges_of(v);
        for (i, &a) in edges.iter().enumerate() {
            for &b in &edges[i + 1..] {
                if a != b {
                    g.insert(a, b);
                }
            }
        }
    }
    g
}

/// Same vertex count and same unordered edge set. Vertex labels are ignored.
pub fn graphs_equal(a: &Graph, b: &Graph) -> bool {
    a.num_vertices == b.num_vertices && a.edges == b.edges
}
