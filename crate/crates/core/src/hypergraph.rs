//! Immutable hypergraph, its sparse incidence structure, and the plain-text
//! hypergraph format.
//!
//! The text format is line oriented: the first line holds
//! `num_vertices num_hyperedges`, followed by one line per hyperedge listing
//! its member vertex ids. `#` starts a comment.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::tensor::{Csr, Matrix};

/// Vertex count plus an ordered list of hyperedges (vertex-id sets).
/// Duplicate hyperedges are allowed; duplicate members inside one are not.
#[derive(Clone, Debug, PartialEq)]
pub struct Hypergraph {
    num_vertices: usize,
    hyperedges: Vec<Vec<usize>>,
    weights: Vec<f64>,
}

impl Hypergraph {
    /// Validates and builds a hypergraph with unit hyperedge weights.
    pub fn build<E, I>(num_vertices: usize, hyperedges: I) -> Result<Self>
    where
        I: IntoIterator<Item = E>,
        E: IntoIterator<Item = usize>,
    {
        let hyperedges: Vec<Vec<usize>> = hyperedges.into_iter().map(|e| e.into_iter().collect()).collect();
        for (i, edge) in hyperedges.iter().enumerate() {
            if edge.is_empty() {
                return Err(Error::Structure(format!("hyperedge {i} is empty")));
            }
            let mut seen = HashSet::with_capacity(edge.len());
            for &v in edge {
                if v >= num_vertices {
                    return Err(Error::Structure(format!(
                        "hyperedge {i} contains vertex {v} but there are only {num_vertices} vertices"
                    )));
                }
                if !seen.insert(v) {
                    return Err(Error::Structure(format!("hyperedge {i} lists vertex {v} twice")));
                }
            }
        }
        let weights = vec![1.0; hyperedges.len()];
        Ok(Self {
            num_vertices,
            hyperedges,
            weights,
        })
    }

    /// Replaces the per-hyperedge weights (default 1.0).
    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.hyperedges.len() {
            return Err(Error::Structure(format!(
                "{} weights for {} hyperedges",
                weights.len(),
                self.hyperedges.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::Structure(format!("non-finite hyperedge weight {w}")));
        }
        self.weights = weights;
        Ok(self)
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_hyperedges(&self) -> usize {
        self.hyperedges.len()
    }

    pub fn hyperedges(&self) -> &[Vec<usize>] {
        &self.hyperedges
    }

    pub fn hyperedge(&self, e: usize) -> &[usize] {
        &self.hyperedges[e]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn incidence(&self) -> SparseIncidence {
        SparseIncidence::from_entries(
            self.num_vertices,
            self.hyperedges.len(),
            self.hyperedges
                .iter()
                .enumerate()
                .flat_map(|(e, members)| members.iter().map(move |&v| (v, e))),
        )
    }

    /// Number of hyperedges containing each vertex.
    pub fn vertex_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_vertices];
        for edge in &self.hyperedges {
            for &v in edge {
                deg[v] += 1;
            }
        }
        deg
    }

    /// Cardinality of each hyperedge.
    pub fn hyperedge_degrees(&self) -> Vec<usize> {
        self.hyperedges.iter().map(Vec::len).collect()
    }

    /// Relabels vertices by `vertex_perm` (old id `v` becomes
    /// `vertex_perm[v]`) and reorders hyperedges so that old hyperedge `e`
    /// lands at position `edge_perm[e]`.
    pub fn relabel(&self, vertex_perm: &[usize], edge_perm: &[usize]) -> Result<Self> {
        check_permutation(vertex_perm, self.num_vertices)?;
        check_permutation(edge_perm, self.hyperedges.len())?;
        let mut edges = vec![Vec::new(); self.hyperedges.len()];
        let mut weights = vec![0.0; self.hyperedges.len()];
        for (e, members) in self.hyperedges.iter().enumerate() {
            edges[edge_perm[e]] = members.iter().map(|&v| vertex_perm[v]).collect();
            weights[edge_perm[e]] = self.weights[e];
        }
        Hypergraph::build(self.num_vertices, edges)?.with_weights(weights)
    }

    /// Parses the plain-text hypergraph format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()));
        let (header_line, header) = lines.by_ref().find(|(_, l)| !l.is_empty()).ok_or(Error::Parse {
            line: 1,
            message: "missing `num_vertices num_hyperedges` header".into(),
        })?;
        let nums = parse_ids(header, header_line)?;
        let [num_vertices, num_edges] = nums[..] else {
            return Err(Error::Parse {
                line: header_line,
                message: format!("header needs exactly 2 numbers, found {}", nums.len()),
            });
        };
        let mut edges = Vec::with_capacity(num_edges);
        let mut last_line = header_line;
        for (line_no, line) in lines {
            if line.is_empty() {
                continue;
            }
            last_line = line_no;
            if edges.len() == num_edges {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("more than the declared {num_edges} hyperedges"),
                });
            }
            let members = parse_ids(line, line_no)?;
            let edge_no = edges.len();
            Hypergraph::build(num_vertices, [members.clone()]).map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string().replace("hyperedge 0", &format!("hyperedge {edge_no}")),
            })?;
            edges.push(members);
        }
        if edges.len() != num_edges {
            return Err(Error::Parse {
                line: last_line,
                message: format!("declared {num_edges} hyperedges, found {}", edges.len()),
            });
        }
        Hypergraph::build(num_vertices, edges)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.num_vertices, self.hyperedges.len());
        for edge in &self.hyperedges {
            let ids: Vec<String> = edge.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "{}", ids.join(" "));
        }
        out
    }
}

fn parse_ids(line: &str, line_no: usize) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<usize>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("`{tok}` is not a non-negative integer"),
            })
        })
        .collect()
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::Contract(format!(
            "permutation of length {} for {n} items",
            perm.len()
        )));
    }
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::Contract("not a permutation".into()));
        }
    }
    Ok(())
}

/// `|V| x |E|` 0/1 incidence matrix, stored both vertex-major and
/// hyperedge-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseIncidence {
    by_vertex: Arc<Csr>,
    by_edge: Arc<Csr>,
}

impl SparseIncidence {
    pub fn from_entries(
        num_vertices: usize,
        num_edges: usize,
        entries: impl IntoIterator<Item = (usize, usize)>,
    ) -> Self {
        let by_vertex = Csr::from_pairs(num_vertices, num_edges, entries);
        let by_edge = by_vertex.transpose();
        Self {
            by_vertex: Arc::new(by_vertex),
            by_edge: Arc::new(by_edge),
        }
    }

    pub fn rows(&self) -> usize {
        self.by_vertex.rows()
    }

    pub fn cols(&self) -> usize {
        self.by_vertex.cols()
    }

    pub fn nnz(&self) -> usize {
        self.by_vertex.nnz()
    }

    /// `(vertex, hyperedge)` pairs in vertex-major, then hyperedge order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.by_vertex.pairs()
    }

    /// Hyperedges incident to vertex `v`.
    pub fn edges_of(&self, v: usize) -> &[usize] {
        self.by_vertex.row(v)
    }

    /// Members of hyperedge `e`.
    pub fn members_of(&self, e: usize) -> &[usize] {
        self.by_edge.row(e)
    }

    /// `|V| x |E|` view: multiplying gathers hyperedge rows onto vertices.
    pub fn vertex_major(&self) -> &Arc<Csr> {
        &self.by_vertex
    }

    /// `|E| x |V|` view (the transpose): gathers vertex rows onto hyperedges.
    pub fn edge_major(&self) -> &Arc<Csr> {
        &self.by_edge
    }

    pub fn to_dense(&self) -> Matrix {
        self.by_vertex.to_dense()
    }

    /// `H · d` for `d` with `|E|` rows.
    pub fn spmm(&self, d: &Matrix) -> Result<Matrix> {
        self.by_vertex.spmm(d)
    }

    /// `Hᵀ · d` for `d` with `|V|` rows.
    pub fn spmm_transposed(&self, d: &Matrix) -> Result<Matrix> {
        self.by_edge.spmm(d)
    }

    /// Keeps the entries for which `keep(vertex, hyperedge)` is true; the
    /// dimensions are unchanged.
    pub fn retain(&self, mut keep: impl FnMut(usize, usize) -> bool) -> SparseIncidence {
        let kept: Vec<(usize, usize)> = self.entries().filter(|&(v, e)| keep(v, e)).collect();
        SparseIncidence::from_entries(self.rows(), self.cols(), kept)
    }
}
