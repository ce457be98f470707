use std::collections::BTreeMap;
use std::fmt::Write as _;

use hmpnn::Hypergraph;

fn histogram(values: impl IntoIterator<Item = usize>) -> String {
    let mut counts = BTreeMap::new();
    for v in values {
        *counts.entry(v).or_insert(0usize) += 1;
    }
    if counts.is_empty() {
        return "{}".into();
    }
    let parts: Vec<String> = counts.iter().map(|(k, c)| format!("{k}:{c}")).collect();
    format!("{{{}}}", parts.join(", "))
}

/// Counts, degree and size histograms (`value:count`), isolated vertices.
pub fn inspect(h: &Hypergraph) -> String {
    let degrees = h.vertex_degrees();
    let mut out = String::new();
    let _ = writeln!(out, "vertices: {}", h.num_vertices());
    let _ = writeln!(out, "hyperedges: {}", h.num_hyperedges());
    let _ = writeln!(out, "incidences: {}", degrees.iter().sum::<usize>());
    let _ = writeln!(out, "vertex_degree_histogram: {}", histogram(degrees.iter().copied()));
    let _ = writeln!(out, "hyperedge_size_histogram: {}", histogram(h.hyperedge_degrees()));
    let _ = writeln!(
        out,
        "isolated_vertices: {}",
        degrees.iter().filter(|&&d| d == 0).count()
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_counted() {
        let h = Hypergraph::build(4, [vec![0, 1, 2], vec![2, 3]]).unwrap();
        let r = inspect(&h);
        assert!(r.contains("hyperedge_size_histogram: {2:1, 3:1}"), "{r}");
        assert!(r.contains("vertex_degree_histogram: {1:3, 2:1}"), "{r}");
        assert!(r.contains("isolated_vertices: 0"));
    }

    #[test]
    fn empty() {
        let r = inspect(&Hypergraph::build(0, Vec::<Vec<usize>>::new()).unwrap());
        assert_eq!(
            r,
            "vertices: 0\nhyperedges: 0\nincidences: 0\nvertex_degree_histogram: {}\nhyperedge_size_histogram: {}\nisolated_vertices: 0\n"
        );
    }
}
