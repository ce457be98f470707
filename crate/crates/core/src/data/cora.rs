//! Reader for the two-file Cora distribution.
//!
//! `cora.content`: `<paper id> <word_1> ... <word_F> <class label>` per line,
//! word values 0/1. `cora.cites`: `<cited id> <citing id>` per line.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::Matrix;

pub const CONTENT_FILE: &str = "cora.content";
pub const CITES_FILE: &str = "cora.cites";

/// `citing` lists `cited` among its references (dense ids).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Citation {
    pub citing: usize,
    pub cited: usize,
}

#[derive(Clone, Debug)]
pub struct CoraData {
    pub features: Matrix,
    pub labels: Vec<usize>,
    /// Class names in label order (sorted).
    pub class_names: Vec<String>,
    pub citations: Vec<Citation>,
    /// External paper id to dense row.
    pub id_map: HashMap<String, usize>,
    /// Non-empty lines in the cites file, before any filtering.
    pub raw_citation_count: usize,
    /// Citations naming a paper missing from the content file.
    pub dropped_citations: usize,
}

impl CoraData {
    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }
}

fn parse_err(file: &str, line: usize, message: impl std::fmt::Display) -> Error {
    Error::Parse {
        line,
        message: format!("{file}: {message}"),
    }
}

pub fn parse_cora(content: &str, cites: &str) -> Result<CoraData> {
    let mut ids = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut raw_labels = Vec::new();
    let mut id_map = HashMap::new();
    for (i, line) in content.lines().enumerate() {
        let line_no = i + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() < 3 {
            return Err(parse_err(CONTENT_FILE, line_no, "expected `id words... label`"));
        }
        let words = &toks[1..toks.len() - 1];
        if let Some(first) = rows.first() {
            if first.len() != words.len() {
                return Err(parse_err(
                    CONTENT_FILE,
                    line_no,
                    format!("{} word columns, expected {}", words.len(), first.len()),
                ));
            }
        }
        let row = words
            .iter()
            .map(|w| match *w {
                "0" => Ok(0.0),
                "1" => Ok(1.0),
                other => Err(parse_err(
                    CONTENT_FILE,
                    line_no,
                    format!("word value `{other}` is not 0 or 1"),
                )),
            })
            .collect::<Result<Vec<_>>>()?;
        let id = toks[0].to_string();
        if id_map.insert(id.clone(), rows.len()).is_some() {
            return Err(parse_err(CONTENT_FILE, line_no, format!("duplicate paper id `{id}`")));
        }
        ids.push(id);
        rows.push(row);
        raw_labels.push(toks[toks.len() - 1].to_string());
    }

    let class_names: Vec<String> = raw_labels
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let labels = raw_labels
        .iter()
        .map(|l| class_names.binary_search(l).expect("label collected above"))
        .collect();
    let width = rows.first().map_or(0, Vec::len);
    let features = Matrix::from_vec(rows.len(), width, rows.concat())?;

    let mut citations = Vec::new();
    let mut raw_citation_count = 0;
    let mut dropped_citations = 0;
    for (i, line) in cites.lines().enumerate() {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        let [cited, citing] = toks[..] else {
            return Err(parse_err(CITES_FILE, i + 1, "expected `cited citing`"));
        };
        raw_citation_count += 1;
        match (id_map.get(citing), id_map.get(cited)) {
            (Some(&citing), Some(&cited)) => citations.push(Citation { citing, cited }),
            _ => dropped_citations += 1,
        }
    }
    if dropped_citations > 0 {
        log::warn!("dropped {dropped_citations} citations naming unknown papers");
    }
    Ok(CoraData {
        features,
        labels,
        class_names,
        citations,
        id_map,
        raw_citation_count,
        dropped_citations,
    })
}

pub fn load_cora(content_path: impl AsRef<Path>, cites_path: impl AsRef<Path>) -> Result<CoraData> {
    let content = std::fs::read_to_string(content_path)?;
    let cites = std::fs::read_to_string(cites_path)?;
    parse_cora(&content, &cites)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONTENT: &str = "31336 0 1 Neural_Networks\n1061127 1 0 Rule_Learning\n1106406 1 1 Neural_Networks\n";

    #[test]
    fn small_fixture() {
        let cites = "31336 1061127\n1106406 31336\n999 31336\n";
        let data = parse_cora(CONTENT, cites).unwrap();
        assert_eq!(
            data.features,
            Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]).unwrap()
        );
        assert_eq!(data.labels, vec![0, 1, 0]);
        assert_eq!(data.class_names, vec!["Neural_Networks", "Rule_Learning"]);
        assert_eq!(
            data.citations,
            vec![Citation { citing: 1, cited: 0 }, Citation { citing: 0, cited: 2 }]
        );
        assert_eq!((data.raw_citation_count, data.dropped_citations), (3, 1));
        assert_eq!(data.id_map["1106406"], 2);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = "1 0 1 A\n2 0 2 B\n";
        assert!(matches!(parse_cora(bad, ""), Err(Error::Parse { line: 2, .. })));
        let ragged = "1 0 1 A\n2 0 B\n";
        assert!(matches!(parse_cora(ragged, ""), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(
            parse_cora(CONTENT, "31336\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
