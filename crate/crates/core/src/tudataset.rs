//! Reader and writer for the TUDataset multi-file text format.
//!
//! Files use 1-based global node and graph ids; everything in memory is
//! 0-based and per graph.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::graph::{DatasetBundle, LabelId, LabeledGraph, NodeId};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("missing mandatory file {0}")]
    MissingFile(PathBuf),
    #[error("{file}:{line}: expected an integer, found {token:?}")]
    BadToken { file: PathBuf, line: usize, token: String },
    #[error("{file}:{line}: edge {from} -> {to} crosses graphs {from_graph} and {to_graph}")]
    CrossGraphEdge {
        file: PathBuf,
        line: usize,
        from: usize,
        to: usize,
        from_graph: usize,
        to_graph: usize,
    },
    #[error("{file}:{line}: node id {node} outside 1..={node_count}")]
    NodeOutOfRange { file: PathBuf, line: usize, node: i64, node_count: usize },
    #[error("{file}:{line}: graph id {graph} must be >= 1")]
    BadGraphId { file: PathBuf, line: usize, graph: i64 },
    #[error("{file}: {found} entries, expected {expected}")]
    CountMismatch { file: PathBuf, found: usize, expected: usize },
    #[error("{file}:{line}: blank line inside the file")]
    BlankLine { file: PathBuf, line: usize },
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Facts noticed while parsing that do not change the bundle.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ParseStats {
    pub graphs: usize,
    pub nodes: usize,
    pub edges: usize,
    /// Edges listed more than once; they are kept as parallel edges.
    pub duplicate_edges: usize,
    pub self_loops: usize,
    /// Graphs whose edge set is closed under reversal.
    pub symmetric_graphs: usize,
    pub has_node_labels: bool,
}

fn file_for(dir: &Path, name: &str, suffix: &str) -> PathBuf {
    let direct = dir.join(format!("{name}_{suffix}.txt"));
    if direct.exists() {
        return direct;
    }
    let nested = dir.join(name).join(format!("{name}_{suffix}.txt"));
    if nested.exists() {
        nested
    } else {
        direct
    }
}

/// Non-empty lines of a file with their 1-based line numbers. Trailing blank
/// lines are dropped; interior ones are an error.
fn read_lines(path: &Path) -> Result<Vec<(usize, String)>, ParseError> {
    let text = fs::read_to_string(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            ParseError::MissingFile(path.to_path_buf())
        } else {
            ParseError::Io { path: path.to_path_buf(), source }
        }
    })?;
    let mut lines: Vec<(usize, String)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim().to_string()))
        .collect();
    while lines.last().is_some_and(|(_, l)| l.is_empty()) {
        lines.pop();
    }
    if let Some((line, _)) = lines.iter().find(|(_, l)| l.is_empty()) {
        return Err(ParseError::BlankLine { file: path.to_path_buf(), line: *line });
    }
    Ok(lines)
}

fn int_token(path: &Path, line: usize, token: &str) -> Result<i64, ParseError> {
    token.trim().parse::<i64>().map_err(|_| ParseError::BadToken {
        file: path.to_path_buf(),
        line,
        token: token.trim().to_string(),
    })
}

fn first_field(s: &str) -> &str {
    s.split(',').next().unwrap_or(s)
}

/// Parses `{name}_A.txt`, `{name}_graph_indicator.txt`,
/// `{name}_graph_labels.txt` and the optional `{name}_node_labels.txt`.
/// Node attributes and edge labels are ignored.
pub fn parse_tudataset(dir: &Path, name: &str) -> Result<DatasetBundle, ParseError> {
    parse_tudataset_with_stats(dir, name).map(|(bundle, _)| bundle)
}

pub fn parse_tudataset_with_stats(
    dir: &Path,
    name: &str,
) -> Result<(DatasetBundle, ParseStats), ParseError> {
    let a_path = file_for(dir, name, "A");
    let ind_path = file_for(dir, name, "graph_indicator");
    let gl_path = file_for(dir, name, "graph_labels");
    let nl_path = file_for(dir, name, "node_labels");
    for p in [&a_path, &ind_path, &gl_path] {
        if !p.exists() {
            return Err(ParseError::MissingFile(p.clone()));
        }
    }

    // graph membership and local index of every global node
    let indicator = read_lines(&ind_path)?;
    let node_count = indicator.len();
    let mut node_graph = Vec::with_capacity(node_count);
    let mut node_local = Vec::with_capacity(node_count);
    let mut graph_sizes: Vec<usize> = Vec::new();
    for (line, text) in &indicator {
        let g = int_token(&ind_path, *line, text)?;
        if g < 1 {
            return Err(ParseError::BadGraphId { file: ind_path.clone(), line: *line, graph: g });
        }
        let g = (g - 1) as usize;
        if g >= graph_sizes.len() {
            graph_sizes.resize(g + 1, 0);
        }
        node_graph.push(g);
        node_local.push(graph_sizes[g]);
        graph_sizes[g] += 1;
    }
    let graph_count = graph_sizes.len();

    let class_lines = read_lines(&gl_path)?;
    if class_lines.len() != graph_count {
        return Err(ParseError::CountMismatch {
            file: gl_path,
            found: class_lines.len(),
            expected: graph_count,
        });
    }
    let mut class_values: Vec<String> = Vec::new();
    let mut class_index: HashMap<i64, usize> = HashMap::new();
    let mut graph_class = Vec::with_capacity(graph_count);
    for (line, text) in &class_lines {
        let raw = int_token(&gl_path, *line, text)?;
        let next = class_values.len();
        let id = *class_index.entry(raw).or_insert_with(|| {
            class_values.push(raw.to_string());
            next
        });
        graph_class.push(id);
    }

    let has_node_labels = nl_path.exists();
    let raw_labels: Vec<i64> = if has_node_labels {
        let lines = read_lines(&nl_path)?;
        if lines.len() != node_count {
            return Err(ParseError::CountMismatch {
                file: nl_path,
                found: lines.len(),
                expected: node_count,
            });
        }
        lines
            .iter()
            .map(|(line, text)| int_token(&nl_path, *line, first_field(text)))
            .collect::<Result<_, _>>()?
    } else {
        vec![0; node_count]
    };
    let mut alphabet_raw = raw_labels.clone();
    alphabet_raw.sort_unstable();
    alphabet_raw.dedup();
    if alphabet_raw.is_empty() {
        alphabet_raw.push(0);
    }
    let label_count = alphabet_raw.len() as u32;

    let mut labels: Vec<Vec<LabelId>> = graph_sizes.iter().map(|&n| vec![0; n]).collect();
    for (k, &raw) in raw_labels.iter().enumerate() {
        let id = alphabet_raw.binary_search(&raw).expect("label in alphabet") as LabelId;
        labels[node_graph[k]][node_local[k]] = id;
    }

    let mut adjacency: Vec<Vec<Vec<NodeId>>> =
        graph_sizes.iter().map(|&n| vec![Vec::new(); n]).collect();
    let mut stats = ParseStats {
        graphs: graph_count,
        nodes: node_count,
        has_node_labels,
        ..ParseStats::default()
    };
    let mut seen: std::collections::HashSet<(usize, usize)> = std::collections::HashSet::new();
    for (line, text) in read_lines(&a_path)? {
        let mut parts = text.split(',');
        let (Some(a), Some(b)) = (parts.next(), parts.next()) else {
            return Err(ParseError::BadToken { file: a_path.clone(), line, token: text.clone() });
        };
        let from = int_token(&a_path, line, a)?;
        let to = int_token(&a_path, line, b)?;
        for node in [from, to] {
            if node < 1 || node as usize > node_count {
                return Err(ParseError::NodeOutOfRange {
                    file: a_path.clone(),
                    line,
                    node,
                    node_count,
                });
            }
        }
        let (from, to) = ((from - 1) as usize, (to - 1) as usize);
        if node_graph[from] != node_graph[to] {
            return Err(ParseError::CrossGraphEdge {
                file: a_path.clone(),
                line,
                from: from + 1,
                to: to + 1,
                from_graph: node_graph[from] + 1,
                to_graph: node_graph[to] + 1,
            });
        }
        stats.edges += 1;
        if from == to {
            stats.self_loops += 1;
        }
        if !seen.insert((from, to)) {
            stats.duplicate_edges += 1;
        }
        adjacency[node_graph[from]][node_local[from]].push(node_local[to] as NodeId);
    }

    let graphs: Vec<LabeledGraph> = adjacency
        .into_iter()
        .zip(labels)
        .map(|(adj, lab)| LabeledGraph::new(lab, adj, label_count).expect("validated while parsing"))
        .collect();
    stats.symmetric_graphs = graphs.iter().filter(|g| g.is_symmetric()).count();

    let bundle = DatasetBundle {
        name: name.to_string(),
        graphs,
        graph_class,
        class_values,
        label_alphabet: alphabet_raw.iter().map(ToString::to_string).collect(),
    };
    Ok((bundle, stats))
}

/// Writes a bundle in TUDataset format (always including node labels).
pub fn write_tudataset(bundle: &DatasetBundle, dir: &Path) -> Result<(), ParseError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ParseError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let name = &bundle.name;
    let mut a = String::new();
    let mut indicator = String::new();
    let mut node_labels = String::new();
    let mut offset = 0usize;
    for (gi, g) in bundle.graphs.iter().enumerate() {
        for v in 0..g.node_count() {
            indicator.push_str(&format!("{}\n", gi + 1));
            node_labels.push_str(&format!("{}\n", bundle.label_alphabet[g.label(v) as usize]));
            for &u in g.neighbors(v) {
                a.push_str(&format!("{}, {}\n", offset + v + 1, offset + u as usize + 1));
            }
        }
        offset += g.node_count();
    }
    let graph_labels: String = bundle
        .graph_class
        .iter()
        .map(|&c| format!("{}\n", bundle.class_values[c]))
        .collect();
    for (suffix, content) in [
        ("A", a),
        ("graph_indicator", indicator),
        ("graph_labels", graph_labels),
        ("node_labels", node_labels),
    ] {
        let path = dir.join(format!("{name}_{suffix}.txt"));
        let mut f = fs::File::create(&path).map_err(io(&path))?;
        f.write_all(content.as_bytes()).map_err(io(&path))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, suffix: &str, content: &str) {
        fs::write(dir.join(format!("{name}_{suffix}.txt")), content).unwrap();
    }

    fn triangle(dir: &Path) {
        write(dir, "TRI", "A", "1, 2\n2, 1\n2, 3\n3, 2\n1,3\n3,1\n\n");
        write(dir, "TRI", "graph_indicator", "1\n1\n1\n");
        write(dir, "TRI", "graph_labels", "1\n");
        write(dir, "TRI", "node_labels", "0\n0\n1\n");
    }

    #[test]
    fn minimal_triangle() {
        let tmp = tempfile::tempdir().unwrap();
        triangle(tmp.path());
        let (b, stats) = parse_tudataset_with_stats(tmp.path(), "TRI").unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.graphs[0].node_count(), 3);
        assert_eq!(b.graphs[0].edge_count(), 6);
        assert_eq!(b.graph_class, vec![0]);
        assert_eq!(b.class_values, vec!["1"]);
        assert_eq!(b.graphs[0].labels(), &[0, 0, 1]);
        assert_eq!(stats.symmetric_graphs, 1);
        assert_eq!(stats.duplicate_edges, 0);
    }

    #[test]
    fn missing_node_labels_means_single_label() {
        let tmp = tempfile::tempdir().unwrap();
        write(tmp.path(), "U", "A", "1, 2\n3, 4\n");
        write(tmp.path(), "U", "graph_indicator", "1\n1\n2\n2\n");
        write(tmp.path(), "U", "graph_labels", "-1\n1\n");
        let b = parse_tudataset(tmp.path(), "U").unwrap();
        assert_eq!(b.label_alphabet, vec!["0"]);
        assert_eq!(b.class_values, vec!["-1", "1"]);
        assert_eq!(b.graph_class, vec![0, 1]);
        assert_eq!(b.graphs[1].neighbors(0), &[1]);
        assert!(b.graphs.iter().all(|g| g.labels().iter().all(|&l| l == 0)));
    }

    #[test]
    fn errors() {
        let tmp = tempfile::tempdir().unwrap();
        assert!(matches!(parse_tudataset(tmp.path(), "X"), Err(ParseError::MissingFile(_))));

        write(tmp.path(), "C", "A", "1, 3\n");
        write(tmp.path(), "C", "graph_indicator", "1\n1\n2\n");
        write(tmp.path(), "C", "graph_labels", "0\n1\n");
        assert!(matches!(parse_tudataset(tmp.path(), "C"), Err(ParseError::CrossGraphEdge { .. })));

        write(tmp.path(), "B", "A", "1, x\n");
        write(tmp.path(), "B", "graph_indicator", "1\n1\n");
        write(tmp.path(), "B", "graph_labels", "0\n");
        match parse_tudataset(tmp.path(), "B") {
            Err(ParseError::BadToken { line, token, .. }) => {
                assert_eq!(line, 1);
                assert_eq!(token, "x");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicates_are_kept_and_counted() {
        let tmp = tempfile::tempdir().unwrap();
        write(tmp.path(), "D", "A", "1, 2\n1, 2\n");
        write(tmp.path(), "D", "graph_indicator", "1\n1\n");
        write(tmp.path(), "D", "graph_labels", "0\n");
        let (b, stats) = parse_tudataset_with_stats(tmp.path(), "D").unwrap();
        assert_eq!(stats.duplicate_edges, 1);
        assert_eq!(b.graphs[0].neighbors(0), &[1, 1]);
    }

    #[test]
    fn write_then_parse_is_identity() {
        let tmp = tempfile::tempdir().unwrap();
        triangle(tmp.path());
        let b = parse_tudataset(tmp.path(), "TRI").unwrap();
        let out = tmp.path().join("out");
        write_tudataset(&b, &out).unwrap();
        assert_eq!(parse_tudataset(&out, "TRI").unwrap(), b);
    }
}
