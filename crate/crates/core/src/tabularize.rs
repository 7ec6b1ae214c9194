//! Feature tables: per-graph counts of the colors realized at every
//! refinement round.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::Serialize;
use thiserror::Error;

use crate::graph::DatasetBundle;
use crate::quantifier::QuantifierSet;
use crate::refine::{RefineError, RefineOptions, RefinementRun};

pub const DEFAULT_MAX_FEATURES: usize = 5000;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("the dataset has no graphs")]
    EmptyBundle,
    #[error(transparent)]
    Refine(#[from] RefineError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone)]
pub struct TableOptions {
    /// Rounds after round 0 are dropped once the total column count would
    /// exceed this.
    pub max_features: Option<usize>,
    pub refine: RefineOptions,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self { max_features: Some(DEFAULT_MAX_FEATURES), refine: RefineOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Column {
    pub round: usize,
    pub color: u32,
    pub type_rendering: String,
}

impl Column {
    pub fn name(&self) -> String {
        format!("r{}_c{}", self.round, self.color)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CapEvent {
    pub kind: String,
    pub round: usize,
    /// Total columns the table would have had with this round included.
    pub columns: usize,
    pub limit: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableMetadata {
    pub dataset: String,
    pub quantifier_spec: String,
    pub requested_depth: usize,
    pub completed_depth: usize,
    pub max_features: Option<usize>,
    pub cap_events: Vec<CapEvent>,
    pub stable_round: Option<usize>,
    pub label_alphabet: Vec<String>,
    pub class_values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureTable {
    /// Ascending by `(round, color)`.
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<u32>>,
    pub graph_class: Vec<usize>,
    pub metadata: TableMetadata,
}

impl FeatureTable {
    /// Indices of the columns belonging to `round`.
    pub fn round_columns(&self, round: usize) -> std::ops::Range<usize> {
        let start = self.columns.partition_point(|c| c.round < round);
        let end = self.columns.partition_point(|c| c.round <= round);
        start..end
    }

    pub fn feature_cap_reached(&self) -> Option<&CapEvent> {
        self.metadata.cap_events.iter().find(|e| e.kind == "FeatureCapReached")
    }
}

pub fn tabularize(
    bundle: &DatasetBundle,
    qset: &QuantifierSet,
    d: usize,
    opts: &TableOptions,
) -> Result<FeatureTable, TableError> {
    if bundle.is_empty() {
        return Err(TableError::EmptyBundle);
    }
    let mut run = RefinementRun::new(&bundle.graphs, qset, opts.refine.clone())?;
    let mut columns: Vec<Column> = bundle
        .label_alphabet
        .iter()
        .enumerate()
        .map(|(l, raw)| Column { round: 0, color: l as u32, type_rendering: format!("label={raw}") })
        .collect();
    let mut cap_events = Vec::new();
    for round in 1..=d {
        run.step()?;
        let mut realized = run.colors(round).to_vec();
        realized.sort_unstable();
        realized.dedup();
        if let Some(limit) = opts.max_features {
            if columns.len() + realized.len() > limit {
                cap_events.push(CapEvent {
                    kind: "FeatureCapReached".into(),
                    round,
                    columns: columns.len() + realized.len(),
                    limit,
                });
                break;
            }
        }
        let registry = run.registry();
        columns.extend(realized.into_iter().map(|color| Column {
            round,
            color,
            type_rendering: registry[&color].signature_rendering.clone(),
        }));
    }
    let completed = cap_events.first().map_or(d, |e| e.round - 1);

    let index: HashMap<u32, usize> = columns.iter().enumerate().map(|(i, c)| (c.color, i)).collect();
    let offsets = run.graph_offsets().to_vec();
    let rows = opts.refine.exec.map_range(bundle.len(), |g| {
        let mut row = vec![0u32; columns.len()];
        for round in 0..=completed {
            for &c in &run.colors(round)[offsets[g]..offsets[g + 1]] {
                row[index[&c]] += 1;
            }
        }
        row
    });
    Ok(FeatureTable {
        columns,
        rows,
        graph_class: bundle.graph_class.clone(),
        metadata: TableMetadata {
            dataset: bundle.name.clone(),
            quantifier_spec: qset.spec(),
            requested_depth: d,
            completed_depth: completed,
            max_features: opts.max_features,
            cap_events,
            stable_round: run.stable_round(),
            label_alphabet: bundle.label_alphabet.clone(),
            class_values: bundle.class_values.clone(),
        },
    })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> TableError + '_ {
    move |source| TableError::Io { path: path.to_path_buf(), source }
}

pub fn write_csv(t: &FeatureTable, path: &Path) -> Result<(), TableError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let mut header = String::from("graph_id,class");
    for c in &t.columns {
        header.push(',');
        header.push_str(&c.name());
    }
    header.push('\n');
    w.write_all(header.as_bytes()).map_err(io_err(path))?;
    let mut line = String::new();
    for (g, row) in t.rows.iter().enumerate() {
        line.clear();
        line.push_str(&format!("{g},{}", t.graph_class[g]));
        for v in row {
            line.push(',');
            line.push_str(&v.to_string());
        }
        line.push('\n');
        w.write_all(line.as_bytes()).map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

#[derive(Serialize)]
struct ManifestColumn<'a> {
    round: usize,
    color: u32,
    type_rendering: &'a str,
    quantifier_spec: &'a str,
}

#[derive(Serialize)]
struct Manifest<'a> {
    columns: IndexMap<String, ManifestColumn<'a>>,
    metadata: &'a TableMetadata,
}

pub fn manifest_json(t: &FeatureTable) -> String {
    let columns = t
        .columns
        .iter()
        .map(|c| {
            let entry = ManifestColumn {
                round: c.round,
                color: c.color,
                type_rendering: &c.type_rendering,
                quantifier_spec: &t.metadata.quantifier_spec,
            };
            (c.name(), entry)
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&Manifest { columns, metadata: &t.metadata }).expect("serializable");
    s.push('\n');
    s
}

pub fn write_manifest(t: &FeatureTable, path: &Path) -> Result<(), TableError> {
    std::fs::write(path, manifest_json(t)).map_err(io_err(path))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundSummary {
    pub round: usize,
    /// Distinct colors realized in the dataset at this round.
    pub colors: usize,
    /// Columns of this round (round 0 lists the whole alphabet).
    pub columns: usize,
    pub cumulative_columns: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SummaryReport {
    pub dataset: String,
    pub rounds: Vec<RoundSummary>,
    pub cap_events: Vec<CapEvent>,
    pub stable_round: Option<usize>,
}

impl SummaryReport {
    pub fn to_text(&self) -> String {
        let mut s = format!("dataset {}\nround colors columns cumulative\n", self.dataset);
        for r in &self.rounds {
            s.push_str(&format!("{} {} {} {}\n", r.round, r.colors, r.columns, r.cumulative_columns));
        }
        for e in &self.cap_events {
            s.push_str(&format!("{} at round {} ({} > {})\n", e.kind, e.round, e.columns, e.limit));
        }
        if let Some(r) = self.stable_round {
            s.push_str(&format!("stable from round {r}\n"));
        }
        s
    }
}

pub fn per_round_summary(t: &FeatureTable) -> Result<SummaryReport, TableError> {
    if t.rows.is_empty() {
        return Err(TableError::EmptyBundle);
    }
    let mut rounds = Vec::new();
    let mut cumulative = 0;
    for round in 0..=t.metadata.completed_depth {
        let range = t.round_columns(round);
        let colors = range.clone().filter(|&c| t.rows.iter().any(|row| row[c] > 0)).count();
        cumulative += range.len();
        rounds.push(RoundSummary { round, colors, columns: range.len(), cumulative_columns: cumulative });
    }
    Ok(SummaryReport {
        dataset: t.metadata.dataset.clone(),
        rounds,
        cap_events: t.metadata.cap_events.clone(),
        stable_round: t.metadata.stable_round,
    })
}
