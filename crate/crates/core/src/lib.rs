//! Weisfeiler-Leman tabularization of labeled-graph datasets, parameterized
//! by sets of generalized quantifiers, with a modal-logic kernel and a
//! brute-force formula miner.

pub mod antichain;
pub mod eval;
pub mod exec;
pub mod formula;
pub mod graph;
pub mod miner;
pub mod quantifier;
pub mod refine;
pub mod syntax;
pub mod tabularize;
pub mod tudataset;
pub mod types;

pub use eval::{check, modal_depth, Evaluator};
pub use exec::{with_threads, ExecMode};
pub use formula::{Formula, Node};
pub use graph::{disjoint_union, DatasetBundle, LabeledGraph, PointedModel};
pub use miner::{graph_satisfies, mine, score, MinedResult, MinerConfig, MinerError, OpSet};
pub use quantifier::{builtin, counting_representation, Quantifier, QuantifierSet};
pub use syntax::{parse_formula, render};
pub use tudataset::parse_tudataset;
pub use refine::{refine, separated, stable_depth, RefineError, RefineOptions, RefinementResult};
pub use tabularize::{tabularize, write_csv, write_manifest, FeatureTable, TableOptions};
