mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use report::RunReport;
use wltab::miner::{render_labels, resolve_labels, OpSet};
use wltab::refine::refine_to_stability;
use wltab::tabularize::per_round_summary;
use wltab::tudataset::{parse_tudataset_with_stats, ParseStats};
use wltab::types::q_characteristic;
use wltab::{
    check, disjoint_union, mine, parse_formula, refine, score, separated, tabularize, with_threads, write_csv,
    write_manifest, DatasetBundle, LabeledGraph, MinerConfig, PointedModel, QuantifierSet, RefineOptions,
    TableOptions,
};

#[derive(Parser)]
#[command(name = "wltab", version, about = "Weisfeiler-Leman feature tables and modal formula mining for graph datasets")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "WLTAB_THREADS")]
    threads: Option<usize>,
    /// Write the run report (timings, peak memory, outputs) here instead of stderr.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count node colors per graph and write a CSV table plus a JSON manifest.
    Tabularize(TabularizeArgs),
    /// Run the refinement and dump every round's colors.
    Refine(RefineArgs),
    /// Search small global formulas that classify the graphs.
    Mine(MineArgs),
    /// Score one global formula as a classifier.
    Eval(EvalArgs),
    /// Decide whether two pointed graphs are separated at a depth.
    CheckEquivalence(CheckArgs),
    /// Dataset statistics and, with --depth, per-round color counts.
    Stats(StatsArgs),
}

#[derive(Args)]
struct DatasetArgs {
    /// Directory holding the TUDataset files (directly or in NAME/).
    #[arg(long)]
    dataset: PathBuf,
    /// TUDataset name, the file prefix.
    #[arg(long)]
    name: String,
    /// Replace node labels by out-degrees.
    #[arg(long)]
    degree_labels: bool,
}

#[derive(Args)]
struct RefineFlags {
    /// Comma-separated quantifier specs, e.g. `counting` or `exists,maj`.
    #[arg(long, default_value = "counting")]
    quantifiers: String,
    /// Per-round time limit in seconds (0 disables it).
    #[arg(long, default_value_t = 30.0)]
    round_timeout: f64,
}

impl RefineFlags {
    fn options(&self) -> Result<RefineOptions> {
        if self.round_timeout.is_nan() || self.round_timeout < 0.0 {
            bail!("--round-timeout must be non-negative");
        }
        let round_timeout = (self.round_timeout > 0.0).then(|| Duration::from_secs_f64(self.round_timeout));
        Ok(RefineOptions { round_timeout, ..RefineOptions::default() })
    }

    fn qset(&self) -> Result<QuantifierSet> {
        QuantifierSet::parse(&self.quantifiers).with_context(|| format!("--quantifiers {:?}", self.quantifiers))
    }
}

#[derive(Args)]
struct TabularizeArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[command(flatten)]
    refine: RefineFlags,
    #[arg(long)]
    depth: usize,
    /// Stop before the first round that would exceed this many columns (0 disables the cap).
    #[arg(long, default_value_t = 5000)]
    max_features: usize,
    #[arg(long)]
    out: PathBuf,
    /// Manifest path (default: the CSV path with a .json extension).
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct RefineArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[command(flatten)]
    refine: RefineFlags,
    #[arg(long, default_value_t = 0, required_unless_present = "to_stability")]
    depth: usize,
    /// Refine until the partition is stable instead of a fixed depth.
    #[arg(long)]
    to_stability: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LabelFlags {
    /// Offset between `l<k>` atoms and raw label values: `l<k>` means raw value k - base.
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    label_base: i64,
    /// Raw class value treated as positive (default: every class in turn for `mine`,
    /// the first class for `eval`).
    #[arg(long)]
    target_class: Option<String>,
}

#[derive(Args)]
struct MineArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[command(flatten)]
    labels: LabelFlags,
    /// Operators: exists, maj, gexists, gmaj, globals, not, and, or, bool.
    #[arg(long, default_value = "exists,maj,globals")]
    ops: String,
    #[arg(long, default_value_t = 6)]
    max_size: u64,
    #[arg(long, default_value_t = 6)]
    max_depth: usize,
    /// Wall-clock budget such as `60s`, `10m`, `500ms`, or a bare candidate count.
    #[arg(long)]
    budget: Option<String>,
    #[arg(long, default_value_t = 10)]
    top: usize,
    /// Output JSON (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[command(flatten)]
    labels: LabelFlags,
    #[arg(long)]
    formula: String,
}

#[derive(Args)]
struct CheckArgs {
    /// Graph JSON `{labels, adjacency, label_count?}`; given twice.
    #[arg(long, num_args = 1, required = true)]
    graph: Vec<PathBuf>,
    /// Point of each graph, in the order of --graph.
    #[arg(long, num_args = 1, required = true)]
    point: Vec<usize>,
    #[arg(long)]
    depth: usize,
    #[command(flatten)]
    refine: RefineFlags,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// Also refine to this depth and report colors per round.
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, default_value = "counting")]
    quantifiers: String,
}

fn load(args: &DatasetArgs, report: &mut RunReport) -> Result<(DatasetBundle, ParseStats)> {
    let (bundle, stats) = report
        .phase("parse", || parse_tudataset_with_stats(&args.dataset, &args.name))
        .with_context(|| format!("loading {} from {}", args.name, args.dataset.display()))?;
    if stats.duplicate_edges > 0 {
        report.events.push(format!("{} duplicate edges kept", stats.duplicate_edges));
    }
    let bundle = if args.degree_labels { report.phase("degree-labels", || bundle.with_degree_labels()) } else { bundle };
    Ok((bundle, stats))
}

fn class_id(bundle: &DatasetBundle, raw: &str) -> Result<usize> {
    bundle
        .class_values
        .iter()
        .position(|c| c == raw)
        .with_context(|| format!("class {raw:?} not in {:?}", bundle.class_values))
}

fn emit(text: &str, out: Option<&Path>, report: &mut RunReport) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            report.output(path);
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn run_tabularize(a: &TabularizeArgs, report: &mut RunReport) -> Result<()> {
    let (bundle, _) = load(&a.data, report)?;
    let opts = TableOptions {
        max_features: (a.max_features > 0).then_some(a.max_features),
        refine: a.refine.options()?,
    };
    let qset = a.refine.qset()?;
    let table = report.phase("tabularize", || tabularize(&bundle, &qset, a.depth, &opts))?;
    for e in &table.metadata.cap_events {
        report.events.push(format!("{} at round {} ({} > {})", e.kind, e.round, e.columns, e.limit));
    }
    let manifest = a.manifest.clone().unwrap_or_else(|| a.out.with_extension("json"));
    report.phase("write", || -> Result<()> {
        write_csv(&table, &a.out)?;
        write_manifest(&table, &manifest)?;
        Ok(())
    })?;
    report.output(&a.out);
    report.output(&manifest);
    Ok(())
}

fn run_refine(a: &RefineArgs, report: &mut RunReport) -> Result<()> {
    let (bundle, _) = load(&a.data, report)?;
    let (qset, opts) = (a.refine.qset()?, a.refine.options()?);
    let result = report.phase("refine", || {
        if a.to_stability {
            refine_to_stability(&bundle.graphs, &qset, &opts)
        } else {
            refine(&bundle.graphs, a.depth, &qset, &opts)
        }
    })?;
    let mut text = result.to_json();
    text.push('\n');
    emit(&text, Some(&a.out), report)
}

fn parse_budget(text: &str) -> Result<(Option<Duration>, Option<u64>)> {
    let t = text.trim();
    let split = t.find(|c: char| !c.is_ascii_digit() && c != '.').unwrap_or(t.len());
    let (num, unit) = t.split_at(split);
    let value: f64 = num.parse().with_context(|| format!("budget {text:?}"))?;
    let secs = match unit {
        "" => return Ok((None, Some(value as u64))),
        "ms" => value / 1000.0,
        "s" => value,
        "m" => value * 60.0,
        "h" => value * 3600.0,
        _ => bail!("budget {text:?}: unknown unit {unit:?}"),
    };
    Ok((Some(Duration::from_secs_f64(secs)), None))
}

#[derive(Serialize)]
struct ClassMining {
    target_value: String,
    #[serde(flatten)]
    result: wltab::MinedResult,
}

#[derive(Serialize)]
struct MineOutput<'a> {
    dataset: &'a str,
    ops: &'a str,
    max_size: u64,
    label_base: i64,
    classes: Vec<ClassMining>,
}

fn run_mine(a: &MineArgs, report: &mut RunReport) -> Result<()> {
    let (bundle, _) = load(&a.data, report)?;
    let ops = OpSet::parse(&a.ops)?;
    let (time_budget, candidate_budget) = match &a.budget {
        Some(b) => parse_budget(b)?,
        None => (None, None),
    };
    let targets: Vec<usize> = match &a.labels.target_class {
        Some(raw) => vec![class_id(&bundle, raw)?],
        None if bundle.class_count() == 2 => vec![0],
        None => (0..bundle.class_count()).collect(),
    };
    let mut classes = Vec::new();
    for target in targets {
        let cfg = MinerConfig {
            ops: ops.clone(),
            max_size: a.max_size,
            max_depth: a.max_depth,
            target_class: target,
            time_budget,
            candidate_budget,
            top_k: a.top,
            label_base: a.labels.label_base,
            ..MinerConfig::default()
        };
        let result = report.phase(&format!("mine class {target}"), || mine(&bundle, &cfg))?;
        if result.budget_exhausted {
            report.events.push(format!("budget exhausted for class {target} after {} candidates", result.candidates_evaluated));
        }
        classes.push(ClassMining { target_value: bundle.class_values[target].clone(), result });
    }
    let out = MineOutput { dataset: &bundle.name, ops: &a.ops, max_size: a.max_size, label_base: a.labels.label_base, classes };
    emit(&json(&out), a.out.as_deref(), report)
}

#[derive(Serialize)]
struct EvalOutput {
    dataset: String,
    formula: String,
    target_value: String,
    graphs: usize,
    /// Better of the two orientations, in percent.
    accuracy: f64,
    /// Accuracy of "satisfies means target class".
    direct_accuracy: f64,
    satisfied_means_target: bool,
}

fn run_eval(a: &EvalArgs, report: &mut RunReport) -> Result<()> {
    let (bundle, _) = load(&a.data, report)?;
    let parsed = parse_formula(&a.formula).map_err(|e| anyhow::anyhow!("--formula: {e}"))?;
    let formula = resolve_labels(&parsed, &bundle, a.labels.label_base);
    let target = match &a.labels.target_class {
        Some(raw) => class_id(&bundle, raw)?,
        None => 0,
    };
    let s = report.phase("score", || score(&bundle, &formula, target))?;
    let out = EvalOutput {
        dataset: bundle.name.clone(),
        formula: render_labels(&formula, &bundle, a.labels.label_base),
        target_value: bundle.class_values[target].clone(),
        graphs: bundle.len(),
        accuracy: s.oriented_accuracy,
        direct_accuracy: s.accuracy,
        satisfied_means_target: s.satisfied_means_positive,
    };
    emit(&json(&out), None, report)
}

#[derive(Serialize)]
struct CheckOutput {
    separated: bool,
    depth: usize,
    quantifiers: String,
    /// Whether the first point fails the second point's characteristic
    /// formula; `null` when that formula exceeds the size cap.
    characteristic_formula_separates: Option<bool>,
}

fn read_graph(path: &Path) -> Result<LabeledGraph> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing graph {}", path.display()))
}

fn run_check(a: &CheckArgs, report: &mut RunReport) -> Result<()> {
    if a.graph.len() != 2 || a.point.len() != 2 {
        bail!("check-equivalence needs exactly two --graph and two --point flags");
    }
    let mut g1 = read_graph(&a.graph[0])?;
    let mut g2 = read_graph(&a.graph[1])?;
    let labels = g1.label_count().max(g2.label_count());
    g1 = g1.with_label_count(labels)?;
    g2 = g2.with_label_count(labels)?;
    let m1 = PointedModel::new(g1, a.point[0])?;
    let m2 = PointedModel::new(g2, a.point[1])?;
    let (qset, opts) = (a.refine.qset()?, a.refine.options()?);
    let sep = report.phase("refine", || separated(&m1, &m2, a.depth, &qset, &opts))?;
    let union = disjoint_union(&m1.graph, &m2.graph)?;
    let w = m1.graph.node_count() + m2.point;
    let by_formula = report.phase("characteristic", || {
        q_characteristic(&union, w, a.depth, &qset).ok().map(|t| !check(&union, m1.point, &t.formula))
    });
    if by_formula.is_some_and(|b| b != sep) {
        report.events.push("refinement and characteristic formula disagree".into());
    }
    let out = CheckOutput { separated: sep, depth: a.depth, quantifiers: qset.spec(), characteristic_formula_separates: by_formula };
    emit(&json(&out), None, report)
}

#[derive(Serialize)]
struct StatsOutput {
    dataset: String,
    parse: ParseStats,
    classes: Vec<(String, usize)>,
    label_alphabet_size: usize,
    mean_nodes: f64,
    max_out_degree: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    rounds: Option<wltab::tabularize::SummaryReport>,
}

fn run_stats(a: &StatsArgs, report: &mut RunReport) -> Result<()> {
    let (bundle, parse) = load(&a.data, report)?;
    let classes = bundle
        .class_values
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), bundle.graph_class.iter().filter(|&&c| c == i).count()))
        .collect();
    let rounds = match a.depth {
        Some(d) => {
            let qset = QuantifierSet::parse(&a.quantifiers)?;
            let opts = TableOptions { max_features: None, ..TableOptions::default() };
            let table = report.phase("tabularize", || tabularize(&bundle, &qset, d, &opts))?;
            Some(per_round_summary(&table)?)
        }
        None => None,
    };
    let out = StatsOutput {
        dataset: bundle.name.clone(),
        parse,
        classes,
        label_alphabet_size: bundle.label_alphabet.len(),
        mean_nodes: bundle.mean_nodes(),
        max_out_degree: bundle.max_out_degree(),
        rounds,
    };
    emit(&json(&out), None, report)
}

fn dispatch(command: &Command, report: &mut RunReport) -> Result<()> {
    match command {
        Command::Tabularize(a) => run_tabularize(a, report),
        Command::Refine(a) => run_refine(a, report),
        Command::Mine(a) => run_mine(a, report),
        Command::Eval(a) => run_eval(a, report),
        Command::CheckEquivalence(a) => run_check(a, report),
        Command::Stats(a) => run_stats(a, report),
    }
}

fn subcommand_name(command: &Command) -> &'static str {
    match command {
        Command::Tabularize(_) => "tabularize",
        Command::Refine(_) => "refine",
        Command::Mine(_) => "mine",
        Command::Eval(_) => "eval",
        Command::CheckEquivalence(_) => "check-equivalence",
        Command::Stats(_) => "stats",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let mut report = RunReport::new(subcommand_name(&cli.command), threads);
    let result = with_threads(threads, || dispatch(&cli.command, &mut report));
    if let Err(e) = &result {
        report.error = Some(format!("{e:#}"));
        eprintln!("error: {e:#}");
    }
    report.finish();
    match &cli.report {
        Some(path) => {
            if let Err(e) = std::fs::write(path, report.to_json()) {
                eprintln!("error: writing report {}: {e}", path.display());
                return ExitCode::FAILURE;
            }
        }
        None => eprintln!("{}", report.to_json()),
    }
    if result.is_ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
