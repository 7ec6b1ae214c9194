//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Criteria that need the real TUDataset folders look in `$WLTAB_DATA_DIR`
//! (default `data/` at the workspace root). When those inputs are absent the
//! criterion is reported as FAIL with the reason; the process exit status
//! only reflects criteria whose inputs were available, unless
//! `WLTAB_REQUIRE_DATA=1` is set.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{canonical, data_dir, multiset_wl, refines, star};
use wltab::graph::random_graph;
use wltab::miner::{resolve_labels, OpSet};
use wltab::refine::{node_signature, refine_to_stability};
use wltab::tabularize::manifest_json;
use wltab::types::{graded_types, QCharBuilder, DEFAULT_SIZE_CAP};
use wltab::{
    check, counting_representation, disjoint_union, mine, parse_formula, parse_tudataset, refine, score,
    separated, tabularize, with_threads, DatasetBundle, ExecMode, LabeledGraph, MinerConfig, PointedModel,
    Quantifier, QuantifierSet, RefineError, RefineOptions, TableOptions,
};

enum Status {
    Pass,
    Fail,
    Missing,
}

struct Outcome {
    status: Status,
    detail: String,
}

fn verdict(ok: bool, detail: String) -> Outcome {
    Outcome { status: if ok { Status::Pass } else { Status::Fail }, detail }
}

fn load(name: &str) -> Result<DatasetBundle, Outcome> {
    let dir = data_dir();
    parse_tudataset(&dir, name).map_err(|e| Outcome {
        status: Status::Missing,
        detail: format!("{name} not available under {}: {e}", dir.display()),
    })
}

fn published_formulas() -> Outcome {
    let cases = [
        ("AIDS", "!<U>(l4 | l8 | l20)", 82.9),
        ("BZR", "!<U>(l6 | <maj> l8)", 82.2),
        ("PTC_MM", "[maj,U] <> <>(l6 | l8)", 67.0),
    ];
    let mut bundles = Vec::new();
    for (name, ..) in cases {
        match load(name) {
            Ok(b) => bundles.push(b),
            Err(o) => return o,
        }
    }
    let mut report = Vec::new();
    for base in [0i64, 1] {
        let mut all = true;
        let mut parts = Vec::new();
        for ((name, text, expected), bundle) in cases.iter().zip(&bundles) {
            let start = Instant::now();
            let f = resolve_labels(&parse_formula(text).expect("formula parses"), bundle, base);
            let s = score(bundle, &f, 0).expect("global-rooted");
            let secs = start.elapsed().as_secs_f64();
            let ok = (s.oriented_accuracy - expected).abs() <= 0.2 && secs < 10.0;
            all &= ok;
            parts.push(format!("{name} {:.2} (want {expected}, {secs:.2}s)", s.oriented_accuracy));
        }
        if all {
            return verdict(true, format!("label base {base}: {}", parts.join(", ")));
        }
        report.push(format!("base {base}: {}", parts.join(", ")));
    }
    verdict(false, report.join("; "))
}

fn oracle_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let opts = RefineOptions::default();
    let (mut checks, mut mismatches) = (0usize, 0usize);
    let pairs = 500;
    for _ in 0..pairs {
        let mut pick = || {
            let n = rng.random_range(1..=8);
            let p = if rng.random_bool(0.5) { 0.2 } else { 0.5 };
            let g = random_graph(n, p, 2, rng.random());
            let v = rng.random_range(0..n);
            PointedModel::new(g, v).unwrap()
        };
        let (m1, m2) = (pick(), pick());
        let union = disjoint_union(&m1.graph, &m2.graph).unwrap();
        let w = m1.graph.node_count() + m2.point;
        let qsets = [
            QuantifierSet::parse("exists").unwrap(),
            QuantifierSet::parse("exists,maj").unwrap(),
            counting_representation(union.max_out_degree()),
        ];
        for q in &qsets {
            let mut builder = QCharBuilder::new(&union, q, DEFAULT_SIZE_CAP);
            for d in 0..=2 {
                let sep = separated(&m1, &m2, d, q, &opts).unwrap();
                let phi = builder.type_formula(w, d).unwrap().formula;
                checks += 1;
                if sep == check(&union, m1.point, &phi) {
                    mismatches += 1;
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        mismatches == 0 && secs < 60.0,
        format!("{pairs} pairs, {checks} checks, {mismatches} mismatches, {secs:.1}s"),
    )
}

fn graded_correspondence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut checked, mut mismatches) = (0usize, 0usize);
    for _ in 0..200 {
        let n = rng.random_range(1..=12);
        let g = random_graph(n, rng.random_range(0.1..0.6), rng.random_range(1..=3), rng.random());
        let types = graded_types(&g, 3);
        let wl = refine(std::slice::from_ref(&g), 3, &QuantifierSet::counting(), &RefineOptions::default()).unwrap();
        for (d, round) in types.iter().enumerate() {
            let colors = wl.colors(d, 0);
            for u in 0..n {
                for v in 0..n {
                    checked += 1;
                    if (round[u] == round[v]) != (colors[u] == colors[v]) {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    verdict(mismatches == 0, format!("200 graphs, {checked} node pairs, {mismatches} mismatches"))
}

fn fast_path() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let graphs: Vec<LabeledGraph> = (0..200)
        .map(|_| random_graph(rng.random_range(1..=14), rng.random_range(0.05..0.5), 3, rng.random()))
        .collect();
    let ours = refine_to_stability(&graphs, &QuantifierSet::counting(), &RefineOptions::default()).unwrap();
    let direct = multiset_wl(&graphs, ours.depth() + 1);
    let mut mismatches = 0;
    for (r, expected) in direct.iter().enumerate() {
        let mine = &ours.rounds[r.min(ours.depth())];
        if canonical(mine) != canonical(expected) {
            mismatches += 1;
        }
    }
    verdict(mismatches == 0, format!("200 graphs, stable at round {}, {mismatches} mismatching rounds", ours.depth()))
}

fn coarseness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut graphs: Vec<LabeledGraph> = (0..100)
        .map(|_| random_graph(rng.random_range(1..=12), rng.random_range(0.1..0.6), 2, rng.random()))
        .collect();
    graphs.push(star(234, true));
    graphs.push(star(235, true));
    let opts = RefineOptions::default();
    let d = 14;
    let mut violations = 0;
    for g in &graphs {
        let wl = refine(std::slice::from_ref(g), d, &QuantifierSet::counting(), &opts).unwrap();
        let cwl = refine(std::slice::from_ref(g), d, &QuantifierSet::crude(), &opts).unwrap();
        violations += (0..=d).filter(|&r| !refines(wl.colors(r, 0), cwl.colors(r, 0))).count();
    }
    let pair = [star(234, true), star(235, true)];
    let wl = refine(&pair, 1, &QuantifierSet::counting(), &opts).unwrap();
    let wl_separates = wl.colors(1, 0)[0] != wl.colors(1, 1)[0];
    let cwl = refine_to_stability(&pair, &QuantifierSet::crude(), &opts).unwrap();
    let cwl_never = (0..=cwl.depth()).all(|r| cwl.colors(r, 0)[0] == cwl.colors(r, 1)[0]);
    verdict(
        violations == 0 && wl_separates && cwl_never,
        format!(
            "{} graphs, {violations} violations; 234/235 stars: WL separates at 1 = {wl_separates}, CWL never separates = {cwl_never}",
            graphs.len()
        ),
    )
}

/// Whether `u` and `v` agree on every quantifier over every union of colors.
fn directly_equivalent(g: &LabeledGraph, colors: &[u32], u: usize, v: usize, qs: &[Quantifier]) -> bool {
    if colors[u] != colors[v] {
        return false;
    }
    let mut realized: Vec<u32> = g.neighbors(u).iter().chain(g.neighbors(v)).map(|&x| colors[x as usize]).collect();
    realized.sort_unstable();
    realized.dedup();
    let k = realized.len();
    let counts = |x: usize, mask: u64| -> usize {
        g.neighbors(x)
            .iter()
            .filter(|&&y| {
                let i = realized.binary_search(&colors[y as usize]).unwrap();
                mask >> i & 1 == 1
            })
            .count()
    };
    let (du, dv) = (g.out_degree(u), g.out_degree(v));
    for q in qs {
        if q.width() == 1 {
            for s in 0..1u64 << k {
                if q.accepts(du, counts(u, s)) != q.accepts(dv, counts(v, s)) {
                    return false;
                }
            }
        } else {
            let venn = |x: usize, s1: u64, s2: u64| {
                let mut p = wltab::quantifier::VennProfile::default();
                for &y in g.neighbors(x) {
                    let i = realized.binary_search(&colors[y as usize]).unwrap();
                    match (s1 >> i & 1 == 1, s2 >> i & 1 == 1) {
                        (true, true) => p.both += 1,
                        (true, false) => p.first_only += 1,
                        (false, true) => p.second_only += 1,
                        (false, false) => p.neither += 1,
                    }
                }
                p
            };
            for s1 in 0..1u64 << k {
                for s2 in 0..1u64 << k {
                    if q.accepts_venn(venn(u, s1, s2)) != q.accepts_venn(venn(v, s1, s2)) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

fn pruned_signatures() -> Outcome {
    let odd = Quantifier::custom_unary("odd", false, |_, s| s % 2 == 1);
    let sets: Vec<(&str, QuantifierSet, usize)> = vec![
        ("exists", QuantifierSet::parse("exists").unwrap(), 12),
        ("exists,maj", QuantifierSet::crude(), 12),
        ("geq:5", QuantifierSet::parse("geq:5").unwrap(), 12),
        ("pct>30", QuantifierSet::parse("pct>30").unwrap(), 12),
        ("odd", QuantifierSet::new(vec![odd]).unwrap(), 9),
        ("more", QuantifierSet::parse("more").unwrap(), 6),
        ("counting", QuantifierSet::counting(), 12),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let opts = RefineOptions::default();
    let mut lines = Vec::new();
    let mut total_mismatches = 0;
    for (name, q, n) in &sets {
        let qs = q.expanded(2 * n).members().to_vec();
        let (mut mismatches, mut equal, mut pairs) = (0, 0, 0);
        while pairs < 500 {
            let g1 = random_graph(*n, rng.random_range(0.2..0.7), 2, rng.random());
            let g2 = random_graph(*n, rng.random_range(0.2..0.7), 2, rng.random());
            let g = disjoint_union(&g1, &g2).unwrap();
            let round = rng.random_range(0..=2);
            let res = refine(std::slice::from_ref(&g), round, q, &opts).unwrap();
            let colors = res.colors(round, 0);
            let qs = if q.family().is_some() { q.expanded(g.max_out_degree()).members().to_vec() } else { qs.clone() };
            for _ in 0..10 {
                let u = rng.random_range(0..g.node_count());
                let same: Vec<usize> = (0..g.node_count()).filter(|&x| x != u && colors[x] == colors[u]).collect();
                let v = if !same.is_empty() && rng.random_bool(0.8) {
                    same[rng.random_range(0..same.len())]
                } else {
                    rng.random_range(0..g.node_count())
                };
                let su = node_signature(&g, u, colors, q, &opts).unwrap();
                let sv = node_signature(&g, v, colors, q, &opts).unwrap();
                let direct = directly_equivalent(&g, colors, u, v, &qs);
                pairs += 1;
                equal += usize::from(direct);
                if (su == sv) != direct {
                    mismatches += 1;
                }
            }
        }
        total_mismatches += mismatches;
        lines.push(format!("{name}: {pairs} pairs ({equal} equivalent) {mismatches} mismatches"));
    }
    verdict(total_mismatches == 0, lines.join("; "))
}

fn synthetic_bundle(count: usize, seed: u64) -> DatasetBundle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graphs: Vec<LabeledGraph> =
        (0..count).map(|_| random_graph(rng.random_range(3..=12), 0.25, 3, rng.random())).collect();
    let graph_class = (0..count).map(|i| i % 2).collect();
    DatasetBundle {
        name: "synthetic".into(),
        graphs,
        graph_class,
        class_values: vec!["a".into(), "b".into()],
        label_alphabet: vec!["0".into(), "1".into(), "2".into()],
    }
}

fn outputs(bundle: &DatasetBundle, exec: ExecMode) -> (String, String, String) {
    let mut opts = TableOptions::default();
    opts.refine.exec = exec;
    let q = QuantifierSet::crude();
    let t = tabularize(bundle, &q, 3, &opts).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    wltab::write_csv(&t, &csv).unwrap();
    let colors = refine(&bundle.graphs, 3, &q, &opts.refine).unwrap().to_json();
    (std::fs::read_to_string(csv).unwrap(), manifest_json(&t), colors)
}

fn determinism() -> Outcome {
    let bundle = synthetic_bundle(300, 19);
    let reference = outputs(&bundle, ExecMode::Sequential);
    let max = std::thread::available_parallelism().map_or(8, |n| n.get());
    let mut runs = 0;
    let mut differing = 0;
    for threads in [1, 4, max] {
        for _ in 0..3 {
            runs += 1;
            if with_threads(threads, || outputs(&bundle, ExecMode::Parallel)) != reference {
                differing += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut row_mismatches = 0;
    for _ in 0..100 {
        let g = random_graph(rng.random_range(2..=12), 0.3, 3, rng.random());
        let perm = wltab::graph::random_permutation(g.node_count(), rng.random());
        let b = DatasetBundle {
            graphs: vec![g.clone(), g.permuted(&perm)],
            graph_class: vec![0, 0],
            ..synthetic_bundle(0, 0)
        };
        let t = tabularize(&b, &QuantifierSet::parse("counting,maj").unwrap(), 4, &TableOptions::default()).unwrap();
        if t.rows[0] != t.rows[1] {
            row_mismatches += 1;
        }
    }
    verdict(
        differing == 0 && row_mismatches == 0,
        format!("{runs} runs over threads {{1, 4, {max}}}: {differing} differ; 100 permuted graphs: {row_mismatches} row mismatches"),
    )
}

fn caps() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let graphs: Vec<LabeledGraph> = (0..400).map(|_| random_graph(14, 0.35, 2, rng.random())).collect();
    let bundle = DatasetBundle {
        name: "dense".into(),
        graph_class: vec![0; graphs.len()],
        graphs,
        class_values: vec!["0".into()],
        label_alphabet: vec!["0".into(), "1".into()],
    };
    let q = QuantifierSet::counting();
    let full = refine(&bundle.graphs, 6, &q, &RefineOptions::default()).unwrap();
    let mut total = bundle.label_alphabet.len();
    let mut expected = None;
    for r in 1..=6 {
        let mut realized = full.rounds[r].clone();
        realized.sort_unstable();
        realized.dedup();
        total += realized.len();
        if total > 5000 {
            expected = Some(r);
            break;
        }
    }
    let t = tabularize(&bundle, &q, 6, &TableOptions::default()).unwrap();
    let event = t.feature_cap_reached().map(|e| e.round);
    let cap_ok = expected.is_some()
        && event == expected
        && t.columns.len() <= 5000
        && t.metadata.completed_depth == expected.unwrap() - 1;

    // maj over 40 distinct leaf colors: the minimal accepted sets number C(40, 21)
    let leaves = 40;
    let labels: Vec<u32> = std::iter::once(0).chain(1..=leaves).collect();
    let edges: Vec<(u32, u32)> = (1..=leaves).map(|l| (0, l)).collect();
    let g = LabeledGraph::from_edges(labels, &edges, leaves + 1).unwrap();
    let start = Instant::now();
    let res = refine(std::slice::from_ref(&g), 1, &QuantifierSet::parse("maj").unwrap(), &RefineOptions::default());
    let secs = start.elapsed().as_secs_f64();
    let timeout_ok = matches!(res, Err(RefineError::Timeout { round: 1, limit }) if limit == Duration::from_secs(30));
    verdict(
        cap_ok && timeout_ok,
        format!(
            "cap event at round {event:?} (first round over 5000: {expected:?}), {} columns; timeout raised = {timeout_ok} after {secs:.1}s",
            t.columns.len()
        ),
    )
}

fn miner_floor() -> Outcome {
    let bundle = match load("AIDS") {
        Ok(b) => b,
        Err(o) => return o,
    };
    let cfg = MinerConfig {
        ops: OpSet::parse("gexists,maj,exists,not,or").unwrap(),
        max_size: 6,
        time_budget: Some(Duration::from_secs(600)),
        ..MinerConfig::default()
    };
    let start = Instant::now();
    let r = mine(&bundle, &cfg).unwrap();
    let best = r.ranked.first().map_or(0.0, |m| m.accuracy);
    let rendering = r.ranked.first().map_or(String::new(), |m| m.rendering.clone());
    verdict(
        (best * 10.0).round() / 10.0 >= 82.9,
        format!(
            "best {best:.2} by {rendering}, {} candidates, {:.1}s, budget exhausted = {}",
            r.candidates_evaluated,
            start.elapsed().as_secs_f64(),
            r.budget_exhausted
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("Published formula accuracies", published_formulas),
        ("Separation oracle suite", oracle_suite),
        ("Graded types vs WL colors", graded_correspondence),
        ("Counting fast path vs multiset WL", fast_path),
        ("CWL coarsens WL", coarseness),
        ("Pruned signatures vs direct equivalence", pruned_signatures),
        ("Determinism and permutation invariance", determinism),
        ("Feature cap and round timeout", caps),
        ("Miner floor on AIDS", miner_floor),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let require_data = std::env::var("WLTAB_REQUIRE_DATA").is_ok_and(|v| v == "1");
    let (mut passed, mut failed, mut missing) = (0, 0, 0);
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.to_lowercase().contains(&f.to_lowercase())) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let tag = match outcome.status {
            Status::Pass => {
                passed += 1;
                "PASS"
            }
            Status::Fail => {
                failed += 1;
                "FAIL"
            }
            Status::Missing => {
                missing += 1;
                "FAIL"
            }
        };
        println!("{tag} {name} [{:.1}s]: {}", start.elapsed().as_secs_f64(), outcome.detail);
    }
    println!("acceptance: {passed} passed, {} failed ({missing} for missing inputs)", failed + missing);
    if failed > 0 || (require_data && missing > 0) {
        std::process::exit(1);
    }
}
