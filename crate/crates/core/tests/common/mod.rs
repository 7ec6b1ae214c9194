#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use wltab::LabeledGraph;

/// Relabels colors by first appearance so equal partitions compare equal.
pub fn canonical(colors: &[u32]) -> Vec<u32> {
    let mut ids: HashMap<u32, u32> = HashMap::new();
    colors
        .iter()
        .map(|c| {
            let next = ids.len() as u32;
            *ids.entry(*c).or_insert(next)
        })
        .collect()
}

/// Whether every class of `fine` lies inside one class of `coarse`.
pub fn refines(fine: &[u32], coarse: &[u32]) -> bool {
    let mut seen: HashMap<u32, u32> = HashMap::new();
    fine.iter().zip(coarse).all(|(f, c)| *seen.entry(*f).or_insert(*c) == *c)
}

/// Plain color refinement on the neighbor-color multiset, all graphs jointly.
/// Round 0 is the label; `result[r]` covers the concatenated nodes.
pub fn multiset_wl(graphs: &[LabeledGraph], rounds: usize) -> Vec<Vec<u32>> {
    let mut offsets = vec![0usize];
    for g in graphs {
        offsets.push(offsets.last().unwrap() + g.node_count());
    }
    let mut current: Vec<u32> = graphs.iter().flat_map(|g| g.labels().iter().copied()).collect();
    let mut out = vec![current.clone()];
    for _ in 0..rounds {
        let mut ids: HashMap<(u32, Vec<u32>), u32> = HashMap::new();
        let mut next = Vec::with_capacity(current.len());
        for (gi, g) in graphs.iter().enumerate() {
            let base = offsets[gi];
            for v in 0..g.node_count() {
                let mut ms: Vec<u32> = g.neighbors(v).iter().map(|&u| current[base + u as usize]).collect();
                ms.sort_unstable();
                let key = (current[base + v], ms);
                let fresh = ids.len() as u32;
                next.push(*ids.entry(key).or_insert(fresh));
            }
        }
        current = next;
        out.push(current.clone());
    }
    out
}

pub fn star(leaves: usize, symmetric: bool) -> LabeledGraph {
    let mut edges = Vec::new();
    for l in 1..=leaves as u32 {
        edges.push((0, l));
        if symmetric {
            edges.push((l, 0));
        }
    }
    LabeledGraph::from_edges(vec![0; leaves + 1], &edges, 1).unwrap()
}

/// Directory holding TUDataset folders: `$WLTAB_DATA_DIR`, else `data/` at
/// the workspace root.
pub fn data_dir() -> PathBuf {
    std::env::var_os("WLTAB_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data")))
}
