use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct Phase {
    pub name: String,
    pub seconds: f64,
}

/// Machine-readable account of one invocation.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub subcommand: String,
    pub argv: Vec<String>,
    pub threads: usize,
    pub phases: Vec<Phase>,
    pub total_seconds: f64,
    /// Peak resident set size in KiB, when the platform exposes it.
    pub peak_rss_kib: Option<u64>,
    pub outputs: Vec<PathBuf>,
    pub events: Vec<String>,
    pub error: Option<String>,
    #[serde(skip)]
    started: Option<Instant>,
}

impl RunReport {
    pub fn new(subcommand: &str, threads: usize) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            argv: std::env::args().collect(),
            threads,
            phases: Vec::new(),
            total_seconds: 0.0,
            peak_rss_kib: None,
            outputs: Vec::new(),
            events: Vec::new(),
            error: None,
            started: Some(Instant::now()),
        }
    }

    /// Runs `f` and records its wall-clock time under `name`.
    pub fn phase<R>(&mut self, name: &str, f: impl FnOnce() -> R) -> R {
        let start = Instant::now();
        let out = f();
        self.phases.push(Phase { name: name.to_string(), seconds: start.elapsed().as_secs_f64() });
        out
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    pub fn finish(&mut self) {
        if let Some(start) = self.started {
            self.total_seconds = start.elapsed().as_secs_f64();
        }
        self.peak_rss_kib = peak_rss_kib();
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn peak_rss_kib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    status
        .lines()
        .find_map(|l| l.strip_prefix("VmHWM:"))
        .and_then(|rest| rest.trim().trim_end_matches("kB").trim().parse().ok())
}
