//! File formats: front CSV, stats JSON Lines, pretty JSON.

use std::fmt::Write as _;
use std::path::Path;

use moea_core::engine::GenerationStats;
use moea_core::Solution;
use serde::Serialize;

use crate::CliError;

fn write(path: &Path, body: String) -> Result<(), CliError> {
    std::fs::write(path, body).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

/// Header `id,x1..xn,f1..fM`, one row per solution. Floats use Rust's
/// shortest round-trip formatting, so the text is stable across runs.
pub fn front_csv(front: &[Solution]) -> String {
    let (n, m) = front
        .first()
        .map(|s| (s.genome.len(), s.objectives.as_ref().map_or(0, |o| o.dim())))
        .unwrap_or((0, 0));
    let mut out = String::from("id");
    for i in 1..=n {
        let _ = write!(out, ",x{i}");
    }
    for j in 1..=m {
        let _ = write!(out, ",f{j}");
    }
    out.push('\n');
    for s in front {
        let _ = write!(out, "{}", s.id);
        for g in &s.genome {
            let _ = write!(out, ",{g}");
        }
        if let Some(o) = &s.objectives {
            for v in o.values() {
                let _ = write!(out, ",{v}");
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_front_csv(path: &Path, front: &[Solution]) -> Result<(), CliError> {
    write(path, front_csv(front))
}

pub fn write_stats_jsonl(path: &Path, stats: &[GenerationStats]) -> Result<(), CliError> {
    let mut body = String::new();
    for line in stats {
        body.push_str(&serde_json::to_string(line).map_err(|e| CliError::Runtime(e.to_string()))?);
        body.push('\n');
    }
    write(path, body)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut body = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    body.push('\n');
    write(path, body)
}

/// Objective columns of a front CSV written by [`front_csv`].
pub fn read_front_objectives(text: &str) -> Result<Vec<Vec<f64>>, CliError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Runtime("empty front CSV".into()))?;
    let cols: Vec<usize> = header
        .split(',')
        .enumerate()
        .filter(|(_, h)| h.starts_with('f'))
        .map(|(i, _)| i)
        .collect();
    lines
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            cols.iter()
                .map(|&c| {
                    fields
                        .get(c)
                        .and_then(|f| f.parse().ok())
                        .ok_or_else(|| CliError::Runtime(format!("malformed front CSV row `{line}`")))
                })
                .collect()
        })
        .collect()
}
