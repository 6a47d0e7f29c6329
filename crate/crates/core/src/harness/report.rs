//! Per-round records and their CSV/JSON serializations.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact CSV header.
pub const CSV_HEADER: &str = "t,op,ground,value,opt,ratio,q_round,q_total";

/// Metrics of one checkpointed round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub t: usize,
    pub op: String,
    pub ground: usize,
    pub value: f64,
    pub opt: f64,
    pub ratio: f64,
    pub q_round: u64,
    pub q_total: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(Error::param(format!("unknown report format '{s}'"))),
        }
    }
}

pub fn to_csv(records: &[RoundRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.t, r.op, r.ground, r.value, r.opt, r.ratio, r.q_round, r.q_total
        );
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<RoundRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(Error::parse(1, format!("expected header '{CSV_HEADER}'"))),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(Error::parse(i + 1, format!("expected 8 fields, got {}", f.len())));
        }
        let bad = |what: &str| Error::parse(i + 1, format!("bad {what}"));
        out.push(RoundRecord {
            t: f[0].parse().map_err(|_| bad("t"))?,
            op: f[1].to_string(),
            ground: f[2].parse().map_err(|_| bad("ground"))?,
            value: f[3].parse().map_err(|_| bad("value"))?,
            opt: f[4].parse().map_err(|_| bad("opt"))?,
            ratio: f[5].parse().map_err(|_| bad("ratio"))?,
            q_round: f[6].parse().map_err(|_| bad("q_round"))?,
            q_total: f[7].parse().map_err(|_| bad("q_total"))?,
        });
    }
    Ok(out)
}

pub fn to_json(records: &[RoundRecord]) -> Result<String> {
    Ok(serde_json::to_string_pretty(records)?)
}

pub fn parse_json(text: &str) -> Result<Vec<RoundRecord>> {
    Ok(serde_json::from_str(text)?)
}

/// Writes `records` to `path` in the requested format.
pub fn emit_report(records: &[RoundRecord], format: ReportFormat, path: &Path) -> Result<()> {
    let body = match format {
        ReportFormat::Csv => to_csv(records),
        ReportFormat::Json => to_json(records)? + "\n",
    };
    std::fs::write(path, body)?;
    Ok(())
}

/// Path of the provenance sidecar written next to a report.
pub fn sidecar_path(report: &Path) -> PathBuf {
    let mut s = report.as_os_str().to_owned();
    s.push(".config");
    PathBuf::from(s)
}
