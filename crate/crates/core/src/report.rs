//! JSON Lines observability reports and their summaries.
//!
//! A report holds one line per trial followed by one summary line per
//! campaign:
//!
//! ```text
//! {"schema_version":"1","property":"finite_set:bool","status":"passed","representation":"(mem 3 (insert 3 (empty)))","features":{"depth":3,"size":3,"num_seq":0},"seed":123,"trial":4}
//! {"type":"summary","campaign":"finite_set:listset~bstset","total":1000,"failures":0,"trials_to_first_failure":null,"seed":7}
//! ```
//!
//! Bench output carries summary lines only, one per run.

use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::{CampaignResult, RunSummary, TrialRecord};

pub const SCHEMA_VERSION: &str = "1";

/// Depth histogram buckets: 1..=9 and "10+".
pub const DEPTH_BUCKETS: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Features {
    pub depth: u64,
    pub size: u64,
    pub num_seq: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportLine {
    pub schema_version: String,
    pub property: String,
    pub status: String,
    pub representation: String,
    pub features: Features,
    pub seed: u64,
    pub trial: u64,
}

impl ReportLine {
    pub fn from_record(signature: &str, r: &TrialRecord) -> Self {
        ReportLine {
            schema_version: SCHEMA_VERSION.to_string(),
            property: format!("{signature}:{}", r.observable_type),
            status: r.status.as_str().to_string(),
            representation: r.expr_text.clone(),
            features: Features { depth: r.depth as u64, size: r.size as u64, num_seq: r.num_seq as u64 },
            seed: r.seed,
            trial: r.trial_index,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryLine {
    #[serde(rename = "type")]
    pub kind: String,
    pub campaign: String,
    pub total: u64,
    pub failures: u64,
    pub trials_to_first_failure: Option<u64>,
    pub seed: u64,
}

impl SummaryLine {
    pub fn new(campaign: &str, run: &RunSummary) -> Self {
        SummaryLine {
            kind: "summary".to_string(),
            campaign: campaign.to_string(),
            total: run.total_trials,
            failures: run.failures,
            trials_to_first_failure: run.trials_to_first_failure,
            seed: run.seed,
        }
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("write failed after {offset} bytes: {source}")]
    Write { offset: u64, source: io::Error },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

/// Counts bytes accepted by the inner writer.
struct Counting<W> {
    inner: W,
    written: u64,
}

impl<W: Write> Write for Counting<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.written += n as u64;
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

fn write_json_line<W: Write, T: Serialize>(out: &mut Counting<W>, value: &T) -> Result<(), ReportError> {
    let mut line = serde_json::to_vec(value).expect("report lines serialize");
    line.push(b'\n');
    out.write_all(&line).map_err(|source| ReportError::Write { offset: out.written, source })
}

/// Write every trial of `result` in trial order, then its summary line.
pub fn emit_campaign<W: Write>(result: &CampaignResult, sink: W) -> Result<(), ReportError> {
    let mut out = Counting { inner: sink, written: 0 };
    for r in &result.records {
        write_json_line(&mut out, &ReportLine::from_record(&result.signature, r))?;
    }
    write_json_line(&mut out, &SummaryLine::new(&result.label, &result.summary()))?;
    out.flush().map_err(|source| ReportError::Write { offset: out.written, source })
}

/// Write summary lines only, as bench mode does.
pub fn emit_summaries<W: Write>(campaign: &str, runs: &[RunSummary], sink: W) -> Result<(), ReportError> {
    let mut out = Counting { inner: sink, written: 0 };
    for run in runs {
        write_json_line(&mut out, &SummaryLine::new(campaign, run))?;
    }
    out.flush().map_err(|source| ReportError::Write { offset: out.written, source })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParsedLine {
    Trial(ReportLine),
    Summary(SummaryLine),
}

pub fn parse_report(text: &str) -> Result<Vec<ParsedLine>, ReportError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let malformed = |e: serde_json::Error| ReportError::Malformed { line: i + 1, message: e.to_string() };
        let value: serde_json::Value = serde_json::from_str(raw).map_err(malformed)?;
        let parsed = if value.get("type").and_then(|t| t.as_str()) == Some("summary") {
            ParsedLine::Summary(serde_json::from_value(value).map_err(malformed)?)
        } else {
            ParsedLine::Trial(serde_json::from_value(value).map_err(malformed)?)
        };
        out.push(parsed);
    }
    Ok(out)
}

/// Trials-to-failure statistics over the runs of one campaign label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FailureStats {
    pub campaign: String,
    pub runs: u64,
    pub detected: u64,
    pub min: Option<u64>,
    /// Rounded to the nearest integer, halves up.
    pub mean: Option<u64>,
    pub max: Option<u64>,
}

impl FailureStats {
    pub fn from_hits(campaign: &str, runs: u64, hits: &[u64]) -> Self {
        let n = hits.len() as u64;
        let sum: u64 = hits.iter().sum();
        FailureStats {
            campaign: campaign.to_string(),
            runs,
            detected: n,
            min: hits.iter().copied().min(),
            mean: (n > 0).then(|| (2 * sum + n) / (2 * n)),
            max: hits.iter().copied().max(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PropertyCounts {
    pub passed: u64,
    pub failed: u64,
    pub harness_bug: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Summary {
    /// In order of first appearance.
    pub campaigns: Vec<FailureStats>,
    pub properties: Vec<(String, PropertyCounts)>,
    pub depth_histogram: [u64; DEPTH_BUCKETS],
}

pub fn summarize_lines(lines: &[ParsedLine]) -> Summary {
    let mut groups: Vec<(String, u64, Vec<u64>)> = Vec::new();
    let mut properties: Vec<(String, PropertyCounts)> = Vec::new();
    let mut depth_histogram = [0u64; DEPTH_BUCKETS];
    for line in lines {
        match line {
            ParsedLine::Summary(s) => {
                let idx = match groups.iter().position(|(c, _, _)| *c == s.campaign) {
                    Some(i) => i,
                    None => {
                        groups.push((s.campaign.clone(), 0, Vec::new()));
                        groups.len() - 1
                    }
                };
                groups[idx].1 += 1;
                groups[idx].2.extend(s.trials_to_first_failure);
            }
            ParsedLine::Trial(t) => {
                let bucket = (t.features.depth.max(1) as usize).min(DEPTH_BUCKETS) - 1;
                depth_histogram[bucket] += 1;
                let idx = match properties.iter().position(|(p, _)| *p == t.property) {
                    Some(i) => i,
                    None => {
                        properties.push((t.property.clone(), PropertyCounts::default()));
                        properties.len() - 1
                    }
                };
                let counts = &mut properties[idx].1;
                match t.status.as_str() {
                    "passed" => counts.passed += 1,
                    "failed" => counts.failed += 1,
                    _ => counts.harness_bug += 1,
                }
            }
        }
    }
    Summary {
        campaigns: groups.iter().map(|(c, runs, hits)| FailureStats::from_hits(c, *runs, hits)).collect(),
        properties,
        depth_histogram,
    }
}

/// Parse a report and summarize it.
pub fn summarize(text: &str) -> Result<Summary, ReportError> {
    Ok(summarize_lines(&parse_report(text)?))
}

/// Column header with its Min, Mean and Max cells.
pub type TableColumn = (String, Option<u64>, Option<u64>, Option<u64>);

/// Min/Mean/Max rows with one column per entry.
pub fn render_failure_table(columns: &[TableColumn]) -> String {
    let cell = |v: Option<u64>| v.map_or_else(|| "-".to_string(), |v| v.to_string());
    let mut widths: Vec<usize> = columns.iter().map(|(h, ..)| h.len()).collect();
    for (w, (_, a, b, c)) in widths.iter_mut().zip(columns) {
        *w = (*w).max(cell(*a).len()).max(cell(*b).len()).max(cell(*c).len());
    }
    let mut out = String::new();
    let mut row = |label: &str, cells: Vec<String>| {
        out.push_str(&format!("{label:<6}"));
        for (c, w) in cells.iter().zip(&widths) {
            out.push_str(&format!(" | {c:>w$}"));
        }
        out.push('\n');
    };
    row("", columns.iter().map(|(h, ..)| h.clone()).collect());
    row("Min", columns.iter().map(|c| cell(c.1)).collect());
    row("Mean", columns.iter().map(|c| cell(c.2)).collect());
    row("Max", columns.iter().map(|c| cell(c.3)).collect());
    out
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.campaigns.is_empty() {
            writeln!(f, "trials to first failure")?;
            let cols: Vec<_> = self.campaigns.iter().map(|c| (c.campaign.clone(), c.min, c.mean, c.max)).collect();
            f.write_str(&render_failure_table(&cols))?;
            for c in &self.campaigns {
                writeln!(f, "  {}: detected in {}/{} runs", c.campaign, c.detected, c.runs)?;
            }
        }
        if !self.properties.is_empty() {
            writeln!(f, "properties")?;
            for (p, c) in &self.properties {
                writeln!(f, "  {p}: {} passed, {} failed, {} harness bugs", c.passed, c.failed, c.harness_bug)?;
            }
        }
        writeln!(f, "depth histogram")?;
        for (i, n) in self.depth_histogram.iter().enumerate() {
            let label = if i + 1 == DEPTH_BUCKETS { format!("{}+", DEPTH_BUCKETS) } else { (i + 1).to_string() };
            writeln!(f, "  {label:>3}: {n}")?;
        }
        Ok(())
    }
}
