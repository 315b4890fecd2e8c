//! Decode reports in json-lines or tab-separated form.
//!
//! A report is one line per block the samples reach, followed by one summary
//! line. Rendering is a pure function of the decode outcome, so reruns on the
//! same input produce identical bytes.

use std::fmt::Write as _;
use std::str::FromStr;

use hstream_core::stream::{meets_threshold, width_bound, DecodeReport, StreamSamples};
use hstream_core::{Error, Fraction};
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ReportFormat {
    #[default]
    JsonLines,
    Tsv,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json-lines" | "jsonl" => Ok(ReportFormat::JsonLines),
            "tsv" => Ok(ReportFormat::Tsv),
            other => Err(format!("unknown report format {other:?} (expected json-lines or tsv)")),
        }
    }
}

/// How a decode attempt ended; each status has its own exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Recovered,
    /// Good blocks exist but the deepest one still has several candidates.
    Ambiguous,
    NoGoodBlocks,
    Inconsistent,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Recovered => "recovered",
            Status::Ambiguous => "ambiguous",
            Status::NoGoodBlocks => "no_good_blocks",
            Status::Inconsistent => "inconsistent",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Recovered => 0,
            Status::NoGoodBlocks => 2,
            Status::Inconsistent => 3,
            Status::Ambiguous => 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockRow {
    pub block: usize,
    pub samples: usize,
    pub fraction: Fraction,
    pub good: bool,
    /// Erasure list size before pruning, for good blocks.
    pub raw_candidates: Option<usize>,
    /// Candidates surviving prefix-consistency pruning, for good blocks.
    pub candidates: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub status: Status,
    pub delta: Fraction,
    pub width_bound: usize,
    pub blocks: Vec<BlockRow>,
    pub good_blocks: Vec<usize>,
    /// Candidates of the deepest good block, ascending.
    pub deepest: Vec<String>,
    pub recovered: Option<String>,
}

impl Report {
    pub fn from_decode(report: &DecodeReport, delta: Fraction) -> Self {
        let blocks = report
            .per_block_sample_fraction
            .iter()
            .map(|&(block, fraction)| {
                let level = report.tree.level(block);
                BlockRow {
                    block,
                    samples: (fraction * Fraction::from_integer(1 << block)).to_integer() as usize,
                    fraction,
                    good: level.is_some(),
                    raw_candidates: level.map(|l| l.raw_count),
                    candidates: level.map(|l| l.candidates.len()),
                }
            })
            .collect();
        let recovered = report.recovered.as_ref().map(ToString::to_string);
        Report {
            status: if recovered.is_some() { Status::Recovered } else { Status::Ambiguous },
            delta,
            width_bound: report.tree.width_bound,
            blocks,
            good_blocks: report.good_blocks.clone(),
            deepest: report.tree.deepest().map_or_else(Vec::new, |l| l.candidates.iter().map(ToString::to_string).collect()),
            recovered,
        }
    }

    /// A report for a failed decode, carrying the per-block sample counts.
    pub fn from_failure(samples: &StreamSamples, delta: Fraction, error: &Error) -> Option<Self> {
        let status = match error {
            Error::NoGoodBlocks => Status::NoGoodBlocks,
            Error::Inconsistent | Error::ConflictingSample { .. } => Status::Inconsistent,
            _ => return None,
        };
        let top = samples.horizon().checked_sub(1).map_or(0, |last| (u64::BITS - last.leading_zeros()) as usize);
        let blocks = (0..top)
            .map(|block| {
                let view = samples.block_samples(block);
                BlockRow {
                    block,
                    samples: view.len(),
                    fraction: Fraction::new(view.len() as u64, 1 << block),
                    good: status != Status::NoGoodBlocks && meets_threshold(view.informative_len(), block, delta),
                    raw_candidates: None,
                    candidates: None,
                }
            })
            .collect();
        Some(Report {
            status,
            delta,
            width_bound: width_bound(delta),
            blocks,
            good_blocks: Vec::new(),
            deepest: Vec::new(),
            recovered: None,
        })
    }

    /// The status line alone, for samples that could not be assembled.
    pub fn bare(status: Status, delta: Fraction) -> Self {
        Report {
            status,
            delta,
            width_bound: width_bound(delta),
            blocks: Vec::new(),
            good_blocks: Vec::new(),
            deepest: Vec::new(),
            recovered: None,
        }
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::JsonLines => self.render_json_lines(),
            ReportFormat::Tsv => self.render_tsv(),
        }
    }

    fn render_json_lines(&self) -> String {
        let mut out = String::new();
        for row in &self.blocks {
            let line = json!({
                "record": "block",
                "block": row.block,
                "samples": row.samples,
                "fraction": row.fraction.to_string(),
                "good": row.good,
                "raw_candidates": row.raw_candidates,
                "candidates": row.candidates,
            });
            writeln!(out, "{line}").unwrap();
        }
        let summary = json!({
            "record": "summary",
            "status": self.status.as_str(),
            "delta": self.delta.to_string(),
            "width_bound": self.width_bound,
            "good_blocks": self.good_blocks,
            "deepest_candidates": self.deepest,
            "recovered": self.recovered.as_ref().map_or(Value::Null, |r| Value::String(r.clone())),
        });
        writeln!(out, "{summary}").unwrap();
        out
    }

    fn render_tsv(&self) -> String {
        fn opt(v: Option<usize>) -> String {
            v.map_or_else(|| "-".to_owned(), |v| v.to_string())
        }
        fn list<T: ToString>(items: &[T]) -> String {
            if items.is_empty() {
                "-".to_owned()
            } else {
                items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
            }
        }
        let mut out = String::from("#block\tindex\tsamples\tfraction\tgood\traw_candidates\tcandidates\n");
        for row in &self.blocks {
            writeln!(
                out,
                "block\t{}\t{}\t{}\t{}\t{}\t{}",
                row.block,
                row.samples,
                row.fraction,
                row.good,
                opt(row.raw_candidates),
                opt(row.candidates)
            )
            .unwrap();
        }
        out.push_str("#summary\tstatus\tdelta\twidth_bound\tgood_blocks\tdeepest_candidates\trecovered\n");
        writeln!(
            out,
            "summary\t{}\t{}\t{}\t{}\t{}\t{}",
            self.status.as_str(),
            self.delta,
            self.width_bound,
            list(&self.good_blocks),
            list(&self.deepest),
            self.recovered.as_deref().unwrap_or("-")
        )
        .unwrap();
        out
    }
}
