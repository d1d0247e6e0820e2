//! Append-only discrepancy ledger: one JSON object per line, recording each
//! closed-form claim that an independent computation did not reproduce.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Mismatch where the closed form was already tagged as not applicable.
    KnownInapplicable,
    /// A printed expression differs from the pipeline value it is meant to equal.
    PrintedMismatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerRecord {
    pub claim_ref: String,
    pub closed_value: f64,
    pub oracle_value: f64,
    pub delta: f64,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

impl LedgerRecord {
    pub fn new(claim_ref: impl Into<String>, closed_value: f64, oracle_value: f64, verdict: Verdict) -> Self {
        Self {
            claim_ref: claim_ref.into(),
            closed_value,
            oracle_value,
            delta: (closed_value - oracle_value).abs(),
            verdict,
            detail: None,
        }
    }

    /// Pass when |closed − oracle| ≤ tol, else `on_fail`.
    pub fn adjudicate(
        claim_ref: impl Into<String>,
        closed_value: f64,
        oracle_value: f64,
        tol: f64,
        on_fail: Verdict,
    ) -> Self {
        let verdict = if (closed_value - oracle_value).abs() <= tol {
            Verdict::Pass
        } else {
            on_fail
        };
        Self::new(claim_ref, closed_value, oracle_value, verdict)
    }

    pub fn with_detail(mut self, detail: serde_json::Value) -> Self {
        self.detail = Some(detail);
        self
    }

    pub fn is_discrepancy(&self) -> bool {
        self.verdict != Verdict::Pass
    }
}

/// Keeps discrepancies in memory and, when file-backed, appends each one.
#[derive(Debug, Default)]
pub struct Ledger {
    records: Vec<LedgerRecord>,
    path: Option<PathBuf>,
}

impl Ledger {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn file_backed(path: impl Into<PathBuf>) -> Self {
        Self {
            records: Vec::new(),
            path: Some(path.into()),
        }
    }

    /// Records `rec` if it is a discrepancy; passes are dropped.
    pub fn submit(&mut self, rec: LedgerRecord) -> Result<bool> {
        if !rec.is_discrepancy() {
            return Ok(false);
        }
        if let Some(path) = &self.path {
            let mut f = OpenOptions::new().create(true).append(true).open(path)?;
            writeln!(f, "{}", serde_json::to_string(&rec)?)?;
        }
        self.records.push(rec);
        Ok(true)
    }

    pub fn records(&self) -> &[LedgerRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn count_for(&self, claim_ref: &str) -> usize {
        self.records.iter().filter(|r| r.claim_ref == claim_ref).count()
    }
}

#[derive(Debug, Clone, Default)]
pub struct LedgerLoad {
    pub records: Vec<LedgerRecord>,
    /// (1-based line number, parse error) for every skipped line.
    pub skipped: Vec<(usize, String)>,
}

pub fn read_ledger(path: &Path) -> Result<LedgerLoad> {
    let mut out = LedgerLoad::default();
    let reader = BufReader::new(File::open(path)?);
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<LedgerRecord>(&line) {
            Ok(rec) => out.records.push(rec),
            Err(e) => out.skipped.push((i + 1, e.to_string())),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct LedgerSummary {
    pub discrepancies: usize,
    pub warnings: usize,
    pub by_claim: BTreeMap<String, Vec<LedgerRecord>>,
}

pub fn summarize(load: &LedgerLoad) -> LedgerSummary {
    let mut by_claim: BTreeMap<String, Vec<LedgerRecord>> = BTreeMap::new();
    for rec in load.records.iter().filter(|r| r.is_discrepancy()) {
        by_claim.entry(rec.claim_ref.clone()).or_default().push(rec.clone());
    }
    LedgerSummary {
        discrepancies: by_claim.values().map(Vec::len).sum(),
        warnings: load.skipped.len(),
        by_claim,
    }
}

impl LedgerSummary {
    pub fn render(&self) -> String {
        let mut s = format!("{} discrepancies\n", self.discrepancies);
        for (claim, recs) in &self.by_claim {
            s.push_str(&format!("{claim}: {} entries\n", recs.len()));
            for r in recs {
                s.push_str(&format!(
                    "  {:?} closed={:.16e} oracle={:.16e} delta={:.3e}\n",
                    r.verdict, r.closed_value, r.oracle_value, r.delta
                ));
            }
        }
        if self.warnings > 0 {
            s.push_str(&format!("{} corrupt lines skipped\n", self.warnings));
        }
        s
    }
}
