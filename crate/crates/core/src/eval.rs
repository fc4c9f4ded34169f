//! Micro-averaged precision/recall/F1, split averaging, learning curves and
//! report rendering (TSV, JSON, CSV).
//!
//! Precision is reported as 0 when nothing was predicted, and F1 is 0 when
//! precision and recall are both 0.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// (relation, key). The key is an instance id in instance mode, or the
/// output of [`rule_key`] in rule mode.
pub type GoldKey = (String, String);

pub const P_ZERO_NOTE: &str = "precision is reported as 0 when a method predicts nothing";

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("reports disagree on configuration: {0}")]
    Mismatch(String),
    #[error("nothing to aggregate")]
    Empty,
}

/// Document-scoped key for an unordered mention pair.
pub fn rule_key(document: &str, a: &str, b: &str) -> String {
    let (x, y) = if a <= b { (a, b) } else { (b, a) };
    format!("{document}\t{x}\t{y}")
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

impl Counts {
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        f1(self.precision(), self.recall())
    }

    pub fn scores(&self) -> Scores {
        Scores {
            precision: self.precision(),
            recall: self.recall(),
            f1: self.f1(),
        }
    }

    pub fn gold(&self) -> usize {
        self.tp + self.fn_
    }
}

impl std::ops::Add for Counts {
    type Output = Counts;
    fn add(self, o: Counts) -> Counts {
        Counts {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
        }
    }
}

pub fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Scores {
    fn mean(xs: &[Scores]) -> Scores {
        Scores {
            precision: mean(xs.iter().map(|s| s.precision)),
            recall: mean(xs.iter().map(|s| s.recall)),
            f1: mean(xs.iter().map(|s| s.f1)),
        }
    }
}

/// Arithmetic mean that returns equal inputs unchanged, so averaging
/// identical splits does not pick up rounding noise.
fn mean<I: Iterator<Item = f64>>(xs: I) -> f64 {
    let xs: Vec<f64> = xs.collect();
    match xs.first() {
        None => 0.0,
        Some(&x) if xs.iter().all(|&y| y == x) => x,
        Some(_) => xs.iter().sum::<f64>() / xs.len() as f64,
    }
}

/// Exact-match scoring per relation. Repeated keys on either side count once;
/// the second value is the number of repeats dropped from `predictions`.
pub fn score(predictions: &[GoldKey], gold: &[GoldKey]) -> (BTreeMap<String, Counts>, usize) {
    let pred: BTreeSet<&GoldKey> = predictions.iter().collect();
    let dups = predictions.len() - pred.len();
    if dups > 0 {
        log::warn!("{dups} duplicate prediction keys ignored");
    }
    let gold: BTreeSet<&GoldKey> = gold.iter().collect();
    let mut out: BTreeMap<String, Counts> = BTreeMap::new();
    for k in &pred {
        let c = out.entry(k.0.clone()).or_default();
        if gold.contains(k) {
            c.tp += 1;
        } else {
            c.fp += 1;
        }
    }
    for k in &gold {
        if !pred.contains(k) {
            out.entry(k.0.clone()).or_default().fn_ += 1;
        }
    }
    (out, dups)
}

/// Sums counts across relation types.
pub fn micro_aggregate<'a, I: IntoIterator<Item = &'a Counts>>(counts: I) -> Counts {
    counts.into_iter().fold(Counts::default(), |a, &b| a + b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KeyMode {
    Rule,
    Instance,
}

/// What produced a report. Reports are only averaged or tabulated together
/// when these agree (split aside).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub method: String,
    pub mode: KeyMode,
    #[serde(default)]
    pub rho: Option<String>,
    #[serde(default)]
    pub feature_kind: Option<String>,
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default)]
    pub embedding: Option<String>,
    #[serde(default)]
    pub model: Option<String>,
}

impl Fingerprint {
    pub fn rule(rho: &str) -> Self {
        Fingerprint {
            method: "wbc".into(),
            mode: KeyMode::Rule,
            rho: Some(rho.to_string()),
            feature_kind: None,
            mu: None,
            embedding: None,
            model: None,
        }
    }

    /// Short column label such as `wbc rho=5` or `svm-linear BoC mu=0.9`.
    pub fn label(&self) -> String {
        let mut s = self.model.clone().unwrap_or_else(|| self.method.clone());
        if let Some(r) = &self.rho {
            let _ = write!(s, " rho={r}");
        }
        if let Some(k) = &self.feature_kind {
            let _ = write!(s, " {k}");
        }
        if let Some(mu) = self.mu {
            let _ = write!(s, " mu={mu}");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationRow {
    pub relation: String,
    /// Gold positives scored (mean over splits for averaged reports).
    pub count: usize,
    pub counts: Counts,
    pub scores: Scores,
    #[serde(default)]
    pub per_split: Vec<Scores>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub fingerprint: Fingerprint,
    pub splits: Vec<u8>,
    pub relations: Vec<RelationRow>,
    pub overall: RelationRow,
}

impl EvalReport {
    pub fn from_counts(fingerprint: Fingerprint, split: u8, per_type: &BTreeMap<String, Counts>) -> Self {
        let row = |relation: &str, c: Counts| RelationRow {
            relation: relation.to_string(),
            count: c.gold(),
            counts: c,
            scores: c.scores(),
            per_split: vec![c.scores()],
        };
        let relations: Vec<RelationRow> = per_type.iter().map(|(r, &c)| row(r, c)).collect();
        let overall = row("Overall", micro_aggregate(per_type.values()));
        EvalReport {
            fingerprint,
            splits: vec![split],
            relations,
            overall,
        }
    }

    pub fn relation(&self, name: &str) -> Option<&RelationRow> {
        self.relations.iter().find(|r| r.relation == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Mean P/R/F1 per cell over single-split reports; counts are summed and
/// per-split scores kept.
pub fn average_over_splits(reports: &[EvalReport]) -> Result<EvalReport, EvalError> {
    let first = reports.first().ok_or(EvalError::Empty)?;
    for r in &reports[1..] {
        if r.fingerprint != first.fingerprint {
            return Err(EvalError::Mismatch(format!(
                "{:?} vs {:?}",
                first.fingerprint, r.fingerprint
            )));
        }
    }
    let names: BTreeSet<&str> = reports
        .iter()
        .flat_map(|r| r.relations.iter().map(|x| x.relation.as_str()))
        .collect();
    let combine = |rows: Vec<Option<&RelationRow>>, name: &str| {
        let per_split: Vec<Scores> = rows.iter().map(|r| r.map(|r| r.scores).unwrap_or_default()).collect();
        let counts = micro_aggregate(rows.iter().flatten().map(|r| &r.counts));
        let total: usize = rows.iter().flatten().map(|r| r.count).sum();
        RelationRow {
            relation: name.to_string(),
            count: (total as f64 / rows.len() as f64).round() as usize,
            counts,
            scores: Scores::mean(&per_split),
            per_split,
        }
    };
    let relations = names
        .iter()
        .map(|n| combine(reports.iter().map(|r| r.relation(n)).collect(), n))
        .collect();
    let overall = combine(reports.iter().map(|r| Some(&r.overall)).collect(), "Overall");
    Ok(EvalReport {
        fingerprint: first.fingerprint.clone(),
        splits: reports.iter().flat_map(|r| r.splits.iter().copied()).collect(),
        relations,
        overall,
    })
}

/// Table with one F1 column per report: `relation\tcount\t<labels...>`, one
/// row per relation seen in any report, then the overall row. Values have
/// two decimals; missing cells are empty.
pub fn render_tsv(columns: &[(String, EvalReport)]) -> String {
    let mut names: Vec<&str> = Vec::new();
    for (_, r) in columns {
        for row in &r.relations {
            if !names.contains(&row.relation.as_str()) {
                names.push(&row.relation);
            }
        }
    }
    names.sort_unstable();
    let mut out = String::from("relation\tcount");
    for (label, _) in columns {
        let _ = write!(out, "\t{label}");
    }
    out.push('\n');
    let line = |out: &mut String, name: &str, pick: &dyn Fn(&EvalReport) -> Option<&RelationRow>| {
        let count = columns.iter().find_map(|(_, r)| pick(r)).map(|r| r.count).unwrap_or(0);
        let _ = write!(out, "{name}\t{count}");
        for (_, r) in columns {
            match pick(r) {
                Some(row) => {
                    let _ = write!(out, "\t{:.2}", row.scores.f1);
                }
                None => out.push('\t'),
            }
        }
        out.push('\n');
    };
    for n in &names {
        line(&mut out, n, &|r: &EvalReport| r.relation(n));
    }
    line(&mut out, "Overall", &|r: &EvalReport| Some(&r.overall));
    let _ = writeln!(out, "# F1 scores; {P_ZERO_NOTE}");
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// 0.1 .. 0.9
    pub fraction: f64,
    pub train_size: usize,
    pub feature_kind: String,
    /// `None` when the point could not be trained (one class only).
    pub f1: Option<f64>,
    #[serde(default)]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub relation: String,
    pub model: String,
    /// Hash of the test-set ids shared by every point.
    pub test_hash: String,
    pub points: Vec<CurvePoint>,
}

impl LearningCurve {
    pub fn series(&self, kind: &str) -> Vec<&CurvePoint> {
        self.points.iter().filter(|p| p.feature_kind == kind).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("fraction,train_size,feature_kind,f1\n");
        for p in &self.points {
            let f1 = p.f1.map(|v| format!("{v}")).unwrap_or_default();
            let _ = writeln!(out, "{:.1},{},{},{}", p.fraction, p.train_size, p.feature_kind, f1);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(r: &str, k: &str) -> GoldKey {
        (r.to_string(), k.to_string())
    }

    #[test]
    fn counting_examples() {
        let gold = vec![key("A", "1"), key("A", "2"), key("A", "3")];
        let pred = vec![key("A", "1"), key("A", "2"), key("A", "4")];
        let (c, _) = score(&pred, &gold);
        let a = c["A"];
        assert_eq!(a, Counts { tp: 2, fp: 1, fn_: 1 });
        assert!((a.precision() - 2.0 / 3.0).abs() < 1e-15);
        assert!((a.f1() - 2.0 / 3.0).abs() < 1e-15);

        let (c, _) = score(&[], &gold);
        assert_eq!(c["A"].scores(), Scores::default());

        let (c, _) = score(&gold, &gold);
        assert_eq!(c["A"].f1(), 1.0);
    }

    #[test]
    fn micro_over_two_types() {
        let a = Counts { tp: 1, fp: 0, fn_: 1 };
        let b = Counts { tp: 1, fp: 1, fn_: 0 };
        let m = micro_aggregate([&a, &b]);
        assert!((m.precision() - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.recall() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(micro_aggregate([&Counts::default()]).f1(), 0.0);
    }

    #[test]
    fn duplicate_predictions_count_once() {
        let gold = vec![key("A", "1")];
        let (c, d) = score(&[key("A", "1"), key("A", "1")], &gold);
        assert_eq!((c["A"].tp, d), (1, 1));
    }
}
