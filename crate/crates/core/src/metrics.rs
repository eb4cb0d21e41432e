//! Binary classification metrics: accuracy, per-class precision / recall /
//! F1, macro-F1, AUROC and binned expected calibration error.
//!
//! Conventions:
//! - predicted label is 1 iff `prob_positive >= threshold` (default 0.5)
//! - any zero denominator in precision, recall or F1 yields 0
//! - ECE uses top-class confidence `max(p, 1 - p)` and the argmax label,
//!   independent of the accuracy threshold; bins are `[i/B, (i+1)/B)` with
//!   the last bin closed at 1.0

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

use crate::imaging::DomainLabel;

pub const DEFAULT_BINS: usize = 15;
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("no prediction records")]
    EmptyInput,
    #[error("AUROC needs at least one positive and one negative record")]
    SingleClass,
    #[error("invalid record: {0}")]
    InvalidRecord(String),
    #[error("bin count must be positive")]
    InvalidBins,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub true_label: u8,
    pub prob_positive: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainLabel>,
}

impl PredictionRecord {
    pub fn new(true_label: u8, prob_positive: f64) -> Result<Self, MetricsError> {
        let r = Self {
            true_label,
            prob_positive,
            domain: None,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn with_domain(mut self, domain: DomainLabel) -> Self {
        self.domain = Some(domain);
        self
    }

    pub fn validate(&self) -> Result<(), MetricsError> {
        if self.true_label > 1 {
            return Err(MetricsError::InvalidRecord(format!(
                "true_label {} is not 0 or 1",
                self.true_label
            )));
        }
        if !(0.0..=1.0).contains(&self.prob_positive) {
            return Err(MetricsError::InvalidRecord(format!(
                "prob_positive {} outside [0, 1]",
                self.prob_positive
            )));
        }
        Ok(())
    }

    pub fn predicted(&self, threshold: f64) -> u8 {
        u8::from(self.prob_positive >= threshold)
    }
}

fn non_empty(records: &[PredictionRecord]) -> Result<(), MetricsError> {
    if records.is_empty() {
        Err(MetricsError::EmptyInput)
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fn_: usize,
    pub fp: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn from_records(records: &[PredictionRecord], threshold: f64) -> Self {
        let mut cm = Self::default();
        for r in records {
            match (r.true_label, r.predicted(threshold)) {
                (1, 1) => cm.tp += 1,
                (1, _) => cm.fn_ += 1,
                (_, 1) => cm.fp += 1,
                _ => cm.tn += 1,
            }
        }
        cm
    }

    pub fn total(&self) -> usize {
        self.tp + self.fn_ + self.fp + self.tn
    }

    /// Per-class statistics, index 0 = negative class, 1 = positive class.
    pub fn per_class(&self) -> [ClassStats; 2] {
        [
            ClassStats::from_counts(0, self.tn, self.fn_, self.fp),
            ClassStats::from_counts(1, self.tp, self.fp, self.fn_),
        ]
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub class: u8,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

impl ClassStats {
    /// `hits` correct predictions of this class, `false_pos` other-class
    /// records predicted as this class, `misses` records of this class
    /// predicted as the other.
    fn from_counts(class: u8, hits: usize, false_pos: usize, misses: usize) -> Self {
        Self {
            class,
            precision: ratio(hits, hits + false_pos),
            recall: ratio(hits, hits + misses),
            f1: ratio(2 * hits, 2 * hits + false_pos + misses),
            support: hits + misses,
        }
    }
}

pub fn accuracy(records: &[PredictionRecord], threshold: f64) -> Result<f64, MetricsError> {
    non_empty(records)?;
    let correct = records
        .iter()
        .filter(|r| r.predicted(threshold) == r.true_label)
        .count();
    Ok(correct as f64 / records.len() as f64)
}

pub fn macro_f1(records: &[PredictionRecord], threshold: f64) -> Result<f64, MetricsError> {
    non_empty(records)?;
    let [neg, pos] = ConfusionMatrix::from_records(records, threshold).per_class();
    Ok((neg.f1 + pos.f1) / 2.0)
}

/// Mann-Whitney AUROC via midranks. Equal scores count as half-concordant.
pub fn auroc(records: &[PredictionRecord]) -> Result<f64, MetricsError> {
    let n_pos = records.iter().filter(|r| r.true_label == 1).count();
    let n_neg = records.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(MetricsError::SingleClass);
    }
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| records[a].prob_positive.total_cmp(&records[b].prob_positive));

    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let score = records[order[i]].prob_positive;
        let mut j = i;
        while j < order.len() && records[order[j]].prob_positive == score {
            j += 1;
        }
        // ranks i+1 ..= j share their mean
        let mid = (i + 1 + j) as f64 / 2.0;
        let positives = order[i..j].iter().filter(|&&k| records[k].true_label == 1).count();
        rank_sum_pos += mid * positives as f64;
        i = j;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// One reliability-diagram bin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub mean_confidence: f64,
    pub accuracy: f64,
}

pub fn confidence(r: &PredictionRecord) -> f64 {
    r.prob_positive.max(1.0 - r.prob_positive)
}

pub fn calibration_bins(
    records: &[PredictionRecord],
    bins: usize,
) -> Result<Vec<CalibrationBin>, MetricsError> {
    non_empty(records)?;
    if bins == 0 {
        return Err(MetricsError::InvalidBins);
    }
    let mut count = vec![0usize; bins];
    let mut conf_sum = vec![0.0; bins];
    let mut correct = vec![0usize; bins];
    for r in records {
        let c = confidence(r);
        let b = ((c * bins as f64).floor() as usize).min(bins - 1);
        count[b] += 1;
        conf_sum[b] += c;
        if r.predicted(DEFAULT_THRESHOLD) == r.true_label {
            correct[b] += 1;
        }
    }
    Ok((0..bins)
        .map(|b| CalibrationBin {
            lower: b as f64 / bins as f64,
            upper: (b + 1) as f64 / bins as f64,
            count: count[b],
            mean_confidence: if count[b] == 0 { 0.0 } else { conf_sum[b] / count[b] as f64 },
            accuracy: ratio(correct[b], count[b]),
        })
        .collect())
}

/// `sum_b (n_b / N) |acc_b - conf_b|`; empty bins contribute nothing.
pub fn ece(records: &[PredictionRecord], bins: usize) -> Result<f64, MetricsError> {
    let n = records.len() as f64;
    Ok(calibration_bins(records, bins)?
        .iter()
        .filter(|b| b.count > 0)
        .map(|b| b.count as f64 / n * (b.accuracy - b.mean_confidence).abs())
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedStats {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub records: usize,
    pub threshold: f64,
    pub bins: usize,
    pub accuracy: f64,
    pub macro_f1: f64,
    /// Absent when the record set holds a single class.
    pub auroc: Option<f64>,
    pub ece: f64,
    pub confusion: ConfusionMatrix,
    pub per_class: Vec<ClassStats>,
    pub macro_avg: AveragedStats,
    pub weighted_avg: AveragedStats,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_domain: Option<BTreeMap<DomainLabel, MetricsReport>>,
}

fn report_flat(records: &[PredictionRecord], threshold: f64, bins: usize) -> Result<MetricsReport, MetricsError> {
    non_empty(records)?;
    let confusion = ConfusionMatrix::from_records(records, threshold);
    let per_class = confusion.per_class();
    let n = records.len();
    let avg = |f: fn(&ClassStats) -> f64| (f(&per_class[0]) + f(&per_class[1])) / 2.0;
    let wavg = |f: fn(&ClassStats) -> f64| {
        per_class.iter().map(|c| f(c) * c.support as f64).sum::<f64>() / n as f64
    };
    Ok(MetricsReport {
        records: n,
        threshold,
        bins,
        accuracy: accuracy(records, threshold)?,
        macro_f1: avg(|c| c.f1),
        auroc: match auroc(records) {
            Ok(v) => Some(v),
            Err(MetricsError::SingleClass) => None,
            Err(e) => return Err(e),
        },
        ece: ece(records, bins)?,
        confusion,
        per_class: per_class.to_vec(),
        macro_avg: AveragedStats {
            precision: avg(|c| c.precision),
            recall: avg(|c| c.recall),
            f1: avg(|c| c.f1),
            support: n,
        },
        weighted_avg: AveragedStats {
            precision: wavg(|c| c.precision),
            recall: wavg(|c| c.recall),
            f1: wavg(|c| c.f1),
            support: n,
        },
        per_domain: None,
    })
}

/// Full report; per-domain sub-reports are added when any record carries a
/// domain label.
pub fn report(records: &[PredictionRecord], threshold: f64, bins: usize) -> Result<MetricsReport, MetricsError> {
    for r in records {
        r.validate()?;
    }
    let mut out = report_flat(records, threshold, bins)?;
    let mut by_domain: BTreeMap<DomainLabel, Vec<PredictionRecord>> = BTreeMap::new();
    for r in records {
        if let Some(d) = r.domain {
            by_domain.entry(d).or_default().push(r.clone());
        }
    }
    if !by_domain.is_empty() {
        out.per_domain = Some(
            by_domain
                .into_iter()
                .map(|(d, recs)| Ok((d, report_flat(&recs, threshold, bins)?)))
                .collect::<Result<_, MetricsError>>()?,
        );
    }
    Ok(out)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"))
}

impl MetricsReport {
    /// Aligned text: classification report, aggregate line, and per-domain
    /// table when available.
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<14}{:>10}{:>10}{:>10}{:>10}", "", "precision", "recall", "f1-score", "support");
        let names = ["normal (0)", "abnormal (1)"];
        for (c, name) in self.per_class.iter().zip(names) {
            let _ = writeln!(
                s,
                "{:<14}{:>10.2}{:>10.2}{:>10.2}{:>10}",
                name, c.precision, c.recall, c.f1, c.support
            );
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<14}{:>10}{:>10}{:>10.2}{:>10}", "accuracy", "", "", self.accuracy, self.records);
        for (name, a) in [("macro avg", &self.macro_avg), ("weighted avg", &self.weighted_avg)] {
            let _ = writeln!(
                s,
                "{:<14}{:>10.2}{:>10.2}{:>10.2}{:>10}",
                name, a.precision, a.recall, a.f1, a.support
            );
        }
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "{:<10}{:>10}{:>10}{:>10}{:>10}",
            "", "Accuracy", "Macro-F1", "AUROC", "ECE"
        );
        let _ = writeln!(
            s,
            "{:<10}{:>10.4}{:>10.4}{:>10}{:>10.4}",
            "overall",
            self.accuracy,
            self.macro_f1,
            fmt_opt(self.auroc),
            self.ece
        );
        if let Some(domains) = &self.per_domain {
            let _ = writeln!(s);
            let _ = writeln!(
                s,
                "{:<3}{:<10}{:>10}{:>10}{:>10}{:>10}",
                "d", "Domain", "Accuracy", "Macro-F1", "AUROC", "ECE"
            );
            for (d, r) in domains {
                let _ = writeln!(
                    s,
                    "{:<3}{:<10}{:>10.4}{:>10.4}{:>10}{:>10.4}",
                    d.code(),
                    d.name(),
                    r.accuracy,
                    r.macro_f1,
                    fmt_opt(r.auroc),
                    r.ece
                );
            }
        }
        s
    }
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    true_label: u8,
    prob_positive: f64,
    #[serde(default)]
    domain: Option<String>,
}

/// Parse `true_label,prob_positive[,domain]` CSV with a header row. Domain
/// may be a name (`blur`) or code (`1`).
pub fn read_records_csv(text: &str) -> Result<Vec<PredictionRecord>, MetricsError> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    rdr.deserialize::<CsvRow>()
        .enumerate()
        .map(|(i, row)| {
            let row = row.map_err(|e| MetricsError::InvalidRecord(format!("row {}: {e}", i + 1)))?;
            let domain = match row.domain.as_deref().map(str::trim) {
                None | Some("") => None,
                Some(d) => Some(
                    d.parse::<DomainLabel>()
                        .map_err(|e| MetricsError::InvalidRecord(format!("row {}: {e}", i + 1)))?,
                ),
            };
            let rec = PredictionRecord {
                true_label: row.true_label,
                prob_positive: row.prob_positive,
                domain,
            };
            rec.validate()?;
            Ok(rec)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(y: u8, p: f64) -> PredictionRecord {
        PredictionRecord::new(y, p).unwrap()
    }

    #[test]
    fn accuracy_cases() {
        assert_eq!(accuracy(&[rec(1, 0.9), rec(0, 0.1)], 0.5).unwrap(), 1.0);
        assert_eq!(accuracy(&[rec(1, 0.9), rec(0, 0.8)], 0.5).unwrap(), 0.5);
        assert_eq!(accuracy(&[rec(1, 0.5)], 0.5).unwrap(), 1.0);
        assert_eq!(accuracy(&[], 0.5), Err(MetricsError::EmptyInput));
    }

    fn from_confusion(tp: usize, fn_: usize, fp: usize, tn: usize) -> Vec<PredictionRecord> {
        let mut v = Vec::new();
        v.extend(std::iter::repeat_n(rec(1, 0.9), tp));
        v.extend(std::iter::repeat_n(rec(1, 0.1), fn_));
        v.extend(std::iter::repeat_n(rec(0, 0.9), fp));
        v.extend(std::iter::repeat_n(rec(0, 0.1), tn));
        v
    }

    #[test]
    fn cough_table_layout() {
        let records = from_confusion(43, 66, 54, 398);
        let r = report(&records, 0.5, 15).unwrap();
        let pos = r.per_class[1];
        assert_eq!(format!("{:.2}", pos.precision), "0.44");
        assert_eq!(format!("{:.2}", pos.recall), "0.39");
        assert_eq!(pos.support, 109);
        assert_eq!(r.per_class[0].support, 452);
        assert_eq!(format!("{:.2}", r.macro_f1), "0.64");
        assert_eq!(format!("{:.2}", r.accuracy), "0.79");
        let text = r.render_text();
        assert!(text.contains("abnormal (1)"));
        assert!(text.contains("macro avg"));
    }

    #[test]
    fn degenerate_predictor() {
        let mut records = vec![rec(0, 0.1); 10];
        records.extend(vec![rec(1, 0.1); 10]);
        // class 0: P = 0.5, R = 1, F1 = 2/3; class 1 never predicted
        let f = macro_f1(&records, 0.5).unwrap();
        assert!((f - (2.0 / 3.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn auroc_cases() {
        assert_eq!(auroc(&[rec(0, 0.1), rec(0, 0.2), rec(1, 0.8), rec(1, 0.9)]).unwrap(), 1.0);
        assert_eq!(auroc(&[rec(0, 0.4), rec(1, 0.4), rec(1, 0.4)]).unwrap(), 0.5);
        assert_eq!(auroc(&[rec(1, 0.4)]), Err(MetricsError::SingleClass));
    }

    #[test]
    fn ece_cases() {
        assert_eq!(ece(&[rec(1, 1.0), rec(0, 0.0)], 15).unwrap(), 0.0);
        // one bin: confidences 0.9, accuracy 0.6
        let mut records = vec![rec(1, 0.9); 6];
        records.extend(vec![rec(0, 0.9); 4]);
        assert!((ece(&records, 15).unwrap() - 0.3).abs() < 1e-12);
        // two equal bins with gaps 0.1 and 0.3
        let mut records = vec![rec(1, 0.7), rec(1, 0.7), rec(1, 0.7), rec(1, 0.7), rec(0, 0.7)];
        records.extend([rec(1, 0.9), rec(1, 0.9), rec(1, 0.9), rec(0, 0.9), rec(0, 0.9)]);
        assert!((ece(&records, 15).unwrap() - 0.2).abs() < 1e-12);
        assert_eq!(ece(&[], 15), Err(MetricsError::EmptyInput));
        assert_eq!(ece(&[rec(1, 0.9)], 0), Err(MetricsError::InvalidBins));
    }

    #[test]
    fn per_domain_rows() {
        let mut records = Vec::new();
        for d in DomainLabel::ALL {
            records.push(rec(1, 0.8).with_domain(d));
            records.push(rec(0, 0.3).with_domain(d));
        }
        let r = report(&records, 0.5, 15).unwrap();
        let domains = r.per_domain.as_ref().unwrap();
        assert_eq!(domains.keys().copied().collect::<Vec<_>>(), DomainLabel::ALL.to_vec());
        let text = r.render_text();
        let header = text.lines().find(|l| l.starts_with("d ")).unwrap();
        let cols: Vec<&str> = header.split_whitespace().collect();
        assert_eq!(cols, vec!["d", "Domain", "Accuracy", "Macro-F1", "AUROC", "ECE"]);
        assert!(text.contains("3  Contrast"));

        let plain = report(&[rec(1, 0.8), rec(0, 0.1)], 0.5, 15).unwrap();
        assert!(plain.per_domain.is_none());
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<MetricsReport>(&json).unwrap(), r);
    }

    #[test]
    fn csv_records() {
        let recs = read_records_csv("true_label,prob_positive,domain\n1,0.9,blur\n0,0.2,\n0,0.4,3\n").unwrap();
        assert_eq!(recs.len(), 3);
        assert_eq!(recs[0].domain, Some(DomainLabel::Blur));
        assert_eq!(recs[1].domain, None);
        assert_eq!(recs[2].domain, Some(DomainLabel::Contrast));
        let plain = read_records_csv("true_label,prob_positive\n1,0.9\n").unwrap();
        assert_eq!(plain[0].prob_positive, 0.9);
        assert!(read_records_csv("true_label,prob_positive\n2,0.9\n").is_err());
        assert!(read_records_csv("true_label,prob_positive\n1,1.5\n").is_err());
    }
}
