//! Binary-classification evaluation: confusion matrix, precision/recall/F1,
//! sklearn-style classification reports, and ROC/AUC from ranking scores.
//!
//! Class `1` (flood) is the positive class throughout.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("label vectors have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("label {0} is not binary (expected 0 or 1)")]
    NonBinaryLabel(u8),
    #[error("empty input")]
    Empty,
    #[error("ROC is undefined when only one class is present")]
    SingleClass,
    #[error("score at index {0} is not finite")]
    NonFiniteScore(usize),
    #[error("cannot parse report: {0}")]
    ReportParse(String),
}

/// Binary confusion matrix with class 1 as positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
}

impl ConfusionMatrix {
    pub fn new(tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        Self {
            true_positives: tp,
            false_positives: fp,
            true_negatives: tn,
            false_negatives: fn_,
        }
    }

    pub fn total(&self) -> usize {
        self.true_positives + self.false_positives + self.true_negatives + self.false_negatives
    }

    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        (self.true_positives + self.true_negatives) as f64 / total as f64
    }

    /// Precision, recall, and F1 for the positive class.
    /// Zero denominators yield 0 so degenerate predictions still report.
    pub fn precision_recall_f1(&self) -> (f64, f64, f64) {
        let precision = ratio(self.true_positives, self.true_positives + self.false_positives);
        let recall = ratio(self.true_positives, self.true_positives + self.false_negatives);
        let f1 = harmonic_mean(precision, recall);
        (precision, recall, f1)
    }

    /// Same metrics with class 0 treated as positive.
    pub fn precision_recall_f1_negative(&self) -> (f64, f64, f64) {
        self.swapped().precision_recall_f1()
    }

    fn swapped(&self) -> ConfusionMatrix {
        ConfusionMatrix::new(
            self.true_negatives,
            self.false_negatives,
            self.true_positives,
            self.false_positives,
        )
    }

    /// Two-row CSV layout: actual class per row, predicted class per column.
    pub fn to_csv(&self) -> String {
        format!(
            ",pred_0,pred_1\nactual_0,{},{}\nactual_1,{},{}\n",
            self.true_negatives, self.false_positives, self.false_negatives, self.true_positives
        )
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic_mean(a: f64, b: f64) -> f64 {
    if a + b == 0.0 {
        0.0
    } else {
        2.0 * a * b / (a + b)
    }
}

fn validate_binary(y_true: &[u8], y_pred: &[u8]) -> Result<(), MetricsError> {
    if y_true.len() != y_pred.len() {
        return Err(MetricsError::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    for &v in y_true.iter().chain(y_pred.iter()) {
        if v > 1 {
            return Err(MetricsError::NonBinaryLabel(v));
        }
    }
    Ok(())
}

/// Count tp/fp/tn/fn over paired label vectors.
pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix, MetricsError> {
    validate_binary(y_true, y_pred)?;
    let mut cm = ConfusionMatrix::new(0, 0, 0, 0);
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (1, 1) => cm.true_positives += 1,
            (0, 1) => cm.false_positives += 1,
            (0, 0) => cm.true_negatives += 1,
            (1, 0) => cm.false_negatives += 1,
            _ => unreachable!(),
        }
    }
    Ok(cm)
}

/// One row of the classification report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassRow {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

/// Full per-class report with macro and support-weighted averages.
///
/// Values are kept at full precision; [`ClassReport::render`] prints the
/// usual two-decimal table.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassReport {
    pub class0: ClassRow,
    pub class1: ClassRow,
    pub accuracy: f64,
    pub macro_avg: (f64, f64, f64),
    pub weighted_avg: (f64, f64, f64),
    pub total_support: usize,
}

impl ClassReport {
    pub fn from_confusion(cm: &ConfusionMatrix) -> ClassReport {
        let (p1, r1, f1) = cm.precision_recall_f1();
        let (p0, r0, f0) = cm.precision_recall_f1_negative();
        let support1 = cm.true_positives + cm.false_negatives;
        let support0 = cm.true_negatives + cm.false_positives;
        let total = cm.total();
        let weight = |a: f64, b: f64| {
            (a * support0 as f64 + b * support1 as f64) / total.max(1) as f64
        };
        ClassReport {
            class0: ClassRow { precision: p0, recall: r0, f1: f0, support: support0 },
            class1: ClassRow { precision: p1, recall: r1, f1, support: support1 },
            accuracy: cm.accuracy(),
            macro_avg: ((p0 + p1) / 2.0, (r0 + r1) / 2.0, (f0 + f1) / 2.0),
            weighted_avg: (weight(p0, p1), weight(r0, r1), weight(f0, f1)),
            total_support: total,
        }
    }

    /// Fixed-width text table, rows: class 0, class 1, accuracy, macro avg,
    /// weighted avg. Byte-stable for identical inputs.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:>12} {:>9} {:>9} {:>9} {:>9}\n\n",
            "", "precision", "recall", "f1-score", "support"
        ));
        for (label, row) in [("0", self.class0), ("1", self.class1)] {
            out.push_str(&format!(
                "{:>12} {:>9.2} {:>9.2} {:>9.2} {:>9}\n",
                label, row.precision, row.recall, row.f1, row.support
            ));
        }
        out.push('\n');
        out.push_str(&format!(
            "{:>12} {:>9} {:>9} {:>9.2} {:>9}\n",
            "accuracy", "", "", self.accuracy, self.total_support
        ));
        for (label, (p, r, f)) in [("macro avg", self.macro_avg), ("weighted avg", self.weighted_avg)]
        {
            out.push_str(&format!(
                "{:>12} {:>9.2} {:>9.2} {:>9.2} {:>9}\n",
                label, p, r, f, self.total_support
            ));
        }
        out
    }

    /// Parse a rendered report back at two-decimal precision.
    pub fn parse(text: &str) -> Result<ClassReport, MetricsError> {
        let bad = |line: &str| MetricsError::ReportParse(format!("unexpected line: {line:?}"));
        let mut class0 = None;
        let mut class1 = None;
        let mut accuracy = None;
        let mut macro_avg = None;
        let mut weighted_avg = None;
        let mut total_support = 0usize;
        for line in text.lines() {
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match tokens.as_slice() {
                [] | ["precision", ..] => {}
                ["0", p, r, f, s] => class0 = Some(parse_row(p, r, f, s)?),
                ["1", p, r, f, s] => class1 = Some(parse_row(p, r, f, s)?),
                ["accuracy", a, s] => {
                    accuracy = Some(parse_f64(a)?);
                    total_support = parse_usize(s)?;
                }
                ["macro", "avg", p, r, f, _s] => {
                    macro_avg = Some((parse_f64(p)?, parse_f64(r)?, parse_f64(f)?));
                }
                ["weighted", "avg", p, r, f, _s] => {
                    weighted_avg = Some((parse_f64(p)?, parse_f64(r)?, parse_f64(f)?));
                }
                _ => return Err(bad(line)),
            }
        }
        Ok(ClassReport {
            class0: class0.ok_or_else(|| bad("missing class 0 row"))?,
            class1: class1.ok_or_else(|| bad("missing class 1 row"))?,
            accuracy: accuracy.ok_or_else(|| bad("missing accuracy row"))?,
            macro_avg: macro_avg.ok_or_else(|| bad("missing macro avg row"))?,
            weighted_avg: weighted_avg.ok_or_else(|| bad("missing weighted avg row"))?,
            total_support,
        })
    }

    /// The report with every metric rounded to two decimals, as printed.
    pub fn rounded(&self) -> ClassReport {
        let r2 = |v: f64| (v * 100.0).round() / 100.0;
        let round_row = |row: ClassRow| ClassRow {
            precision: r2(row.precision),
            recall: r2(row.recall),
            f1: r2(row.f1),
            support: row.support,
        };
        let round3 = |(a, b, c): (f64, f64, f64)| (r2(a), r2(b), r2(c));
        ClassReport {
            class0: round_row(self.class0),
            class1: round_row(self.class1),
            accuracy: r2(self.accuracy),
            macro_avg: round3(self.macro_avg),
            weighted_avg: round3(self.weighted_avg),
            total_support: self.total_support,
        }
    }
}

fn parse_f64(s: &str) -> Result<f64, MetricsError> {
    s.parse()
        .map_err(|_| MetricsError::ReportParse(format!("bad number {s:?}")))
}

fn parse_usize(s: &str) -> Result<usize, MetricsError> {
    s.parse()
        .map_err(|_| MetricsError::ReportParse(format!("bad count {s:?}")))
}

fn parse_row(p: &str, r: &str, f: &str, s: &str) -> Result<ClassRow, MetricsError> {
    Ok(ClassRow {
        precision: parse_f64(p)?,
        recall: parse_f64(r)?,
        f1: parse_f64(f)?,
        support: parse_usize(s)?,
    })
}

/// Per-class report computed from raw label vectors.
pub fn classification_report(y_true: &[u8], y_pred: &[u8]) -> Result<ClassReport, MetricsError> {
    Ok(ClassReport::from_confusion(&confusion(y_true, y_pred)?))
}

/// One operating point of the ROC curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub false_positive_rate: f64,
    pub true_positive_rate: f64,
}

/// ROC curve from (0,0) to (1,1), monotone in both coordinates, with the
/// trapezoidal area under it.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

impl RocCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,fpr,tpr\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{}\n",
                p.threshold, p.false_positive_rate, p.true_positive_rate
            ));
        }
        out
    }
}

/// Sweep thresholds over distinct scores descending. Tied scores share one
/// threshold, so the curve steps diagonally through ties.
pub fn roc_curve(y_true: &[u8], scores: &[f64]) -> Result<RocCurve, MetricsError> {
    if y_true.len() != scores.len() {
        return Err(MetricsError::LengthMismatch {
            left: y_true.len(),
            right: scores.len(),
        });
    }
    if y_true.is_empty() {
        return Err(MetricsError::Empty);
    }
    for &v in y_true {
        if v > 1 {
            return Err(MetricsError::NonBinaryLabel(v));
        }
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(MetricsError::NonFiniteScore(i));
    }
    let positives = y_true.iter().filter(|&&y| y == 1).count();
    let negatives = y_true.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(MetricsError::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        false_positive_rate: 0.0,
        true_positive_rate: 0.0,
    }];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        // fold the whole tie group into one point
        while i < order.len() && scores[order[i]] == threshold {
            if y_true[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            threshold,
            false_positive_rate: fp as f64 / negatives as f64,
            true_positive_rate: tp as f64 / positives as f64,
        });
    }
    let last = points.last().copied().expect("curve is non-empty");
    if last.false_positive_rate != 1.0 || last.true_positive_rate != 1.0 {
        points.push(RocPoint {
            threshold: f64::NEG_INFINITY,
            false_positive_rate: 1.0,
            true_positive_rate: 1.0,
        });
    }

    let auc = points
        .windows(2)
        .map(|w| {
            let dx = w[1].false_positive_rate - w[0].false_positive_rate;
            let avg_y = (w[0].true_positive_rate + w[1].true_positive_rate) / 2.0;
            dx * avg_y
        })
        .sum();
    Ok(RocCurve { points, auc })
}
