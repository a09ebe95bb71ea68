use serde::{Deserialize, Serialize};

use super::{f1, Prf};
use crate::constraint::ScoredBox;
use crate::error::{Error, Result};
use crate::geometry::{iou, BBox};

/// A single character with its box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharBox {
    #[serde(rename = "box")]
    pub bbox: BBox,
    #[serde(rename = "char")]
    pub ch: String,
}

impl CharBox {
    pub fn new(bbox: BBox, ch: impl Into<String>) -> Self {
        Self { bbox, ch: ch.into() }
    }

    fn inside_any(&self, tables: &[BBox]) -> bool {
        let (x, y) = (self.bbox.mid_x(), self.bbox.mid_y());
        tables.iter().any(|t| t.contains_point(x, y))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentScore {
    pub doc_id: String,
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
}

/// Character-level detection report.
///
/// `purity` sums the floored per-document recall and `completeness` the
/// floored precision. The `conventional_*` fields hold the swapped reading
/// (purity from precision, completeness from recall).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub per_document: Vec<DocumentScore>,
    pub aggregate: Prf,
    pub purity: usize,
    pub completeness: usize,
    pub conventional_purity: usize,
    pub conventional_completeness: usize,
}

/// Character membership tallies of one page or document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CharCounts {
    pub in_gt: usize,
    pub in_pred: usize,
    pub in_both: usize,
}

impl std::ops::Add for CharCounts {
    type Output = CharCounts;

    fn add(self, o: CharCounts) -> CharCounts {
        CharCounts { in_gt: self.in_gt + o.in_gt, in_pred: self.in_pred + o.in_pred, in_both: self.in_both + o.in_both }
    }
}

impl CharCounts {
    pub fn tally(gt: &[BBox], pred: &[BBox], chars: &[CharBox]) -> CharCounts {
        let mut n = CharCounts::default();
        for c in chars {
            let g = c.inside_any(gt);
            let p = c.inside_any(pred);
            n.in_gt += g as usize;
            n.in_pred += p as usize;
            n.in_both += (g && p) as usize;
        }
        n
    }

    /// Recall is 1 without gt characters; precision is 1 only when neither
    /// side has characters and 0 when only the prediction is empty.
    pub fn recall_precision(&self) -> (f64, f64) {
        let recall = if self.in_gt == 0 { 1.0 } else { self.in_both as f64 / self.in_gt as f64 };
        let precision = match (self.in_pred, self.in_gt) {
            (0, 0) => 1.0,
            (0, _) => 0.0,
            (n, _) => self.in_both as f64 / n as f64,
        };
        (recall, precision)
    }
}

/// Character-level recall, precision and F1 per document, averaged over
/// documents. A character belongs to a table when its box center lies
/// inside the table box.
pub fn char_detection_metrics(
    doc_ids: &[String],
    gt_tables: &[Vec<BBox>],
    pred_tables: &[Vec<BBox>],
    chars: &[Vec<CharBox>],
) -> Result<MetricsReport> {
    let n = doc_ids.len();
    if gt_tables.len() != n || pred_tables.len() != n || chars.len() != n {
        return Err(Error::Input(format!(
            "per-document inputs disagree in length: {} ids, {} gt, {} predicted, {} char sets",
            n,
            gt_tables.len(),
            pred_tables.len(),
            chars.len()
        )));
    }
    let counts: Vec<(String, CharCounts)> =
        (0..n).map(|i| (doc_ids[i].clone(), CharCounts::tally(&gt_tables[i], &pred_tables[i], &chars[i]))).collect();
    Ok(char_metrics_from_counts(&counts))
}

/// Report from per-document tallies.
pub fn char_metrics_from_counts(docs: &[(String, CharCounts)]) -> MetricsReport {
    let per_document: Vec<DocumentScore> = docs
        .iter()
        .map(|(id, c)| {
            let (recall, precision) = c.recall_precision();
            DocumentScore { doc_id: id.clone(), recall, precision, f1: f1(precision, recall) }
        })
        .collect();
    let n = per_document.len();
    let floor_sum = |f: fn(&DocumentScore) -> f64| per_document.iter().map(|d| f(d).floor() as usize).sum::<usize>();
    let aggregate = if n == 0 {
        Prf::new(0.0, 0.0)
    } else {
        let recall = per_document.iter().map(|d| d.recall).sum::<f64>() / n as f64;
        let precision = per_document.iter().map(|d| d.precision).sum::<f64>() / n as f64;
        Prf::new(recall, precision)
    };
    let purity = floor_sum(|d| d.recall);
    let completeness = floor_sum(|d| d.precision);
    MetricsReport {
        per_document,
        aggregate,
        purity,
        completeness,
        conventional_purity: completeness,
        conventional_completeness: purity,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdScore {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IouDetectionReport {
    pub per_threshold: Vec<ThresholdScore>,
    pub weighted_f1: f64,
    pub n_gt: usize,
    pub n_pred: usize,
}

/// Greedy one-to-one matches at IOU threshold `t`: predictions in descending
/// score order each take the unmatched ground-truth box of highest IOU,
/// counted when that IOU reaches `t`.
pub fn count_matches(gt: &[BBox], pred: &[ScoredBox], t: f64) -> usize {
    let mut order: Vec<usize> = (0..pred.len()).collect();
    order.sort_by(|&a, &b| pred[b].score.total_cmp(&pred[a].score));
    let mut taken = vec![false; gt.len()];
    let mut matched = 0;
    for p in order {
        let best = (0..gt.len())
            .filter(|&g| !taken[g])
            .map(|g| (g, iou(&gt[g], &pred[p].bbox)))
            .fold(None::<(usize, f64)>, |acc, cur| match acc {
                Some(a) if a.1 >= cur.1 => Some(a),
                _ => Some(cur),
            });
        if let Some((g, v)) = best {
            if v >= t {
                taken[g] = true;
                matched += 1;
            }
        }
    }
    matched
}

fn check_thresholds(thresholds: &[f64]) -> Result<()> {
    if thresholds.is_empty() {
        return Err(Error::Input("at least one IOU threshold is required".into()));
    }
    if thresholds.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
        return Err(Error::Input(format!("IOU thresholds must lie in (0, 1]: {thresholds:?}")));
    }
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Input(format!("IOU thresholds must be strictly ascending: {thresholds:?}")));
    }
    Ok(())
}

/// Detection scores for one page. See [`iou_detection_metrics_pages`].
pub fn iou_detection_metrics(gt: &[BBox], pred: &[ScoredBox], thresholds: &[f64]) -> Result<IouDetectionReport> {
    iou_detection_metrics_pages(&[(gt.to_vec(), pred.to_vec())], thresholds)
}

/// Precision, recall and F1 per IOU threshold, with matches counted per page
/// and summed, and `weighted_f1 = Σ t·F1(t) / Σ t`.
pub fn iou_detection_metrics_pages(
    pages: &[(Vec<BBox>, Vec<ScoredBox>)],
    thresholds: &[f64],
) -> Result<IouDetectionReport> {
    check_thresholds(thresholds)?;
    let n_gt: usize = pages.iter().map(|p| p.0.len()).sum();
    let n_pred: usize = pages.iter().map(|p| p.1.len()).sum();
    let per_threshold: Vec<ThresholdScore> = thresholds
        .iter()
        .map(|&t| {
            let tp: usize = pages.iter().map(|(g, p)| count_matches(g, p, t)).sum();
            let (precision, recall) = if n_gt == 0 && n_pred == 0 {
                (1.0, 1.0)
            } else {
                let ratio = |d: usize| if d == 0 { 0.0 } else { tp as f64 / d as f64 };
                (ratio(n_pred), ratio(n_gt))
            };
            ThresholdScore { threshold: t, precision, recall, f1: f1(precision, recall), true_positives: tp }
        })
        .collect();
    let weight: f64 = thresholds.iter().sum();
    let weighted_f1 = per_threshold.iter().map(|s| s.threshold * s.f1).sum::<f64>() / weight;
    Ok(IouDetectionReport { per_threshold, weighted_f1, n_gt, n_pred })
}
