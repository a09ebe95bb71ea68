//! Scoring a predictions file against a ground-truth file.

use serde::{Deserialize, Serialize};

use super::page::{PageTables, TablesFile};
use crate::constraint::ScoredBox;
use crate::error::Result;
use crate::eval::{
    adjacency_metrics, adjacency_relations, char_metrics_from_counts, iou_detection_metrics_pages, teds,
    AdjacencyCounts, AdjacencyOptions, CharCounts, IouDetectionReport, MetricsReport, Prf,
};
use crate::geometry::{iou, BBox};
use crate::structure::TableStructure;

/// Minimum IOU for a predicted table to be scored against a gt table.
pub const TABLE_MATCH_IOU: f64 = 0.5;

/// Greedy one-to-one pairing of gt and predicted tables by descending IOU.
pub fn match_tables(gt: &[BBox], pred: &[BBox]) -> Vec<Option<usize>> {
    let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
    for (g, gb) in gt.iter().enumerate() {
        for (p, pb) in pred.iter().enumerate() {
            let v = iou(gb, pb);
            if v >= TABLE_MATCH_IOU {
                pairs.push((g, p, v));
            }
        }
    }
    pairs.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let mut out = vec![None; gt.len()];
    let mut used = vec![false; pred.len()];
    for (g, p, _) in pairs {
        if out[g].is_none() && !used[p] {
            out[g] = Some(p);
            used[p] = true;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableScore {
    pub doc_id: String,
    pub page_index: usize,
    pub gt_table: usize,
    pub pred_table: Option<usize>,
    pub adjacency: Prf,
    pub teds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    /// Micro-averaged adjacency scores over all tables.
    pub adjacency: Prf,
    pub counts: AdjacencyCounts,
    /// Mean TEDS over gt tables; unmatched gt tables score 0.
    pub mean_teds: f64,
    pub per_table: Vec<TableScore>,
    pub unmatched_predictions: usize,
}

fn empty_page(p: &PageTables) -> PageTables {
    PageTables { doc_id: p.doc_id.clone(), page_index: p.page_index, tables: Vec::new(), char_boxes: None }
}

fn structure_of(t: &super::page::TableRecord) -> TableStructure {
    t.structure.clone().unwrap_or_default()
}

pub fn evaluate_structure(gt: &TablesFile, pred: &TablesFile, opts: &AdjacencyOptions) -> StructureReport {
    let mut counts = AdjacencyCounts::default();
    let mut per_table = Vec::new();
    let mut unmatched_predictions = 0;
    for gp in &gt.pages {
        let fallback = empty_page(gp);
        let pp = pred.page(&gp.doc_id, gp.page_index).unwrap_or(&fallback);
        let gt_boxes: Vec<BBox> = gp.tables.iter().map(|t| t.bbox).collect();
        let pred_boxes: Vec<BBox> = pp.tables.iter().map(|t| t.bbox).collect();
        let pairing = match_tables(&gt_boxes, &pred_boxes);
        for (g, m) in pairing.iter().enumerate() {
            let gs = structure_of(&gp.tables[g]);
            let ps = m.map(|p| structure_of(&pp.tables[p])).unwrap_or_default();
            let c = adjacency_metrics(&gs, &ps, opts);
            counts = counts + c;
            let t = if m.is_some() { teds(&gs, &ps) } else { 0.0 };
            per_table.push(TableScore {
                doc_id: gp.doc_id.clone(),
                page_index: gp.page_index,
                gt_table: g,
                pred_table: *m,
                adjacency: c.scores(),
                teds: t,
            });
        }
        for (p, table) in pp.tables.iter().enumerate() {
            if !pairing.contains(&Some(p)) {
                unmatched_predictions += 1;
                counts.pred += adjacency_relations(&structure_of(table), opts).len();
            }
        }
    }
    // predicted pages the gt does not list
    for pp in &pred.pages {
        if gt.page(&pp.doc_id, pp.page_index).is_none() {
            for table in &pp.tables {
                unmatched_predictions += 1;
                counts.pred += adjacency_relations(&structure_of(table), opts).len();
            }
        }
    }
    let mean_teds =
        if per_table.is_empty() { 1.0 } else { per_table.iter().map(|t| t.teds).sum::<f64>() / per_table.len() as f64 };
    StructureReport { adjacency: counts.scores(), counts, mean_teds, per_table, unmatched_predictions }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub iou: IouDetectionReport,
    /// Present when the gt file carries character boxes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub characters: Option<MetricsReport>,
}

/// IOU-threshold scores over all pages and, when character boxes are
/// available, character-level scores per document.
pub fn evaluate_detection(gt: &TablesFile, pred: &TablesFile, thresholds: &[f64]) -> Result<DetectionReport> {
    let mut pages: Vec<(Vec<BBox>, Vec<ScoredBox>)> = Vec::new();
    let mut docs: Vec<(String, CharCounts)> = Vec::new();
    let mut any_chars = false;
    for gp in &gt.pages {
        let fallback = empty_page(gp);
        let pp = pred.page(&gp.doc_id, gp.page_index).unwrap_or(&fallback);
        let gt_boxes: Vec<BBox> = gp.tables.iter().map(|t| t.bbox).collect();
        let pred_boxes: Vec<BBox> = pp.tables.iter().map(|t| t.bbox).collect();
        let scored = pp.tables.iter().map(|t| ScoredBox::new(t.bbox, t.score.unwrap_or(1.0))).collect();
        let tally = match &gp.char_boxes {
            Some(chars) => {
                any_chars = true;
                CharCounts::tally(&gt_boxes, &pred_boxes, chars)
            }
            None => CharCounts::default(),
        };
        match docs.iter_mut().find(|(id, _)| *id == gp.doc_id) {
            Some((_, c)) => *c = *c + tally,
            None => docs.push((gp.doc_id.clone(), tally)),
        }
        pages.push((gt_boxes, scored));
    }
    for pp in &pred.pages {
        if gt.page(&pp.doc_id, pp.page_index).is_none() {
            pages.push((Vec::new(), pp.tables.iter().map(|t| ScoredBox::new(t.bbox, t.score.unwrap_or(1.0))).collect()));
        }
    }
    Ok(DetectionReport {
        iou: iou_detection_metrics_pages(&pages, thresholds)?,
        characters: any_chars.then(|| char_metrics_from_counts(&docs)),
    })
}
