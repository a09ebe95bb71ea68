//! Table-extraction metrics.
//!
//! - character-level detection recall/precision with purity and completeness,
//! - IOU-threshold detection scores and their threshold-weighted F1,
//! - adjacency-relation structure scores,
//! - tree-edit-distance similarity (TEDS) over table tag trees.

mod adjacency;
mod detection;
mod teds;

pub use adjacency::{
    adjacency_metrics, adjacency_relations, normalize_content, AdjacencyCounts, AdjacencyOptions, AdjacencyRelation,
    Direction,
};
pub use detection::{
    char_detection_metrics, char_metrics_from_counts, count_matches, CharCounts, iou_detection_metrics, iou_detection_metrics_pages, CharBox,
    DocumentScore, IouDetectionReport, MetricsReport, ThresholdScore,
};
pub use teds::{normalized_levenshtein, teds, to_tree, tree_edit_distance, NodeLabel, TableTree};

/// Precision/recall pair with its harmonic mean.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Prf {
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
}

impl Prf {
    pub fn new(recall: f64, precision: f64) -> Self {
        Self { recall, precision, f1: f1(precision, recall) }
    }
}

/// `2PR / (P + R)`, 0 when both are 0.
pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}
