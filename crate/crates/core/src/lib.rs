//! Post-processing and evaluation toolkit for table extraction.
//!
//! Takes raw table and cell detections from any object detector and turns
//! them into logical table structures:
//!
//! - [`geometry`]: exact rectangle arithmetic and cell-mass queries.
//! - [`constraint`]: cell-containment penalties and coefficient-based
//!   suppression of table candidates.
//! - [`structure`]: cell boxes and text lines to a row/column grid.
//! - [`style`]: bordered/borderless routing and ruling-line augmentation.
//! - [`eval`]: detection, adjacency-relation, IOU-weighted and tree-edit metrics.
//! - [`io`]: page JSON, HTML tables, ground-truth labeling and the pipeline.

pub mod constraint;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod io;
pub mod structure;
pub mod style;
pub mod synth;

pub use constraint::{ConstraintConfig, ScoredBox};
pub use error::{Error, Result};
pub use geometry::BBox;
pub use structure::{LogicalCell, RulingLine, StructureConfig, TableStructure, TextLine};
