//! Reconstruction of a logical table grid from detected cell boxes.
//!
//! The pipeline aligns cell boxes to text lines, counts rows and columns by
//! sampling, picks the best edge alignment, clusters aligned coordinates into
//! row and column positions and then repairs the grid: lowercase
//! continuations, leftover text, over-merged cells next to empty slots and
//! spanning cells.

mod build;
mod draft;
mod kmeans;
mod sampling;

use serde::{Deserialize, Serialize};

use crate::geometry::BBox;

pub use build::{build_structure, build_structure_detailed, select_by_dispersion, BuildTrace};
pub use draft::{assign_positions, merge_collisions, nearest_index, DraftCell, GridDraft, Positioner};
pub use kmeans::{kmeans_1d, kmeans_objective, KMeans1d};
pub use sampling::{
    count_rows_cols, horizontal_expand, infer_alignment, inner_line_count, preprocess_cells, RowColCount,
};

/// A line of text as extracted from the PDF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextLine {
    #[serde(rename = "box")]
    pub bbox: BBox,
    #[serde(default)]
    pub text: String,
}

impl TextLine {
    pub fn new(bbox: BBox, text: impl Into<String>) -> Self {
        Self { bbox, text: text.into().trim().to_string() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// A graphical ruling line. `position` is the constant coordinate (y for
/// horizontal lines, x for vertical ones); `span` is the extent along the line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RulingLine {
    pub orientation: Orientation,
    pub position: f64,
    pub span: (f64, f64),
}

impl RulingLine {
    pub fn horizontal(y: f64, x1: f64, x2: f64) -> Self {
        Self { orientation: Orientation::Horizontal, position: y, span: (x1, x2) }
    }

    pub fn vertical(x: f64, y1: f64, y2: f64) -> Self {
        Self { orientation: Orientation::Vertical, position: x, span: (y1, y2) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlignX {
    #[default]
    Left,
    Center,
    Right,
}

impl AlignX {
    pub const ALL: [AlignX; 3] = [AlignX::Left, AlignX::Center, AlignX::Right];

    pub fn coord(self, b: &BBox) -> f64 {
        match self {
            AlignX::Left => b.x1,
            AlignX::Center => b.mid_x(),
            AlignX::Right => b.x2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlignY {
    #[default]
    Top,
    Middle,
    Bottom,
}

impl AlignY {
    pub const ALL: [AlignY; 3] = [AlignY::Top, AlignY::Middle, AlignY::Bottom];

    pub fn coord(self, b: &BBox) -> f64 {
        match self {
            AlignY::Top => b.y1,
            AlignY::Middle => b.mid_y(),
            AlignY::Bottom => b.y2,
        }
    }
}

/// One cell of the reconstructed grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogicalCell {
    pub row: usize,
    pub col: usize,
    pub row_span: usize,
    pub col_span: usize,
    pub content: String,
    #[serde(rename = "box")]
    pub bbox: BBox,
}

impl LogicalCell {
    pub fn new(row: usize, col: usize, content: impl Into<String>) -> Self {
        Self { row, col, row_span: 1, col_span: 1, content: content.into(), bbox: BBox::ZERO }
    }

    pub fn with_span(mut self, row_span: usize, col_span: usize) -> Self {
        self.row_span = row_span;
        self.col_span = col_span;
        self
    }

    pub fn with_box(mut self, bbox: BBox) -> Self {
        self.bbox = bbox;
        self
    }

    pub fn covers(&self, row: usize, col: usize) -> bool {
        (self.row..self.row + self.row_span).contains(&row) && (self.col..self.col + self.col_span).contains(&col)
    }
}

/// The logical grid of one table.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TableStructure {
    pub n_rows: usize,
    pub n_cols: usize,
    pub cells: Vec<LogicalCell>,
    #[serde(default)]
    pub alignment_x: AlignX,
    #[serde(default)]
    pub alignment_y: AlignY,
    #[serde(default)]
    pub sampling_dispersion: f64,
}

impl TableStructure {
    pub fn new(n_rows: usize, n_cols: usize, mut cells: Vec<LogicalCell>) -> Self {
        cells.sort_by_key(|c| (c.row, c.col));
        Self { n_rows, n_cols, cells, ..Default::default() }
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Index of the cell covering `(row, col)`, if any.
    pub fn cell_at(&self, row: usize, col: usize) -> Option<usize> {
        self.cells.iter().position(|c| c.covers(row, col))
    }

    /// Dense `n_rows × n_cols` map from slots to cell indices.
    pub fn occupancy(&self) -> Vec<Vec<Option<usize>>> {
        let mut grid = vec![vec![None; self.n_cols]; self.n_rows];
        for (i, c) in self.cells.iter().enumerate() {
            for row in grid.iter_mut().skip(c.row).take(c.row_span) {
                for slot in row.iter_mut().skip(c.col).take(c.col_span) {
                    *slot = Some(i);
                }
            }
        }
        grid
    }

    /// Checks spans, bounds, slot exclusivity and ordering.
    #[allow(clippy::needless_range_loop)]
    pub fn validate(&self) -> Result<(), String> {
        let mut grid = vec![vec![None::<usize>; self.n_cols]; self.n_rows];
        for (i, c) in self.cells.iter().enumerate() {
            if c.row_span == 0 || c.col_span == 0 {
                return Err(format!("cell {i} at ({}, {}) has a zero span", c.row, c.col));
            }
            if c.row + c.row_span > self.n_rows || c.col + c.col_span > self.n_cols {
                return Err(format!(
                    "cell {i} at ({}, {}) with span {}x{} exceeds the {}x{} grid",
                    c.row, c.col, c.row_span, c.col_span, self.n_rows, self.n_cols
                ));
            }
            for r in c.row..c.row + c.row_span {
                for k in c.col..c.col + c.col_span {
                    if let Some(j) = grid[r][k] {
                        return Err(format!("cells {j} and {i} both occupy ({r}, {k})"));
                    }
                    grid[r][k] = Some(i);
                }
            }
        }
        if self.cells.windows(2).any(|w| (w[0].row, w[0].col) > (w[1].row, w[1].col)) {
            return Err("cells are not sorted by (row, col)".into());
        }
        Ok(())
    }

    /// Same grid shape, anchors, spans and contents; boxes and metadata ignored.
    pub fn same_grid(&self, other: &TableStructure) -> bool {
        self.n_rows == other.n_rows
            && self.n_cols == other.n_cols
            && self.cells.len() == other.cells.len()
            && self.cells.iter().zip(&other.cells).all(|(a, b)| {
                (a.row, a.col, a.row_span, a.col_span, &a.content) == (b.row, b.col, b.row_span, b.col_span, &b.content)
            })
    }
}

/// Tunables of the structure reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StructureConfig {
    /// Horizontal growth per expansion step (pixels).
    pub expand_step: f64,
    pub lowercase_merge: bool,
    /// Ruling lines closer than this (pixels) count as one.
    pub line_dedupe_tol: f64,
    /// Sampling dispersion at or below which the first candidate is accepted outright.
    pub dispersion_threshold: f64,
    pub kmeans_max_iter: usize,
    pub kmeans_tol: f64,
}

impl Default for StructureConfig {
    fn default() -> Self {
        Self {
            expand_step: 5.0,
            lowercase_merge: true,
            line_dedupe_tol: 3.0,
            dispersion_threshold: 1.0,
            kmeans_max_iter: 100,
            kmeans_tol: 1e-6,
        }
    }
}

impl StructureConfig {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("expand_step", self.expand_step),
            ("line_dedupe_tol", self.line_dedupe_tol),
            ("dispersion_threshold", self.dispersion_threshold),
            ("kmeans_tol", self.kmeans_tol),
        ];
        let mut problems: Vec<String> = positive
            .iter()
            .filter(|(_, v)| !(v.is_finite() && *v > 0.0))
            .map(|(name, _)| format!("{name} must be positive"))
            .collect();
        if self.kmeans_max_iter == 0 {
            problems.push("kmeans_max_iter must be positive".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems.join("; "))
        }
    }
}

/// Whether the first letter of `text` (skipping digits and punctuation) is lowercase.
pub fn starts_lowercase(text: &str) -> bool {
    text.chars().find(|c| c.is_alphabetic()).is_some_and(|c| c.is_lowercase())
}
