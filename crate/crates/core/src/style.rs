//! Table-style routing and ruling-line augmentation.
//!
//! Tables with vertical ruling lines go to the bordered cell detector, the
//! rest to the borderless one. The two augmentation schemes used to train
//! those detectors are expressed here on vector line sets: one drops every
//! ruling line, the other draws a boundary between every pair of adjacent
//! rows and columns.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::structure::{inner_line_count, LogicalCell, Orientation, RulingLine, TableStructure};

/// Output of a table-style classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StyleLabel {
    pub has_vertical_lines: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorId {
    Bordered,
    Borderless,
}

impl DetectorId {
    pub fn other(self) -> DetectorId {
        match self {
            DetectorId::Bordered => DetectorId::Borderless,
            DetectorId::Borderless => DetectorId::Bordered,
        }
    }
}

pub fn route(label: StyleLabel) -> DetectorId {
    if label.has_vertical_lines {
        DetectorId::Bordered
    } else {
        DetectorId::Borderless
    }
}

/// Label inferred from ruling lines when no classifier output is available.
pub fn infer_style(ruling: &[RulingLine], region: &BBox, dedupe_tol: f64) -> StyleLabel {
    StyleLabel { has_vertical_lines: inner_line_count(ruling, Orientation::Vertical, region, dedupe_tol) >= 1 }
}

/// The "no lines" scheme.
pub fn augment_no_lines(_ruling: &[RulingLine]) -> Vec<RulingLine> {
    Vec::new()
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 { values[n / 2] } else { (values[n / 2 - 1] + values[n / 2]) / 2.0 })
}

/// Boundary positions between consecutive tracks along one axis.
///
/// `lo`/`hi` read a box's interval on the axis, `track` a cell's
/// `(start, len)` on the axis and `cross` its `(start, end)` on the other axis.
fn boundaries(
    gt: &TableStructure,
    n: usize,
    frame: (f64, f64),
    lo: impl Fn(&BBox) -> f64,
    hi: impl Fn(&BBox) -> f64,
    track: impl Fn(&LogicalCell) -> (usize, usize),
    cross: impl Fn(&LogicalCell) -> (usize, usize),
) -> Vec<f64> {
    let cells: Vec<&LogicalCell> = gt.cells.iter().filter(|c| c.bbox.area() > 0.0).collect();
    let extent = |t: usize| -> Option<(f64, f64)> {
        let u = BBox::union_all(cells.iter().filter(|c| track(c) == (t, 1)).map(|c| &c.bbox))?;
        Some((lo(&u), hi(&u)))
    };
    let side_by_side = |a: &LogicalCell, b: &LogicalCell| {
        let (x, y) = (cross(a), cross(b));
        x.0 < y.1 && y.0 < x.1
    };
    (0..n.saturating_sub(1))
        .map(|j| {
            let before: Vec<&&LogicalCell> = cells.iter().filter(|c| track(c).0 + track(c).1 == j + 1).collect();
            let after: Vec<&&LogicalCell> = cells.iter().filter(|c| track(c).0 == j + 1).collect();
            let last = before.iter().map(|c| hi(&c.bbox)).fold(f64::NEG_INFINITY, f64::max);
            let first = after.iter().map(|c| lo(&c.bbox)).fold(f64::INFINITY, f64::min);
            if !before.is_empty() && !after.is_empty() && last <= first {
                return (last + first) / 2.0;
            }
            let mut samples: Vec<f64> = Vec::new();
            for a in &before {
                for b in after.iter().filter(|b| side_by_side(a, b)) {
                    samples.push((hi(&a.bbox) + lo(&b.bbox)) / 2.0);
                }
            }
            median(&mut samples).unwrap_or_else(|| match (extent(j), extent(j + 1)) {
                (Some(l), Some(r)) => ((l.0 + l.1) / 2.0 + (r.0 + r.1) / 2.0) / 2.0,
                _ => frame.0 + (frame.1 - frame.0) * (j + 1) as f64 / n as f64,
            })
        })
        .collect()
}

/// The "full boundaries" scheme: a vertical line between every pair of
/// adjacent columns and a horizontal line between every pair of adjacent
/// rows, plus the four table borders. Each line sits mid-way through the clear
/// gap between the two tracks, or at the median midpoint of neighbouring cell
/// gaps when the tracks overlap. Sorted by orientation, then position.
pub fn augment_full_boundaries(gt: &TableStructure, table: &BBox) -> Result<Vec<RulingLine>> {
    if gt.n_rows == 0 || gt.n_cols == 0 || gt.cells.iter().all(|c| c.bbox.area() <= 0.0) {
        return Err(Error::Input("full-boundaries augmentation needs a structure with cell boxes".into()));
    }
    let rows = |c: &LogicalCell| (c.row, c.row + c.row_span);
    let cols = |c: &LogicalCell| (c.col, c.col + c.col_span);
    let verticals =
        boundaries(gt, gt.n_cols, (table.x1, table.x2), |b| b.x1, |b| b.x2, |c| (c.col, c.col_span), rows);
    let horizontals =
        boundaries(gt, gt.n_rows, (table.y1, table.y2), |b| b.y1, |b| b.y2, |c| (c.row, c.row_span), cols);

    let mut lines: Vec<RulingLine> = Vec::with_capacity(verticals.len() + horizontals.len() + 4);
    for y in [table.y1, table.y2].into_iter().chain(horizontals) {
        lines.push(RulingLine::horizontal(y, table.x1, table.x2));
    }
    for x in [table.x1, table.x2].into_iter().chain(verticals) {
        lines.push(RulingLine::vertical(x, table.y1, table.y2));
    }
    lines.sort_by(|a, b| a.orientation.cmp(&b.orientation).then(a.position.total_cmp(&b.position)));
    Ok(lines)
}
