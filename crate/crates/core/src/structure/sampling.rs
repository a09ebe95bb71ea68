//! Cell preprocessing, row/column counting and alignment inference.

use super::kmeans::kmeans_1d;
use super::{AlignX, AlignY, Orientation, RulingLine, StructureConfig, TextLine};
use crate::geometry::BBox;

fn reading_order(a: &BBox, b: &BBox) -> std::cmp::Ordering {
    a.y1.total_cmp(&b.y1).then(a.x1.total_cmp(&b.x1))
}

/// Aligns detected cells to text lines.
///
/// Cells touching no text are dropped, the rest grow to cover every text line
/// they intersect, and cells that then intersect are merged until none do.
/// The result is ordered by `(y1, x1)`.
pub fn preprocess_cells(cells: &[BBox], text_lines: &[TextLine]) -> Vec<BBox> {
    let mut grown: Vec<BBox> = cells
        .iter()
        .filter_map(|cell| {
            let mut hit = text_lines.iter().filter(|t| t.bbox.intersects(cell)).peekable();
            hit.peek()?;
            Some(hit.fold(*cell, |acc, t| acc.union(&t.bbox)))
        })
        .collect();

    'merge: loop {
        for i in 0..grown.len() {
            for j in i + 1..grown.len() {
                if grown[i].intersects(&grown[j]) {
                    let other = grown.swap_remove(j);
                    grown[i] = grown[i].union(&other);
                    continue 'merge;
                }
            }
        }
        break;
    }
    grown.sort_by(reading_order);
    grown
}

/// Widens cells left and right in `step` increments until they would touch
/// another cell's area or leave the table.
///
/// Cells take one step each per round, in `(y1, x1)` order, so neighbours
/// facing the same gap share it.
pub fn horizontal_expand(cells: &[BBox], table: &BBox, step: f64) -> Vec<BBox> {
    let mut boxes: Vec<BBox> = cells.iter().map(|c| c.clip_to(table)).collect();
    let mut order: Vec<usize> = (0..boxes.len()).collect();
    order.sort_by(|&a, &b| reading_order(&boxes[a], &boxes[b]).then(a.cmp(&b)));
    let mut active = vec![step > 0.0; boxes.len()];

    while active.iter().any(|&a| a) {
        for &i in &order {
            if !active[i] {
                continue;
            }
            let b = boxes[i];
            let candidate = BBox { x1: (b.x1 - step).max(table.x1), x2: (b.x2 + step).min(table.x2), ..b };
            let blocked = boxes.iter().enumerate().any(|(j, o)| j != i && candidate.intersects(o));
            if candidate == b || blocked {
                active[i] = false;
            } else {
                boxes[i] = candidate;
            }
        }
    }
    boxes
}

/// Distinct ruling positions strictly inside the table along one orientation.
pub fn inner_line_count(ruling: &[RulingLine], orientation: Orientation, table: &BBox, tol: f64) -> usize {
    let (lo, hi) = match orientation {
        Orientation::Horizontal => (table.y1, table.y2),
        Orientation::Vertical => (table.x1, table.x2),
    };
    let mut positions: Vec<f64> = ruling
        .iter()
        .filter(|l| l.orientation == orientation && l.position > lo + tol && l.position < hi - tol)
        .map(|l| l.position)
        .collect();
    positions.sort_by(f64::total_cmp);
    let mut count = 0;
    let mut last: Option<f64> = None;
    for p in positions {
        if last.is_none_or(|q| p - q > tol) {
            count += 1;
        }
        last = Some(p);
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowColCount {
    pub n_rows: usize,
    pub n_cols: usize,
    /// Larger coefficient of variation of the row and column samples.
    pub dispersion: f64,
}

fn coefficient_of_variation(samples: &[usize]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<usize>() as f64 / n;
    if mean == 0.0 {
        return 0.0;
    }
    let var = samples.iter().map(|&s| (s as f64 - mean).powi(2)).sum::<f64>() / n;
    var.sqrt() / mean
}

/// Counts rows and columns by sampling through every cell's midpoint.
///
/// A horizontal line through a cell's vertical midpoint crosses the cells of
/// its row, giving a column sample; a vertical line through its horizontal
/// midpoint gives a row sample. Counts take the maximum sample. When ruling
/// lines are given, each count is at least the number of distinct inner lines
/// plus one, so a bare frame means one row and one column.
pub fn count_rows_cols(cells: &[BBox], ruling: &[RulingLine], table: &BBox, cfg: &StructureConfig) -> RowColCount {
    let col_samples: Vec<usize> = cells
        .iter()
        .map(|b| {
            let y = b.mid_y();
            cells.iter().filter(|c| c.y1 <= y && y <= c.y2).count()
        })
        .collect();
    let row_samples: Vec<usize> = cells
        .iter()
        .map(|b| {
            let x = b.mid_x();
            cells.iter().filter(|c| c.x1 <= x && x <= c.x2).count()
        })
        .collect();

    let mut n_cols = col_samples.iter().copied().max().unwrap_or(0);
    let mut n_rows = row_samples.iter().copied().max().unwrap_or(0);
    let horizontal = inner_line_count(ruling, Orientation::Horizontal, table, cfg.line_dedupe_tol);
    let vertical = inner_line_count(ruling, Orientation::Vertical, table, cfg.line_dedupe_tol);
    if !ruling.is_empty() {
        n_rows = n_rows.max(horizontal + 1);
        n_cols = n_cols.max(vertical + 1);
    }
    let dispersion = coefficient_of_variation(&col_samples).max(coefficient_of_variation(&row_samples));
    RowColCount { n_rows, n_cols, dispersion }
}

fn clustered_deviation(values: &[f64], k: usize, cfg: &StructureConfig) -> f64 {
    let r = kmeans_1d(values, k, cfg);
    values.iter().zip(&r.assignment).map(|(v, &a)| (v - r.centers[a]).abs()).sum()
}

/// Index of the smallest deviation, preferring earlier families within rounding noise.
fn best_family(deviations: &[f64], scale: f64) -> usize {
    let tol = 1e-9 * scale.max(1.0);
    let mut best = 0;
    for (i, &d) in deviations.iter().enumerate().skip(1) {
        if d < deviations[best] - tol {
            best = i;
        }
    }
    best
}

/// Picks the cell edge (or midpoint) that lines up best across cells, per axis.
///
/// # Panics
/// When `cells` is empty.
pub fn infer_alignment(cells: &[BBox], n_rows: usize, n_cols: usize, cfg: &StructureConfig) -> (AlignX, AlignY) {
    assert!(!cells.is_empty(), "alignment needs at least one cell");
    let scale = cells.iter().flat_map(|b| b.coords()).fold(0.0f64, |m, c| m.max(c.abs())) * cells.len() as f64;

    let x_dev: Vec<f64> = AlignX::ALL
        .iter()
        .map(|a| {
            let v: Vec<f64> = cells.iter().map(|b| a.coord(b)).collect();
            clustered_deviation(&v, n_cols.max(1), cfg)
        })
        .collect();
    let y_dev: Vec<f64> = AlignY::ALL
        .iter()
        .map(|a| {
            let v: Vec<f64> = cells.iter().map(|b| a.coord(b)).collect();
            clustered_deviation(&v, n_rows.max(1), cfg)
        })
        .collect();
    (AlignX::ALL[best_family(&x_dev, scale)], AlignY::ALL[best_family(&y_dev, scale)])
}
