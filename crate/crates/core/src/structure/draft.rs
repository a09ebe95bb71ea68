//! Grid assignment and the repair passes that run on a draft grid.
//!
//! A [`GridDraft`] keeps the member text lines of every cell so later passes
//! can move individual lines between slots. Row and column positions are the
//! cluster centers of the aligned cell coordinates.

use super::{starts_lowercase, AlignX, AlignY, LogicalCell, TableStructure, TextLine};
use crate::geometry::BBox;

/// Index of the nearest value in `centers`; ties go to the lower index.
pub fn nearest_index(centers: &[f64], v: f64) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centers.iter().enumerate() {
        let d = (v - c).abs();
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

/// Maps boxes to grid slots via their aligned coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Positioner {
    pub centers_x: Vec<f64>,
    pub centers_y: Vec<f64>,
    pub align_x: AlignX,
    pub align_y: AlignY,
}

impl Positioner {
    /// `(row, col)` for a box.
    pub fn slot(&self, b: &BBox) -> (usize, usize) {
        (
            nearest_index(&self.centers_y, self.align_y.coord(b)),
            nearest_index(&self.centers_x, self.align_x.coord(b)),
        )
    }
}

/// `(cell_index, row, col)` for each cell.
pub fn assign_positions(
    cells: &[BBox],
    centers_x: &[f64],
    centers_y: &[f64],
    align_x: AlignX,
    align_y: AlignY,
) -> Vec<(usize, usize, usize)> {
    let p = Positioner { centers_x: centers_x.to_vec(), centers_y: centers_y.to_vec(), align_x, align_y };
    cells
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let (r, c) = p.slot(b);
            (i, r, c)
        })
        .collect()
}

fn line_order(a: &TextLine, b: &TextLine) -> std::cmp::Ordering {
    a.bbox.y1.total_cmp(&b.bbox.y1).then(a.bbox.x1.total_cmp(&b.bbox.x1))
}

/// A cell under construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DraftCell {
    pub row: usize,
    pub col: usize,
    pub row_span: usize,
    pub col_span: usize,
    /// Member lines in reading order.
    pub lines: Vec<TextLine>,
    /// Detected box, used only when the cell holds no lines.
    pub detected: BBox,
}

impl DraftCell {
    fn new(row: usize, col: usize, detected: BBox) -> Self {
        Self { row, col, row_span: 1, col_span: 1, lines: Vec::new(), detected }
    }

    pub fn add_lines(&mut self, lines: impl IntoIterator<Item = TextLine>) {
        self.lines.extend(lines);
        self.lines.sort_by(line_order);
    }

    /// Tight bound of member lines.
    pub fn bbox(&self) -> BBox {
        BBox::union_all(self.lines.iter().map(|l| &l.bbox)).unwrap_or(self.detected)
    }

    pub fn content(&self) -> String {
        let parts: Vec<&str> = self.lines.iter().map(|l| l.text.trim()).filter(|t| !t.is_empty()).collect();
        parts.join(" ")
    }

    pub fn covers(&self, row: usize, col: usize) -> bool {
        (self.row..self.row + self.row_span).contains(&row) && (self.col..self.col + self.col_span).contains(&col)
    }
}

/// A grid in progress together with the positions used to build it.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDraft {
    pub n_rows: usize,
    pub n_cols: usize,
    pub cells: Vec<DraftCell>,
    pub positions: Positioner,
}

/// Groups cells by assigned slot; cells sharing a slot merge.
///
/// `lines_per_cell[i]` holds the text lines belonging to `cells[i]`.
pub fn merge_collisions(
    assignments: &[(usize, usize, usize)],
    cells: &[BBox],
    lines_per_cell: &[Vec<TextLine>],
    positions: Positioner,
) -> GridDraft {
    let mut out: Vec<DraftCell> = Vec::new();
    for &(i, row, col) in assignments {
        let lines = lines_per_cell.get(i).cloned().unwrap_or_default();
        match out.iter_mut().find(|c| c.row == row && c.col == col) {
            Some(existing) => {
                existing.detected = existing.detected.union(&cells[i]);
                existing.add_lines(lines);
            }
            None => {
                let mut c = DraftCell::new(row, col, cells[i]);
                c.add_lines(lines);
                out.push(c);
            }
        }
    }
    let mut draft = GridDraft {
        n_rows: positions.centers_y.len(),
        n_cols: positions.centers_x.len(),
        cells: out,
        positions,
    };
    draft.sort();
    draft
}

impl GridDraft {
    fn sort(&mut self) {
        self.cells.sort_by_key(|c| (c.row, c.col));
    }

    pub fn cell_at(&self, row: usize, col: usize) -> Option<usize> {
        self.cells.iter().position(|c| c.covers(row, col))
    }

    fn row_col_empty(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> bool {
        rows.clone().all(|r| cols.clone().all(|c| self.cell_at(r, c).is_none()))
    }

    /// Folds cells that begin with a lowercase letter into the nearest occupied
    /// non-empty cell above them in the same column. Top to bottom, so chains
    /// of continuations collapse into their head.
    pub fn lowercase_merge(&mut self) {
        self.sort();
        let mut i = 0;
        while i < self.cells.len() {
            let (row, col) = (self.cells[i].row, self.cells[i].col);
            if !starts_lowercase(&self.cells[i].content()) {
                i += 1;
                continue;
            }
            let above = (0..row).rev().find_map(|r| self.cell_at(r, col).filter(|&j| j != i));
            match above {
                Some(j) if !self.cells[j].content().is_empty() => {
                    let moved = self.cells.remove(i);
                    let j = if j > i { j - 1 } else { j };
                    let target = &mut self.cells[j];
                    target.detected = target.detected.union(&moved.detected);
                    target.add_lines(moved.lines);
                }
                _ => i += 1,
            }
        }
    }

    /// Places text lines that no detected cell covered.
    pub fn assign_leftover_text(&mut self, leftovers: &[TextLine]) {
        let mut sorted = leftovers.to_vec();
        sorted.sort_by(line_order);
        for line in sorted {
            let (row, col) = self.positions.slot(&line.bbox);
            match self.cell_at(row, col) {
                Some(j) => self.cells[j].add_lines([line]),
                None => {
                    let mut c = DraftCell::new(row, col, line.bbox);
                    c.add_lines([line]);
                    self.cells.push(c);
                }
            }
        }
        self.sort();
    }

    /// For each empty slot, re-positions the lines of the single-slot cells
    /// directly above and below it; lines that land on the empty slot move there.
    pub fn empty_neighbor_split(&mut self) {
        for r in 0..self.n_rows {
            for c in 0..self.n_cols {
                if self.cell_at(r, c).is_some() {
                    continue;
                }
                let neighbours = [r.checked_sub(1), Some(r + 1).filter(|&n| n < self.n_rows)];
                let mut moved: Vec<TextLine> = Vec::new();
                for nr in neighbours.into_iter().flatten() {
                    let Some(j) = self.cell_at(nr, c) else { continue };
                    let cell = &mut self.cells[j];
                    if cell.row_span != 1 || cell.col_span != 1 {
                        continue;
                    }
                    let (stay, go): (Vec<TextLine>, Vec<TextLine>) =
                        cell.lines.drain(..).partition(|l| self.positions.slot(&l.bbox) != (r, c));
                    cell.lines = stay;
                    moved.extend(go);
                }
                if moved.is_empty() {
                    continue;
                }
                self.cells.retain(|cell| !cell.lines.is_empty());
                let mut fresh = DraftCell::new(r, c, BBox::ZERO);
                fresh.add_lines(moved);
                fresh.detected = fresh.bbox();
                self.cells.push(fresh);
            }
        }
        self.sort();
    }

    /// Grows spans into neighbouring rows and columns that are empty across the
    /// cell's extent and whose center the cell's text box crosses.
    pub fn expand_spans(&mut self) {
        self.sort();
        let cy = self.positions.centers_y.clone();
        let cx = self.positions.centers_x.clone();
        for i in 0..self.cells.len() {
            let b = self.cells[i].bbox();
            loop {
                let cell = &self.cells[i];
                let (r0, r1, c0, c1) = (cell.row, cell.row + cell.row_span, cell.col, cell.col + cell.col_span);
                let crosses = |lo: f64, hi: f64, center: f64| lo < center && center < hi;
                if r1 < self.n_rows && crosses(b.y1, b.y2, cy[r1]) && self.row_col_empty(r1..r1 + 1, c0..c1) {
                    self.cells[i].row_span += 1;
                } else if r0 > 0 && crosses(b.y1, b.y2, cy[r0 - 1]) && self.row_col_empty(r0 - 1..r0, c0..c1) {
                    self.cells[i].row -= 1;
                    self.cells[i].row_span += 1;
                } else if c1 < self.n_cols && crosses(b.x1, b.x2, cx[c1]) && self.row_col_empty(r0..r1, c1..c1 + 1) {
                    self.cells[i].col_span += 1;
                } else if c0 > 0 && crosses(b.x1, b.x2, cx[c0 - 1]) && self.row_col_empty(r0..r1, c0 - 1..c0) {
                    self.cells[i].col -= 1;
                    self.cells[i].col_span += 1;
                } else {
                    break;
                }
            }
        }
        self.sort();
    }

    /// Drops rows and columns that no cell covers, renumbering the rest.
    pub fn compact(&mut self) {
        let row_used: Vec<bool> =
            (0..self.n_rows).map(|r| self.cells.iter().any(|c| (c.row..c.row + c.row_span).contains(&r))).collect();
        let col_used: Vec<bool> =
            (0..self.n_cols).map(|k| self.cells.iter().any(|c| (c.col..c.col + c.col_span).contains(&k))).collect();
        let remap = |used: &[bool]| -> Vec<usize> {
            let mut next = 0;
            used.iter()
                .map(|&u| {
                    let idx = next;
                    if u {
                        next += 1;
                    }
                    idx
                })
                .collect()
        };
        let (row_map, col_map) = (remap(&row_used), remap(&col_used));
        for c in &mut self.cells {
            let last_row = c.row + c.row_span - 1;
            let last_col = c.col + c.col_span - 1;
            let (r0, c0) = (row_map[c.row], col_map[c.col]);
            c.row_span = row_map[last_row] - r0 + 1;
            c.col_span = col_map[last_col] - c0 + 1;
            c.row = r0;
            c.col = c0;
        }
        let keep = |centers: &[f64], used: &[bool]| -> Vec<f64> {
            centers.iter().zip(used).filter(|(_, &u)| u).map(|(&v, _)| v).collect()
        };
        self.positions.centers_y = keep(&self.positions.centers_y, &row_used);
        self.positions.centers_x = keep(&self.positions.centers_x, &col_used);
        self.n_rows = self.positions.centers_y.len();
        self.n_cols = self.positions.centers_x.len();
        self.sort();
    }

    pub fn into_structure(self, sampling_dispersion: f64) -> TableStructure {
        let cells = self
            .cells
            .iter()
            .map(|c| LogicalCell {
                row: c.row,
                col: c.col,
                row_span: c.row_span,
                col_span: c.col_span,
                content: c.content(),
                bbox: c.bbox(),
            })
            .collect();
        TableStructure {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            cells,
            alignment_x: self.positions.align_x,
            alignment_y: self.positions.align_y,
            sampling_dispersion,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bb(x1: f64, y1: f64, x2: f64, y2: f64) -> BBox {
        BBox::new(x1, y1, x2, y2)
    }

    /// Positions for a grid whose columns start at 0, 50, 100, ... and rows at 0, 20, 40, ...
    fn positions(rows: usize, cols: usize) -> Positioner {
        Positioner {
            centers_x: (0..cols).map(|c| c as f64 * 50.0).collect(),
            centers_y: (0..rows).map(|r| r as f64 * 20.0).collect(),
            align_x: AlignX::Left,
            align_y: AlignY::Top,
        }
    }

    fn line_at(r: usize, c: usize, text: &str) -> TextLine {
        let (x, y) = (c as f64 * 50.0, r as f64 * 20.0);
        TextLine::new(bb(x, y, x + 30.0, y + 10.0), text)
    }

    fn draft_of(rows: usize, cols: usize, lines: &[TextLine]) -> GridDraft {
        let boxes: Vec<BBox> = lines.iter().map(|l| l.bbox).collect();
        let p = positions(rows, cols);
        let a = assign_positions(&boxes, &p.centers_x, &p.centers_y, p.align_x, p.align_y);
        let per: Vec<Vec<TextLine>> = lines.iter().map(|l| vec![l.clone()]).collect();
        merge_collisions(&a, &boxes, &per, p)
    }

    fn contents(d: &GridDraft) -> Vec<(usize, usize, usize, usize, String)> {
        d.cells.iter().map(|c| (c.row, c.col, c.row_span, c.col_span, c.content())).collect()
    }

    #[test]
    fn positions_exact_and_ties() {
        let cx = [0.0, 50.0, 100.0, 150.0];
        let cy = [0.0];
        let a = assign_positions(&[bb(100.0, 0.0, 120.0, 10.0), bb(25.0, 0.0, 40.0, 10.0)], &cx, &cy, AlignX::Left, AlignY::Top);
        assert_eq!(a, vec![(0, 0, 2), (1, 0, 0)]);
    }

    #[test]
    fn collisions_merge_in_reading_order() {
        let lines = [
            TextLine::new(bb(0.0, 24.0, 20.0, 30.0), "three"),
            TextLine::new(bb(2.0, 20.0, 20.0, 23.0), "one"),
            TextLine::new(bb(1.0, 22.0, 20.0, 24.0), "two"),
        ];
        let d = draft_of(2, 1, &lines);
        assert_eq!(contents(&d), vec![(1, 0, 1, 1, "one two three".to_string())]);
        assert_eq!(d.cells[0].bbox(), bb(0.0, 20.0, 20.0, 30.0));

        let no_collision = draft_of(1, 2, &[line_at(0, 0, "A"), line_at(0, 1, "B")]);
        assert_eq!(no_collision.cells.len(), 2);
    }

    #[test]
    fn lowercase_merges_upward() {
        let mut d = draft_of(3, 2, &[line_at(0, 0, "Revenue"), line_at(1, 0, "continued text"), line_at(1, 1, "Total"), line_at(0, 1, "lower top")]);
        d.lowercase_merge();
        let c = contents(&d);
        assert!(c.contains(&(0, 0, 1, 1, "Revenue continued text".to_string())));
        assert!(c.contains(&(1, 1, 1, 1, "Total".to_string())));
        assert!(c.contains(&(0, 1, 1, 1, "lower top".to_string())));
        assert_eq!(c.len(), 3);
    }

    #[test]
    fn lowercase_cascade_skips_vacated_rows() {
        let mut d = draft_of(3, 1, &[line_at(0, 0, "Head"), line_at(1, 0, "second"), line_at(2, 0, "third")]);
        d.lowercase_merge();
        assert_eq!(contents(&d), vec![(0, 0, 1, 1, "Head second third".to_string())]);
    }

    #[test]
    fn leftovers_fill_or_merge() {
        let mut d = draft_of(3, 2, &[line_at(0, 0, "A"), line_at(0, 1, "B"), line_at(1, 0, "C")]);
        d.assign_leftover_text(&[line_at(2, 1, "Footer"), TextLine::new(bb(51.0, 1.0, 60.0, 9.0), "B2")]);
        let c = contents(&d);
        assert!(c.contains(&(2, 1, 1, 1, "Footer".to_string())));
        assert!(c.contains(&(0, 1, 1, 1, "B B2".to_string())));

        let before = draft_of(1, 1, &[line_at(0, 0, "A")]);
        let mut after = before.clone();
        after.assign_leftover_text(&[]);
        assert_eq!(before, after);
    }

    #[test]
    fn split_fills_empty_slot_below() {
        let top = line_at(0, 0, "Alpha");
        let second = line_at(1, 0, "Beta");
        let boxes = vec![top.bbox.union(&second.bbox), line_at(0, 1, "X").bbox, line_at(1, 1, "Y").bbox];
        let p = positions(2, 2);
        let a = assign_positions(&boxes, &p.centers_x, &p.centers_y, p.align_x, p.align_y);
        let per = vec![vec![top, second], vec![line_at(0, 1, "X")], vec![line_at(1, 1, "Y")]];
        let mut d = merge_collisions(&a, &boxes, &per, p);
        assert_eq!(d.cells[0].content(), "Alpha Beta");
        d.empty_neighbor_split();
        let c = contents(&d);
        assert!(c.contains(&(0, 0, 1, 1, "Alpha".to_string())));
        assert!(c.contains(&(1, 0, 1, 1, "Beta".to_string())));
    }

    #[test]
    fn split_without_candidates_is_identity() {
        let full = draft_of(2, 2, &[line_at(0, 0, "A"), line_at(0, 1, "B"), line_at(1, 0, "C"), line_at(1, 1, "D")]);
        let mut d = full.clone();
        d.empty_neighbor_split();
        assert_eq!(d, full);
        // empty slot whose neighbours are empty too
        let sparse = draft_of(3, 2, &[line_at(0, 1, "B")]);
        let mut d = sparse.clone();
        d.empty_neighbor_split();
        assert_eq!(d, sparse);
    }

    #[test]
    fn tall_header_spans_empty_rows() {
        let tall = TextLine::new(bb(0.0, 0.0, 30.0, 50.0), "Region");
        let mut lines = vec![tall];
        for r in 0..3 {
            lines.push(line_at(r, 1, &format!("V{r}")));
        }
        let mut d = draft_of(3, 2, &lines);
        d.expand_spans();
        assert!(contents(&d).contains(&(0, 0, 3, 1, "Region".to_string())));
    }

    #[test]
    fn spans_blocked_by_occupied_neighbour() {
        let tall = TextLine::new(bb(0.0, 0.0, 30.0, 50.0), "Region");
        let mut d = draft_of(3, 2, &[tall, line_at(1, 0, "Busy"), line_at(0, 1, "B")]);
        let before = contents(&d);
        d.expand_spans();
        assert_eq!(contents(&d), before);
    }

    #[test]
    fn wide_header_spans_columns() {
        let wide = TextLine::new(bb(50.0, 0.0, 140.0, 10.0), "Assets");
        let mut d = draft_of(2, 3, &[wide, line_at(1, 0, "Item"), line_at(1, 1, "2019"), line_at(1, 2, "2020")]);
        d.expand_spans();
        assert!(contents(&d).contains(&(0, 1, 1, 2, "Assets".to_string())));
    }

    #[test]
    fn compact_removes_unused_rows() {
        let mut d = draft_of(3, 2, &[line_at(0, 0, "A"), line_at(2, 0, "C"), line_at(2, 1, "D")]);
        d.compact();
        assert_eq!((d.n_rows, d.n_cols), (2, 2));
        assert_eq!(d.positions.centers_y, vec![0.0, 40.0]);
        assert_eq!(contents(&d).iter().map(|c| (c.0, c.1)).collect::<Vec<_>>(), vec![(0, 0), (1, 0), (1, 1)]);
    }
}
