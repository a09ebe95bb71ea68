use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Prf;
use crate::structure::TableStructure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Horizontal,
    Vertical,
}

/// Link from a non-blank cell to its nearest non-blank neighbour to the
/// right (horizontal) or below (vertical).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AdjacencyRelation {
    pub from_content: String,
    pub to_content: String,
    pub direction: Direction,
    pub blanks_skipped: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdjacencyOptions {
    /// Treat relations as a set: identical tuples from different grid
    /// positions count once.
    pub dedupe: bool,
}

/// Collapses whitespace runs to one space and trims the ends.
pub fn normalize_content(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// All adjacency relations of `t`, sorted.
///
/// Each spanned row (column) of a cell is scanned to the right (downward)
/// until a non-blank cell is found; slots that are empty or hold a blank cell
/// are counted in `blanks_skipped`. A neighbour reached from several rows of
/// a spanning cell yields one relation with the smallest skip count.
pub fn adjacency_relations(t: &TableStructure, opts: &AdjacencyOptions) -> Vec<AdjacencyRelation> {
    let grid = t.occupancy();
    let content: Vec<String> = t.cells.iter().map(|c| normalize_content(&c.content)).collect();
    let blank_at = |r: usize, c: usize| grid[r][c].is_none_or(|i| content[i].is_empty());

    let mut out = Vec::new();
    for (i, cell) in t.cells.iter().enumerate() {
        if content[i].is_empty() {
            continue;
        }
        for direction in [Direction::Horizontal, Direction::Vertical] {
            let mut nearest: BTreeMap<usize, usize> = BTreeMap::new();
            let (lanes, start, end) = match direction {
                Direction::Horizontal => (cell.row..cell.row + cell.row_span, cell.col + cell.col_span, t.n_cols),
                Direction::Vertical => (cell.col..cell.col + cell.col_span, cell.row + cell.row_span, t.n_rows),
            };
            for lane in lanes {
                let slot = |k: usize| match direction {
                    Direction::Horizontal => (lane, k),
                    Direction::Vertical => (k, lane),
                };
                let mut blanks = 0;
                for k in start..end {
                    let (r, c) = slot(k);
                    if blank_at(r, c) {
                        blanks += 1;
                        continue;
                    }
                    let j = grid[r][c].expect("non-blank slot is occupied");
                    let e = nearest.entry(j).or_insert(blanks);
                    *e = (*e).min(blanks);
                    break;
                }
            }
            out.extend(nearest.into_iter().map(|(j, blanks_skipped)| AdjacencyRelation {
                from_content: content[i].clone(),
                to_content: content[j].clone(),
                direction,
                blanks_skipped,
            }));
        }
    }
    out.sort();
    if opts.dedupe {
        out.dedup();
    }
    out
}

/// Relation counts of one or more gt/prediction pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AdjacencyCounts {
    pub gt: usize,
    pub pred: usize,
    pub matched: usize,
}

impl std::ops::Add for AdjacencyCounts {
    type Output = AdjacencyCounts;

    fn add(self, other: AdjacencyCounts) -> AdjacencyCounts {
        AdjacencyCounts { gt: self.gt + other.gt, pred: self.pred + other.pred, matched: self.matched + other.matched }
    }
}

impl AdjacencyCounts {
    /// Recall is 1 without gt relations; precision is 1 without predicted ones.
    pub fn scores(&self) -> Prf {
        let recall = if self.gt == 0 { 1.0 } else { self.matched as f64 / self.gt as f64 };
        let precision = if self.pred == 0 { 1.0 } else { self.matched as f64 / self.pred as f64 };
        Prf::new(recall, precision)
    }
}

/// Multiset intersection of the two relation collections.
pub fn adjacency_metrics(gt: &TableStructure, pred: &TableStructure, opts: &AdjacencyOptions) -> AdjacencyCounts {
    let g = adjacency_relations(gt, opts);
    let p = adjacency_relations(pred, opts);
    let mut bag: BTreeMap<&AdjacencyRelation, usize> = BTreeMap::new();
    for r in &g {
        *bag.entry(r).or_default() += 1;
    }
    let mut matched = 0;
    for r in &p {
        if let Some(n) = bag.get_mut(r).filter(|n| **n > 0) {
            *n -= 1;
            matched += 1;
        }
    }
    AdjacencyCounts { gt: g.len(), pred: p.len(), matched }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::LogicalCell;

    fn rel(a: &str, b: &str, d: Direction, k: usize) -> AdjacencyRelation {
        AdjacencyRelation { from_content: a.into(), to_content: b.into(), direction: d, blanks_skipped: k }
    }

    fn grid(rows: &[&[&str]]) -> TableStructure {
        let mut cells = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            for (c, s) in row.iter().enumerate() {
                cells.push(LogicalCell::new(r, c, *s));
            }
        }
        TableStructure::new(rows.len(), rows[0].len(), cells)
    }

    #[test]
    fn two_by_two() {
        let mut want = vec![
            rel("A", "B", Direction::Horizontal, 0),
            rel("C", "D", Direction::Horizontal, 0),
            rel("A", "C", Direction::Vertical, 0),
            rel("B", "D", Direction::Vertical, 0),
        ];
        want.sort();
        assert_eq!(adjacency_relations(&grid(&[&["A", "B"], &["C", "D"]]), &Default::default()), want);
    }

    #[test]
    fn blank_is_skipped_and_counted() {
        let t = grid(&[&["A", "", "C"]]);
        assert_eq!(adjacency_relations(&t, &Default::default()), vec![rel("A", "C", Direction::Horizontal, 1)]);
        let missing = TableStructure::new(1, 3, vec![LogicalCell::new(0, 0, "A"), LogicalCell::new(0, 2, "C")]);
        assert_eq!(adjacency_relations(&missing, &Default::default()), vec![rel("A", "C", Direction::Horizontal, 1)]);
    }

    #[test]
    fn single_cell_has_none() {
        assert!(adjacency_relations(&grid(&[&["X"]]), &Default::default()).is_empty());
    }

    #[test]
    fn spanning_cell_links_each_row_once() {
        let t = TableStructure::new(
            2,
            2,
            vec![LogicalCell::new(0, 0, "H").with_span(2, 1), LogicalCell::new(0, 1, "a"), LogicalCell::new(1, 1, "b")],
        );
        let r = adjacency_relations(&t, &Default::default());
        assert!(r.contains(&rel("H", "a", Direction::Horizontal, 0)));
        assert!(r.contains(&rel("H", "b", Direction::Horizontal, 0)));
        assert_eq!(r.len(), 3);
    }

    #[test]
    fn content_whitespace_is_normalized() {
        let t = grid(&[&[" A  x ", "B"]]);
        assert_eq!(adjacency_relations(&t, &Default::default())[0].from_content, "A x");
    }

    #[test]
    fn multiset_versus_set() {
        let t = grid(&[&["A", "B"], &["A", "B"]]);
        assert_eq!(adjacency_relations(&t, &Default::default()).len(), 4);
        assert_eq!(adjacency_relations(&t, &AdjacencyOptions { dedupe: true }).len(), 3);
    }

    #[test]
    fn metrics_missing_cell_loses_its_relations() {
        let gt = grid(&[&["A", "B"], &["C", "D"]]);
        let pred = TableStructure::new(
            2,
            2,
            vec![LogicalCell::new(0, 0, "A"), LogicalCell::new(0, 1, "B"), LogicalCell::new(1, 0, "C")],
        );
        let s = adjacency_metrics(&gt, &pred, &Default::default()).scores();
        // D carried two of the four relations
        assert_eq!(s.recall, 0.5);
        assert_eq!(s.precision, 1.0);
        let three_of_four = AdjacencyCounts { gt: 4, pred: 3, matched: 3 }.scores();
        assert_eq!(three_of_four.recall, 0.75);
        assert_eq!(adjacency_metrics(&gt, &gt, &Default::default()).scores().f1, 1.0);
    }

    #[test]
    fn empty_cases() {
        let empty = TableStructure::default();
        let one = grid(&[&["A", "B"]]);
        let s = adjacency_metrics(&empty, &empty, &Default::default()).scores();
        assert_eq!((s.recall, s.precision, s.f1), (1.0, 1.0, 1.0));
        let s = adjacency_metrics(&empty, &one, &Default::default()).scores();
        assert_eq!((s.recall, s.precision), (1.0, 0.0));
    }
}
