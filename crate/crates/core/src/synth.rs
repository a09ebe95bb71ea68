//! Synthetic borderless tables with known structure.
//!
//! Each page holds a title line and one `rows × cols` grid of unique
//! uppercase words. Characters are 6 px wide and 10 px tall; a cell box pads
//! its text by 2 px and columns are left aligned. The page carries the exact
//! cell boxes as borderless cell candidates and two table candidates: the
//! true box and a near-duplicate covering only its top 60% (bottom edge
//! rounded to a whole pixel).

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constraint::ScoredBox;
use crate::eval::CharBox;
use crate::geometry::BBox;
use crate::io::{PageInput, PageTables, TableRecord};
use crate::structure::{LogicalCell, TableStructure, TextLine};

pub const CHAR_WIDTH: f64 = 6.0;
pub const TEXT_HEIGHT: f64 = 10.0;
pub const CELL_PADDING: f64 = 2.0;
pub const MIN_GAP: f64 = 4.0;
const MARGIN: f64 = 40.0;
const UNIFORM_GAP: f64 = 8.0;
const MAX_JITTER_GAP: f64 = 16.0;
const TITLE: &str = "TABLE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GapStyle {
    Uniform,
    Jittered,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPage {
    pub page: PageInput,
    pub table_box: BBox,
    /// Ground truth with cell boxes.
    pub structure: TableStructure,
    pub chars: Vec<CharBox>,
}

impl SyntheticPage {
    pub fn ground_truth(&self) -> PageTables {
        PageTables {
            doc_id: self.page.doc_id.clone(),
            page_index: self.page.page_index,
            tables: vec![TableRecord { bbox: self.table_box, score: None, structure: Some(self.structure.clone()) }],
            char_boxes: Some(self.chars.clone()),
        }
    }
}

fn words(n: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let len = rng.gen_range(2..=6);
        let w: String = (0..len).map(|_| rng.gen_range(b'A'..=b'Z') as char).collect();
        if w != TITLE && seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

fn gaps(n: usize, style: GapStyle, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n)
        .map(|_| match style {
            GapStyle::Uniform => UNIFORM_GAP,
            GapStyle::Jittered => rng.gen_range(MIN_GAP..=MAX_JITTER_GAP).round(),
        })
        .collect()
}

fn text_width(s: &str) -> f64 {
    s.chars().count() as f64 * CHAR_WIDTH
}

fn chars_of(text: &str, x: f64, y: f64) -> impl Iterator<Item = CharBox> + '_ {
    text.chars().enumerate().map(move |(i, c)| {
        let x1 = x + i as f64 * CHAR_WIDTH;
        CharBox::new(BBox::new(x1, y, x1 + CHAR_WIDTH, y + TEXT_HEIGHT), c.to_string())
    })
}

/// One page with a single `rows × cols` table.
pub fn generate_page(doc_id: &str, rows: usize, cols: usize, style: GapStyle, rng: &mut ChaCha8Rng) -> SyntheticPage {
    assert!(rows >= 1 && cols >= 1, "a synthetic table needs at least one cell");
    let content = words(rows * cols, rng);
    let col_gaps = gaps(cols.saturating_sub(1), style, rng);
    let row_gaps = gaps(rows.saturating_sub(1), style, rng);
    let cell_h = TEXT_HEIGHT + 2.0 * CELL_PADDING;

    let col_w: Vec<f64> = (0..cols)
        .map(|c| (0..rows).map(|r| text_width(&content[r * cols + c])).fold(0.0, f64::max) + 2.0 * CELL_PADDING)
        .collect();
    let mut col_x = vec![MARGIN; cols];
    for c in 1..cols {
        col_x[c] = col_x[c - 1] + col_w[c - 1] + col_gaps[c - 1];
    }
    let top = MARGIN + 2.0 * cell_h;
    let mut row_y = vec![top; rows];
    for r in 1..rows {
        row_y[r] = row_y[r - 1] + cell_h + row_gaps[r - 1];
    }

    let mut cells = Vec::with_capacity(rows * cols);
    let mut lines = Vec::with_capacity(rows * cols + 1);
    let mut chars = Vec::new();
    let title_y = MARGIN;
    lines.push(TextLine::new(BBox::new(MARGIN, title_y, MARGIN + text_width(TITLE), title_y + TEXT_HEIGHT), TITLE));
    chars.extend(chars_of(TITLE, MARGIN, title_y));
    for r in 0..rows {
        for c in 0..cols {
            let text = &content[r * cols + c];
            let (tx, ty) = (col_x[c] + CELL_PADDING, row_y[r] + CELL_PADDING);
            let text_box = BBox::new(tx, ty, tx + text_width(text), ty + TEXT_HEIGHT);
            let cell_box = BBox::new(col_x[c], row_y[r], text_box.x2 + CELL_PADDING, row_y[r] + cell_h);
            lines.push(TextLine::new(text_box, text.as_str()));
            chars.extend(chars_of(text, tx, ty));
            cells.push(LogicalCell::new(r, c, text.as_str()).with_box(cell_box));
        }
    }
    let table_box = BBox::union_all(cells.iter().map(|c| &c.bbox)).expect("non-empty grid");
    let partial = BBox { y2: (table_box.y1 + 0.6 * table_box.height()).round(), ..table_box };

    let mut page = PageInput::empty(doc_id, table_box.x2 + MARGIN, table_box.y2 + MARGIN);
    page.table_candidates = vec![ScoredBox::new(table_box, 0.95), ScoredBox::new(partial, 0.93)];
    page.cell_candidates_borderless = cells.iter().map(|c| ScoredBox::new(c.bbox, 0.9)).collect();
    page.text_lines = lines;
    page.char_boxes = Some(chars.clone());
    SyntheticPage { page, table_box, structure: TableStructure::new(rows, cols, cells), chars }
}

/// Seeded generator of synthetic pages.
pub struct Generator {
    rng: ChaCha8Rng,
}

impl Generator {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn page(&mut self, doc_id: &str, rows: usize, cols: usize, style: GapStyle) -> SyntheticPage {
        generate_page(doc_id, rows, cols, style, &mut self.rng)
    }

    /// Uniform draw from an inclusive range.
    pub fn pick(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.gen_range(lo..=hi)
    }

    pub fn coin(&mut self) -> bool {
        self.rng.gen_bool(0.5)
    }
}
