//! Independent oracles and hand-built fixtures shared by the integration tests.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tablegrid::constraint::ConstraintConfig;
use tablegrid::eval::{normalize_content, AdjacencyRelation, Direction, NodeLabel, TableTree};
use tablegrid::{BBox, LogicalCell, TableStructure, TextLine};

pub fn bb(x1: f64, y1: f64, x2: f64, y2: f64) -> BBox {
    BBox::new(x1, y1, x2, y2)
}

// ---------------------------------------------------------------------------
// Rasterization

/// Unit pixels `[x, x+1) × [y, y+1)` inside `b`, for integer-coordinate boxes.
fn pixels(b: &BBox) -> impl Iterator<Item = (i64, i64)> {
    let (x1, y1, x2, y2) = (b.x1.ceil() as i64, b.y1.ceil() as i64, b.x2.floor() as i64, b.y2.floor() as i64);
    (y1..y2).flat_map(move |y| (x1..x2).map(move |x| (x, y)))
}

fn covers_pixel(b: &BBox, (x, y): (i64, i64)) -> bool {
    b.x1 <= x as f64 && (x + 1) as f64 <= b.x2 && b.y1 <= y as f64 && (y + 1) as f64 <= b.y2
}

/// Pixels of `query` covered by at least one cell.
pub fn raster_slc(cells: &[BBox], query: &BBox) -> u64 {
    pixels(query).filter(|&p| cells.iter().any(|c| covers_pixel(c, p))).count() as u64
}

/// Pixels of `outer` outside `inner`, and how many of them a cell covers.
pub fn raster_band(cells: &[BBox], inner: &BBox, outer: &BBox) -> (u64, u64) {
    let mut band = 0;
    let mut covered = 0;
    for p in pixels(outer) {
        if covers_pixel(inner, p) {
            continue;
        }
        band += 1;
        if cells.iter().any(|c| covers_pixel(c, p)) {
            covered += 1;
        }
    }
    (covered, band)
}

/// Grows (or shrinks, for negative `m`) every side by `m`; an inverted axis collapses.
fn grow(b: &BBox, m: f64) -> BBox {
    let mut out = bb(b.x1 - m, b.y1 - m, b.x2 + m, b.y2 + m);
    if out.x1 > out.x2 {
        let mid = (b.x1 + b.x2) / 2.0;
        out.x1 = mid;
        out.x2 = mid;
    }
    if out.y1 > out.y2 {
        let mid = (b.y1 + b.y2) / 2.0;
        out.y1 = mid;
        out.y2 = mid;
    }
    out
}

/// The four penalty conditions computed on pixels:
/// `[sparse table, sparse inner band, cells just outside, sparse bottom strip]`.
pub fn raster_penalty(table: &BBox, cells: &[BBox], cfg: &ConstraintConfig) -> [bool; 4] {
    let sparse = |inner: &BBox, alpha: f64| {
        let (covered, band) = raster_band(cells, inner, table);
        (covered as f64) < alpha * band as f64
    };
    let nothing = bb(0.0, 0.0, 0.0, 0.0);
    let inner_band = grow(table, cfg.mu1);
    let (outside_covered, _) = raster_band(cells, &grow(table, cfg.mu2), &grow(table, cfg.mu3));
    let mut above_bottom = *table;
    above_bottom.y2 = (table.y2 + cfg.mu4).max(table.y1);
    [
        sparse(&nothing, cfg.alpha),
        sparse(&inner_band, cfg.alpha_inner_band.unwrap_or(cfg.alpha)),
        outside_covered > 0,
        sparse(&above_bottom, cfg.alpha_bottom_strip.unwrap_or(cfg.alpha)),
    ]
}

pub fn random_int_box(rng: &mut ChaCha8Rng, extent: i64, max_side: i64) -> BBox {
    let x = rng.gen_range(0..extent) as f64;
    let y = rng.gen_range(0..extent) as f64;
    let w = rng.gen_range(0..=max_side) as f64;
    let h = rng.gen_range(0..=max_side) as f64;
    bb(x, y, x + w, y + h)
}

// ---------------------------------------------------------------------------
// Tree edit distance by exhaustive forest recursion

struct Arena<'a> {
    labels: Vec<&'a NodeLabel>,
    children: Vec<Vec<usize>>,
}

impl<'a> Arena<'a> {
    fn new(root: &'a TableTree) -> (Self, usize) {
        let mut a = Arena { labels: Vec::new(), children: Vec::new() };
        let r = a.add(root);
        (a, r)
    }

    fn add(&mut self, t: &'a TableTree) -> usize {
        let id = self.labels.len();
        self.labels.push(&t.label);
        self.children.push(Vec::new());
        let kids: Vec<usize> = t.children.iter().map(|c| self.add(c)).collect();
        self.children[id] = kids;
        id
    }
}

fn relabel_cost(a: &NodeLabel, b: &NodeLabel) -> f64 {
    match (a, b) {
        (NodeLabel::Table, NodeLabel::Table) | (NodeLabel::Tr, NodeLabel::Tr) => 0.0,
        (
            NodeLabel::Td { colspan: c1, rowspan: r1, content: x },
            NodeLabel::Td { colspan: c2, rowspan: r2, content: y },
        ) => {
            if c1 != c2 || r1 != r2 {
                1.0
            } else {
                let longest = x.chars().count().max(y.chars().count());
                if longest == 0 {
                    0.0
                } else {
                    levenshtein(x, y) as f64 / longest as f64
                }
            }
        }
        _ => 1.0,
    }
}

/// Plain full-matrix Levenshtein distance over characters.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        d[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

struct ForestDistance<'a> {
    a: Arena<'a>,
    b: Arena<'a>,
    memo: HashMap<(Vec<usize>, Vec<usize>), f64>,
}

impl ForestDistance<'_> {
    fn size(arena: &Arena, forest: &[usize]) -> usize {
        forest.iter().map(|&v| 1 + Self::size(arena, &arena.children[v])).sum()
    }

    /// Rightmost-root recursion over forests given as root sequences.
    fn dist(&mut self, f: &[usize], g: &[usize]) -> f64 {
        if f.is_empty() {
            return Self::size(&self.b, g) as f64;
        }
        if g.is_empty() {
            return Self::size(&self.a, f) as f64;
        }
        let key = (f.to_vec(), g.to_vec());
        if let Some(&d) = self.memo.get(&key) {
            return d;
        }
        let (v, w) = (*f.last().unwrap(), *g.last().unwrap());
        let f_minus_v: Vec<usize> = f[..f.len() - 1].iter().chain(&self.a.children[v]).copied().collect();
        let g_minus_w: Vec<usize> = g[..g.len() - 1].iter().chain(&self.b.children[w]).copied().collect();
        let delete = self.dist(&f_minus_v, g) + 1.0;
        let insert = self.dist(f, &g_minus_w) + 1.0;
        let kids_v = self.a.children[v].clone();
        let kids_w = self.b.children[w].clone();
        let rest = self.dist(&f[..f.len() - 1], &g[..g.len() - 1]);
        let matched = self.dist(&kids_v, &kids_w) + rest + relabel_cost(self.a.labels[v], self.b.labels[w]);
        let d = delete.min(insert).min(matched);
        self.memo.insert(key, d);
        d
    }
}

pub fn oracle_ted(a: &TableTree, b: &TableTree) -> f64 {
    let (arena_a, ra) = Arena::new(a);
    let (arena_b, rb) = Arena::new(b);
    let mut fd = ForestDistance { a: arena_a, b: arena_b, memo: HashMap::new() };
    fd.dist(&[ra], &[rb])
}

// ---------------------------------------------------------------------------
// Adjacency by direct grid scanning

/// Relations found by walking every grid row left to right and every column
/// top to bottom, linking consecutive distinct non-blank cells.
pub fn oracle_adjacency(t: &TableStructure) -> Vec<AdjacencyRelation> {
    let mut owner = vec![vec![None::<usize>; t.n_cols]; t.n_rows];
    for (i, c) in t.cells.iter().enumerate() {
        for r in c.row..c.row + c.row_span {
            for k in c.col..c.col + c.col_span {
                owner[r][k] = Some(i);
            }
        }
    }
    let text: Vec<String> = t.cells.iter().map(|c| normalize_content(&c.content)).collect();
    let mut best: BTreeMap<(usize, usize, Direction), usize> = BTreeMap::new();
    let mut walk = |slots: Vec<Option<usize>>, dir: Direction| {
        let mut last: Option<usize> = None;
        let mut blanks = 0;
        for s in slots {
            match s.filter(|&i| !text[i].is_empty()) {
                None => blanks += 1,
                Some(i) if Some(i) == last => {}
                Some(i) => {
                    if let Some(prev) = last {
                        let e = best.entry((prev, i, dir)).or_insert(blanks);
                        *e = (*e).min(blanks);
                    }
                    last = Some(i);
                    blanks = 0;
                }
            }
        }
    };
    for r in 0..t.n_rows {
        walk(owner[r].clone(), Direction::Horizontal);
    }
    for k in 0..t.n_cols {
        walk((0..t.n_rows).map(|r| owner[r][k]).collect(), Direction::Vertical);
    }
    let mut out: Vec<AdjacencyRelation> = best
        .into_iter()
        .map(|((a, b, direction), blanks_skipped)| AdjacencyRelation {
            from_content: text[a].clone(),
            to_content: text[b].clone(),
            direction,
            blanks_skipped,
        })
        .collect();
    out.sort();
    out
}

// ---------------------------------------------------------------------------
// Random structures

/// A random valid structure of at most `max_rows × max_cols` with spans of up
/// to 2, occasional holes and contents from a small alphabet.
pub fn random_structure(rng: &mut ChaCha8Rng, max_rows: usize, max_cols: usize) -> TableStructure {
    const WORDS: [&str; 7] = ["A", "B", "AB", "BA", "x", "", "Total"];
    let rows = rng.gen_range(1..=max_rows);
    let cols = rng.gen_range(1..=max_cols);
    let mut taken = vec![vec![false; cols]; rows];
    let mut cells = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if taken[r][c] || rng.gen_bool(0.1) {
                continue;
            }
            let mut rs = if r + 1 < rows && rng.gen_bool(0.2) { 2 } else { 1 };
            let mut cs = if c + 1 < cols && rng.gen_bool(0.2) { 2 } else { 1 };
            let free = |rs: usize, cs: usize, taken: &Vec<Vec<bool>>| {
                (r..r + rs).all(|rr| (c..c + cs).all(|cc| !taken[rr][cc]))
            };
            if !free(rs, cs, &taken) {
                rs = 1;
                cs = 1;
            }
            for row in taken.iter_mut().skip(r).take(rs) {
                for slot in row.iter_mut().skip(c).take(cs) {
                    *slot = true;
                }
            }
            let w = WORDS[rng.gen_range(0..WORDS.len())];
            cells.push(LogicalCell::new(r, c, w).with_span(rs, cs));
        }
    }
    TableStructure::new(rows, cols, cells)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Structure-recovery fixtures

/// Text of `s` at `(x, y)`: 6 px per character, 10 px tall.
pub fn text(x: f64, y: f64, s: &str) -> TextLine {
    TextLine::new(bb(x, y, x + 6.0 * s.chars().count() as f64, y + 10.0), s)
}

pub fn pad(b: &BBox) -> BBox {
    bb(b.x1 - 2.0, b.y1 - 2.0, b.x2 + 2.0, b.y2 + 2.0)
}

/// Detector output for one table region plus the structure a human reads.
pub struct Fixture {
    pub name: &'static str,
    pub cells: Vec<BBox>,
    pub lines: Vec<TextLine>,
    pub table: BBox,
    pub expected: TableStructure,
}

fn region(cells: &[BBox], lines: &[TextLine]) -> BBox {
    let all: Vec<BBox> = cells.iter().copied().chain(lines.iter().map(|l| l.bbox)).collect();
    let u = BBox::union_all(&all).unwrap();
    bb(u.x1 - 4.0, u.y1 - 4.0, u.x2 + 4.0, u.y2 + 4.0)
}

fn grid(rows: &[&[&str]]) -> TableStructure {
    let mut cells = Vec::new();
    for (r, row) in rows.iter().enumerate() {
        for (c, s) in row.iter().enumerate() {
            if !s.is_empty() {
                cells.push(LogicalCell::new(r, c, *s));
            }
        }
    }
    TableStructure::new(rows.len(), rows[0].len(), cells)
}

/// Both cells of a two-line row detected line by line; the continuation
/// lines start lowercase and form a row of their own.
pub fn oversplit_lowercase() -> Fixture {
    let lines = vec![
        text(100.0, 100.0, "Item"),
        text(300.0, 100.0, "Amount"),
        text(100.0, 130.0, "Net income"),
        text(100.0, 146.0, "attributable to owners"),
        text(300.0, 130.0, "1200"),
        text(300.0, 146.0, "(restated)"),
        text(100.0, 180.0, "Dividends"),
        text(300.0, 180.0, "300"),
    ];
    let cells = lines.iter().map(|l| pad(&l.bbox)).collect::<Vec<_>>();
    Fixture {
        name: "oversplit-lowercase",
        table: region(&cells, &lines),
        cells,
        lines,
        expected: grid(&[&["Item", "Amount"], &["Net income attributable to owners", "1200 (restated)"], &["Dividends", "300"]]),
    }
}

/// One cell of the middle row has text but no detected box.
pub fn missing_cell_row() -> Fixture {
    let names = [["A1", "B1", "C1"], ["A2", "B2", "C2"], ["A3", "B3", "C3"]];
    let mut lines = Vec::new();
    let mut cells = Vec::new();
    for (r, row) in names.iter().enumerate() {
        for (c, s) in row.iter().enumerate() {
            let l = text(50.0 + 80.0 * c as f64, 50.0 + 24.0 * r as f64, s);
            if (r, c) != (1, 1) {
                cells.push(pad(&l.bbox));
            }
            lines.push(l);
        }
    }
    Fixture {
        name: "missing-cell-row",
        table: region(&cells, &lines),
        cells,
        lines,
        expected: grid(&[&["A1", "B1", "C1"], &["A2", "B2", "C2"], &["A3", "B3", "C3"]]),
    }
}

/// A header left-aligned with column 1 whose text runs across column 2.
pub fn spanning_header() -> Fixture {
    let rows: [[&str; 3]; 3] = [["Year", "2019", "2020"], ["Cash", "10", "12"], ["Debt", "5", "7"]];
    let mut lines = vec![text(100.0, 0.0, "Total Assets (USD millions)")];
    for (r, row) in rows.iter().enumerate() {
        for (c, s) in row.iter().enumerate() {
            lines.push(text(100.0 * c as f64, 30.0 * (r + 1) as f64, s));
        }
    }
    let cells = lines.iter().map(|l| pad(&l.bbox)).collect::<Vec<_>>();
    let mut expected = grid(&[&["", "", ""], &["Year", "2019", "2020"], &["Cash", "10", "12"], &["Debt", "5", "7"]]);
    expected.cells.insert(0, LogicalCell::new(0, 1, "Total Assets (USD millions)").with_span(1, 2));
    Fixture { name: "spanning-header", table: region(&cells, &lines), cells, lines, expected }
}

/// Two vertically adjacent cells detected as one box; the lower slot looks empty.
pub fn overmerged_above_empty() -> Fixture {
    let names = [["Q1", "Q2", "Q3"], ["R1", "R2", "R3"], ["S1", "S2", "S3"]];
    let mut lines = Vec::new();
    let mut cells = Vec::new();
    for (r, row) in names.iter().enumerate() {
        for (c, s) in row.iter().enumerate() {
            let l = text(20.0 + 70.0 * c as f64, 20.0 + 26.0 * r as f64, s);
            if c != 2 || r == 0 {
                cells.push(pad(&l.bbox));
            }
            lines.push(l);
        }
    }
    // R3 and S3 in one detection
    let merged = pad(&lines[5].bbox).union(&pad(&lines[8].bbox));
    cells.push(merged);
    Fixture {
        name: "overmerged-above-empty",
        table: region(&cells, &lines),
        cells,
        lines,
        expected: grid(&[&["Q1", "Q2", "Q3"], &["R1", "R2", "R3"], &["S1", "S2", "S3"]]),
    }
}

pub fn robustness_fixtures() -> Vec<Fixture> {
    vec![oversplit_lowercase(), missing_cell_row(), spanning_header(), overmerged_above_empty()]
}
