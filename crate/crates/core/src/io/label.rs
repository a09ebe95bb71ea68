//! Boxing the cells of an HTML table by matching its text against the
//! positioned tokens of the rendered page.

use serde::{Deserialize, Serialize};

use super::html::HtmlTable;
use crate::error::Result;
use crate::geometry::BBox;
use crate::structure::{TableStructure, TextLine};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelConfig {
    /// Minimum fraction of non-empty cells that must be matched.
    pub min_match_rate: f64,
    /// Accept tokens within edit distance 1 of each other.
    pub fuzzy: bool,
}

impl Default for LabelConfig {
    fn default() -> Self {
        Self { min_match_rate: 0.9, fuzzy: false }
    }
}

impl LabelConfig {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(0.0..=1.0).contains(&self.min_match_rate) {
            return Err(format!("min_match_rate {} outside [0, 1]", self.min_match_rate));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    /// The HTML structure with boxes on matched cells; unmatched cells keep
    /// the zero box.
    pub structure: TableStructure,
    /// Union of the matched cell boxes.
    pub table_box: Option<BBox>,
    /// `(row, col)` anchors of non-empty cells that found no match.
    pub unmatched: Vec<(usize, usize)>,
    pub match_rate: f64,
    pub failed: bool,
}

/// A word with its box. Lines holding several words are split with each word
/// taking a share of the line width proportional to its character count.
#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub text: String,
    pub bbox: BBox,
}

pub fn tokenize_lines(lines: &[TextLine]) -> Vec<Token> {
    let mut out = Vec::new();
    for line in lines {
        let words: Vec<&str> = line.text.split_whitespace().collect();
        if words.len() <= 1 {
            out.extend(words.first().map(|w| Token { text: (*w).to_string(), bbox: line.bbox }));
            continue;
        }
        let total: usize = line.text.chars().count();
        let per_char = line.bbox.width() / total.max(1) as f64;
        let mut offset = 0usize;
        let mut rest = line.text.as_str();
        for w in words {
            let start = rest.find(w).unwrap_or(0);
            offset += rest[..start].chars().count();
            let len = w.chars().count();
            let x1 = line.bbox.x1 + offset as f64 * per_char;
            out.push(Token { text: w.to_string(), bbox: BBox::new(x1, line.bbox.y1, x1 + len as f64 * per_char, line.bbox.y2) });
            offset += len;
            rest = &rest[start + w.len()..];
        }
    }
    out
}

/// Edit distance of at most one (substitution, insertion or deletion).
fn within_one_edit(a: &str, b: &str) -> bool {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let (short, long) = if a.len() <= b.len() { (&a, &b) } else { (&b, &a) };
    if long.len() - short.len() > 1 {
        return false;
    }
    let prefix = short.iter().zip(long.iter()).take_while(|(x, y)| x == y).count();
    if short.len() == long.len() {
        short[prefix..].iter().skip(1).eq(long[prefix..].iter().skip(1))
    } else {
        short[prefix..].iter().eq(long[prefix + 1..].iter())
    }
}

fn tokens_match(html: &str, page: &str, fuzzy: bool) -> bool {
    html == page || (fuzzy && within_one_edit(html, page))
}

/// Greedy in-order alignment of HTML cells to page tokens.
///
/// Cells are visited in row-major anchor order. Each non-empty cell searches
/// forward from the current cursor for a run of page tokens equal to its own
/// words; a hit boxes the cell with the union of the run and moves the cursor
/// past it, a miss leaves the cell unboxed and the cursor in place.
pub fn align_html_to_tokens(html: &HtmlTable, tokens: &[TextLine], cfg: &LabelConfig) -> Result<Alignment> {
    let mut structure = html.to_structure()?;
    let page = tokenize_lines(tokens);
    let mut cursor = 0usize;
    let mut unmatched = Vec::new();
    let mut non_empty = 0usize;
    let mut boxes = Vec::new();
    for cell in structure.cells.iter_mut() {
        let words: Vec<&str> = cell.content.split_whitespace().collect();
        if words.is_empty() {
            continue;
        }
        non_empty += 1;
        let k = words.len();
        let hit = (cursor..=page.len().saturating_sub(k))
            .filter(|&p| p + k <= page.len())
            .find(|&p| words.iter().zip(&page[p..p + k]).all(|(w, t)| tokens_match(w, &t.text, cfg.fuzzy)));
        match hit {
            Some(p) => {
                let b = BBox::union_all(page[p..p + k].iter().map(|t| &t.bbox)).expect("non-empty run");
                cell.bbox = b;
                boxes.push(b);
                cursor = p + k;
            }
            None => unmatched.push((cell.row, cell.col)),
        }
    }
    let match_rate = if non_empty == 0 { 1.0 } else { (non_empty - unmatched.len()) as f64 / non_empty as f64 };
    Ok(Alignment {
        structure,
        table_box: BBox::union_all(&boxes),
        unmatched,
        match_rate,
        failed: match_rate < cfg.min_match_rate,
    })
}
