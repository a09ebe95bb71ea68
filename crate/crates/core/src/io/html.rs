//! Minimal HTML for single tables.
//!
//! The emitter writes `<table><tr><td>..</td></tr></table>` with `colspan` and
//! `rowspan` only when they exceed 1. Grid slots no cell covers are written as
//! empty `<td></td>`. The parser places cells with the usual left-to-right,
//! skip-occupied rule and ignores styling tags.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structure::{LogicalCell, TableStructure};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HtmlCell {
    pub colspan: usize,
    pub rowspan: usize,
    pub text: String,
}

/// Rows of cells as they appear in the markup.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct HtmlTable {
    pub rows: Vec<Vec<HtmlCell>>,
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(pos) = rest.find('&') {
        out.push_str(&rest[..pos]);
        rest = &rest[pos..];
        let decoded = rest.find(';').filter(|&end| end <= 10).and_then(|end| {
            let ent = &rest[1..end];
            let c = match ent {
                "amp" => Some('&'),
                "lt" => Some('<'),
                "gt" => Some('>'),
                "quot" => Some('"'),
                "apos" => Some('\''),
                "nbsp" => Some(' '),
                _ if ent.starts_with("#x") || ent.starts_with("#X") => {
                    u32::from_str_radix(&ent[2..], 16).ok().and_then(char::from_u32)
                }
                _ if ent.starts_with('#') => ent[1..].parse().ok().and_then(char::from_u32),
                _ => None,
            };
            c.map(|c| (c, end))
        });
        match decoded {
            Some((c, end)) => {
                out.push(c);
                rest = &rest[end + 1..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

impl HtmlTable {
    /// Cells in anchor order; uncovered slots become empty cells.
    #[allow(clippy::needless_range_loop)]
    pub fn from_structure(t: &TableStructure) -> HtmlTable {
        let grid = t.occupancy();
        let mut rows = vec![Vec::new(); t.n_rows];
        for (r, row) in rows.iter_mut().enumerate() {
            for c in 0..t.n_cols {
                match grid[r][c] {
                    Some(i) => {
                        let cell = &t.cells[i];
                        if (cell.row, cell.col) == (r, c) {
                            row.push(HtmlCell { colspan: cell.col_span, rowspan: cell.row_span, text: cell.content.clone() });
                        }
                    }
                    None => row.push(HtmlCell { colspan: 1, rowspan: 1, text: String::new() }),
                }
            }
        }
        HtmlTable { rows }
    }

    pub fn to_html(&self) -> String {
        let mut out = String::from("<table>");
        for row in &self.rows {
            out.push_str("<tr>");
            for c in row {
                out.push_str("<td");
                if c.colspan > 1 {
                    out.push_str(&format!(" colspan=\"{}\"", c.colspan));
                }
                if c.rowspan > 1 {
                    out.push_str(&format!(" rowspan=\"{}\"", c.rowspan));
                }
                out.push('>');
                out.push_str(&escape(&c.text));
                out.push_str("</td>");
            }
            out.push_str("</tr>");
        }
        out.push_str("</table>");
        out
    }

    /// Grid placement: each cell takes the leftmost free slot of its row.
    pub fn to_structure(&self) -> Result<TableStructure> {
        let mut occupied: Vec<Vec<bool>> = Vec::new();
        let mut cells = Vec::new();
        let mut n_cols = 0;
        let ensure = |occ: &mut Vec<Vec<bool>>, r: usize, c: usize| {
            if occ.len() <= r {
                occ.resize(r + 1, Vec::new());
            }
            if occ[r].len() <= c {
                occ[r].resize(c + 1, false);
            }
        };
        for (r, row) in self.rows.iter().enumerate() {
            let mut col = 0;
            for cell in row {
                if cell.colspan == 0 || cell.rowspan == 0 {
                    return Err(Error::Html { row: r, message: "zero span".into() });
                }
                loop {
                    ensure(&mut occupied, r, col);
                    if !occupied[r][col] {
                        break;
                    }
                    col += 1;
                }
                for rr in r..r + cell.rowspan {
                    for cc in col..col + cell.colspan {
                        ensure(&mut occupied, rr, cc);
                        if occupied[rr][cc] {
                            return Err(Error::Html {
                                row: r,
                                message: format!("cell at column {col} overlaps an earlier span at ({rr}, {cc})"),
                            });
                        }
                        occupied[rr][cc] = true;
                    }
                }
                cells.push(LogicalCell::new(r, col, cell.text.clone()).with_span(cell.rowspan, cell.colspan));
                col += cell.colspan;
                n_cols = n_cols.max(col);
            }
        }
        let n_rows = occupied.len().max(self.rows.len());
        Ok(TableStructure::new(n_rows, n_cols, cells))
    }

    pub fn parse(html: &str) -> Result<HtmlTable> {
        Parser::new(html).table()
    }
}

pub fn emit_html(t: &TableStructure) -> String {
    HtmlTable::from_structure(t).to_html()
}

pub fn parse_html(html: &str) -> Result<TableStructure> {
    HtmlTable::parse(html)?.to_structure()
}

#[derive(Debug, PartialEq)]
enum Token<'a> {
    Open { name: String, attrs: Vec<(String, String)> },
    Close { name: String },
    Text(&'a str),
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self { src, pos: 0 }
    }

    fn next_token(&mut self) -> Option<Token<'a>> {
        let rest = &self.src[self.pos..];
        if rest.is_empty() {
            return None;
        }
        if let Some(body) = rest.strip_prefix("<!--") {
            let end = body.find("-->").map(|e| e + 3).unwrap_or(body.len());
            self.pos += 4 + end;
            return self.next_token();
        }
        if !rest.starts_with('<') {
            let end = rest.find('<').unwrap_or(rest.len());
            self.pos += end;
            return Some(Token::Text(&rest[..end]));
        }
        let end = tag_end(rest);
        self.pos += end;
        let inner = rest[1..end].trim_end_matches('>').trim();
        if let Some(name) = inner.strip_prefix('/') {
            return Some(Token::Close { name: name.trim().to_ascii_lowercase() });
        }
        if inner.starts_with('!') || inner.starts_with('?') {
            return self.next_token();
        }
        let inner = inner.trim_end_matches('/');
        let name_end = inner.find(|c: char| c.is_whitespace()).unwrap_or(inner.len());
        let name = inner[..name_end].to_ascii_lowercase();
        Some(Token::Open { name, attrs: parse_attrs(&inner[name_end..]) })
    }

    fn table(&mut self) -> Result<HtmlTable> {
        let mut rows: Vec<Vec<HtmlCell>> = Vec::new();
        let mut seen_table = false;
        let mut closed = false;
        let mut cell: Option<HtmlCell> = None;
        while let Some(tok) = self.next_token() {
            if closed {
                match tok {
                    Token::Text(t) if t.trim().is_empty() => continue,
                    _ => return Err(Error::Html { row: rows.len(), message: "content after the table".into() }),
                }
            }
            let row_idx = rows.len().saturating_sub(1);
            match tok {
                Token::Open { name, .. } if name == "table" => {
                    if seen_table {
                        return Err(Error::Html { row: row_idx, message: "nested table".into() });
                    }
                    seen_table = true;
                }
                Token::Text(t) if !seen_table => {
                    if !t.trim().is_empty() {
                        return Err(Error::Html { row: 0, message: "text outside a table element".into() });
                    }
                }
                Token::Open { name, .. } if !seen_table => {
                    return Err(Error::Html { row: 0, message: format!("expected <table>, found <{name}>") });
                }
                Token::Close { name } if name == "table" => {
                    if let Some(c) = cell.take() {
                        push_cell(&mut rows, c);
                    }
                    closed = true;
                }
                Token::Open { name, .. } if name == "tr" => {
                    if let Some(c) = cell.take() {
                        push_cell(&mut rows, c);
                    }
                    rows.push(Vec::new());
                }
                Token::Open { name, attrs } if name == "td" || name == "th" => {
                    if let Some(c) = cell.take() {
                        push_cell(&mut rows, c);
                    }
                    if rows.is_empty() {
                        rows.push(Vec::new());
                    }
                    let span = |key: &str| -> Result<usize> {
                        match attrs.iter().find(|(k, _)| k == key) {
                            None => Ok(1),
                            Some((_, v)) => v.trim().parse::<usize>().ok().filter(|&n| n >= 1).ok_or_else(|| Error::Html {
                                row: rows.len() - 1,
                                message: format!("invalid {key} \"{v}\""),
                            }),
                        }
                    };
                    cell = Some(HtmlCell { colspan: span("colspan")?, rowspan: span("rowspan")?, text: String::new() });
                }
                Token::Close { name } if name == "td" || name == "th" => {
                    if let Some(c) = cell.take() {
                        push_cell(&mut rows, c);
                    }
                }
                Token::Close { name } if name == "tr" => {
                    if let Some(c) = cell.take() {
                        push_cell(&mut rows, c);
                    }
                }
                Token::Open { name, .. } if name == "br" => {
                    if let Some(c) = cell.as_mut() {
                        c.text.push(' ');
                    }
                }
                // section and styling tags carry no structure
                Token::Open { .. } | Token::Close { .. } => {}
                Token::Text(t) => {
                    if let Some(c) = cell.as_mut() {
                        c.text.push_str(&unescape(t));
                    } else if !t.trim().is_empty() {
                        return Err(Error::Html { row: row_idx, message: format!("text outside a cell: {:?}", t.trim()) });
                    }
                }
            }
        }
        if !seen_table {
            return Err(Error::Html { row: 0, message: "no table element".into() });
        }
        if let Some(c) = cell.take() {
            push_cell(&mut rows, c);
        }
        Ok(HtmlTable { rows })
    }
}

fn push_cell(rows: &mut [Vec<HtmlCell>], mut c: HtmlCell) {
    c.text = c.text.split_whitespace().collect::<Vec<_>>().join(" ");
    if let Some(row) = rows.last_mut() {
        row.push(c);
    }
}

/// Byte offset just past the `>` closing the tag at the start of `s`,
/// skipping quoted attribute values.
fn tag_end(s: &str) -> usize {
    let mut quote: Option<char> = None;
    for (i, c) in s.char_indices() {
        match (quote, c) {
            (Some(q), c) if c == q => quote = None,
            (Some(_), _) => {}
            (None, '"') | (None, '\'') => quote = Some(c),
            (None, '>') => return i + 1,
            _ => {}
        }
    }
    s.len()
}

fn parse_attrs(s: &str) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let mut chars = s.trim().chars().peekable();
    loop {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        let mut name = String::new();
        while let Some(&c) = chars.peek() {
            if c.is_whitespace() || c == '=' {
                break;
            }
            name.push(c);
            chars.next();
        }
        if name.is_empty() {
            if chars.next().is_none() {
                break;
            }
            continue;
        }
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        let mut value = String::new();
        if chars.peek() == Some(&'=') {
            chars.next();
            while chars.peek().is_some_and(|c| c.is_whitespace()) {
                chars.next();
            }
            match chars.peek().copied() {
                Some(q @ ('"' | '\'')) => {
                    chars.next();
                    for c in chars.by_ref() {
                        if c == q {
                            break;
                        }
                        value.push(c);
                    }
                }
                _ => {
                    while let Some(&c) = chars.peek() {
                        if c.is_whitespace() {
                            break;
                        }
                        value.push(c);
                        chars.next();
                    }
                }
            }
        }
        out.push((name.to_ascii_lowercase(), unescape(&value)));
    }
    out
}
