use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::canonical::to_canonical_string;
use super::{read_text, write_atomic};
use crate::constraint::ScoredBox;
use crate::error::{Error, Result};
use crate::eval::CharBox;
use crate::geometry::BBox;
use crate::structure::{Orientation, RulingLine, TableStructure, TextLine};
use crate::style::StyleLabel;

/// Everything known about one document page before table extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PageInput {
    pub doc_id: String,
    #[serde(default)]
    pub page_index: usize,
    pub width: f64,
    pub height: f64,
    #[serde(default)]
    pub table_candidates: Vec<ScoredBox>,
    #[serde(default)]
    pub cell_candidates_bordered: Vec<ScoredBox>,
    #[serde(default)]
    pub cell_candidates_borderless: Vec<ScoredBox>,
    #[serde(default)]
    pub text_lines: Vec<TextLine>,
    #[serde(default)]
    pub ruling_lines: Vec<RulingLine>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub char_boxes: Option<Vec<CharBox>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub style: Option<StyleLabel>,
}

impl PageInput {
    pub fn empty(doc_id: impl Into<String>, width: f64, height: f64) -> Self {
        Self {
            doc_id: doc_id.into(),
            page_index: 0,
            width,
            height,
            table_candidates: Vec::new(),
            cell_candidates_bordered: Vec::new(),
            cell_candidates_borderless: Vec::new(),
            text_lines: Vec::new(),
            ruling_lines: Vec::new(),
            char_boxes: None,
            style: None,
        }
    }

    pub fn frame(&self) -> BBox {
        BBox::new(0.0, 0.0, self.width, self.height)
    }
}

/// A box moved inside the page during loading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipWarning {
    pub path: String,
    pub original: BBox,
    pub clipped: BBox,
}

/// Turns a `serde_path_to_error` path into a JSON pointer under `prefix`.
fn pointer(prefix: &str, path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = prefix.to_string();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{key}")),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => out.push_str("/?"),
        }
    }
    if out.is_empty() {
        "/".into()
    } else {
        out
    }
}

/// Deserializes `value`, reporting failures with a JSON pointer under `prefix`.
pub fn from_value_at<T: DeserializeOwned>(value: Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| Error::Schema {
        path: pointer(prefix, e.path()),
        message: e.inner().to_string(),
    })
}

pub fn parse_json(text: &str, source: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Json {
        path: source.to_string(),
        message: format!("line {} column {}: {e}", e.line(), e.column()),
    })
}

fn check_box(b: &BBox, path: String) -> Result<()> {
    if b.coords().iter().any(|v| !v.is_finite()) {
        return Err(Error::Schema { path, message: format!("non-finite coordinate in {:?}", b.coords()) });
    }
    if b.x2 < b.x1 || b.y2 < b.y1 {
        return Err(Error::Schema { path, message: format!("inverted box {:?}", b.coords()) });
    }
    Ok(())
}

fn check_score(s: f64, path: String) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Schema { path, message: format!("score {s} outside [0, 1]") });
    }
    Ok(())
}

fn clip(b: &mut BBox, frame: &BBox, path: String, warnings: &mut Vec<ClipWarning>) {
    let clipped = b.clip_to(frame);
    if clipped != *b {
        warnings.push(ClipWarning { path, original: *b, clipped });
        *b = clipped;
    }
}

/// Checks invariants and clips every box into the page.
pub fn validate_page(page: &mut PageInput, prefix: &str) -> Result<Vec<ClipWarning>> {
    for (name, v) in [("width", page.width), ("height", page.height)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::Schema { path: format!("{prefix}/{name}"), message: format!("{v} is not a valid size") });
        }
    }
    let frame = page.frame();
    let mut warnings = Vec::new();
    for (name, list) in [
        ("table_candidates", &mut page.table_candidates),
        ("cell_candidates_bordered", &mut page.cell_candidates_bordered),
        ("cell_candidates_borderless", &mut page.cell_candidates_borderless),
    ] {
        for (i, sb) in list.iter_mut().enumerate() {
            let at = format!("{prefix}/{name}/{i}");
            check_box(&sb.bbox, format!("{at}/box"))?;
            check_score(sb.score, format!("{at}/score"))?;
            clip(&mut sb.bbox, &frame, format!("{at}/box"), &mut warnings);
        }
    }
    for (i, t) in page.text_lines.iter_mut().enumerate() {
        let at = format!("{prefix}/text_lines/{i}/box");
        check_box(&t.bbox, at.clone())?;
        clip(&mut t.bbox, &frame, at, &mut warnings);
    }
    if let Some(chars) = page.char_boxes.as_mut() {
        for (i, c) in chars.iter_mut().enumerate() {
            let at = format!("{prefix}/char_boxes/{i}/box");
            check_box(&c.bbox, at.clone())?;
            clip(&mut c.bbox, &frame, at, &mut warnings);
        }
    }
    for (i, l) in page.ruling_lines.iter_mut().enumerate() {
        let at = format!("{prefix}/ruling_lines/{i}");
        if !(l.position.is_finite() && l.span.0.is_finite() && l.span.1.is_finite()) || l.span.1 < l.span.0 {
            return Err(Error::Schema { path: at, message: format!("invalid ruling line {l:?}") });
        }
        let (along, across) = match l.orientation {
            Orientation::Horizontal => ((frame.x1, frame.x2), (frame.y1, frame.y2)),
            Orientation::Vertical => ((frame.y1, frame.y2), (frame.x1, frame.x2)),
        };
        let clipped = RulingLine {
            orientation: l.orientation,
            position: l.position.clamp(across.0, across.1),
            span: (l.span.0.clamp(along.0, along.1), l.span.1.clamp(along.0, along.1)),
        };
        if clipped != *l {
            let as_box = |r: &RulingLine| match r.orientation {
                Orientation::Horizontal => BBox::new(r.span.0, r.position, r.span.1, r.position),
                Orientation::Vertical => BBox::new(r.position, r.span.0, r.position, r.span.1),
            };
            warnings.push(ClipWarning { path: at, original: as_box(l), clipped: as_box(&clipped) });
            *l = clipped;
        }
    }
    Ok(warnings)
}

/// Pages with their clip warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedPages {
    pub pages: Vec<PageInput>,
    pub warnings: Vec<ClipWarning>,
}

/// Parses a single page object, an array of pages or `{"pages": [...]}`.
pub fn parse_pages(text: &str, source: &str) -> Result<LoadedPages> {
    let value = parse_json(text, source)?;
    let (items, prefix) = match value {
        Value::Array(items) => (items, String::new()),
        Value::Object(mut map) if map.len() == 1 && map.contains_key("pages") => match map.remove("pages") {
            Some(Value::Array(items)) => (items, "/pages".to_string()),
            _ => return Err(Error::Schema { path: "/pages".into(), message: "expected an array of pages".into() }),
        },
        obj @ Value::Object(_) => {
            let mut page: PageInput = from_value_at(obj, "")?;
            let warnings = validate_page(&mut page, "")?;
            return Ok(LoadedPages { pages: vec![page], warnings });
        }
        _ => return Err(Error::Schema { path: "/".into(), message: "expected a page object or an array of pages".into() }),
    };
    let mut pages = Vec::with_capacity(items.len());
    let mut warnings = Vec::new();
    for (i, item) in items.into_iter().enumerate() {
        let at = format!("{prefix}/{i}");
        let mut page: PageInput = from_value_at(item, &at)?;
        warnings.extend(validate_page(&mut page, &at)?);
        pages.push(page);
    }
    Ok(LoadedPages { pages, warnings })
}

pub fn parse_page(text: &str, source: &str) -> Result<(PageInput, Vec<ClipWarning>)> {
    let value = parse_json(text, source)?;
    let mut page: PageInput = from_value_at(value, "")?;
    let warnings = validate_page(&mut page, "")?;
    Ok((page, warnings))
}

pub fn load_page(path: &Path) -> Result<(PageInput, Vec<ClipWarning>)> {
    parse_page(&read_text(path)?, &path.display().to_string())
}

pub fn load_pages(path: &Path) -> Result<LoadedPages> {
    parse_pages(&read_text(path)?, &path.display().to_string())
}

pub fn page_to_string(page: &PageInput) -> Result<String> {
    to_canonical_string(page)
}

pub fn save_page(page: &PageInput, path: &Path) -> Result<()> {
    write_atomic(path, page_to_string(page)?.as_bytes())
}

#[derive(Serialize)]
struct PagesDoc<'a> {
    pages: &'a [PageInput],
}

/// `{"pages": [...]}` in canonical form.
pub fn pages_to_string(pages: &[PageInput]) -> Result<String> {
    to_canonical_string(&PagesDoc { pages })
}

pub fn save_pages(pages: &[PageInput], path: &Path) -> Result<()> {
    write_atomic(path, pages_to_string(pages)?.as_bytes())
}

/// One table of a ground-truth or prediction file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableRecord {
    #[serde(rename = "box")]
    pub bbox: BBox,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<TableStructure>,
}

/// Tables found on (or annotated for) one page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PageTables {
    pub doc_id: String,
    #[serde(default)]
    pub page_index: usize,
    #[serde(default)]
    pub tables: Vec<TableRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub char_boxes: Option<Vec<CharBox>>,
}

/// Ground truth or predictions for a set of pages.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TablesFile {
    pub pages: Vec<PageTables>,
}

impl TablesFile {
    pub fn parse(text: &str, source: &str) -> Result<TablesFile> {
        let file: TablesFile = from_value_at(parse_json(text, source)?, "")?;
        for (p, page) in file.pages.iter().enumerate() {
            for (t, table) in page.tables.iter().enumerate() {
                let at = format!("/pages/{p}/tables/{t}");
                check_box(&table.bbox, format!("{at}/box"))?;
                if let Some(s) = table.score {
                    check_score(s, format!("{at}/score"))?;
                }
                if let Some(st) = &table.structure {
                    st.validate().map_err(|message| Error::Schema { path: format!("{at}/structure"), message })?;
                }
            }
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<TablesFile> {
        Self::parse(&read_text(path)?, &path.display().to_string())
    }

    pub fn to_canonical(&self) -> Result<String> {
        to_canonical_string(self)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_canonical()?.as_bytes())
    }

    /// Looks a page up by document id and page index.
    pub fn page(&self, doc_id: &str, page_index: usize) -> Option<&PageTables> {
        self.pages.iter().find(|p| p.doc_id == doc_id && p.page_index == page_index)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"doc_id": "d", "width": 100, "height": 50}"#;

    #[test]
    fn minimal_page() {
        let (p, w) = parse_page(MINIMAL, "t").unwrap();
        assert!(w.is_empty());
        assert_eq!(p, PageInput::empty("d", 100.0, 50.0));
    }

    #[test]
    fn inverted_box_path() {
        let text = r#"{"doc_id": "d", "width": 100, "height": 50,
            "table_candidates": [{"box": [10, 0, 5, 5], "score": 0.5}]}"#;
        match parse_page(text, "t").unwrap_err() {
            Error::Schema { path, .. } => assert_eq!(path, "/table_candidates/0/box"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn malformed_box_path() {
        let text = r#"{"pages": [{"doc_id": "d", "width": 100, "height": 50,
            "text_lines": [{"box": [0, 0, 5], "text": "x"}]}]}"#;
        match parse_pages(text, "t").unwrap_err() {
            Error::Schema { path, .. } => assert_eq!(path, "/pages/0/text_lines/0/box"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn out_of_bounds_is_clipped_with_warning() {
        let text = r#"{"doc_id": "d", "width": 100, "height": 50,
            "cell_candidates_borderless": [{"box": [90, 40, 120, 60], "score": 0.9}],
            "ruling_lines": [{"orientation": "vertical", "position": 20, "span": [-5, 80]}]}"#;
        let (p, w) = parse_page(text, "t").unwrap();
        assert_eq!(p.cell_candidates_borderless[0].bbox, BBox::new(90.0, 40.0, 100.0, 50.0));
        assert_eq!(p.ruling_lines[0].span, (0.0, 50.0));
        assert_eq!(w.len(), 2);
        assert_eq!(w[0].path, "/cell_candidates_borderless/0/box");
    }

    #[test]
    fn accepted_shapes() {
        assert_eq!(parse_pages(MINIMAL, "t").unwrap().pages.len(), 1);
        assert_eq!(parse_pages(&format!("[{MINIMAL}, {MINIMAL}]"), "t").unwrap().pages.len(), 2);
        assert_eq!(parse_pages(&format!("{{\"pages\": [{MINIMAL}]}}"), "t").unwrap().pages.len(), 1);
        assert!(parse_pages("3", "t").is_err());
        assert!(matches!(parse_pages("{", "t"), Err(Error::Json { .. })));
    }

    #[test]
    fn unknown_field_rejected() {
        let text = r#"{"doc_id": "d", "width": 1, "height": 1, "tables": []}"#;
        assert!(matches!(parse_page(text, "t"), Err(Error::Schema { .. })));
    }

    #[test]
    fn canonical_round_trip() {
        let text = r#"{"doc_id": "d", "page_index": 2, "width": 100.5, "height": 50,
            "table_candidates": [{"box": [1, 2, 3.25, 4], "score": 0.9}],
            "text_lines": [{"box": [1, 2, 3, 4], "text": "Hi"}],
            "style": {"has_vertical_lines": false}}"#;
        let (p, _) = parse_page(text, "t").unwrap();
        let s = page_to_string(&p).unwrap();
        let (q, _) = parse_page(&s, "t").unwrap();
        assert_eq!(p, q);
        assert_eq!(page_to_string(&q).unwrap(), s);
    }
}
