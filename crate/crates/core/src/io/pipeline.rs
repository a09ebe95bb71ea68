use serde::{Deserialize, Serialize};

use super::config::Config;
use super::page::{PageInput, PageTables, TableRecord};
use crate::constraint::{constraint_suppression, ScoredBox};
use crate::geometry::BBox;
use crate::structure::{build_structure, select_by_dispersion, Orientation, RulingLine, TableStructure, TextLine};
use crate::style::{infer_style, route, DetectorId};

/// One extracted table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractedTable {
    pub table: ScoredBox,
    pub structure: TableStructure,
    /// Cell candidate set the structure was built from.
    pub detector: DetectorId,
}

fn cell_set(page: &PageInput, d: DetectorId) -> &[ScoredBox] {
    match d {
        DetectorId::Bordered => &page.cell_candidates_bordered,
        DetectorId::Borderless => &page.cell_candidates_borderless,
    }
}

fn page_style(page: &PageInput, region: &BBox, ruling: &[RulingLine], cfg: &Config) -> DetectorId {
    route(page.style.unwrap_or_else(|| infer_style(ruling, region, cfg.structure.line_dedupe_tol)))
}

/// Table candidates that survive suppression, scored against the cell
/// candidates of the page's routed style. Input order is kept.
pub fn suppress_page(page: &PageInput, cfg: &Config) -> Vec<ScoredBox> {
    let detector = page_style(page, &page.frame(), &page.ruling_lines, cfg);
    let cells: Vec<BBox> = cell_set(page, detector).iter().map(|c| c.bbox).collect();
    constraint_suppression(&page.table_candidates, &cells, &cfg.constraint)
}

/// Text lines centered in the table, cells clipped to it, ruling lines
/// crossing it clipped to it.
fn clip_to_table(page: &PageInput, table: &BBox) -> (Vec<TextLine>, Vec<RulingLine>) {
    let text = page
        .text_lines
        .iter()
        .filter(|t| table.contains_point(t.bbox.mid_x(), t.bbox.mid_y()))
        .cloned()
        .collect();
    let ruling = page
        .ruling_lines
        .iter()
        .filter_map(|l| {
            let (across, along) = match l.orientation {
                Orientation::Horizontal => ((table.y1, table.y2), (table.x1, table.x2)),
                Orientation::Vertical => ((table.x1, table.x2), (table.y1, table.y2)),
            };
            let inside = across.0 <= l.position && l.position <= across.1;
            let (a, b) = (l.span.0.max(along.0), l.span.1.min(along.1));
            (inside && a < b).then_some(RulingLine { orientation: l.orientation, position: l.position, span: (a, b) })
        })
        .collect();
    (text, ruling)
}

fn clip_cells(cells: &[ScoredBox], table: &BBox) -> Vec<BBox> {
    cells.iter().filter_map(|c| c.bbox.intersection(table)).collect()
}

/// Full extraction for one page: suppression, then per surviving table a
/// structure from the routed cell set, falling back to the other set when
/// its sampling dispersion is lower. Tables come out ordered by `(y1, x1)`.
pub fn run_pipeline(page: &PageInput, cfg: &Config) -> Vec<ExtractedTable> {
    let mut tables = suppress_page(page, cfg);
    tables.sort_by(|a, b| a.bbox.y1.total_cmp(&b.bbox.y1).then(a.bbox.x1.total_cmp(&b.bbox.x1)));
    tables
        .into_iter()
        .map(|table| {
            let (text, ruling) = clip_to_table(page, &table.bbox);
            let primary = page_style(page, &table.bbox, &ruling, cfg);
            let candidates: Vec<(TableStructure, DetectorId)> = [primary, primary.other()]
                .into_iter()
                .map(|d| {
                    let cells = clip_cells(cell_set(page, d), &table.bbox);
                    (build_structure(&cells, &text, &ruling, &table.bbox, &cfg.structure), d)
                })
                .collect();
            let (structure, detector) = select_by_dispersion(candidates, &cfg.structure).expect("two candidates");
            ExtractedTable { table, structure, detector }
        })
        .collect()
}

/// Pipeline output in the tables-file layout.
pub fn page_tables(page: &PageInput, extracted: Vec<ExtractedTable>) -> PageTables {
    PageTables {
        doc_id: page.doc_id.clone(),
        page_index: page.page_index,
        tables: extracted
            .into_iter()
            .map(|e| TableRecord { bbox: e.table.bbox, score: Some(e.table.score), structure: Some(e.structure) })
            .collect(),
        char_boxes: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_page() {
        let page = PageInput::empty("d", 100.0, 100.0);
        assert!(run_pipeline(&page, &Config::default()).is_empty());
    }

    #[test]
    fn clipping_rules() {
        let mut page = PageInput::empty("d", 200.0, 200.0);
        page.text_lines = vec![
            TextLine::new(BBox::new(10.0, 10.0, 30.0, 20.0), "in"),
            TextLine::new(BBox::new(90.0, 10.0, 130.0, 20.0), "out"),
        ];
        page.ruling_lines = vec![RulingLine::vertical(50.0, 0.0, 200.0), RulingLine::vertical(150.0, 0.0, 200.0)];
        let (text, ruling) = clip_to_table(&page, &BBox::new(0.0, 0.0, 100.0, 100.0));
        assert_eq!(text.len(), 1);
        assert_eq!(ruling, vec![RulingLine::vertical(50.0, 0.0, 100.0)]);
    }
}
