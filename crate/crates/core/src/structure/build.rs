use super::draft::{assign_positions, merge_collisions, GridDraft, Positioner};
use super::kmeans::kmeans_1d;
use super::sampling::{count_rows_cols, horizontal_expand, infer_alignment, preprocess_cells, RowColCount};
use super::{RulingLine, StructureConfig, TableStructure, TextLine};
use crate::geometry::BBox;

/// Intermediate results of [`build_structure_detailed`].
#[derive(Debug, Clone)]
pub struct BuildTrace {
    pub preprocessed: Vec<BBox>,
    /// Text lines no preprocessed cell overlaps.
    pub leftovers: Vec<TextLine>,
    pub counts: RowColCount,
    pub structure: TableStructure,
}

/// Reconstructs the logical grid of one table region.
pub fn build_structure(
    cells: &[BBox],
    text: &[TextLine],
    ruling: &[RulingLine],
    table: &BBox,
    cfg: &StructureConfig,
) -> TableStructure {
    build_structure_detailed(cells, text, ruling, table, cfg).structure
}

pub fn build_structure_detailed(
    cells: &[BBox],
    text: &[TextLine],
    ruling: &[RulingLine],
    table: &BBox,
    cfg: &StructureConfig,
) -> BuildTrace {
    let text: Vec<TextLine> = text.iter().map(|t| TextLine::new(t.bbox, t.text.as_str())).collect();
    let mut preprocessed = preprocess_cells(cells, &text);
    if preprocessed.is_empty() {
        // no usable detections: let the text lines stand in for cells
        let line_boxes: Vec<BBox> = text.iter().map(|t| t.bbox).filter(|b| b.area() > 0.0).collect();
        preprocessed = preprocess_cells(&line_boxes, &text);
    }

    let mut members: Vec<Vec<TextLine>> = vec![Vec::new(); preprocessed.len()];
    let mut leftovers = Vec::new();
    for line in &text {
        let best = preprocessed
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.intersection_area(&line.bbox)))
            .filter(|&(_, a)| a > 0.0)
            .fold(None::<(usize, f64)>, |acc, cur| match acc {
                Some(a) if a.1 >= cur.1 => Some(a),
                _ => Some(cur),
            });
        match best {
            Some((i, _)) => members[i].push(line.clone()),
            None => leftovers.push(line.clone()),
        }
    }

    // leftover lines take part in counting and clustering like cells
    let mut sampled = preprocessed.clone();
    sampled.extend(leftovers.iter().map(|l| l.bbox));

    let expanded = horizontal_expand(&sampled, table, cfg.expand_step);
    let counts = count_rows_cols(&expanded, ruling, table, cfg);
    if sampled.is_empty() || counts.n_rows == 0 || counts.n_cols == 0 {
        return BuildTrace { preprocessed, leftovers, counts, structure: TableStructure::default() };
    }

    let (align_x, align_y) = infer_alignment(&sampled, counts.n_rows, counts.n_cols, cfg);
    let xs: Vec<f64> = sampled.iter().map(|b| align_x.coord(b)).collect();
    let ys: Vec<f64> = sampled.iter().map(|b| align_y.coord(b)).collect();
    let positions = Positioner {
        centers_x: kmeans_1d(&xs, counts.n_cols, cfg).centers,
        centers_y: kmeans_1d(&ys, counts.n_rows, cfg).centers,
        align_x,
        align_y,
    };

    let assignments = assign_positions(&preprocessed, &positions.centers_x, &positions.centers_y, align_x, align_y);
    let mut draft: GridDraft = merge_collisions(&assignments, &preprocessed, &members, positions);
    if cfg.lowercase_merge {
        draft.lowercase_merge();
    }
    draft.assign_leftover_text(&leftovers);
    draft.compact();
    draft.empty_neighbor_split();
    draft.expand_spans();
    draft.compact();

    let structure = draft.into_structure(counts.dispersion);
    BuildTrace { preprocessed, leftovers, counts, structure }
}

/// Chooses among structures built from alternative cell candidate sets.
///
/// The first candidate is accepted when its dispersion is within the
/// threshold; otherwise the least dispersed candidate wins (earliest on ties).
/// Returns `None` for an empty list.
pub fn select_by_dispersion<L>(candidates: Vec<(TableStructure, L)>, cfg: &StructureConfig) -> Option<(TableStructure, L)> {
    let first = candidates.first()?;
    if first.0.sampling_dispersion <= cfg.dispersion_threshold {
        return candidates.into_iter().next();
    }
    let best = candidates
        .iter()
        .enumerate()
        .fold(0, |best, (i, c)| if c.0.sampling_dispersion < candidates[best].0.sampling_dispersion { i } else { best });
    candidates.into_iter().nth(best)
}
