//! Cell-containment scoring of table candidates.
//!
//! A table candidate is judged by how much of the detected cell mass falls in
//! a handful of bands around its border: inside the whole box, just inside
//! each edge, just outside each edge and just inside the bottom edge. The
//! penalty indicator and constraint loss score candidates during training-style
//! evaluation; the constraint coefficient replaces non-max suppression at
//! inference.

use serde::{Deserialize, Serialize};

use crate::geometry::{area, overlap_fraction, shift_all_edges, shift_bottom_edge, slc, BBox};

/// A box with a detection probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredBox {
    #[serde(rename = "box")]
    pub bbox: BBox,
    pub score: f64,
}

impl ScoredBox {
    pub fn new(bbox: BBox, score: f64) -> Self {
        Self { bbox, score }
    }
}

/// Band offsets (pixels), density threshold and loss weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstraintConfig {
    /// Inner band edge shift (negative shrinks).
    pub mu1: f64,
    /// Outer band, inner edge shift.
    pub mu2: f64,
    /// Outer band, outer edge shift.
    pub mu3: f64,
    /// Bottom strip shift of the bottom edge.
    pub mu4: f64,
    /// Width of the band just outside the table used by the coefficient.
    pub mu5: f64,
    /// Inward depth of the coefficient's inner frame, as a fraction of each side.
    pub mu6_frac: f64,
    pub alpha: f64,
    /// Overrides `alpha` for the inner-band condition.
    pub alpha_inner_band: Option<f64>,
    /// Overrides `alpha` for the bottom-strip condition.
    pub alpha_bottom_strip: Option<f64>,
    pub gamma1: f64,
    pub gamma2: f64,
    pub epsilon: f64,
    pub delta: f64,
}

impl Default for ConstraintConfig {
    fn default() -> Self {
        Self {
            mu1: -5.0,
            mu2: 5.0,
            mu3: 10.0,
            mu4: -10.0,
            mu5: 20.0,
            mu6_frac: 0.25,
            alpha: 1.0 / 8.0,
            alpha_inner_band: None,
            alpha_bottom_strip: None,
            gamma1: 0.1,
            gamma2: 0.1,
            epsilon: 0.1,
            delta: 0.25,
        }
    }
}

impl ConstraintConfig {
    pub fn validate(&self) -> Result<(), String> {
        let in_open_unit = |v: f64| v > 0.0 && v < 1.0;
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        let mut problems = Vec::new();
        if !in_open_unit(self.alpha) {
            problems.push("alpha must lie in (0, 1)");
        }
        if self.alpha_inner_band.is_some_and(|a| !in_open_unit(a)) {
            problems.push("alpha_inner_band must lie in (0, 1)");
        }
        if self.alpha_bottom_strip.is_some_and(|a| !in_open_unit(a)) {
            problems.push("alpha_bottom_strip must lie in (0, 1)");
        }
        if !(self.gamma1 >= 0.0 && self.gamma2 >= 0.0) {
            problems.push("gamma1 and gamma2 must be non-negative");
        }
        if !in_unit(self.epsilon) {
            problems.push("epsilon must lie in [0, 1]");
        }
        if !in_unit(self.delta) {
            problems.push("delta must lie in [0, 1]");
        }
        if !(self.mu6_frac > 0.0 && self.mu6_frac <= 0.5) {
            problems.push("mu6_frac must lie in (0, 0.5]");
        }
        let mus = [self.mu1, self.mu2, self.mu3, self.mu4, self.mu5];
        if mus.iter().any(|m| !m.is_finite()) {
            problems.push("band offsets must be finite");
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems.join("; "))
        }
    }

    fn alpha_inner(&self) -> f64 {
        self.alpha_inner_band.unwrap_or(self.alpha)
    }

    fn alpha_bottom(&self) -> f64 {
        self.alpha_bottom_strip.unwrap_or(self.alpha)
    }
}

/// Cell area in `obox` minus cell area in `ibox`, with `ibox` clipped into `obox`.
fn band_coverage(cells: &[BBox], ibox: &BBox, obox: &BBox) -> (f64, f64) {
    let inner = ibox.clip_to(obox);
    let covered = slc(cells, obox) - slc(cells, &inner);
    let band_area = area(obox) - area(&inner);
    (covered.max(0.0), band_area.max(0.0))
}

/// True when cells cover strictly less than `alpha` of the band between `ibox` and `obox`.
pub fn cond_c(cells: &[BBox], ibox: &BBox, obox: &BBox, alpha: f64) -> bool {
    let (covered, band) = band_coverage(cells, ibox, obox);
    covered < alpha * band
}

/// True when any cell area falls in the band between `ibox` and `obox`.
pub fn cond_d(cells: &[BBox], ibox: &BBox, obox: &BBox) -> bool {
    band_coverage(cells, ibox, obox).0 > 0.0
}

/// The four penalty conditions, evaluated separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PenaltyBreakdown {
    pub sparse_table: bool,
    pub sparse_inner_band: bool,
    pub cells_just_outside: bool,
    pub sparse_bottom_strip: bool,
}

impl PenaltyBreakdown {
    pub fn any(&self) -> bool {
        self.sparse_table || self.sparse_inner_band || self.cells_just_outside || self.sparse_bottom_strip
    }
}

pub fn penalty_breakdown(table: &BBox, cells: &[BBox], cfg: &ConstraintConfig) -> PenaltyBreakdown {
    let inner_band = shift_all_edges(table, cfg.mu1, cfg.mu1);
    let outside_inner = shift_all_edges(table, cfg.mu2, cfg.mu2);
    let outside_outer = shift_all_edges(table, cfg.mu3, cfg.mu3);
    let above_bottom = shift_bottom_edge(table, cfg.mu4);
    PenaltyBreakdown {
        sparse_table: cond_c(cells, &BBox::ZERO, table, cfg.alpha),
        sparse_inner_band: cond_c(cells, &inner_band, table, cfg.alpha_inner()),
        cells_just_outside: cond_d(cells, &outside_inner, &outside_outer),
        sparse_bottom_strip: cond_c(cells, &above_bottom, table, cfg.alpha_bottom()),
    }
}

/// Whether a table candidate looks unrealistic given the cells around it.
///
/// Zero-area candidates are always penalized.
pub fn penalty_indicator(table: &BBox, cells: &[BBox], cfg: &ConstraintConfig) -> bool {
    area(table) <= 0.0 || penalty_breakdown(table, cells, cfg).any()
}

/// `Σ I·P + γ1·(1 − I)·(1 − P)` over all candidates.
pub fn constraint_loss(tables: &[ScoredBox], cells: &[BBox], cfg: &ConstraintConfig) -> f64 {
    tables
        .iter()
        .map(|t| {
            let p = t.score;
            if penalty_indicator(&t.bbox, cells, cfg) {
                p
            } else {
                cfg.gamma1 * (1.0 - p)
            }
        })
        .sum()
}

/// Cell area just outside the table minus `γ2` times cell area in its inner frame.
/// Lower is better.
pub fn ccoef(table: &BBox, cells: &[BBox], cfg: &ConstraintConfig) -> f64 {
    let inside = slc(cells, table);
    let grown = shift_all_edges(table, cfg.mu5, cfg.mu5);
    let core = shift_all_edges(table, -cfg.mu6_frac * table.width(), -cfg.mu6_frac * table.height());
    let outside_band = (slc(cells, &grown) - inside).max(0.0);
    let inside_band = (inside - slc(cells, &core)).max(0.0);
    outside_band - cfg.gamma2 * inside_band
}

fn conflicts(a: &ScoredBox, b: &ScoredBox, cfg: &ConstraintConfig) -> bool {
    overlap_fraction(&a.bbox, &b.bbox) > cfg.delta && (a.score - b.score).abs() < cfg.epsilon
}

/// Indices of the candidates that survive coefficient-based suppression, in input order.
///
/// Candidates are visited by ascending coefficient (then descending score, then
/// input order) and kept unless they conflict with an already kept candidate.
/// Two candidates conflict when they overlap by more than `delta` of the smaller
/// one and their scores differ by less than `epsilon`.
pub fn suppression_keep(tables: &[ScoredBox], cells: &[BBox], cfg: &ConstraintConfig) -> Vec<usize> {
    let coefs: Vec<f64> = tables.iter().map(|t| ccoef(&t.bbox, cells, cfg)).collect();
    suppress_with_coefficients(tables, &coefs, cfg)
}

/// Suppression given one precomputed coefficient per candidate.
pub fn suppress_with_coefficients(tables: &[ScoredBox], coefs: &[f64], cfg: &ConstraintConfig) -> Vec<usize> {
    assert_eq!(tables.len(), coefs.len(), "one coefficient per candidate");
    let mut order: Vec<usize> = (0..tables.len()).collect();
    order.sort_by(|&i, &j| {
        coefs[i]
            .total_cmp(&coefs[j])
            .then(tables[j].score.total_cmp(&tables[i].score))
            .then(i.cmp(&j))
    });
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        if kept.iter().all(|&k| !conflicts(&tables[i], &tables[k], cfg)) {
            kept.push(i);
        }
    }
    kept.sort_unstable();
    kept
}

pub fn constraint_suppression(tables: &[ScoredBox], cells: &[BBox], cfg: &ConstraintConfig) -> Vec<ScoredBox> {
    suppression_keep(tables, cells, cfg).into_iter().map(|i| tables[i]).collect()
}
