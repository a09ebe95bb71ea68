mod common;

use proptest::prelude::*;

use common::{bb, raster_slc};
use tablegrid::constraint::{ccoef, constraint_loss, constraint_suppression, penalty_indicator};
use tablegrid::geometry::{iou, overlap_fraction, shift_all_edges, slc};
use tablegrid::{BBox, ConstraintConfig, ScoredBox};

fn int_box(extent: i32, side: i32) -> impl Strategy<Value = BBox> {
    (0..extent, 0..extent, 0..=side, 0..=side)
        .prop_map(|(x, y, w, h)| bb(x as f64, y as f64, (x + w) as f64, (y + h) as f64))
}

fn float_box() -> impl Strategy<Value = BBox> {
    (-50.0..50.0f64, -50.0..50.0f64, 0.0..40.0f64, 0.0..40.0f64).prop_map(|(x, y, w, h)| bb(x, y, x + w, y + h))
}

proptest! {
    #[test]
    fn slc_matches_raster(cells in prop::collection::vec(int_box(40, 20), 0..8), q in int_box(40, 30)) {
        prop_assert_eq!(slc(&cells, &q), raster_slc(&cells, &q) as f64);
    }

    #[test]
    fn slc_monotone_in_query(
        cells in prop::collection::vec(float_box(), 0..6),
        q in float_box(),
        cut in (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64),
    ) {
        let inner = bb(
            q.x1 + cut.0 * q.width() / 2.0,
            q.y1 + cut.1 * q.height() / 2.0,
            q.x2 - cut.2 * q.width() / 2.0,
            q.y2 - cut.3 * q.height() / 2.0,
        );
        prop_assert!(slc(&cells, &inner) <= slc(&cells, &q) + 1e-9);
    }

    #[test]
    fn slc_monotone_in_cells(cells in prop::collection::vec(float_box(), 0..6), extra in float_box(), q in float_box()) {
        let mut more = cells.clone();
        more.push(extra);
        prop_assert!(slc(&cells, &q) <= slc(&more, &q) + 1e-9);
    }

    #[test]
    fn slc_ignores_order(cells in prop::collection::vec(int_box(40, 20), 0..8), q in int_box(40, 30)) {
        let mut rev = cells.clone();
        rev.reverse();
        prop_assert_eq!(slc(&cells, &q), slc(&rev, &q));
    }

    #[test]
    fn shift_undoes_itself(b in float_box(), mx in -5.0..20.0f64, my in -5.0..20.0f64) {
        prop_assume!(b.width() + 2.0 * mx >= 0.0 && b.height() + 2.0 * my >= 0.0);
        let back = shift_all_edges(&shift_all_edges(&b, mx, my), -mx, -my);
        for (a, c) in back.coords().iter().zip(b.coords()) {
            prop_assert!((a - c).abs() <= 1e-9);
        }
    }

    #[test]
    fn iou_and_overlap_symmetric(a in float_box(), b in float_box()) {
        prop_assert_eq!(iou(&a, &b), iou(&b, &a));
        prop_assert_eq!(overlap_fraction(&a, &b), overlap_fraction(&b, &a));
        prop_assert!((0.0..=1.0).contains(&iou(&a, &b)));
    }

    #[test]
    fn penalty_translation_invariant(
        table in int_box(60, 60),
        cells in prop::collection::vec(int_box(80, 25), 0..8),
        dx in -100i32..100,
        dy in -100i32..100,
    ) {
        let cfg = ConstraintConfig::default();
        let (dx, dy) = (dx as f64, dy as f64);
        let moved: Vec<BBox> = cells.iter().map(|c| c.translate(dx, dy)).collect();
        prop_assert_eq!(
            penalty_indicator(&table, &cells, &cfg),
            penalty_indicator(&table.translate(dx, dy), &moved, &cfg)
        );
    }

    #[test]
    fn loss_zero_exactly_when_scores_agree_with_penalty(
        tables in prop::collection::vec((int_box(60, 60), prop::sample::select(vec![0.0, 0.3, 1.0])), 1..5),
        cells in prop::collection::vec(int_box(80, 25), 0..8),
    ) {
        let cfg = ConstraintConfig::default();
        let scored: Vec<ScoredBox> = tables.iter().map(|(b, p)| ScoredBox::new(*b, *p)).collect();
        let agree = scored.iter().all(|t| {
            let i = penalty_indicator(&t.bbox, &cells, &cfg);
            (i && t.score == 0.0) || (!i && t.score == 1.0)
        });
        prop_assert_eq!(constraint_loss(&scored, &cells, &cfg) == 0.0, agree);
    }

    #[test]
    fn loss_monotone_in_score(
        table in int_box(60, 60),
        cells in prop::collection::vec(int_box(80, 25), 0..8),
        p in 0.0..1.0f64,
        q in 0.0..1.0f64,
    ) {
        let cfg = ConstraintConfig::default();
        let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
        let l_lo = constraint_loss(&[ScoredBox::new(table, lo)], &cells, &cfg);
        let l_hi = constraint_loss(&[ScoredBox::new(table, hi)], &cells, &cfg);
        if penalty_indicator(&table, &cells, &cfg) {
            prop_assert!(l_lo <= l_hi);
        } else {
            prop_assert!(l_lo >= l_hi);
        }
    }

    #[test]
    fn ccoef_rewards_frame_cells_and_punishes_outside_cells(
        cells in prop::collection::vec(int_box(200, 40), 0..6),
        along in 0.0..0.9f64,
        depth in 0.0..0.9f64,
    ) {
        // table [40, 40, 140, 140]: inner frame 25 px deep, outer band 20 px wide
        let cfg = ConstraintConfig::default();
        let table = bb(40.0, 40.0, 140.0, 140.0);
        let before = ccoef(&table, &cells, &cfg);
        let x = 40.0 + along * 90.0;
        let frame_cell = bb(x, 40.0 + depth * 20.0, x + 10.0, 40.0 + depth * 20.0 + 5.0);
        let outside_cell = bb(x, 141.0 + depth * 10.0, x + 10.0, 141.0 + depth * 10.0 + 5.0);
        let mut with_frame = cells.clone();
        with_frame.push(frame_cell);
        let mut with_outside = cells.clone();
        with_outside.push(outside_cell);
        // a new cell may only re-cover area, which the sweep sums in a different order
        let slack = 1e-9 * before.abs().max(1.0);
        prop_assert!(ccoef(&table, &with_frame, &cfg) <= before + slack);
        prop_assert!(ccoef(&table, &with_outside, &cfg) >= before - slack);
        prop_assert!(ccoef(&table, &[frame_cell], &cfg) < ccoef(&table, &[], &cfg));
        prop_assert!(ccoef(&table, &[outside_cell], &cfg) > ccoef(&table, &[], &cfg));
    }

    #[test]
    fn suppression_subset_and_idempotent(
        tables in prop::collection::vec((int_box(150, 120), 0.5..1.0f64), 0..8),
        cells in prop::collection::vec(int_box(200, 40), 0..10),
    ) {
        let cfg = ConstraintConfig::default();
        let scored: Vec<ScoredBox> = tables.iter().map(|(b, p)| ScoredBox::new(*b, *p)).collect();
        let once = constraint_suppression(&scored, &cells, &cfg);
        prop_assert!(once.iter().all(|t| scored.contains(t)));
        prop_assert_eq!(constraint_suppression(&once, &cells, &cfg), once);
    }
}
