//! Axis-aligned rectangle arithmetic.
//!
//! Coordinates are page pixels with the origin at the top-left corner and `y`
//! growing downward. Coverage of a set of boxes is computed exactly with a
//! coordinate-compression sweep, so results do not depend on any raster
//! resolution.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An axis-aligned rectangle `(x1, y1)`–`(x2, y2)`.
///
/// Valid boxes satisfy `x1 <= x2`, `y1 <= y2` and have finite coordinates.
/// Zero-area boxes are allowed. Serialized as a `[x1, y1, x2, y2]` array.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BBox {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl BBox {
    pub const ZERO: BBox = BBox { x1: 0.0, y1: 0.0, x2: 0.0, y2: 0.0 };

    pub const fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        Self { x1, y1, x2, y2 }
    }

    pub fn is_valid(&self) -> bool {
        self.coords().iter().all(|c| c.is_finite()) && self.x1 <= self.x2 && self.y1 <= self.y2
    }

    pub fn coords(&self) -> [f64; 4] {
        [self.x1, self.y1, self.x2, self.y2]
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn mid_x(&self) -> f64 {
        (self.x1 + self.x2) / 2.0
    }

    pub fn mid_y(&self) -> f64 {
        (self.y1 + self.y2) / 2.0
    }

    pub fn area(&self) -> f64 {
        area(self)
    }

    /// Overlapping region, or `None` when the boxes share no positive area.
    pub fn intersection(&self, other: &BBox) -> Option<BBox> {
        let b = BBox {
            x1: self.x1.max(other.x1),
            y1: self.y1.max(other.y1),
            x2: self.x2.min(other.x2),
            y2: self.y2.min(other.y2),
        };
        (b.x1 < b.x2 && b.y1 < b.y2).then_some(b)
    }

    pub fn intersection_area(&self, other: &BBox) -> f64 {
        self.intersection(other).map_or(0.0, |b| b.area())
    }

    /// Positive-area overlap. Boxes that only touch along an edge do not intersect.
    pub fn intersects(&self, other: &BBox) -> bool {
        self.intersection(other).is_some()
    }

    /// Smallest box containing both.
    pub fn union(&self, other: &BBox) -> BBox {
        BBox {
            x1: self.x1.min(other.x1),
            y1: self.y1.min(other.y1),
            x2: self.x2.max(other.x2),
            y2: self.y2.max(other.y2),
        }
    }

    pub fn contains(&self, other: &BBox) -> bool {
        self.x1 <= other.x1 && self.y1 <= other.y1 && self.x2 >= other.x2 && self.y2 >= other.y2
    }

    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        self.x1 <= x && x <= self.x2 && self.y1 <= y && y <= self.y2
    }

    /// Clamp into `frame`. A box entirely outside collapses onto the nearest
    /// frame edge with zero area.
    pub fn clip_to(&self, frame: &BBox) -> BBox {
        let x1 = self.x1.clamp(frame.x1, frame.x2);
        let x2 = self.x2.clamp(frame.x1, frame.x2);
        let y1 = self.y1.clamp(frame.y1, frame.y2);
        let y2 = self.y2.clamp(frame.y1, frame.y2);
        BBox { x1, y1, x2: x2.max(x1), y2: y2.max(y1) }
    }

    pub fn translate(&self, dx: f64, dy: f64) -> BBox {
        BBox::new(self.x1 + dx, self.y1 + dy, self.x2 + dx, self.y2 + dy)
    }

    pub fn scale(&self, s: f64) -> BBox {
        BBox::new(self.x1 * s, self.y1 * s, self.x2 * s, self.y2 * s)
    }

    /// Bounding union of an iterator of boxes; `None` when empty.
    pub fn union_all<'a, I: IntoIterator<Item = &'a BBox>>(boxes: I) -> Option<BBox> {
        boxes.into_iter().fold(None, |acc: Option<BBox>, b| {
            Some(match acc {
                Some(a) => a.union(b),
                None => *b,
            })
        })
    }
}

impl Serialize for BBox {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.coords().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BBox {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [x1, y1, x2, y2] = <[f64; 4]>::deserialize(deserializer)?;
        Ok(BBox { x1, y1, x2, y2 })
    }
}

/// Rectangle area `(x2 - x1) * (y2 - y1)`.
pub fn area(b: &BBox) -> f64 {
    (b.x2 - b.x1).max(0.0) * (b.y2 - b.y1).max(0.0)
}

/// Exact area of the union of `boxes`.
///
/// Sweeps the compressed x-coordinates; within each vertical slab the covering
/// y-intervals are merged and summed. `O(n² log n)`, which is ample for the few
/// hundred cells a page carries.
pub fn union_area(boxes: &[BBox]) -> f64 {
    let boxes: Vec<&BBox> = boxes.iter().filter(|b| area(b) > 0.0).collect();
    if boxes.is_empty() {
        return 0.0;
    }
    let mut xs: Vec<f64> = boxes.iter().flat_map(|b| [b.x1, b.x2]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();

    let mut total = 0.0;
    let mut spans: Vec<(f64, f64)> = Vec::with_capacity(boxes.len());
    for slab in xs.windows(2) {
        let (lo, hi) = (slab[0], slab[1]);
        spans.clear();
        spans.extend(
            boxes
                .iter()
                .filter(|b| b.x1 <= lo && b.x2 >= hi)
                .map(|b| (b.y1, b.y2)),
        );
        if spans.is_empty() {
            continue;
        }
        spans.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut covered = 0.0;
        let (mut start, mut end) = spans[0];
        for &(s, e) in &spans[1..] {
            if s > end {
                covered += end - start;
                start = s;
                end = e;
            } else if e > end {
                end = e;
            }
        }
        covered += end - start;
        total += covered * (hi - lo);
    }
    total
}

/// Area of `(⋃ cells) ∩ query`, each covered point counted once.
pub fn slc(cells: &[BBox], query: &BBox) -> f64 {
    let clipped: Vec<BBox> = cells.iter().filter_map(|c| c.intersection(query)).collect();
    union_area(&clipped)
}

/// Move every edge outward by `mu_x` horizontally and `mu_y` vertically.
///
/// Negative amounts shrink. An axis that would invert collapses to its midline.
pub fn shift_all_edges(b: &BBox, mu_x: f64, mu_y: f64) -> BBox {
    let (x1, x2) = shift_axis(b.x1, b.x2, mu_x);
    let (y1, y2) = shift_axis(b.y1, b.y2, mu_y);
    BBox { x1, y1, x2, y2 }
}

fn shift_axis(lo: f64, hi: f64, mu: f64) -> (f64, f64) {
    let (nlo, nhi) = (lo - mu, hi + mu);
    if nlo > nhi {
        let mid = (lo + hi) / 2.0;
        (mid, mid)
    } else {
        (nlo, nhi)
    }
}

/// Move only the bottom edge by `mu` (negative moves it up), never above `y1`.
pub fn shift_bottom_edge(b: &BBox, mu: f64) -> BBox {
    BBox { y2: (b.y2 + mu).max(b.y1), ..*b }
}

/// Intersection over union; 0 when the union has no area.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let inter = a.intersection_area(b);
    let union = area(a) + area(b) - inter;
    if union > 0.0 {
        (inter / union).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Intersection area relative to the smaller box; 0 when the smaller box has no area.
pub fn overlap_fraction(a: &BBox, b: &BBox) -> f64 {
    let smaller = area(a).min(area(b));
    if smaller > 0.0 {
        (a.intersection_area(b) / smaller).clamp(0.0, 1.0)
    } else {
        0.0
    }
}
