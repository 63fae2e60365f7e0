//! Box and polygon primitives shared by the whole pipeline.
//!
//! Coordinates are PDF points with the origin at the bottom-left corner of
//! the page, so "above" always means larger `y`. Conversion to top-left
//! origin happens only at COCO export time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coordinate tolerance for step detection when building segmentation
/// polygons. Edges closer than this are treated as flush.
pub const STEP_TOLERANCE: f64 = 0.5;

/// An axis-aligned box, `(x0, y0)` bottom-left and `(x1, y1)` top-right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl BBox {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        let b = BBox { x0, y0, x1, y1 };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [self.x0, self.y0, self.x1, self.y1];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("non-finite bbox: {self:?}")));
        }
        if self.x0 > self.x1 || self.y0 > self.y1 {
            return Err(Error::Validation(format!(
                "inverted bbox: [{}, {}, {}, {}]",
                self.x0, self.y0, self.x1, self.y1
            )));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Area of the overlap with `other`; 0 when disjoint.
    pub fn intersection_area(&self, other: &BBox) -> f64 {
        let w = (self.x1.min(other.x1) - self.x0.max(other.x0)).max(0.0);
        let h = (self.y1.min(other.y1) - self.y0.max(other.y0)).max(0.0);
        w * h
    }

    pub fn union(&self, other: &BBox) -> BBox {
        BBox {
            x0: self.x0.min(other.x0),
            y0: self.y0.min(other.y0),
            x1: self.x1.max(other.x1),
            y1: self.y1.max(other.y1),
        }
    }

    /// True when `inner` lies inside `self`, allowing `tol` points of
    /// overhang on every side.
    pub fn contains(&self, inner: &BBox, tol: f64) -> bool {
        inner.x0 >= self.x0 - tol
            && inner.y0 >= self.y0 - tol
            && inner.x1 <= self.x1 + tol
            && inner.y1 <= self.y1 + tol
    }

    /// Fraction of `self`'s area that falls inside `other`. Zero-area
    /// boxes yield 0.
    pub fn fraction_inside(&self, other: &BBox) -> f64 {
        let a = self.area();
        if a <= 0.0 {
            return 0.0;
        }
        self.intersection_area(other) / a
    }

    pub fn translate(&self, dx: f64, dy: f64) -> BBox {
        BBox {
            x0: self.x0 + dx,
            y0: self.y0 + dy,
            x1: self.x1 + dx,
            y1: self.y1 + dy,
        }
    }

    pub fn horizontal_overlaps(&self, other: &BBox) -> bool {
        self.x0 < other.x1 && other.x0 < self.x1
    }
}

/// Smallest box enclosing every input box.
pub fn union_bbox(boxes: &[BBox]) -> Result<BBox> {
    let mut it = boxes.iter();
    let first = *it
        .next()
        .ok_or_else(|| Error::Validation("union_bbox of empty sequence".into()))?;
    Ok(it.fold(first, |acc, b| acc.union(b)))
}

/// Intersection over union of two boxes; disjoint boxes give 0.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let inter = a.intersection_area(b);
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Total area of the part of `target` covered by the union of `covers`.
///
/// Coordinate compression over the clipped rectangles; overlaps are not
/// double counted.
pub fn covered_area(target: &BBox, covers: &[BBox]) -> f64 {
    let mut clipped = Vec::new();
    for c in covers {
        let x0 = c.x0.max(target.x0);
        let y0 = c.y0.max(target.y0);
        let x1 = c.x1.min(target.x1);
        let y1 = c.y1.min(target.y1);
        if x1 > x0 && y1 > y0 {
            clipped.push(BBox { x0, y0, x1, y1 });
        }
    }
    if clipped.is_empty() {
        return 0.0;
    }
    let mut xs: Vec<f64> = clipped.iter().flat_map(|b| [b.x0, b.x1]).collect();
    let mut ys: Vec<f64> = clipped.iter().flat_map(|b| [b.y0, b.y1]).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ys.dedup();
    let mut total = 0.0;
    for xi in 0..xs.len() - 1 {
        for yi in 0..ys.len() - 1 {
            let cx = (xs[xi] + xs[xi + 1]) / 2.0;
            let cy = (ys[yi] + ys[yi + 1]) / 2.0;
            if clipped
                .iter()
                .any(|b| cx > b.x0 && cx < b.x1 && cy > b.y0 && cy < b.y1)
            {
                total += (xs[xi + 1] - xs[xi]) * (ys[yi + 1] - ys[yi]);
            }
        }
    }
    total
}

/// A simple closed polygon whose edges are all horizontal or vertical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectilinearPolygon {
    /// Closed loop, counter-clockwise, first vertex not repeated at the end.
    pub vertices: Vec<(f64, f64)>,
}

impl RectilinearPolygon {
    pub fn from_bbox(b: &BBox) -> Self {
        RectilinearPolygon {
            vertices: vec![(b.x0, b.y0), (b.x1, b.y0), (b.x1, b.y1), (b.x0, b.y1)],
        }
    }

    pub fn bbox(&self) -> Result<BBox> {
        if self.vertices.is_empty() {
            return Err(Error::Validation("empty polygon".into()));
        }
        let x0 = self.vertices.iter().map(|v| v.0).fold(f64::INFINITY, f64::min);
        let x1 = self.vertices.iter().map(|v| v.0).fold(f64::NEG_INFINITY, f64::max);
        let y0 = self.vertices.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
        let y1 = self.vertices.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
        BBox::new(x0, y0, x1, y1)
    }

    /// Shoelace area, always non-negative.
    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        let mut acc = 0.0;
        for i in 0..n {
            let (x0, y0) = self.vertices[i];
            let (x1, y1) = self.vertices[(i + 1) % n];
            acc += x0 * y1 - x1 * y0;
        }
        (acc / 2.0).abs()
    }

    /// Checks rectilinearity, alternation, evenness and simplicity.
    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        if n < 4 || n % 2 != 0 {
            return Err(Error::Validation(format!(
                "polygon needs an even vertex count >= 4, got {n}"
            )));
        }
        let mut dirs = Vec::with_capacity(n);
        for i in 0..n {
            let (x0, y0) = self.vertices[i];
            let (x1, y1) = self.vertices[(i + 1) % n];
            let horiz = (y1 - y0).abs() < 1e-9 && (x1 - x0).abs() > 1e-9;
            let vert = (x1 - x0).abs() < 1e-9 && (y1 - y0).abs() > 1e-9;
            if !horiz && !vert {
                return Err(Error::Validation(format!(
                    "edge {i} is neither horizontal nor vertical"
                )));
            }
            dirs.push(horiz);
        }
        for i in 0..n {
            if dirs[i] == dirs[(i + 1) % n] {
                return Err(Error::Validation(format!(
                    "edges {i} and {} have the same orientation",
                    (i + 1) % n
                )));
            }
        }
        // simplicity: no two non-adjacent edges intersect
        let edges: Vec<((f64, f64), (f64, f64))> = (0..n)
            .map(|i| (self.vertices[i], self.vertices[(i + 1) % n]))
            .collect();
        for i in 0..n {
            for j in i + 1..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                if segments_intersect(edges[i], edges[j]) {
                    return Err(Error::Validation(format!(
                        "edges {i} and {j} intersect; polygon is not simple"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Point containment with boundary counted as inside (tolerance `tol`).
    pub fn contains_point(&self, x: f64, y: f64, tol: f64) -> bool {
        let n = self.vertices.len();
        // on-boundary check first
        for i in 0..n {
            let (ax, ay) = self.vertices[i];
            let (bx, by) = self.vertices[(i + 1) % n];
            if (ay - by).abs() < 1e-9 {
                if (y - ay).abs() <= tol && x >= ax.min(bx) - tol && x <= ax.max(bx) + tol {
                    return true;
                }
            } else if (x - ax).abs() <= tol && y >= ay.min(by) - tol && y <= ay.max(by) + tol {
                return true;
            }
        }
        // even-odd ray cast along +x
        let mut inside = false;
        for i in 0..n {
            let (ax, ay) = self.vertices[i];
            let (bx, by) = self.vertices[(i + 1) % n];
            if (ay > y) != (by > y) {
                let t = (y - ay) / (by - ay);
                let xi = ax + t * (bx - ax);
                if xi > x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn translate(&self, dx: f64, dy: f64) -> RectilinearPolygon {
        RectilinearPolygon {
            vertices: self.vertices.iter().map(|&(x, y)| (x + dx, y + dy)).collect(),
        }
    }
}

fn segments_intersect(a: ((f64, f64), (f64, f64)), b: ((f64, f64), (f64, f64))) -> bool {
    // axis-aligned segments only; overlap of closed ranges with a small
    // shrink so shared endpoints of adjacent structure do not trip
    let (a0, a1) = a;
    let (b0, b1) = b;
    let eps = 1e-9;
    let (ax0, ax1) = (a0.0.min(a1.0), a0.0.max(a1.0));
    let (ay0, ay1) = (a0.1.min(a1.1), a0.1.max(a1.1));
    let (bx0, bx1) = (b0.0.min(b1.0), b0.0.max(b1.0));
    let (by0, by1) = (b0.1.min(b1.1), b0.1.max(b1.1));
    ax0 < bx1 - eps && bx0 < ax1 - eps && ay0 < by1 - eps && by0 < ay1 - eps
        || (ax0 <= bx1 + eps
            && bx0 <= ax1 + eps
            && ay0 <= by1 + eps
            && by0 <= ay1 + eps
            && overlap_len(ax0, ax1, bx0, bx1) > eps
            && overlap_len(ay0, ay1, by0, by1) > eps)
}

fn overlap_len(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    (a1.min(b1) - a0.max(b0)).max(0.0)
}

/// Builds the stepped segmentation polygon for a stack of textline boxes.
///
/// Lines must be ordered top to bottom. The top edge of the first line and
/// the bottom edge of the last line bound the polygon vertically; the right
/// boundary is scanned top to bottom inserting a step wherever the right
/// edge of a line differs from the line above it by more than
/// [`STEP_TOLERANCE`], and the left boundary is scanned bottom to top the
/// same way. Flush runs share the outermost edge so every input box stays
/// inside the polygon.
pub fn textline_segmentation(lines: &[BBox]) -> Result<RectilinearPolygon> {
    if lines.is_empty() {
        return Err(Error::Validation("segmentation of empty line set".into()));
    }

    // collapse consecutive flush lines into runs carrying the outer edge
    let right_runs = collapse_runs(lines, |b| b.x1, f64::max);
    let left_runs = collapse_runs(lines, |b| b.x0, f64::min);

    let top = lines.first().unwrap().y1;
    let bottom = lines.last().unwrap().y0;

    let mut verts: Vec<(f64, f64)> = Vec::new();

    // top edge, left to right
    verts.push((left_runs[0].edge, top));
    verts.push((right_runs[0].edge, top));

    // right side, top to bottom
    for w in right_runs.windows(2) {
        let (upper, lower) = (&w[0], &w[1]);
        // narrowing steps at the bottom of the upper run, widening at the
        // top of the lower run; this traces the contour of the box union
        let y = if lower.edge < upper.edge { upper.y0 } else { lower.y1 };
        verts.push((upper.edge, y));
        verts.push((lower.edge, y));
    }
    verts.push((right_runs.last().unwrap().edge, bottom));

    // bottom edge, right to left
    verts.push((left_runs.last().unwrap().edge, bottom));

    // left side, bottom to top
    for w in left_runs.windows(2).rev() {
        let (upper, lower) = (&w[0], &w[1]);
        let y = if upper.edge < lower.edge { lower.y1 } else { upper.y0 };
        verts.push((lower.edge, y));
        verts.push((upper.edge, y));
    }

    let verts = dedup_collinear(verts);
    let poly = RectilinearPolygon { vertices: verts };
    poly.validate()?;
    Ok(poly)
}

struct EdgeRun {
    edge: f64,
    /// top of the first line in the run
    y1: f64,
    /// bottom of the last line in the run
    y0: f64,
}

fn collapse_runs(lines: &[BBox], edge_of: fn(&BBox) -> f64, outer: fn(f64, f64) -> f64) -> Vec<EdgeRun> {
    let mut runs: Vec<EdgeRun> = Vec::new();
    for b in lines {
        let e = edge_of(b);
        match runs.last_mut() {
            Some(run) if (run.edge - e).abs() <= STEP_TOLERANCE => {
                run.edge = outer(run.edge, e);
                run.y0 = b.y0;
            }
            _ => runs.push(EdgeRun { edge: e, y1: b.y1, y0: b.y0 }),
        }
    }
    runs
}

fn dedup_collinear(verts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(verts.len());
    for v in verts {
        if let Some(&last) = out.last() {
            if (last.0 - v.0).abs() < 1e-9 && (last.1 - v.1).abs() < 1e-9 {
                continue;
            }
        }
        out.push(v);
    }
    // drop collinear middles, including across the wrap-around
    loop {
        let n = out.len();
        if n < 4 {
            break;
        }
        let mut removed = false;
        for i in 0..n {
            let prev = out[(i + n - 1) % n];
            let cur = out[i];
            let next = out[(i + 1) % n];
            let same_x = (prev.0 - cur.0).abs() < 1e-9 && (cur.0 - next.0).abs() < 1e-9;
            let same_y = (prev.1 - cur.1).abs() < 1e-9 && (cur.1 - next.1).abs() < 1e-9;
            if same_x || same_y {
                out.remove(i);
                removed = true;
                break;
            }
        }
        if !removed {
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bb(x0: f64, y0: f64, x1: f64, y1: f64) -> BBox {
        BBox::new(x0, y0, x1, y1).unwrap()
    }

    #[test]
    fn union_single_box_is_identity() {
        let b = bb(1.0, 2.0, 3.0, 4.0);
        assert_eq!(union_bbox(&[b]).unwrap(), b);
    }

    #[test]
    fn union_two_disjoint() {
        let u = union_bbox(&[bb(0.0, 0.0, 1.0, 1.0), bb(2.0, 2.0, 3.0, 3.0)]).unwrap();
        assert_eq!(u, bb(0.0, 0.0, 3.0, 3.0));
    }

    #[test]
    fn union_empty_errors() {
        assert!(union_bbox(&[]).is_err());
    }

    #[test]
    fn bbox_invariant_rejected() {
        assert!(BBox::new(2.0, 0.0, 1.0, 1.0).is_err());
        assert!(BBox::new(0.0, 0.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn iou_identical_and_disjoint() {
        let a = bb(0.0, 0.0, 10.0, 10.0);
        assert!((iou(&a, &a) - 1.0).abs() < 1e-12);
        assert_eq!(iou(&a, &bb(20.0, 20.0, 30.0, 30.0)), 0.0);
    }

    #[test]
    fn iou_partial_overlap() {
        // 50 overlap / 150 union
        let a = bb(0.0, 0.0, 10.0, 10.0);
        let b = bb(5.0, 0.0, 15.0, 10.0);
        assert!((iou(&a, &b) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn covered_area_no_double_count() {
        let target = bb(0.0, 0.0, 10.0, 10.0);
        let covers = [bb(0.0, 0.0, 6.0, 10.0), bb(4.0, 0.0, 10.0, 10.0)];
        assert!((covered_area(&target, &covers) - 100.0).abs() < 1e-9);
    }

    #[test]
    fn covered_area_partial() {
        let target = bb(0.0, 0.0, 10.0, 10.0);
        let covers = [bb(0.0, 0.0, 5.0, 10.0)];
        assert!((covered_area(&target, &covers) - 50.0).abs() < 1e-9);
    }

    #[test]
    fn segmentation_single_line_is_rectangle() {
        let poly = textline_segmentation(&[bb(10.0, 700.0, 200.0, 712.0)]).unwrap();
        assert_eq!(poly.vertices.len(), 4);
        assert_eq!(poly.bbox().unwrap(), bb(10.0, 700.0, 200.0, 712.0));
    }

    #[test]
    fn segmentation_right_step() {
        // second line narrower on the right: 8 vertices, one right-side step
        let lines = [bb(10.0, 712.0, 200.0, 724.0), bb(10.0, 700.0, 150.0, 712.0)];
        let poly = textline_segmentation(&lines).unwrap();
        poly.validate().unwrap();
        assert_eq!(poly.vertices.len(), 6); // left edges flush, so one step = 6 verts
        for b in &lines {
            for (x, y) in [(b.x0, b.y0), (b.x1, b.y0), (b.x1, b.y1), (b.x0, b.y1)] {
                assert!(poly.contains_point(x, y, 1e-6), "corner ({x},{y}) outside");
            }
        }
    }

    #[test]
    fn segmentation_equal_widths_collapse_to_rectangle() {
        let lines = [
            bb(10.0, 724.0, 200.0, 736.0),
            bb(10.0, 712.0, 200.0, 724.0),
            bb(10.0, 700.0, 200.0, 712.0),
        ];
        let poly = textline_segmentation(&lines).unwrap();
        assert_eq!(poly.vertices.len(), 4);
        assert_eq!(poly.bbox().unwrap(), bb(10.0, 700.0, 200.0, 736.0));
    }

    #[test]
    fn segmentation_empty_errors() {
        assert!(textline_segmentation(&[]).is_err());
    }

    #[test]
    fn polygon_area_matches_bbox_for_rectangle() {
        let p = RectilinearPolygon::from_bbox(&bb(0.0, 0.0, 4.0, 3.0));
        assert!((p.area() - 12.0).abs() < 1e-12);
    }
}
