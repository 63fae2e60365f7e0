//! Box algebra for annotations: main text box, figure/table body
//! inference from page margins, and annotation construction.
//!
//! Figure bodies live in the margin between the top of the figure's
//! caption and the annotated text above it; table bodies mirror this
//! below the caption. The body is the smallest box enclosing every
//! element inside that margin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{textline_segmentation, union_bbox, BBox, RectilinearPolygon};
use crate::jats::{LayoutCategory, NodeId};
use crate::matcher::MatchedRegion;

/// Tolerance for the containment predicate, in points.
pub const CONTAIN_TOLERANCE: f64 = 1.0;

/// Minimum fraction of an element's area that must fall inside the
/// potential box for the element to belong to the body.
pub const CONTAIN_FRACTION: f64 = 0.5;

/// One labeled instance on a page.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayoutAnnotation {
    pub category: LayoutCategory,
    pub bbox: BBox,
    pub segmentation: RectilinearPolygon,
    pub source_node: NodeId,
    pub page_id: String,
}

/// Smallest box enclosing all annotated text elements of the page.
pub fn main_text_box(text_boxes: &[BBox]) -> Result<BBox> {
    if text_boxes.is_empty() {
        return Err(Error::Validation(
            "no annotated text elements; cannot form the main text box".into(),
        ));
    }
    union_bbox(text_boxes)
}

/// The largest box that fits in the margin between the top of the caption
/// and the annotated elements above it.
///
/// The horizontal extent is the caption's, widened to cover unannotated
/// elements that horizontally overlap the caption, and clipped to the
/// main text box. Returns `None` when the margin is degenerate.
pub fn potential_box(
    caption: &BBox,
    annotated: &[BBox],
    main: &BBox,
    unconsumed: &[BBox],
) -> Option<BBox> {
    vertical_margin_box(caption, annotated, main, unconsumed, Side::Above)
}

/// Mirror image of [`potential_box`] for tables: the margin below the
/// caption, down to the annotated elements underneath.
pub fn table_potential_box(
    caption: &BBox,
    annotated: &[BBox],
    main: &BBox,
    unconsumed: &[BBox],
) -> Option<BBox> {
    vertical_margin_box(caption, annotated, main, unconsumed, Side::Below)
}

enum Side {
    Above,
    Below,
}

fn vertical_margin_box(
    caption: &BBox,
    annotated: &[BBox],
    main: &BBox,
    unconsumed: &[BBox],
    side: Side,
) -> Option<BBox> {
    let mut x0 = caption.x0;
    let mut x1 = caption.x1;
    for e in unconsumed {
        if e.horizontal_overlaps(caption) {
            x0 = x0.min(e.x0);
            x1 = x1.max(e.x1);
        }
    }
    x0 = x0.max(main.x0);
    x1 = x1.min(main.x1);
    if x1 <= x0 {
        return None;
    }
    let extent = BBox { x0, y0: main.y0, x1, y1: main.y1 };

    let (y0, y1) = match side {
        Side::Above => {
            let floor = caption.y1;
            let ceiling = annotated
                .iter()
                .filter(|a| a.y0 >= floor - CONTAIN_TOLERANCE && a.horizontal_overlaps(&extent))
                .map(|a| a.y0)
                .fold(main.y1, f64::min);
            (floor, ceiling)
        }
        Side::Below => {
            let ceiling = caption.y0;
            let floor = annotated
                .iter()
                .filter(|a| a.y1 <= ceiling + CONTAIN_TOLERANCE && a.horizontal_overlaps(&extent))
                .map(|a| a.y1)
                .fold(main.y0, f64::max);
            (floor, ceiling)
        }
    };
    if y1 <= y0 {
        return None;
    }
    Some(BBox { x0, y0, x1, y1 })
}

/// True when at least half of `element` lies inside `potential`, with a
/// 1pt expansion absorbing hairline overhang.
pub fn element_within(element: &BBox, potential: &BBox) -> bool {
    let widened = BBox {
        x0: potential.x0 - CONTAIN_TOLERANCE,
        y0: potential.y0 - CONTAIN_TOLERANCE,
        x1: potential.x1 + CONTAIN_TOLERANCE,
        y1: potential.y1 + CONTAIN_TOLERANCE,
    };
    element.fraction_inside(&widened) >= CONTAIN_FRACTION
}

/// Smallest box enclosing the elements within the potential box, along
/// with the indices of the elements it consumed.
pub fn body_box(potential: &BBox, elements: &[BBox]) -> Option<(BBox, Vec<usize>)> {
    let used: Vec<usize> = elements
        .iter()
        .enumerate()
        .filter(|(_, e)| e.area() > 0.0 && element_within(e, potential))
        .map(|(i, _)| i)
        .collect();
    if used.is_empty() {
        return None;
    }
    let boxes: Vec<BBox> = used.iter().map(|&i| elements[i]).collect();
    Some((union_bbox(&boxes).expect("non-empty"), used))
}

/// Builds the annotation for a completed matched region: the bbox is the
/// union of the consumed line boxes and the segmentation the stepped
/// polygon over them.
pub fn region_to_annotation(region: &MatchedRegion, page_id: &str) -> Result<Option<LayoutAnnotation>> {
    if !region.complete || region.lines.is_empty() {
        return Ok(None);
    }
    // order lines top to bottom for the polygon scan
    let mut boxes = region.line_boxes();
    boxes.sort_by(|a, b| b.y1.partial_cmp(&a.y1).unwrap());
    let segmentation = textline_segmentation(&boxes)?;
    let bbox = segmentation.bbox()?;
    Ok(Some(LayoutAnnotation {
        category: region.category,
        bbox,
        segmentation,
        source_node: region.node_id,
        page_id: page_id.to_string(),
    }))
}

/// Annotation for an inferred figure or table body: the bounding box is
/// reused as the segmentation.
pub fn body_annotation(
    category: LayoutCategory,
    bbox: BBox,
    source_node: NodeId,
    page_id: &str,
) -> LayoutAnnotation {
    LayoutAnnotation {
        category,
        bbox,
        segmentation: RectilinearPolygon::from_bbox(&bbox),
        source_node,
        page_id: page_id.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bb(x0: f64, y0: f64, x1: f64, y1: f64) -> BBox {
        BBox::new(x0, y0, x1, y1).unwrap()
    }

    #[test]
    fn main_text_box_spans_columns() {
        let m = main_text_box(&[bb(36.0, 400.0, 290.0, 700.0), bb(320.0, 400.0, 576.0, 700.0)])
            .unwrap();
        assert_eq!(m, bb(36.0, 400.0, 576.0, 700.0));
        assert!(main_text_box(&[]).is_err());
    }

    #[test]
    fn main_text_box_fixed_point() {
        let boxes = [bb(36.0, 100.0, 576.0, 700.0)];
        let m = main_text_box(&boxes).unwrap();
        let with_inner = [boxes[0], bb(100.0, 200.0, 200.0, 300.0)];
        assert_eq!(main_text_box(&with_inner).unwrap(), m);
    }

    #[test]
    fn potential_box_stops_at_text_above() {
        let main = bb(36.0, 36.0, 576.0, 756.0);
        let caption = bb(50.0, 300.0, 280.0, 324.0);
        let paragraph_above = bb(36.0, 500.0, 290.0, 700.0);
        let p = potential_box(&caption, &[paragraph_above], &main, &[]).unwrap();
        assert!((p.y0 - 324.0).abs() < 1e-9);
        assert!((p.y1 - 500.0).abs() < 1e-9);
    }

    #[test]
    fn potential_box_reaches_main_top_when_clear() {
        let main = bb(36.0, 36.0, 576.0, 756.0);
        let caption = bb(50.0, 300.0, 280.0, 324.0);
        let p = potential_box(&caption, &[], &main, &[]).unwrap();
        assert!((p.y1 - 756.0).abs() < 1e-9);
    }

    #[test]
    fn abutting_annotation_gives_no_potential() {
        let main = bb(36.0, 36.0, 576.0, 756.0);
        let caption = bb(50.0, 300.0, 280.0, 324.0);
        let touching = bb(50.0, 324.0, 280.0, 500.0);
        assert!(potential_box(&caption, &[touching], &main, &[]).is_none());
    }

    #[test]
    fn potential_widens_over_unconsumed_elements() {
        let main = bb(36.0, 36.0, 576.0, 756.0);
        let caption = bb(100.0, 300.0, 200.0, 324.0);
        let wide_figure = bb(60.0, 350.0, 260.0, 480.0);
        let p = potential_box(&caption, &[], &main, &[wide_figure]).unwrap();
        assert!((p.x0 - 60.0).abs() < 1e-9);
        assert!((p.x1 - 260.0).abs() < 1e-9);
    }

    #[test]
    fn body_box_unions_contained_elements() {
        let potential = bb(50.0, 324.0, 280.0, 700.0);
        let elements = [bb(60.0, 400.0, 200.0, 500.0), bb(120.0, 520.0, 270.0, 650.0)];
        let (body, used) = body_box(&potential, &elements).unwrap();
        assert_eq!(body, bb(60.0, 400.0, 270.0, 650.0));
        assert_eq!(used, [0, 1]);
    }

    #[test]
    fn body_box_empty_when_nothing_inside() {
        let potential = bb(50.0, 324.0, 280.0, 700.0);
        assert!(body_box(&potential, &[bb(400.0, 400.0, 500.0, 500.0)]).is_none());
    }

    #[test]
    fn straddling_element_mostly_outside_is_excluded() {
        let potential = bb(50.0, 300.0, 280.0, 700.0);
        // 40% inside horizontally
        let straddler = bb(188.0, 400.0, 418.0, 500.0);
        let inside = straddler.fraction_inside(&potential);
        assert!(inside < 0.5, "fixture sanity: {inside}");
        assert!(body_box(&potential, &[straddler]).is_none());
    }

    #[test]
    fn table_margin_is_below_caption() {
        let main = bb(36.0, 36.0, 576.0, 756.0);
        let caption = bb(50.0, 600.0, 280.0, 624.0);
        let text_below = bb(36.0, 100.0, 290.0, 300.0);
        let p = table_potential_box(&caption, &[text_below], &main, &[]).unwrap();
        assert!((p.y1 - 600.0).abs() < 1e-9);
        assert!((p.y0 - 300.0).abs() < 1e-9);
    }

    #[test]
    fn caption_at_page_bottom_has_no_table_margin() {
        let main = bb(36.0, 300.0, 576.0, 756.0);
        let caption = bb(50.0, 300.0, 280.0, 324.0);
        assert!(table_potential_box(&caption, &[], &main, &[]).is_none());
    }

    #[test]
    fn translation_equivariance() {
        let main = bb(36.0, 36.0, 576.0, 756.0);
        let caption = bb(50.0, 300.0, 280.0, 324.0);
        let above = bb(36.0, 500.0, 290.0, 700.0);
        let p = potential_box(&caption, &[above], &main, &[]).unwrap();
        let (dx, dy) = (13.0, -7.0);
        let p2 = potential_box(
            &caption.translate(dx, dy),
            &[above.translate(dx, dy)],
            &main.translate(dx, dy),
            &[],
        )
        .unwrap();
        assert_eq!(p.translate(dx, dy), p2);
    }
}
