//! Per-page annotation quality and the accept/reject gate.
//!
//! Quality is the ratio of the area of textboxes, images, and geometric
//! shapes that are annotated to the area of such elements within the main
//! text box. Non-title pages below 99% are rejected; title pages get a
//! 90% threshold because their miscellaneous front matter is often absent
//! from the XML.

use serde::{Deserialize, Serialize};

use crate::annotation::LayoutAnnotation;
use crate::elements::PageElements;
use crate::geom::{covered_area, BBox};

pub const QUALITY_THRESHOLD: f64 = 0.99;
pub const TITLE_QUALITY_THRESHOLD: f64 = 0.90;

/// Fraction of an element's area that must be covered by annotation boxes
/// for the element to count as annotated.
pub const ANNOTATED_COVERAGE: f64 = 0.95;

/// Fraction of an element's area that must lie inside the main text box
/// for the element to count toward the denominator.
pub const IN_MAIN_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QualityReport {
    pub page_id: String,
    pub ratio: f64,
    pub is_title_page: bool,
    pub accepted: bool,
}

impl QualityReport {
    /// Tab-separated line: page_id, ratio (6 decimals), title flag, accepted.
    pub fn tsv_line(&self) -> String {
        format!(
            "{}\t{:.6}\t{}\t{}",
            self.page_id,
            self.ratio,
            u8::from(self.is_title_page),
            u8::from(self.accepted)
        )
    }
}

/// Annotated-area ratio of the page.
pub fn annotation_quality(page: &PageElements, annotations: &[LayoutAnnotation], main: &BBox) -> f64 {
    let covers: Vec<BBox> = annotations.iter().map(|a| a.bbox).collect();
    let mut annotated = 0.0;
    let mut total = 0.0;
    let elements = page
        .textboxes
        .iter()
        .map(|tb| tb.bbox)
        .chain(page.images.iter().copied())
        .chain(page.shapes.iter().copied());
    for e in elements {
        let area = e.area();
        if area <= 0.0 {
            continue;
        }
        if e.fraction_inside(main) < IN_MAIN_FRACTION {
            continue;
        }
        total += area;
        if covered_area(&e, &covers) / area >= ANNOTATED_COVERAGE {
            annotated += area;
        }
    }
    if total <= 0.0 {
        0.0
    } else {
        annotated / total
    }
}

/// The 99%/90% gate; both thresholds are inclusive.
pub fn accept_page(ratio: f64, is_title_page: bool) -> bool {
    accept_page_with(ratio, is_title_page, QUALITY_THRESHOLD, TITLE_QUALITY_THRESHOLD)
}

pub fn accept_page_with(ratio: f64, is_title_page: bool, threshold: f64, title_threshold: f64) -> bool {
    if is_title_page {
        ratio >= title_threshold
    } else {
        ratio >= threshold
    }
}

/// A page is a title page when it carries a matched article-title region.
pub fn is_title_page(regions: &[crate::matcher::MatchedRegion]) -> bool {
    regions
        .iter()
        .any(|r| r.role == crate::jats::NodeRole::ArticleTitle && !r.lines.is_empty())
}
