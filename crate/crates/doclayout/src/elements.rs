//! Page-element data model and the neutral interchange format.
//!
//! The pipeline never reads PDFs directly. A separate extraction adapter
//! (any tool that can emit textboxes, textlines, images, and geometric
//! shapes with bounding boxes) writes one interchange file per document,
//! and everything downstream consumes that file. The schema is:
//!
//! ```json
//! { "pages": [ { "page_id": "...", "width": 612.0, "height": 792.0,
//!                "textboxes": [ { "bbox": [x0,y0,x1,y1],
//!                                 "lines": [ { "bbox": [...], "text": "..." } ] } ],
//!                "images": [ [x0,y0,x1,y1] ], "shapes": [ [x0,y0,x1,y1] ] } ] }
//! ```
//!
//! Coordinates are PDF points with a bottom-left origin; bbox order is
//! exactly `[x0, y0, x1, y1]`.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{union_bbox, BBox};
use crate::textnorm::{normalize_kd, NormString};

/// Tolerance, in points, for element boxes overhanging the page box.
pub const PAGE_TOLERANCE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Textline {
    pub text: NormString,
    pub bbox: BBox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Textbox {
    pub text: NormString,
    pub bbox: BBox,
    pub lines: Vec<Textline>,
}

impl Textbox {
    /// Builds a textbox from its lines; text is the line texts joined with
    /// a single space and the bbox is the union of the line boxes.
    pub fn from_lines(lines: Vec<Textline>) -> Result<Self> {
        if lines.is_empty() {
            return Err(Error::Validation("textbox with no lines".into()));
        }
        let bbox = union_bbox(&lines.iter().map(|l| l.bbox).collect::<Vec<_>>())?;
        let text = join_line_texts(&lines);
        Ok(Textbox { text, bbox, lines })
    }

    /// Divides the box before line `at_line`; both halves get recomputed
    /// enclosing boxes and rejoined text.
    pub fn split_at(&self, at_line: usize) -> Result<(Textbox, Textbox)> {
        if at_line == 0 || at_line >= self.lines.len() {
            return Err(Error::Validation(format!(
                "split index {at_line} out of range for {} lines",
                self.lines.len()
            )));
        }
        let first = Textbox::from_lines(self.lines[..at_line].to_vec())?;
        let second = Textbox::from_lines(self.lines[at_line..].to_vec())?;
        Ok((first, second))
    }
}

fn join_line_texts(lines: &[Textline]) -> NormString {
    let joined = lines
        .iter()
        .map(|l| l.text.as_str())
        .collect::<Vec<_>>()
        .join(" ");
    normalize_kd(&joined)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageElements {
    pub page_id: String,
    pub width: f64,
    pub height: f64,
    pub textboxes: Vec<Textbox>,
    pub images: Vec<BBox>,
    pub shapes: Vec<BBox>,
}

impl PageElements {
    pub fn page_bbox(&self) -> BBox {
        BBox { x0: 0.0, y0: 0.0, x1: self.width, y1: self.height }
    }
}

// ---- interchange (raw) schema ----

#[derive(Debug, Serialize, Deserialize)]
struct RawDocument {
    pages: Vec<RawPage>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawPage {
    page_id: String,
    width: f64,
    height: f64,
    #[serde(default)]
    textboxes: Vec<RawTextbox>,
    #[serde(default)]
    images: Vec<[f64; 4]>,
    #[serde(default)]
    shapes: Vec<[f64; 4]>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawTextbox {
    bbox: [f64; 4],
    lines: Vec<RawLine>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawLine {
    bbox: [f64; 4],
    text: String,
}

fn bbox_from_raw(raw: [f64; 4], ctx: &str) -> Result<BBox> {
    BBox::new(raw[0], raw[1], raw[2], raw[3])
        .map_err(|e| Error::Parse(format!("{ctx}: {e}")))
}

/// Loads the interchange file, validating every invariant.
pub fn load_page_elements<R: Read>(mut source: R) -> Result<Vec<PageElements>> {
    let mut buf = String::new();
    source.read_to_string(&mut buf)?;
    let raw: RawDocument =
        serde_json::from_str(&buf).map_err(|e| Error::Parse(format!("interchange file: {e}")))?;

    let mut pages = Vec::with_capacity(raw.pages.len());
    for rp in raw.pages {
        let pid = rp.page_id.clone();
        let mut textboxes = Vec::with_capacity(rp.textboxes.len());
        for (bi, rb) in rp.textboxes.into_iter().enumerate() {
            let ctx = format!("page {pid}, textbox {bi}");
            let declared = bbox_from_raw(rb.bbox, &ctx)?;
            let mut lines = Vec::with_capacity(rb.lines.len());
            for (li, rl) in rb.lines.into_iter().enumerate() {
                let lctx = format!("{ctx}, line {li}");
                lines.push(Textline {
                    text: normalize_kd(&rl.text),
                    bbox: bbox_from_raw(rl.bbox, &lctx)?,
                });
            }
            let mut tb = Textbox::from_lines(lines)
                .map_err(|e| Error::Parse(format!("{ctx}: {e}")))?;
            // keep the extractor's declared box when it is at least as large
            tb.bbox = tb.bbox.union(&declared);
            textboxes.push(tb);
        }
        let images = rp
            .images
            .into_iter()
            .enumerate()
            .map(|(i, b)| bbox_from_raw(b, &format!("page {pid}, image {i}")))
            .collect::<Result<Vec<_>>>()?;
        let shapes = rp
            .shapes
            .into_iter()
            .enumerate()
            .map(|(i, b)| bbox_from_raw(b, &format!("page {pid}, shape {i}")))
            .collect::<Result<Vec<_>>>()?;
        let page = PageElements {
            page_id: rp.page_id,
            width: rp.width,
            height: rp.height,
            textboxes,
            images,
            shapes,
        };
        let violations = validate_page(&page);
        if !violations.is_empty() {
            return Err(Error::Validation(format!(
                "page {}: {}",
                page.page_id,
                violations.join("; ")
            )));
        }
        pages.push(page);
    }
    Ok(pages)
}

/// Serializes pages back to the interchange schema.
pub fn write_page_elements(pages: &[PageElements]) -> Result<String> {
    let raw = RawDocument {
        pages: pages
            .iter()
            .map(|p| RawPage {
                page_id: p.page_id.clone(),
                width: p.width,
                height: p.height,
                textboxes: p
                    .textboxes
                    .iter()
                    .map(|tb| RawTextbox {
                        bbox: [tb.bbox.x0, tb.bbox.y0, tb.bbox.x1, tb.bbox.y1],
                        lines: tb
                            .lines
                            .iter()
                            .map(|l| RawLine {
                                bbox: [l.bbox.x0, l.bbox.y0, l.bbox.x1, l.bbox.y1],
                                text: l.text.as_str().to_string(),
                            })
                            .collect(),
                    })
                    .collect(),
                images: p.images.iter().map(|b| [b.x0, b.y0, b.x1, b.y1]).collect(),
                shapes: p.shapes.iter().map(|b| [b.x0, b.y0, b.x1, b.y1]).collect(),
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&raw)?)
}

/// Returns a description of every invariant violation on the page; an
/// empty result means the page is well formed.
pub fn validate_page(page: &PageElements) -> Vec<String> {
    let mut out = Vec::new();
    let page_box = page.page_bbox();
    if page.width <= 0.0 || page.height <= 0.0 {
        out.push(format!(
            "page {} has non-positive size {}x{}",
            page.page_id, page.width, page.height
        ));
    }
    for (bi, tb) in page.textboxes.iter().enumerate() {
        if tb.lines.is_empty() {
            out.push(format!("textbox {bi} has no lines"));
            continue;
        }
        if !page_box.contains(&tb.bbox, PAGE_TOLERANCE) {
            out.push(format!("textbox {bi} bbox extends beyond the page"));
        }
        for (li, line) in tb.lines.iter().enumerate() {
            if line.text.is_empty() {
                out.push(format!("textbox {bi} line {li} has empty text"));
            }
            if !tb.bbox.contains(&line.bbox, PAGE_TOLERANCE) {
                out.push(format!("textbox {bi} line {li} bbox outside its textbox"));
            }
        }
    }
    for (i, b) in page.images.iter().enumerate() {
        if !page_box.contains(b, PAGE_TOLERANCE) {
            out.push(format!("image {i} extends beyond the page"));
        }
    }
    for (i, b) in page.shapes.iter().enumerate() {
        if !page_box.contains(b, PAGE_TOLERANCE) {
            out.push(format!("shape {i} extends beyond the page"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(text: &str, b: [f64; 4]) -> Textline {
        Textline {
            text: normalize_kd(text),
            bbox: BBox::new(b[0], b[1], b[2], b[3]).unwrap(),
        }
    }

    #[test]
    fn minimal_well_formed_input() {
        let json = r#"{ "pages": [ { "page_id": "p1", "width": 612, "height": 792,
            "textboxes": [ { "bbox": [10, 700, 200, 724],
                "lines": [ { "bbox": [10, 712, 200, 724], "text": "first line" },
                           { "bbox": [10, 700, 180, 712], "text": "second line" } ] } ],
            "images": [], "shapes": [] } ] }"#;
        let pages = load_page_elements(json.as_bytes()).unwrap();
        assert_eq!(pages.len(), 1);
        assert_eq!(pages[0].textboxes.len(), 1);
        assert_eq!(pages[0].textboxes[0].lines.len(), 2);
        assert_eq!(pages[0].textboxes[0].text.as_str(), "first line second line");
    }

    #[test]
    fn inverted_bbox_is_a_parse_error() {
        let json = r#"{ "pages": [ { "page_id": "p1", "width": 612, "height": 792,
            "textboxes": [ { "bbox": [200, 700, 10, 724],
                "lines": [ { "bbox": [10, 700, 200, 724], "text": "x" } ] } ],
            "images": [], "shapes": [] } ] }"#;
        let err = load_page_elements(json.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("textbox 0"), "{err}");
    }

    #[test]
    fn pages_keep_file_order() {
        let json = r#"{ "pages": [
            { "page_id": "a", "width": 612, "height": 792, "textboxes": [], "images": [], "shapes": [] },
            { "page_id": "b", "width": 612, "height": 792, "textboxes": [], "images": [], "shapes": [] },
            { "page_id": "c", "width": 612, "height": 792, "textboxes": [], "images": [], "shapes": [] } ] }"#;
        let pages = load_page_elements(json.as_bytes()).unwrap();
        let ids: Vec<&str> = pages.iter().map(|p| p.page_id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
    }

    #[test]
    fn round_trip_is_stable() {
        let json = r#"{ "pages": [ { "page_id": "p1", "width": 612, "height": 792,
            "textboxes": [ { "bbox": [10, 700, 200, 724],
                "lines": [ { "bbox": [10, 712, 200, 724], "text": "line one" } ] } ],
            "images": [ [300, 300, 400, 420] ], "shapes": [ [50, 50, 60, 62] ] } ] }"#;
        let once = load_page_elements(json.as_bytes()).unwrap();
        let serialized = write_page_elements(&once).unwrap();
        let twice = load_page_elements(serialized.as_bytes()).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn validate_reports_all_violations() {
        let page = PageElements {
            page_id: "p".into(),
            width: 612.0,
            height: 792.0,
            textboxes: vec![Textbox {
                text: normalize_kd("abc"),
                bbox: BBox::new(10.0, 700.0, 100.0, 724.0).unwrap(),
                lines: vec![line("abc", [10.0, 650.0, 100.0, 660.0])],
            }],
            images: vec![BBox::new(500.0, 500.0, 700.0, 600.0).unwrap()],
            shapes: vec![],
        };
        let v = validate_page(&page);
        assert_eq!(v.len(), 2, "{v:?}");
    }

    #[test]
    fn validate_well_formed_is_empty() {
        let tb = Textbox::from_lines(vec![line("ok", [10.0, 700.0, 100.0, 712.0])]).unwrap();
        let page = PageElements {
            page_id: "p".into(),
            width: 612.0,
            height: 792.0,
            textboxes: vec![tb],
            images: vec![],
            shapes: vec![],
        };
        assert!(validate_page(&page).is_empty());
    }

    #[test]
    fn split_preserves_lines_and_boxes() {
        let lines: Vec<Textline> = (0..4)
            .map(|i| {
                let y = 700.0 - 12.0 * i as f64;
                line(&format!("line {i}"), [10.0, y, 150.0 + i as f64, y + 12.0])
            })
            .collect();
        let tb = Textbox::from_lines(lines.clone()).unwrap();
        let (a, b) = tb.split_at(2).unwrap();
        assert_eq!(a.lines.len(), 2);
        assert_eq!(b.lines.len(), 2);
        let merged: Vec<Textline> = a.lines.iter().chain(b.lines.iter()).cloned().collect();
        assert_eq!(merged, lines);
        assert_eq!(a.bbox.union(&b.bbox), tb.bbox);

        let (first, rest) = tb.split_at(1).unwrap();
        assert_eq!(first.lines.len(), 1);
        assert_eq!(rest.lines.len(), 3);
        assert_eq!(first.bbox, lines[0].bbox);
    }

    #[test]
    fn split_out_of_range_errors() {
        let tb = Textbox::from_lines(vec![line("only", [0.0, 0.0, 10.0, 10.0])]).unwrap();
        assert!(tb.split_at(0).is_err());
        assert!(tb.split_at(1).is_err());
    }
}
