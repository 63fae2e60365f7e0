//! COCO-style detection export.
//!
//! Coordinates are converted from the internal bottom-left origin to the
//! COCO top-left origin here and nowhere else: `y_top = page_height - y1`,
//! bbox `[x, y, w, h]`. Points are exported unscaled; a scale factor can
//! multiply all coordinates for pixel-space consumers.

use serde::{Deserialize, Serialize};

use crate::annotation::LayoutAnnotation;
use crate::error::{Error, Result};
use crate::geom::BBox;
use crate::jats::LayoutCategory;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CocoImage {
    pub id: u64,
    pub file_name: String,
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CocoAnnotation {
    pub id: u64,
    pub image_id: u64,
    pub category_id: u32,
    /// `[x, y, width, height]`, top-left origin.
    pub bbox: [f64; 4],
    /// Flat `[x0, y0, x1, y1, ...]` vertex lists, top-left origin.
    pub segmentation: Vec<Vec<f64>>,
    pub area: f64,
    pub iscrowd: u8,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CocoCategory {
    pub id: u32,
    pub name: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CocoDataset {
    pub images: Vec<CocoImage>,
    pub annotations: Vec<CocoAnnotation>,
    pub categories: Vec<CocoCategory>,
}

pub fn categories() -> Vec<CocoCategory> {
    LayoutCategory::ALL
        .iter()
        .map(|c| CocoCategory { id: c.coco_id(), name: c.name().to_string() })
        .collect()
}

/// A page queued for export with its annotations.
#[derive(Debug, Clone)]
pub struct ExportPage {
    pub page_id: String,
    pub width: f64,
    pub height: f64,
    pub annotations: Vec<LayoutAnnotation>,
}

/// Builds the COCO dataset for one split. Aborts listing every offending
/// annotation when invariants are violated.
pub fn export(pages: &[ExportPage], scale: f64) -> Result<CocoDataset> {
    let mut offenders = Vec::new();
    let mut images = Vec::new();
    let mut annotations = Vec::new();
    let mut ann_id = 0u64;

    for (pi, page) in pages.iter().enumerate() {
        let image_id = pi as u64 + 1;
        images.push(CocoImage {
            id: image_id,
            file_name: format!("{}.jpg", page.page_id),
            width: page.width * scale,
            height: page.height * scale,
        });
        for a in &page.annotations {
            ann_id += 1;
            let b = &a.bbox;
            let (w, h) = (b.width(), b.height());
            if w <= 0.0 || h <= 0.0 {
                offenders.push(format!(
                    "page {} node {}: degenerate box {w}x{h}",
                    page.page_id, a.source_node
                ));
                continue;
            }
            let y_top = page.height - b.y1;
            let flat: Vec<f64> = a
                .segmentation
                .vertices
                .iter()
                .flat_map(|&(x, y)| [x * scale, (page.height - y) * scale])
                .collect();
            annotations.push(CocoAnnotation {
                id: ann_id,
                image_id,
                category_id: a.category.coco_id(),
                bbox: [b.x0 * scale, y_top * scale, w * scale, h * scale],
                segmentation: vec![flat],
                area: a.segmentation.area() * scale * scale,
                iscrowd: 0,
            });
        }
    }

    if !offenders.is_empty() {
        return Err(Error::Validation(format!(
            "export aborted; invalid annotations: {}",
            offenders.join("; ")
        )));
    }
    Ok(CocoDataset { images, annotations, categories: categories() })
}

/// A gold box read back from an exported file, in internal bottom-left
/// coordinates.
#[derive(Debug, Clone)]
pub struct ImportedBox {
    pub page_id: String,
    pub category: LayoutCategory,
    pub bbox: BBox,
}

/// Re-imports an exported dataset, flipping back to bottom-left origin.
pub fn import(dataset: &CocoDataset, scale: f64) -> Result<Vec<ImportedBox>> {
    let mut out = Vec::new();
    for a in &dataset.annotations {
        let img = dataset
            .images
            .iter()
            .find(|i| i.id == a.image_id)
            .ok_or_else(|| Error::Validation(format!("annotation {} has unknown image", a.id)))?;
        let category = LayoutCategory::from_coco_id(a.category_id)
            .ok_or_else(|| Error::Validation(format!("unknown category {}", a.category_id)))?;
        let [x, y_top, w, h] = a.bbox;
        let (x, y_top, w, h) = (x / scale, y_top / scale, w / scale, h / scale);
        let height = img.height / scale;
        let page_id = img.file_name.trim_end_matches(".jpg").to_string();
        out.push(ImportedBox {
            page_id,
            category,
            bbox: BBox::new(x, height - y_top - h, x + w, height - y_top)?,
        });
    }
    Ok(out)
}
