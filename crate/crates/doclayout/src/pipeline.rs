//! Document-level orchestration: match an article's XML against its page
//! elements, infer figure and table bodies, and gate each page on
//! annotation quality.

use serde::{Deserialize, Serialize};

use crate::annotation::{
    body_annotation, body_box, main_text_box, potential_box, region_to_annotation,
    table_potential_box, LayoutAnnotation,
};
use crate::elements::PageElements;
use crate::error::Result;
use crate::geom::BBox;
use crate::jats::{
    group_nodes, parse_article, prune, restructure_floats, KindConfig, LayoutCategory, NodeId,
};
use crate::matcher::{MatchedRegion, Matcher};
use crate::quality::{
    accept_page_with, annotation_quality, is_title_page, QualityReport, QUALITY_THRESHOLD,
    TITLE_QUALITY_THRESHOLD,
};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QualityConfig {
    pub threshold: f64,
    pub title_threshold: f64,
}

impl Default for QualityConfig {
    fn default() -> Self {
        QualityConfig { threshold: QUALITY_THRESHOLD, title_threshold: TITLE_QUALITY_THRESHOLD }
    }
}

/// One annotated page with its quality verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PageAnnotations {
    pub page_id: String,
    pub width: f64,
    pub height: f64,
    pub annotations: Vec<LayoutAnnotation>,
    pub quality: QualityReport,
}

/// Everything produced for one document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DocumentAnnotations {
    pub doc_id: String,
    pub journal_id: String,
    pub pages: Vec<PageAnnotations>,
}

enum FloatKind {
    Figure,
    Table,
}

/// A caption matched on the page, queued for body inference.
struct CaptionSite {
    kind: FloatKind,
    float_node: NodeId,
    caption_bbox: BBox,
}

/// Runs the full per-document pipeline: parse and clean the XML, match
/// its text against the page lines, infer float bodies from the leftover
/// geometry, and score every page.
pub fn annotate_document(
    doc_id: &str,
    pages: &[PageElements],
    xml: &[u8],
    config: &KindConfig,
    quality: &QualityConfig,
) -> Result<DocumentAnnotations> {
    let article = parse_article(xml, config)?;
    let tree = restructure_floats(prune(article.root));
    let groups = group_nodes(&tree);
    let outcome = Matcher::run(pages, &groups);

    let mut out_pages = Vec::with_capacity(pages.len());
    for (pi, page) in pages.iter().enumerate() {
        let regions: Vec<&MatchedRegion> =
            outcome.regions.iter().filter(|r| r.page_index == pi).collect();
        let mut annotations = Vec::new();
        for r in &regions {
            if let Some(a) = region_to_annotation(r, &page.page_id)? {
                annotations.push(a);
            }
        }

        infer_bodies(page, &groups, &regions, &outcome.residual_textboxes[pi], &mut annotations);

        let title_page = is_title_page_owned(&regions);
        let ratio = match main_text_box(&collect_boxes(&annotations)) {
            Ok(main) => annotation_quality(page, &annotations, &main),
            Err(_) => 0.0,
        };
        let accepted =
            accept_page_with(ratio, title_page, quality.threshold, quality.title_threshold);
        out_pages.push(PageAnnotations {
            page_id: page.page_id.clone(),
            width: page.width,
            height: page.height,
            annotations,
            quality: QualityReport {
                page_id: page.page_id.clone(),
                ratio,
                is_title_page: title_page,
                accepted,
            },
        });
    }

    Ok(DocumentAnnotations {
        doc_id: doc_id.to_string(),
        journal_id: article.journal_id,
        pages: out_pages,
    })
}

fn collect_boxes(annotations: &[LayoutAnnotation]) -> Vec<BBox> {
    annotations.iter().map(|a| a.bbox).collect()
}

fn is_title_page_owned(regions: &[&MatchedRegion]) -> bool {
    let owned: Vec<MatchedRegion> = regions.iter().map(|r| (*r).clone()).collect();
    is_title_page(&owned)
}

/// Adds figure and table body annotations for every caption matched on
/// the page.
///
/// Captions are processed top to bottom sharing one pool of unconsumed
/// elements (leftover textboxes, images, and shapes), so each inferred
/// body removes its elements from consideration by later captions.
fn infer_bodies(
    page: &PageElements,
    groups: &crate::jats::NodeGroups,
    regions: &[&MatchedRegion],
    residual_textboxes: &[BBox],
    annotations: &mut Vec<LayoutAnnotation>,
) {
    let mut sites = caption_sites(groups, regions, annotations);
    if sites.is_empty() {
        return;
    }
    // top of page first: upper floats claim their elements before lower
    // captions widen over them
    sites.sort_by(|a, b| b.caption_bbox.y1.partial_cmp(&a.caption_bbox.y1).unwrap());

    let mut pool: Vec<BBox> = residual_textboxes
        .iter()
        .copied()
        .chain(page.images.iter().copied())
        .chain(page.shapes.iter().copied())
        .collect();

    let main = match main_text_box(&collect_boxes(annotations)) {
        Ok(m) => m,
        Err(_) => return,
    };

    for site in sites {
        let annotated = collect_boxes(annotations);
        let potential = match site.kind {
            FloatKind::Figure => {
                potential_box(&site.caption_bbox, &annotated, &main, &pool)
            }
            FloatKind::Table => {
                table_potential_box(&site.caption_bbox, &annotated, &main, &pool)
            }
        };
        let Some(potential) = potential else { continue };
        let Some((body, used)) = body_box(&potential, &pool) else { continue };
        let category = match site.kind {
            FloatKind::Figure => LayoutCategory::Figure,
            FloatKind::Table => LayoutCategory::Table,
        };
        annotations.push(body_annotation(category, body, site.float_node, &page.page_id));
        let mut used = used;
        used.sort_unstable_by(|a, b| b.cmp(a));
        for i in used {
            pool.remove(i);
        }
    }
}

/// Pairs each figure/table whose caption matched on this page with the
/// caption's annotation box.
fn caption_sites(
    groups: &crate::jats::NodeGroups,
    regions: &[&MatchedRegion],
    annotations: &[LayoutAnnotation],
) -> Vec<CaptionSite> {
    let bbox_of = |node: NodeId| -> Option<BBox> {
        annotations.iter().find(|a| a.source_node == node).map(|a| a.bbox)
    };
    let region_here = |node: NodeId| regions.iter().any(|r| r.node_id == node && r.complete);

    let mut sites = Vec::new();
    for f in &groups.figures {
        let Some((cid, _)) = &f.caption else { continue };
        if !region_here(*cid) {
            continue;
        }
        if let Some(b) = bbox_of(*cid) {
            sites.push(CaptionSite {
                kind: FloatKind::Figure,
                float_node: f.node_id,
                caption_bbox: b,
            });
        }
    }
    for t in &groups.tables {
        let Some((cid, _)) = &t.caption else { continue };
        if !region_here(*cid) {
            continue;
        }
        if let Some(b) = bbox_of(*cid) {
            sites.push(CaptionSite {
                kind: FloatKind::Table,
                float_node: t.node_id,
                caption_bbox: b,
            });
        }
    }
    sites
}
