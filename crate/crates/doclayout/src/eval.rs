//! Detection scoring: COCO-style mean average precision over the IOU
//! range 0.50:0.05:0.95.
//!
//! Matching is greedy: detections in descending score order each claim
//! the unmatched gold box with the highest IOU at or above the threshold.
//! Average precision uses 101-point interpolation; the final figure is
//! the macro average over the categories that appear in the gold set.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geom::{iou, BBox};
use crate::jats::LayoutCategory;

/// One predicted box, in the same coordinate frame as the gold boxes.
#[derive(Debug, Clone)]
pub struct Detection {
    pub page_id: String,
    pub category: LayoutCategory,
    pub bbox: BBox,
    pub score: f64,
}

/// One ground-truth box.
#[derive(Debug, Clone)]
pub struct GoldBox {
    pub page_id: String,
    pub category: LayoutCategory,
    pub bbox: BBox,
}

/// COCO results-file entry: `[{image_id, category_id, bbox, score}]` with
/// the bbox in `[x, y, w, h]` top-left form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultEntry {
    pub image_id: u64,
    pub category_id: u32,
    pub bbox: [f64; 4],
    pub score: f64,
}

pub const IOU_THRESHOLDS: [f64; 10] =
    [0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    /// AP averaged over the IOU thresholds, per category present in gold.
    pub per_category: BTreeMap<String, f64>,
    pub map: f64,
}

impl EvalReport {
    /// Plain-text table: one row per category plus the macro average.
    pub fn table(&self) -> String {
        let mut out = String::new();
        out.push_str("category        AP@[0.50:0.95]\n");
        for (name, ap) in &self.per_category {
            out.push_str(&format!("{name:<15} {ap:.4}\n"));
        }
        out.push_str(&format!("{:<15} {:.4}\n", "MAP", self.map));
        out
    }
}

/// Ranked true/false-positive flags for one category at one threshold.
///
/// Detections are sorted by descending score, ties keeping input order.
/// Each claims the unmatched gold box on its page with the highest IOU at
/// or above the threshold, if any.
fn match_flags(detections: &[&Detection], golds: &[&GoldBox], threshold: f64) -> Vec<bool> {
    let mut order: Vec<usize> = (0..detections.len()).collect();
    order.sort_by(|&a, &b| detections[b].score.partial_cmp(&detections[a].score).unwrap());
    let mut gold_taken = vec![false; golds.len()];
    let mut flags = vec![false; detections.len()];
    for (rank, &di) in order.iter().enumerate() {
        let d = detections[di];
        let mut best: Option<(usize, f64)> = None;
        for (gi, g) in golds.iter().enumerate() {
            if gold_taken[gi] || g.page_id != d.page_id {
                continue;
            }
            let overlap = iou(&d.bbox, &g.bbox);
            if overlap < threshold {
                continue;
            }
            if best.map_or(true, |(_, b)| overlap > b) {
                best = Some((gi, overlap));
            }
        }
        if let Some((gi, _)) = best {
            gold_taken[gi] = true;
            flags[rank] = true;
        }
    }
    flags
}

/// 101-point interpolated average precision from ranked match flags.
fn interpolated_ap(flags: &[bool], gold_count: usize) -> f64 {
    if gold_count == 0 {
        return 0.0;
    }
    let mut tp = 0usize;
    let mut precisions = Vec::with_capacity(flags.len());
    let mut recalls = Vec::with_capacity(flags.len());
    for (i, &hit) in flags.iter().enumerate() {
        if hit {
            tp += 1;
        }
        precisions.push(tp as f64 / (i + 1) as f64);
        recalls.push(tp as f64 / gold_count as f64);
    }
    let mut total = 0.0;
    for step in 0..=100 {
        let r = step as f64 / 100.0;
        let p = precisions
            .iter()
            .zip(&recalls)
            .filter(|(_, &rec)| rec >= r - 1e-12)
            .map(|(&p, _)| p)
            .fold(0.0, f64::max);
        total += p;
    }
    total / 101.0
}

/// AP for one category at one IOU threshold.
pub fn average_precision(detections: &[&Detection], golds: &[&GoldBox], threshold: f64) -> f64 {
    let flags = match_flags(detections, golds, threshold);
    interpolated_ap(&flags, golds.len())
}

/// MAP@IOU[0.50:0.95]: AP averaged over the ten thresholds per category,
/// then macro-averaged over the categories present in the gold set.
pub fn map_50_95(detections: &[Detection], golds: &[GoldBox]) -> EvalReport {
    let mut per_category = BTreeMap::new();
    let mut sum = 0.0;
    let mut count = 0usize;
    for cat in LayoutCategory::ALL {
        let g: Vec<&GoldBox> = golds.iter().filter(|g| g.category == cat).collect();
        if g.is_empty() {
            continue;
        }
        let d: Vec<&Detection> = detections.iter().filter(|d| d.category == cat).collect();
        let ap = IOU_THRESHOLDS
            .iter()
            .map(|&t| average_precision(&d, &g, t))
            .sum::<f64>()
            / IOU_THRESHOLDS.len() as f64;
        per_category.insert(cat.name().to_string(), ap);
        sum += ap;
        count += 1;
    }
    let map = if count == 0 { 0.0 } else { sum / count as f64 };
    EvalReport { per_category, map }
}
