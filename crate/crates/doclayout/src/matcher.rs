//! The alignment state machine.
//!
//! Textlines of the page textboxes are consumed sequentially to cover the
//! text of each XML node. A textline that cannot be found in the node's
//! remaining text makes the search skip to the next textbox; a node whose
//! text runs out mid-textbox splits the box, leaving the remainder for the
//! next node. Titles whose last line does not cover a whole textline are
//! inline titles and merge into the following text region.

use serde::{Deserialize, Serialize};

use crate::elements::PageElements;
use crate::fuzzy::{find_near_match, MatchBudget};
use crate::geom::BBox;
use crate::jats::{category_of, LayoutCategory, NodeGroups, NodeId, NodeRole};
use crate::textnorm::{normalize_kd, NormString};

/// How many pages past the last consumption a sorted-pass node may scan
/// before giving up.
const SKIP_PAGE_CAP: usize = 1;

/// One textline consumed into a region.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConsumedLine {
    pub text: NormString,
    pub bbox: BBox,
    /// Character range of the line text covered by the match. Equal to the
    /// full line length except on an inline-title boundary line.
    pub from_char: usize,
    pub to_char: usize,
    pub dist: usize,
}

/// A run of textlines matched to one XML node on one page.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchedRegion {
    pub node_id: NodeId,
    pub role: NodeRole,
    pub category: LayoutCategory,
    pub page_index: usize,
    pub lines: Vec<ConsumedLine>,
    pub complete: bool,
    pub total_dist: usize,
}

impl MatchedRegion {
    pub fn line_boxes(&self) -> Vec<BBox> {
        self.lines.iter().map(|l| l.bbox).collect()
    }
}

/// True when the match on the region's final textline ends strictly
/// before the line's text does.
pub fn detect_inline_title(region: &MatchedRegion) -> bool {
    match region.lines.last() {
        Some(l) => l.to_char < l.text.char_len(),
        None => false,
    }
}

// ---- working stream ----

#[derive(Debug, Clone)]
struct WorkLine {
    text: NormString,
    bbox: BBox,
    consumed: bool,
}

#[derive(Debug, Clone)]
struct WorkBox {
    page: usize,
    lines: Vec<WorkLine>,
}

impl WorkBox {
    fn first_unconsumed(&self) -> Option<usize> {
        self.lines.iter().position(|l| !l.consumed)
    }

    /// Union box of the lines not consumed by any text region; the residue
    /// a split left behind, available to figure/table bodies.
    fn residual_bbox(&self) -> Option<BBox> {
        let mut it = self.lines.iter().filter(|l| !l.consumed).map(|l| l.bbox);
        let first = it.next()?;
        Some(it.fold(first, |a, b| a.union(&b)))
    }
}

/// Position of a line in the flattened textbox stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Pos {
    bx: usize,
    line: usize,
}

/// Cursor of the sorted pass; never moves backward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchCursor {
    pub textbox_index: usize,
    pub line_index: usize,
}

/// A line taken by a (possibly trial) consumption.
#[derive(Debug, Clone)]
struct Taken {
    pos: Pos,
    from_char: usize,
    to_char: usize,
    dist: usize,
}

#[derive(Debug, Clone)]
struct Consumption {
    taken: Vec<Taken>,
    complete: bool,
    /// Set when the node text ran out mid-line: the line position and the
    /// character offset where the next node continues.
    pending: Option<(Pos, usize)>,
    total_dist: usize,
    /// Stream position after the last taken line.
    after: Option<Pos>,
}

#[derive(Debug, Clone, Copy)]
struct ConsumeOpts {
    /// Skip to the next textbox when a line fails (sorted pass); when
    /// false the consumption is contiguous and stops at the first failure.
    skip_on_failure: bool,
    /// Restrict consumption to the starting textbox.
    single_box: bool,
    /// Character offset in the first line to start from (inline carry).
    start_char: usize,
}

/// Document-level matching output.
#[derive(Debug)]
pub struct MatchOutcome {
    pub regions: Vec<MatchedRegion>,
    /// Per page: bounding boxes of textboxes (or their unconsumed
    /// residues) that no text region consumed.
    pub residual_textboxes: Vec<Vec<BBox>>,
    pub cursor: MatchCursor,
}

pub struct Matcher {
    boxes: Vec<WorkBox>,
    page_count: usize,
    cursor_pos: Pos,
}

impl Matcher {
    pub fn new(pages: &[PageElements]) -> Self {
        let mut boxes = Vec::new();
        for (pi, page) in pages.iter().enumerate() {
            for tb in &page.textboxes {
                boxes.push(WorkBox {
                    page: pi,
                    lines: tb
                        .lines
                        .iter()
                        .map(|l| WorkLine {
                            text: l.text.clone(),
                            bbox: l.bbox,
                            consumed: false,
                        })
                        .collect(),
                });
            }
        }
        Matcher {
            boxes,
            page_count: pages.len(),
            cursor_pos: Pos { bx: 0, line: 0 },
        }
    }

    /// Runs every matching pass over the whole document and returns the
    /// regions plus the unconsumed geometry bodies are inferred from.
    pub fn run(pages: &[PageElements], groups: &NodeGroups) -> MatchOutcome {
        let mut m = Matcher::new(pages);
        let mut regions = Vec::new();

        m.match_sorted(&groups.sorted, &mut regions);
        m.match_unsorted(&groups.unsorted, &mut regions);
        m.match_lists(&groups.lists, &mut regions);
        m.match_table_text(groups, &mut regions);
        m.match_figure_text(groups, &mut regions);

        let mut residual: Vec<Vec<BBox>> = vec![Vec::new(); m.page_count];
        for b in &m.boxes {
            if let Some(bb) = b.residual_bbox() {
                residual[b.page].push(bb);
            }
        }
        MatchOutcome {
            regions,
            residual_textboxes: residual,
            cursor: MatchCursor {
                textbox_index: m.cursor_pos.bx,
                line_index: m.cursor_pos.line,
            },
        }
    }

    // ---- stream helpers ----

    fn line_at(&self, p: Pos) -> &WorkLine {
        &self.boxes[p.bx].lines[p.line]
    }

    /// Next position holding an unconsumed line, at or after `p`.
    fn seek_unconsumed(&self, mut p: Pos) -> Option<Pos> {
        while p.bx < self.boxes.len() {
            let b = &self.boxes[p.bx];
            while p.line < b.lines.len() {
                if !b.lines[p.line].consumed {
                    return Some(p);
                }
                p.line += 1;
            }
            p = Pos { bx: p.bx + 1, line: 0 };
        }
        None
    }

    fn next_box(&self, p: Pos) -> Pos {
        Pos { bx: p.bx + 1, line: 0 }
    }

    fn advance(&self, p: Pos) -> Pos {
        if p.line + 1 < self.boxes[p.bx].lines.len() {
            Pos { bx: p.bx, line: p.line + 1 }
        } else {
            self.next_box(p)
        }
    }

    fn page_of(&self, p: Pos) -> usize {
        self.boxes.get(p.bx).map(|b| b.page).unwrap_or(self.page_count)
    }

    // ---- consumption ----

    /// Tries to cover `node_text` with textlines starting at `start`.
    /// Does not mutate the stream; `apply` commits a consumption.
    fn try_consume(&self, node_text: &NormString, start: Pos, opts: ConsumeOpts) -> Consumption {
        let mut remaining = node_text.clone();
        let mut taken: Vec<Taken> = Vec::new();
        let mut total_dist = 0usize;
        let mut pending = None;
        let mut pos = start;
        let mut first = true;
        let mut anchor_page = self.page_of(start);
        let start_box = start.bx;

        let complete = loop {
            if remaining.is_empty() {
                break true;
            }
            let cur = match self.seek_unconsumed(pos) {
                Some(c) => c,
                None => break false,
            };
            if opts.single_box && cur.bx != start_box {
                break false;
            }
            if !opts.skip_on_failure && !first && cur.bx != pos.bx && cur != pos {
                // contiguous mode: the stream jumped over consumed lines
                // inside the same box is fine, but crossing into a new box
                // only happens when the previous one is exhausted, which
                // seek_unconsumed guarantees
            }
            if self.page_of(cur) > anchor_page + SKIP_PAGE_CAP {
                break false;
            }
            let line = self.line_at(cur);
            let start_char = if first { opts.start_char } else { 0 };
            let line_text = if start_char > 0 {
                normalize_kd(&line.text.chars().skip(start_char).collect::<String>())
            } else {
                line.text.clone()
            };
            if line_text.is_empty() {
                pos = self.advance(cur);
                first = false;
                continue;
            }

            let budget = MatchBudget::for_len(line_text.char_len());
            if let Some(m) = find_near_match(&line_text, &remaining, budget) {
                taken.push(Taken {
                    pos: cur,
                    from_char: start_char,
                    to_char: line.text.char_len(),
                    dist: m.dist,
                });
                total_dist += m.dist;
                remaining = tail_of(&remaining, m.end);
                anchor_page = self.page_of(cur);
                pos = self.advance(cur);
                first = false;
                continue;
            }

            // tail case: the node's remaining text is shorter than the
            // line; look for it near the start of the line instead
            let rev_budget = MatchBudget::for_len(remaining.char_len());
            let tail = find_near_match(&remaining, &line_text, rev_budget)
                .filter(|m| m.start <= rev_budget.d_max);
            if let Some(m) = tail {
                let end_in_line = start_char + m.end;
                taken.push(Taken {
                    pos: cur,
                    from_char: start_char,
                    to_char: end_in_line,
                    dist: m.dist,
                });
                total_dist += m.dist;
                if end_in_line < line.text.char_len() {
                    pending = Some((cur, end_in_line));
                }
                break true;
            }

            if !opts.skip_on_failure {
                break false;
            }
            pos = self.next_box(cur);
            first = false;
        };

        let after = taken.last().map(|t| {
            if pending.is_some() {
                t.pos
            } else {
                self.advance(t.pos)
            }
        });
        Consumption { taken, complete, pending, total_dist, after }
    }

    fn apply(&mut self, c: &Consumption) {
        for t in &c.taken {
            self.boxes[t.pos.bx].lines[t.pos.line].consumed = true;
        }
    }

    /// Groups taken lines by page into per-page regions.
    fn emit(&self, c: &Consumption, node_id: NodeId, role: NodeRole, category: LayoutCategory, out: &mut Vec<MatchedRegion>) {
        let mut by_page: Vec<(usize, Vec<ConsumedLine>, usize)> = Vec::new();
        for t in &c.taken {
            let line = self.line_at(t.pos);
            let page = self.page_of(t.pos);
            let cl = ConsumedLine {
                text: line.text.clone(),
                bbox: line.bbox,
                from_char: t.from_char,
                to_char: t.to_char,
                dist: t.dist,
            };
            match by_page.last_mut() {
                Some((p, lines, d)) if *p == page => {
                    lines.push(cl);
                    *d += t.dist;
                }
                _ => by_page.push((page, vec![cl], t.dist)),
            }
        }
        for (page, lines, dist) in by_page {
            out.push(MatchedRegion {
                node_id,
                role,
                category,
                page_index: page,
                lines,
                // every page's share of a finished match is annotatable
                complete: c.complete,
                total_dist: dist,
            });
        }
    }

    // ---- passes ----

    fn match_sorted(&mut self, nodes: &[crate::jats::GroupNode], out: &mut Vec<MatchedRegion>) {
        // an inline title waiting to merge into the next text region
        let mut carry: Option<(Consumption, NodeId, NodeRole)> = None;

        for node in nodes {
            let opts = ConsumeOpts { skip_on_failure: true, single_box: false, start_char: 0 };

            // continue on the shared line first when an inline title is pending
            if let Some((title_c, title_id, title_role)) = carry.take() {
                let (pos, ch) = title_c.pending.expect("carried consumption is inline");
                let cont = self.try_consume(&node.text, pos, ConsumeOpts {
                    skip_on_failure: false,
                    single_box: false,
                    start_char: ch,
                });
                if cont.complete || !cont.taken.is_empty() {
                    // merge: title lines plus continuation, category text
                    let mut merged = title_c.clone();
                    merged.taken.extend(cont.taken.iter().cloned());
                    merged.taken = coalesce_shared_line(merged.taken);
                    merged.total_dist += cont.total_dist;
                    merged.complete = cont.complete;
                    merged.pending = cont.pending;
                    self.apply(&merged);
                    self.emit(&merged, node.node_id, node.role, LayoutCategory::Text, out);
                    if let Some(after) = merged.after {
                        self.bump_cursor(after);
                    }
                    if merged.pending.is_some() {
                        carry = Some((merged, node.node_id, node.role));
                    }
                    continue;
                }
                // continuation failed: the title stands alone after all
                self.apply(&title_c);
                self.emit(&title_c, title_id, title_role,
                    category_of(title_role).unwrap_or(LayoutCategory::Title), out);
            }

            let c = self.try_consume(&node.text, self.cursor_pos, opts);
            if c.taken.is_empty() {
                // nothing of this node found; leave the cursor alone
                continue;
            }
            let inline = c.complete
                && c.pending.is_some()
                && matches!(node.role, NodeRole::SectionTitle | NodeRole::ArticleTitle | NodeRole::Label);
            if inline {
                // defer: merge into the next text region
                carry = Some((c, node.node_id, node.role));
                continue;
            }
            self.apply(&c);
            let category = category_of(node.role).unwrap_or(LayoutCategory::Text);
            self.emit(&c, node.node_id, node.role, category, out);
            if let Some(after) = c.after {
                self.bump_cursor(after);
            }
        }
        if let Some((title_c, title_id, title_role)) = carry {
            self.apply(&title_c);
            self.emit(&title_c, title_id, title_role,
                category_of(title_role).unwrap_or(LayoutCategory::Title), out);
        }
    }

    fn bump_cursor(&mut self, p: Pos) {
        if p > self.cursor_pos {
            self.cursor_pos = p;
        }
    }

    /// Candidate search over still-unconsumed textboxes; coverage must
    /// complete within the starting box. Lowest aggregate distance wins,
    /// ties to extractor order.
    fn best_candidate(&self, text: &NormString, opts: ConsumeOpts) -> Option<Consumption> {
        let mut best: Option<Consumption> = None;
        for bx in 0..self.boxes.len() {
            let Some(line) = self.boxes[bx].first_unconsumed() else { continue };
            let start = Pos { bx, line };
            let c = self.try_consume(text, start, opts);
            if c.complete {
                let better = match &best {
                    None => true,
                    Some(b) => c.total_dist < b.total_dist,
                };
                if better {
                    best = Some(c);
                }
            }
        }
        best
    }

    fn match_unsorted(&mut self, nodes: &[crate::jats::GroupNode], out: &mut Vec<MatchedRegion>) {
        let opts = ConsumeOpts { skip_on_failure: false, single_box: true, start_char: 0 };
        for node in nodes {
            if let Some(c) = self.best_candidate(&node.text, opts) {
                self.apply(&c);
                let category = category_of(node.role).unwrap_or(LayoutCategory::Text);
                self.emit(&c, node.node_id, node.role, category, out);
            }
        }
    }

    fn match_lists(&mut self, nodes: &[crate::jats::GroupNode], out: &mut Vec<MatchedRegion>) {
        // lists may span several extractor boxes, so the chain may cross
        // box boundaries but must stay contiguous
        let opts = ConsumeOpts { skip_on_failure: false, single_box: false, start_char: 0 };
        for node in nodes {
            if let Some(c) = self.best_candidate(&node.text, opts) {
                self.apply(&c);
                self.emit(&c, node.node_id, NodeRole::List, LayoutCategory::List, out);
            }
        }
    }

    fn match_table_text(&mut self, groups: &NodeGroups, out: &mut Vec<MatchedRegion>) {
        for t in &groups.tables {
            self.match_float_text(t.label.as_ref(), t.caption.as_ref(), out);
            if let Some((fid, ftext)) = &t.footnotes {
                let opts = ConsumeOpts { skip_on_failure: false, single_box: false, start_char: 0 };
                if let Some(c) = self.best_candidate(ftext, opts) {
                    self.apply(&c);
                    self.emit(&c, *fid, NodeRole::TableFoot, LayoutCategory::Text, out);
                }
            }
        }
    }

    fn match_figure_text(&mut self, groups: &NodeGroups, out: &mut Vec<MatchedRegion>) {
        for f in &groups.figures {
            self.match_float_text(f.label.as_ref(), f.caption.as_ref(), out);
        }
    }

    /// Matches a float's caption label and caption text. A label sharing
    /// its line with the caption is inline and merges into the caption's
    /// text region; a standalone label is a title region.
    fn match_float_text(
        &mut self,
        label: Option<&(NodeId, NormString)>,
        caption: Option<&(NodeId, NormString)>,
        out: &mut Vec<MatchedRegion>,
    ) {
        let chain = ConsumeOpts { skip_on_failure: false, single_box: false, start_char: 0 };

        // try label+caption anchored at the same candidate first
        if let (Some((lid, ltext)), Some((cid, ctext))) = (label, caption) {
            let mut best: Option<(Consumption, Consumption)> = None;
            for bx in 0..self.boxes.len() {
                let Some(line) = self.boxes[bx].first_unconsumed() else { continue };
                let start = Pos { bx, line };
                let lc = self.try_consume(ltext, start, chain);
                if !lc.complete || lc.taken.is_empty() {
                    continue;
                }
                let cont_start;
                let cont_char;
                if let Some((pos, ch)) = lc.pending {
                    cont_start = pos;
                    cont_char = ch;
                } else if let Some(after) = lc.after {
                    cont_start = after;
                    cont_char = 0;
                } else {
                    continue;
                }
                let cc = self.try_consume(ctext, cont_start, ConsumeOpts {
                    skip_on_failure: false,
                    single_box: false,
                    start_char: cont_char,
                });
                if !cc.complete {
                    continue;
                }
                let total = lc.total_dist + cc.total_dist;
                let better = match &best {
                    None => true,
                    Some((bl, bc)) => total < bl.total_dist + bc.total_dist,
                };
                if better {
                    best = Some((lc, cc));
                }
            }
            if let Some((lc, cc)) = best {
                let inline = lc.pending.is_some();
                if inline {
                    let mut merged = lc.clone();
                    merged.taken.extend(cc.taken.iter().cloned());
                    merged.taken = coalesce_shared_line(merged.taken);
                    merged.total_dist += cc.total_dist;
                    merged.complete = cc.complete;
                    merged.pending = cc.pending;
                    self.apply(&merged);
                    self.emit(&merged, *cid, NodeRole::Caption, LayoutCategory::Text, out);
                } else {
                    self.apply(&lc);
                    self.apply(&cc);
                    self.emit(&lc, *lid, NodeRole::Label, LayoutCategory::Title, out);
                    self.emit(&cc, *cid, NodeRole::Caption, LayoutCategory::Text, out);
                }
                return;
            }
        }

        // fall back to matching whichever piece exists on its own
        if let Some((lid, ltext)) = label {
            if let Some(c) = self.best_candidate(ltext, chain) {
                // a lone label matching only part of a line is inline with
                // unmatched content; leave it to the caption fallback below
                if c.pending.is_none() {
                    self.apply(&c);
                    self.emit(&c, *lid, NodeRole::Label, LayoutCategory::Title, out);
                }
            }
        }
        if let Some((cid, ctext)) = caption {
            if let Some(c) = self.best_candidate(ctext, chain) {
                self.apply(&c);
                self.emit(&c, *cid, NodeRole::Caption, LayoutCategory::Text, out);
            }
        }
    }
}

/// Remaining node text after consuming `chars` characters.
fn tail_of(s: &NormString, chars: usize) -> NormString {
    let rest: String = s.chars().skip(chars).collect();
    normalize_kd(&rest)
}

/// When an inline title and its continuation both took the shared line,
/// collapse the two partial takes into one full-line take.
fn coalesce_shared_line(mut taken: Vec<Taken>) -> Vec<Taken> {
    let mut out: Vec<Taken> = Vec::with_capacity(taken.len());
    for t in taken.drain(..) {
        match out.last_mut() {
            Some(prev) if prev.pos == t.pos => {
                prev.to_char = prev.to_char.max(t.to_char);
                prev.from_char = prev.from_char.min(t.from_char);
                prev.dist += t.dist;
            }
            _ => out.push(t),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::{PageElements, Textbox, Textline};
    use crate::jats::GroupNode;

    fn line(text: &str, y: f64, x1: f64) -> Textline {
        Textline {
            text: normalize_kd(text),
            bbox: BBox::new(36.0, y, x1, y + 12.0).unwrap(),
        }
    }

    fn page(id: &str, boxes: Vec<Vec<Textline>>) -> PageElements {
        PageElements {
            page_id: id.into(),
            width: 612.0,
            height: 792.0,
            textboxes: boxes
                .into_iter()
                .map(|ls| Textbox::from_lines(ls).unwrap())
                .collect(),
            images: vec![],
            shapes: vec![],
        }
    }

    fn gnode(id: u32, role: NodeRole, text: &str) -> GroupNode {
        GroupNode { node_id: NodeId(id), role, text: normalize_kd(text) }
    }

    #[test]
    fn node_equal_to_one_textbox_is_complete() {
        let pages = [page("p1", vec![vec![
            line("the quick brown fox jumps", 700.0, 300.0),
            line("over the lazy dog tonight", 688.0, 300.0),
        ]])];
        let groups = NodeGroups {
            sorted: vec![gnode(1, NodeRole::Paragraph,
                "the quick brown fox jumps over the lazy dog tonight")],
            ..Default::default()
        };
        let out = Matcher::run(&pages, &groups);
        assert_eq!(out.regions.len(), 1);
        let r = &out.regions[0];
        assert!(r.complete);
        assert_eq!(r.lines.len(), 2);
        assert_eq!(r.category, LayoutCategory::Text);
    }

    #[test]
    fn node_boundary_splits_textbox() {
        // one textbox containing the ends of node A and start of node B
        let pages = [page("p1", vec![vec![
            line("tail of the first paragraph here", 700.0, 300.0),
            line("the second paragraph starts now", 688.0, 300.0),
            line("and continues on this line too", 676.0, 300.0),
        ]])];
        let groups = NodeGroups {
            sorted: vec![
                gnode(1, NodeRole::Paragraph, "tail of the first paragraph here"),
                gnode(2, NodeRole::Paragraph,
                    "the second paragraph starts now and continues on this line too"),
            ],
            ..Default::default()
        };
        let out = Matcher::run(&pages, &groups);
        assert_eq!(out.regions.len(), 2);
        assert!(out.regions.iter().all(|r| r.complete));
        assert_eq!(out.regions[0].lines.len(), 1);
        assert_eq!(out.regions[1].lines.len(), 2);
    }

    #[test]
    fn corrupted_textbox_is_skipped() {
        let pages = [page("p1", vec![
            vec![line("XQZWVKJHGPLMN0973 44#$%&!!", 700.0, 300.0)],
            vec![line("a clean paragraph of real text", 650.0, 300.0)],
        ])];
        let groups = NodeGroups {
            sorted: vec![gnode(1, NodeRole::Paragraph, "a clean paragraph of real text")],
            ..Default::default()
        };
        let out = Matcher::run(&pages, &groups);
        assert_eq!(out.regions.len(), 1);
        assert!(out.regions[0].complete);
        // the corrupted box stays unconsumed
        assert_eq!(out.residual_textboxes[0].len(), 1);
    }

    #[test]
    fn inline_title_merges_into_text() {
        let pages = [page("p1", vec![vec![
            line("Results and findings. We observed that the", 700.0, 300.0),
            line("effect persisted across all trials we ran", 688.0, 300.0),
        ]])];
        let groups = NodeGroups {
            sorted: vec![
                gnode(1, NodeRole::SectionTitle, "Results and findings."),
                gnode(2, NodeRole::Paragraph,
                    "We observed that the effect persisted across all trials we ran"),
            ],
            ..Default::default()
        };
        let out = Matcher::run(&pages, &groups);
        assert_eq!(out.regions.len(), 1, "{:#?}", out.regions);
        let r = &out.regions[0];
        assert_eq!(r.category, LayoutCategory::Text);
        assert_eq!(r.lines.len(), 2);
        assert!(r.complete);
    }

    #[test]
    fn standalone_title_stays_title() {
        let pages = [page("p1", vec![
            vec![line("Methods", 700.0, 120.0)],
            vec![line("We did things carefully and slowly", 680.0, 300.0)],
        ])];
        let groups = NodeGroups {
            sorted: vec![
                gnode(1, NodeRole::SectionTitle, "Methods"),
                gnode(2, NodeRole::Paragraph, "We did things carefully and slowly"),
            ],
            ..Default::default()
        };
        let out = Matcher::run(&pages, &groups);
        assert_eq!(out.regions.len(), 2);
        assert_eq!(out.regions[0].category, LayoutCategory::Title);
        assert!(!detect_inline_title(&out.regions[0]));
    }

    #[test]
    fn unsorted_matches_anywhere() {
        let pages = [page("p1", vec![
            vec![line("main body text goes here today", 700.0, 300.0)],
            vec![line("(c) 2020 The Example Authors", 40.0, 250.0)],
        ])];
        let groups = NodeGroups {
            sorted: vec![gnode(1, NodeRole::Paragraph, "main body text goes here today")],
            unsorted: vec![gnode(2, NodeRole::Copyright, "(c) 2020 The Example Authors")],
            ..Default::default()
        };
        let out = Matcher::run(&pages, &groups);
        assert_eq!(out.regions.len(), 2);
        let cp = out.regions.iter().find(|r| r.node_id == NodeId(2)).unwrap();
        assert!(cp.complete);
    }

    #[test]
    fn unsorted_absent_node_yields_nothing() {
        let pages = [page("p1", vec![vec![line("unrelated content", 700.0, 200.0)]])];
        let groups = NodeGroups {
            unsorted: vec![gnode(1, NodeRole::Copyright, "a completely different string")],
            ..Default::default()
        };
        let out = Matcher::run(&pages, &groups);
        assert!(out.regions.is_empty());
    }

    #[test]
    fn unsorted_tie_breaks_by_distance_then_order() {
        let pages = [page("p1", vec![
            vec![line("license text hxre", 700.0, 200.0)],
            vec![line("license text here", 650.0, 200.0)],
        ])];
        let groups = NodeGroups {
            unsorted: vec![gnode(1, NodeRole::License, "license text here")],
            ..Default::default()
        };
        let out = Matcher::run(&pages, &groups);
        assert_eq!(out.regions.len(), 1);
        // exact copy wins over the one-edit copy despite extractor order
        assert!((out.regions[0].lines[0].bbox.y0 - 650.0).abs() < 1e-9);
        assert_eq!(out.regions[0].total_dist, 0);
    }

    #[test]
    fn page_spanning_node_yields_region_per_page() {
        let pages = [
            page("p1", vec![vec![line("this paragraph begins on the first", 700.0, 300.0)]]),
            page("p2", vec![vec![line("page and finishes on the second one", 700.0, 300.0)]]),
        ];
        let groups = NodeGroups {
            sorted: vec![gnode(1, NodeRole::Paragraph,
                "this paragraph begins on the first page and finishes on the second one")],
            ..Default::default()
        };
        let out = Matcher::run(&pages, &groups);
        assert_eq!(out.regions.len(), 2);
        assert_eq!(out.regions[0].page_index, 0);
        assert!(out.regions[0].complete, "both shares of a finished match are annotatable");
        assert_eq!(out.regions[1].page_index, 1);
        assert!(out.regions[1].complete);
        assert_eq!(out.regions[0].node_id, out.regions[1].node_id);
    }

    #[test]
    fn inline_caption_label_merges() {
        let pages = [page("p1", vec![vec![
            line("Fig. 1 The measured distribution over", 300.0, 280.0),
            line("ten independent trials of the system", 288.0, 280.0),
        ]])];
        let groups = NodeGroups {
            figures: vec![crate::jats::FigureEntry {
                node_id: NodeId(10),
                label: Some((NodeId(11), normalize_kd("Fig. 1"))),
                caption: Some((NodeId(12), normalize_kd(
                    "The measured distribution over ten independent trials of the system"))),
            }],
            ..Default::default()
        };
        let out = Matcher::run(&pages, &groups);
        assert_eq!(out.regions.len(), 1, "{:#?}", out.regions);
        assert_eq!(out.regions[0].category, LayoutCategory::Text);
        assert_eq!(out.regions[0].lines.len(), 2);
    }

    #[test]
    fn standalone_caption_label_is_title() {
        let pages = [page("p1", vec![
            vec![line("Table 1", 400.0, 90.0)],
            vec![line("Summary of the experimental results", 388.0, 280.0)],
        ])];
        let groups = NodeGroups {
            tables: vec![crate::jats::TableEntry {
                node_id: NodeId(20),
                label: Some((NodeId(21), normalize_kd("Table 1"))),
                caption: Some((NodeId(22), normalize_kd("Summary of the experimental results"))),
                footnotes: None,
            }],
            ..Default::default()
        };
        let out = Matcher::run(&pages, &groups);
        assert_eq!(out.regions.len(), 2);
        let label = out.regions.iter().find(|r| r.node_id == NodeId(21)).unwrap();
        assert_eq!(label.category, LayoutCategory::Title);
    }

    #[test]
    fn every_line_consumed_at_most_once() {
        let pages = [page("p1", vec![
            vec![
                line("alpha beta gamma delta epsilon", 700.0, 300.0),
                line("zeta eta theta iota kappa", 688.0, 300.0),
            ],
            vec![line("alpha beta gamma delta epsilon", 650.0, 300.0)],
        ])];
        let groups = NodeGroups {
            sorted: vec![
                gnode(1, NodeRole::Paragraph, "alpha beta gamma delta epsilon"),
                gnode(2, NodeRole::Paragraph, "zeta eta theta iota kappa"),
            ],
            unsorted: vec![gnode(3, NodeRole::Copyright, "alpha beta gamma delta epsilon")],
            ..Default::default()
        };
        let out = Matcher::run(&pages, &groups);
        let mut seen = std::collections::HashSet::new();
        for r in &out.regions {
            for l in &r.lines {
                let key = (r.page_index, format!("{:?}", l.bbox));
                assert!(seen.insert(key), "line consumed twice");
            }
        }
        assert_eq!(out.regions.len(), 3);
    }

    #[test]
    fn sorted_cursor_never_regresses() {
        let pages = [page("p1", vec![
            vec![line("one two three four five", 700.0, 300.0)],
            vec![line("six seven eight nine ten", 688.0, 300.0)],
        ])];
        let groups = NodeGroups {
            sorted: vec![
                gnode(1, NodeRole::Paragraph, "one two three four five"),
                gnode(2, NodeRole::Paragraph, "totally absent paragraph text"),
                gnode(3, NodeRole::Paragraph, "six seven eight nine ten"),
            ],
            ..Default::default()
        };
        let out = Matcher::run(&pages, &groups);
        let ids: Vec<u32> = out.regions.iter().map(|r| r.node_id.0).collect();
        assert_eq!(ids, [1, 3]);
    }
}
