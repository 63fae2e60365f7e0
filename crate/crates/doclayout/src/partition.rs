//! Journal-level partition into train/dev/test.
//!
//! Journals small enough and rich enough in floats feed the dev/test
//! pools; everything else feeds training with per-journal caps. Every
//! journal contributes to exactly one split, so templates never leak
//! between sets. All sampling is keyed on stable page ids and a single
//! seed, so the split is reproducible regardless of input order.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::annotation::LayoutAnnotation;
use crate::jats::LayoutCategory;

/// Page-type flags; not mutually exclusive except for `plain`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PageKinds {
    pub title: bool,
    pub has_list: bool,
    pub has_table: bool,
    pub has_figure: bool,
}

impl PageKinds {
    pub fn plain(&self) -> bool {
        !(self.title || self.has_list || self.has_table || self.has_figure)
    }

    /// The single quota bucket the page is drawn under: scarcer kinds
    /// first.
    pub fn primary(&self) -> PageKind {
        if self.has_list {
            PageKind::List
        } else if self.has_table {
            PageKind::Table
        } else if self.has_figure {
            PageKind::Figure
        } else if self.title {
            PageKind::Title
        } else {
            PageKind::Plain
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PageKind {
    List,
    Table,
    Figure,
    Title,
    Plain,
}

impl PageKind {
    pub const ALL: [PageKind; 5] = [
        PageKind::List,
        PageKind::Table,
        PageKind::Figure,
        PageKind::Title,
        PageKind::Plain,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PageKind::List => "list",
            PageKind::Table => "table",
            PageKind::Figure => "figure",
            PageKind::Title => "title",
            PageKind::Plain => "plain",
        }
    }
}

/// Flags derived from the accepted annotations of one page.
pub fn classify_page(annotations: &[LayoutAnnotation], is_title_page: bool) -> PageKinds {
    let mut k = PageKinds { title: is_title_page, ..Default::default() };
    for a in annotations {
        match a.category {
            LayoutCategory::List => k.has_list = true,
            LayoutCategory::Table => k.has_table = true,
            LayoutCategory::Figure => k.has_figure = true,
            LayoutCategory::Text | LayoutCategory::Title => {}
        }
    }
    k
}

/// An accepted page entering the partition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PageRecord {
    pub page_id: String,
    pub journal_id: String,
    pub kinds: PageKinds,
}

/// Instance counts over a journal's accepted pages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JournalStats {
    pub journal_id: String,
    pub page_count: usize,
    pub figure_count: usize,
    pub table_count: usize,
    pub list_count: usize,
}

/// Eligibility bounds and sampling quotas; the full-corpus values are the
/// defaults, scalable for desk-size corpora.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuotaConfig {
    pub max_journal_pages: usize,
    pub min_journal_figures: usize,
    pub min_journal_tables: usize,
    pub min_journal_lists: usize,
    /// dev/test quotas per pool: title, table, figure, plain
    pub pool_title: usize,
    pub pool_table: usize,
    pub pool_figure: usize,
    pub pool_plain: usize,
    /// per-journal training caps
    pub train_list: usize,
    pub train_table: usize,
    pub train_figure: usize,
    pub train_title: usize,
    pub train_plain: usize,
}

impl Default for QuotaConfig {
    fn default() -> Self {
        QuotaConfig {
            max_journal_pages: 2000,
            min_journal_figures: 320,
            min_journal_tables: 140,
            min_journal_lists: 20,
            pool_title: 2000,
            pool_table: 3000,
            pool_figure: 3000,
            pool_plain: 2000,
            train_list: 200,
            train_table: 50,
            train_figure: 50,
            train_title: 50,
            train_plain: 25,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitEntry {
    pub page_id: String,
    pub journal_id: String,
    pub kinds: PageKinds,
    /// Sampling provenance, e.g. `dev:list:all` or `train:figure:cap`.
    pub reason: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub seed: u64,
    pub train: Vec<SplitEntry>,
    pub dev: Vec<SplitEntry>,
    pub test: Vec<SplitEntry>,
}

impl DatasetSplit {
    pub fn split_of(&self, page_id: &str) -> Option<&'static str> {
        for (name, set) in [("train", &self.train), ("dev", &self.dev), ("test", &self.test)] {
            if set.iter().any(|e| e.page_id == page_id) {
                return Some(name);
            }
        }
        None
    }
}

/// Aggregates journal statistics from classified pages. Kinds count pages,
/// not instances; instance-level stats come from the annotation counts.
pub fn journal_stats_from_counts(
    counts: &BTreeMap<String, (usize, usize, usize, usize)>,
) -> Vec<JournalStats> {
    counts
        .iter()
        .map(|(j, &(pages, figs, tabs, lists))| JournalStats {
            journal_id: j.clone(),
            page_count: pages,
            figure_count: figs,
            table_count: tabs,
            list_count: lists,
        })
        .collect()
}

/// Journals meeting all four inclusive eligibility bounds.
pub fn eligible_journals(stats: &[JournalStats], cfg: &QuotaConfig) -> BTreeSet<String> {
    stats
        .iter()
        .filter(|s| {
            s.page_count <= cfg.max_journal_pages
                && s.figure_count >= cfg.min_journal_figures
                && s.table_count >= cfg.min_journal_tables
                && s.list_count >= cfg.min_journal_lists
        })
        .map(|s| s.journal_id.clone())
        .collect()
}

fn derived_rng(seed: u64, label: &str) -> ChaCha20Rng {
    // FNV-1a over the label keeps derived streams stable across runs
    let mut h: u64 = 0xcbf29ce484222325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    ChaCha20Rng::seed_from_u64(seed ^ h)
}

/// Draws up to `quota` pages from `bucket`, sorted then shuffled under a
/// seed derived from `label`.
fn sample_bucket<'a>(
    bucket: &mut Vec<&'a PageRecord>,
    quota: usize,
    seed: u64,
    label: &str,
) -> Vec<&'a PageRecord> {
    bucket.sort_by(|a, b| a.page_id.cmp(&b.page_id));
    let mut rng = derived_rng(seed, label);
    bucket.shuffle(&mut rng);
    bucket.iter().take(quota).copied().collect()
}

/// The full partition procedure; deterministic given the seed.
pub fn make_split(
    stats: &[JournalStats],
    pages: &[PageRecord],
    seed: u64,
    cfg: &QuotaConfig,
) -> DatasetSplit {
    let eligible = eligible_journals(stats, cfg);
    if eligible.is_empty() {
        log::warn!("no eligible journals; development and testing sets will be empty");
    }

    // halve the eligible journals; the odd journal goes to dev
    let mut pool_journals: Vec<&String> = eligible.iter().collect();
    pool_journals.sort();
    let mut rng = derived_rng(seed, "journal-halving");
    pool_journals.shuffle(&mut rng);
    let dev_count = pool_journals.len().div_ceil(2);
    let dev_journals: BTreeSet<&String> = pool_journals[..dev_count].iter().copied().collect();
    let test_journals: BTreeSet<&String> = pool_journals[dev_count..].iter().copied().collect();

    let mut by_journal: BTreeMap<&str, Vec<&PageRecord>> = BTreeMap::new();
    for p in pages {
        by_journal.entry(&p.journal_id).or_default().push(p);
    }

    let mut split = DatasetSplit { seed, train: Vec::new(), dev: Vec::new(), test: Vec::new() };

    for (pool_name, journals) in [("dev", &dev_journals), ("test", &test_journals)] {
        let mut buckets: BTreeMap<PageKind, Vec<&PageRecord>> = BTreeMap::new();
        for j in journals.iter() {
            for p in by_journal.get(j.as_str()).into_iter().flatten() {
                buckets.entry(p.kinds.primary()).or_default().push(p);
            }
        }
        let mut out = Vec::new();
        for kind in PageKind::ALL {
            let mut bucket = buckets.remove(&kind).unwrap_or_default();
            let (quota, tag) = match kind {
                PageKind::List => (usize::MAX, "all"),
                PageKind::Table => (cfg.pool_table, "quota"),
                PageKind::Figure => (cfg.pool_figure, "quota"),
                PageKind::Title => (cfg.pool_title, "quota"),
                PageKind::Plain => (cfg.pool_plain, "quota"),
            };
            let label = format!("{pool_name}:{}", kind.name());
            for p in sample_bucket(&mut bucket, quota, seed, &label) {
                out.push(SplitEntry {
                    page_id: p.page_id.clone(),
                    journal_id: p.journal_id.clone(),
                    kinds: p.kinds,
                    reason: format!("{pool_name}:{}:{tag}:machine-only", kind.name()),
                });
            }
        }
        out.sort_by(|a, b| a.page_id.cmp(&b.page_id));
        match pool_name {
            "dev" => split.dev = out,
            _ => split.test = out,
        }
    }

    // training: every ineligible journal, capped per journal
    for (journal, records) in &by_journal {
        if eligible.contains(*journal) {
            continue;
        }
        let mut buckets: BTreeMap<PageKind, Vec<&PageRecord>> = BTreeMap::new();
        for p in records {
            buckets.entry(p.kinds.primary()).or_default().push(p);
        }
        for kind in PageKind::ALL {
            let mut bucket = buckets.remove(&kind).unwrap_or_default();
            let cap = match kind {
                PageKind::List => cfg.train_list,
                PageKind::Table => cfg.train_table,
                PageKind::Figure => cfg.train_figure,
                PageKind::Title => cfg.train_title,
                PageKind::Plain => cfg.train_plain,
            };
            let label = format!("train:{journal}:{}", kind.name());
            for p in sample_bucket(&mut bucket, cap, seed, &label) {
                split.train.push(SplitEntry {
                    page_id: p.page_id.clone(),
                    journal_id: p.journal_id.clone(),
                    kinds: p.kinds,
                    reason: format!("train:{}:cap:machine-only", kind.name()),
                });
            }
        }
    }
    split.train.sort_by(|a, b| a.page_id.cmp(&b.page_id));
    split
}
