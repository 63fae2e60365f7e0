//! Command-line driver: annotate documents, partition the corpus,
//! export COCO files, score predictions, and print corpus statistics.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use doclayout::coco::{self, CocoDataset, ExportPage};
use doclayout::elements::load_page_elements;
use doclayout::eval::{map_50_95, Detection, GoldBox, ResultEntry};
use doclayout::geom::BBox;
use doclayout::jats::{KindConfig, LayoutCategory};
use doclayout::partition::{
    classify_page, journal_stats_from_counts, make_split, DatasetSplit, PageRecord, QuotaConfig,
};
use doclayout::pipeline::{annotate_document, DocumentAnnotations, PageAnnotations, QualityConfig};

#[derive(Parser)]
#[command(name = "doclayout", about = "Document layout ground-truth pipeline", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Match article XML against page elements and write annotations.
    Annotate(AnnotateArgs),
    /// Split annotated pages into train/dev/test by journal.
    Partition(PartitionArgs),
    /// Write COCO detection files for a split.
    ExportCoco(ExportArgs),
    /// Score a COCO results file against a gold COCO file.
    Evaluate(EvaluateArgs),
    /// Print page and instance counts.
    Stats(StatsArgs),
}

#[derive(Args)]
struct AnnotateArgs {
    /// Directory of `<doc>.elements.json` interchange files.
    #[arg(long)]
    elements_dir: PathBuf,
    /// Directory of `<doc>.xml` article files.
    #[arg(long)]
    xml_dir: PathBuf,
    /// Output directory for annotation files and the quality TSV.
    #[arg(long)]
    out: PathBuf,
    /// JSON file overriding the tag-to-role table.
    #[arg(long)]
    kind_config: Option<PathBuf>,
    /// Acceptance threshold for non-title pages.
    #[arg(long, default_value_t = doclayout::quality::QUALITY_THRESHOLD)]
    quality_threshold: f64,
    /// Acceptance threshold for title pages.
    #[arg(long, default_value_t = doclayout::quality::TITLE_QUALITY_THRESHOLD)]
    title_quality_threshold: f64,
    /// Worker pool size.
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Args)]
struct PartitionArgs {
    /// Directory of `.annotations.json` files.
    #[arg(long)]
    annotations_dir: PathBuf,
    /// Path of the split manifest to write.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON file overriding eligibility bounds and sampling quotas.
    #[arg(long)]
    quota_file: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    annotations_dir: PathBuf,
    /// Split manifest produced by `partition`.
    #[arg(long)]
    split: PathBuf,
    /// Output directory for train/dev/test COCO files.
    #[arg(long)]
    out: PathBuf,
    /// Coordinate multiplier, e.g. pixels per point.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Gold COCO file from `export-coco`.
    #[arg(long)]
    gold: PathBuf,
    /// COCO results file: `[{image_id, category_id, bbox, score}]`.
    #[arg(long)]
    predictions: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    annotations_dir: PathBuf,
    /// Optional split manifest; without it all pages count as one set.
    #[arg(long)]
    split: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    let run = match cli.command {
        Command::Annotate(a) => cmd_annotate(a),
        Command::Partition(a) => cmd_partition(a),
        Command::ExportCoco(a) => cmd_export(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Stats(a) => cmd_stats(a),
    };
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Writes `content` via a temp file in the target directory, then renames.
fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temp file in {}", dir.display()))?;
    use std::io::Write;
    tmp.write_all(content.as_bytes())?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Pairs `<doc>.elements.json` with `<doc>.xml` by shared basename.
/// Unpaired files are warned about and skipped.
fn pair_inputs(elements_dir: &Path, xml_dir: &Path) -> Result<Vec<(String, PathBuf, PathBuf)>> {
    let mut elements = BTreeMap::new();
    for entry in fs::read_dir(elements_dir)
        .with_context(|| format!("reading {}", elements_dir.display()))?
    {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
        if let Some(base) = name.strip_suffix(".elements.json") {
            elements.insert(base.to_string(), path);
        }
    }
    let mut xmls = BTreeMap::new();
    for entry in
        fs::read_dir(xml_dir).with_context(|| format!("reading {}", xml_dir.display()))?
    {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
        if let Some(base) = name.strip_suffix(".xml") {
            xmls.insert(base.to_string(), path);
        }
    }
    let mut pairs = Vec::new();
    for (base, epath) in &elements {
        match xmls.remove(base) {
            Some(xpath) => pairs.push((base.clone(), epath.clone(), xpath)),
            None => log::warn!("{base}: elements file has no XML partner; skipped"),
        }
    }
    for base in xmls.keys() {
        log::warn!("{base}: XML file has no elements partner; skipped");
    }
    Ok(pairs)
}

fn cmd_annotate(args: AnnotateArgs) -> Result<()> {
    if args.workers == 0 {
        bail!("--workers must be at least 1");
    }
    for t in [args.quality_threshold, args.title_quality_threshold] {
        if !(0.0..=1.0).contains(&t) {
            bail!("thresholds must lie in [0, 1], got {t}");
        }
    }
    let kind_config = match &args.kind_config {
        Some(path) => KindConfig::from_json(
            &fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        )?,
        None => KindConfig::default(),
    };
    let quality = QualityConfig {
        threshold: args.quality_threshold,
        title_threshold: args.title_quality_threshold,
    };
    fs::create_dir_all(&args.out)?;
    let pairs = pair_inputs(&args.elements_dir, &args.xml_dir)?;
    if pairs.is_empty() {
        log::warn!("no paired inputs found; nothing to do");
    }

    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.workers).build()?;
    let results: Vec<(String, Result<Vec<String>>)> = pool.install(|| {
        pairs
            .par_iter()
            .map(|(base, epath, xpath)| {
                (base.clone(), annotate_one(base, epath, xpath, &kind_config, &quality, &args.out))
            })
            .collect()
    });

    let mut tsv = String::new();
    let mut failures = 0usize;
    for (base, result) in results {
        match result {
            Ok(lines) => {
                for l in lines {
                    tsv.push_str(&l);
                    tsv.push('\n');
                }
            }
            Err(e) => {
                failures += 1;
                log::error!("{base}: {e:#}");
            }
        }
    }
    write_atomic(&args.out.join("quality.tsv"), &tsv)?;
    if failures > 0 {
        bail!("{failures} document(s) failed");
    }
    Ok(())
}

/// Annotates one document and writes its file; returns the quality TSV
/// lines for every page, accepted or not.
fn annotate_one(
    base: &str,
    elements_path: &Path,
    xml_path: &Path,
    kind_config: &KindConfig,
    quality: &QualityConfig,
    out_dir: &Path,
) -> Result<Vec<String>> {
    let efile = fs::File::open(elements_path)
        .with_context(|| format!("opening {}", elements_path.display()))?;
    let pages = load_page_elements(efile)?;
    let xml =
        fs::read(xml_path).with_context(|| format!("reading {}", xml_path.display()))?;
    let doc = annotate_document(base, &pages, &xml, kind_config, quality)?;

    let tsv: Vec<String> = doc.pages.iter().map(|p| p.quality.tsv_line()).collect();
    // rejected pages stay in the TSV but out of the annotation file
    let kept = DocumentAnnotations {
        pages: doc.pages.into_iter().filter(|p| p.quality.accepted).collect(),
        ..doc
    };
    let json = serde_json::to_string_pretty(&kept)?;
    write_atomic(&out_dir.join(format!("{base}.annotations.json")), &json)?;
    Ok(tsv)
}

fn load_annotations(dir: &Path) -> Result<Vec<DocumentAnnotations>> {
    let mut docs = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
        if !name.ends_with(".annotations.json") {
            continue;
        }
        let text =
            fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        docs.push(
            serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", path.display()))?,
        );
    }
    docs.sort_by(|a: &DocumentAnnotations, b: &DocumentAnnotations| a.doc_id.cmp(&b.doc_id));
    Ok(docs)
}

fn cmd_partition(args: PartitionArgs) -> Result<()> {
    let cfg = match &args.quota_file {
        Some(path) => serde_json::from_str(
            &fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        )
        .with_context(|| format!("parsing {}", path.display()))?,
        None => QuotaConfig::default(),
    };
    let docs = load_annotations(&args.annotations_dir)?;

    let mut records = Vec::new();
    let mut counts: BTreeMap<String, (usize, usize, usize, usize)> = BTreeMap::new();
    for doc in &docs {
        for page in &doc.pages {
            let kinds = classify_page(&page.annotations, page.quality.is_title_page);
            let c = counts.entry(doc.journal_id.clone()).or_default();
            c.0 += 1;
            for a in &page.annotations {
                match a.category {
                    LayoutCategory::Figure => c.1 += 1,
                    LayoutCategory::Table => c.2 += 1,
                    LayoutCategory::List => c.3 += 1,
                    LayoutCategory::Text | LayoutCategory::Title => {}
                }
            }
            records.push(PageRecord {
                page_id: page.page_id.clone(),
                journal_id: doc.journal_id.clone(),
                kinds,
            });
        }
    }
    if records.is_empty() {
        bail!("no accepted pages found under {}", args.annotations_dir.display());
    }
    let stats = journal_stats_from_counts(&counts);
    let split = make_split(&stats, &records, args.seed, &cfg);
    write_atomic(&args.out, &serde_json::to_string_pretty(&split)?)?;
    log::info!(
        "split written: {} train, {} dev, {} test",
        split.train.len(),
        split.dev.len(),
        split.test.len()
    );
    Ok(())
}

fn cmd_export(args: ExportArgs) -> Result<()> {
    if args.scale <= 0.0 {
        bail!("--scale must be positive");
    }
    let docs = load_annotations(&args.annotations_dir)?;
    let split: DatasetSplit = serde_json::from_str(
        &fs::read_to_string(&args.split)
            .with_context(|| format!("reading {}", args.split.display()))?,
    )?;
    let mut by_page: BTreeMap<&str, (&DocumentAnnotations, &PageAnnotations)> = BTreeMap::new();
    for doc in &docs {
        for page in &doc.pages {
            by_page.insert(&page.page_id, (doc, page));
        }
    }
    fs::create_dir_all(&args.out)?;
    for (name, entries) in
        [("train", &split.train), ("dev", &split.dev), ("test", &split.test)]
    {
        let mut pages = Vec::with_capacity(entries.len());
        for e in entries {
            let Some((_, page)) = by_page.get(e.page_id.as_str()) else {
                bail!("split page {} not found in annotations", e.page_id);
            };
            pages.push(ExportPage {
                page_id: page.page_id.clone(),
                width: page.width,
                height: page.height,
                annotations: page.annotations.clone(),
            });
        }
        let dataset = coco::export(&pages, args.scale)?;
        write_atomic(
            &args.out.join(format!("{name}.json")),
            &serde_json::to_string_pretty(&dataset)?,
        )?;
        log::info!("{name}: {} pages, {} annotations", pages.len(), dataset.annotations.len());
    }
    Ok(())
}

/// Converts COCO-frame boxes straight into the evaluator's frame; IOU is
/// unchanged by applying the same flip to both sides, so none is needed.
fn coco_bbox(b: [f64; 4]) -> Result<BBox> {
    let [x, y, w, h] = b;
    Ok(BBox::new(x, y, x + w, y + h)?)
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let gold: CocoDataset = serde_json::from_str(
        &fs::read_to_string(&args.gold)
            .with_context(|| format!("reading {}", args.gold.display()))?,
    )?;
    let preds: Vec<ResultEntry> = serde_json::from_str(
        &fs::read_to_string(&args.predictions)
            .with_context(|| format!("reading {}", args.predictions.display()))?,
    )?;

    let mut golds = Vec::with_capacity(gold.annotations.len());
    for a in &gold.annotations {
        let category = LayoutCategory::from_coco_id(a.category_id)
            .with_context(|| format!("gold annotation {} has unknown category", a.id))?;
        golds.push(GoldBox {
            page_id: a.image_id.to_string(),
            category,
            bbox: coco_bbox(a.bbox)?,
        });
    }
    let mut dets = Vec::with_capacity(preds.len());
    for (i, p) in preds.iter().enumerate() {
        let category = LayoutCategory::from_coco_id(p.category_id)
            .with_context(|| format!("prediction {i} has unknown category"))?;
        dets.push(Detection {
            page_id: p.image_id.to_string(),
            category,
            bbox: coco_bbox(p.bbox)?,
            score: p.score,
        });
    }
    let report = map_50_95(&dets, &golds);
    print!("{}", report.table());
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> Result<()> {
    let docs = load_annotations(&args.annotations_dir)?;
    let split: Option<DatasetSplit> = match &args.split {
        Some(path) => Some(serde_json::from_str(
            &fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        )?),
        None => None,
    };

    // set name -> (pages by kind, instances by category)
    let mut table: BTreeMap<&str, (BTreeMap<&str, usize>, BTreeMap<&str, usize>)> =
        BTreeMap::new();
    for doc in &docs {
        for page in &doc.pages {
            let set = match &split {
                Some(s) => match s.split_of(&page.page_id) {
                    Some(name) => name,
                    None => continue,
                },
                None => "all",
            };
            let entry = table.entry(set).or_default();
            let kinds = classify_page(&page.annotations, page.quality.is_title_page);
            for (name, present) in [
                ("title", kinds.title),
                ("list", kinds.has_list),
                ("table", kinds.has_table),
                ("figure", kinds.has_figure),
                ("plain", kinds.plain()),
            ] {
                if present {
                    *entry.0.entry(name).or_default() += 1;
                }
            }
            *entry.0.entry("pages").or_default() += 1;
            for a in &page.annotations {
                *entry.1.entry(a.category.name()).or_default() += 1;
            }
        }
    }

    for (set, (pages, instances)) in &table {
        println!("[{set}]");
        println!("  pages by kind:");
        for (k, n) in pages {
            println!("    {k:<8} {n}");
        }
        println!("  instances by category:");
        for (k, n) in instances {
            println!("    {k:<8} {n}");
        }
    }
    Ok(())
}
