use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use tablegrid::error::{Error, Result};
use tablegrid::io::{
    align_html_to_tokens, evaluate_detection, evaluate_structure, from_value_at, load_pages, page_tables,
    pages_to_string, parse_json, run_pipeline,
    save_pages, suppress_page, to_canonical_string, write_atomic, Config, HtmlTable, LoadedPages, PageInput,
    TablesFile,
};
use tablegrid::structure::{RulingLine, TextLine};
use tablegrid::style::{augment_full_boundaries, augment_no_lines};
use tablegrid::synth::{GapStyle, Generator};

#[derive(Parser)]
#[command(name = "tablegrid", version, about = "Table detection post-processing, structure recovery and evaluation")]
struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one configuration value, e.g. `--set structure.expand_step=3`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Suppress table candidates and recover the structure of each table.
    Structure {
        pages: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Drop conflicting table candidates; writes the pages back.
    Suppress {
        pages: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// IOU-threshold and character-level table detection scores.
    EvalDetect {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0.6,0.7,0.8,0.9")]
        iou_thresholds: Vec<f64>,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Adjacency-relation structure scores.
    EvalStructure {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Tree-edit-distance similarity of table structures.
    EvalTeds {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Rewrite ruling lines for detector training.
    Augment {
        pages: PathBuf,
        #[arg(long, value_enum)]
        scheme: Scheme,
        /// Ground-truth tables, required by `full-boundaries`.
        #[arg(long)]
        gt: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Box the cells of an HTML table from positioned page tokens.
    Label {
        #[arg(long)]
        html: PathBuf,
        /// A page JSON (its text lines are used) or an array of text lines.
        #[arg(long)]
        tokens: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate synthetic pages and their ground truth.
    GenFixtures {
        /// Row count or inclusive range `A-B`.
        #[arg(long, default_value = "1-10")]
        rows: String,
        /// Column count or inclusive range `A-B`.
        #[arg(long, default_value = "1-10")]
        cols: String,
        #[arg(long, default_value_t = 1)]
        pages: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Gaps::Mixed)]
        gaps: Gaps,
        /// Pages output (stdout when absent).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Ground-truth output.
        #[arg(long)]
        gt: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct ReportArgs {
    /// Print the report as JSON instead of a summary.
    #[arg(long)]
    json: bool,
    /// Also write the JSON report to this file.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    NoLines,
    FullBoundaries,
}

#[derive(Clone, Copy, ValueEnum)]
enum Gaps {
    Uniform,
    Jittered,
    Mixed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    for o in &cli.overrides {
        cfg.apply_override(o)?;
    }
    Ok(cfg)
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn read_pages(path: &Path) -> Result<Vec<PageInput>> {
    let LoadedPages { pages, warnings } = load_pages(path)?;
    for w in warnings {
        eprintln!("warning: {}: box {:?} clipped to {:?}", w.path, w.original.coords(), w.clipped.coords());
    }
    Ok(pages)
}

fn report<T: Serialize>(value: &T, summary: String, args: &ReportArgs) -> Result<()> {
    let json = to_canonical_string(value)?;
    if let Some(p) = &args.output {
        write_atomic(p, json.as_bytes())?;
    }
    emit(if args.json { &json } else { &summary }, None)
}

/// `N` or `A-B`.
fn parse_range(s: &str, what: &str) -> Result<(usize, usize)> {
    let bad = || Error::Input(format!("--{what} expects N or A-B with 1 <= A <= B, got \"{s}\""));
    let (lo, hi) = match s.split_once('-') {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => {
            let n = s.trim().parse().map_err(|_| bad())?;
            (n, n)
        }
    };
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli)?;
    match &cli.command {
        Command::Structure { pages, output } => {
            let pages = read_pages(pages)?;
            let out: Vec<_> = pages.par_iter().map(|p| page_tables(p, run_pipeline(p, &cfg))).collect();
            for (p, t) in out.iter().enumerate() {
                for (i, table) in t.tables.iter().enumerate() {
                    if let Some(s) = &table.structure {
                        s.validate().map_err(|m| Error::Invariant(format!("page {p} table {i}: {m}")))?;
                    }
                }
            }
            emit(&TablesFile { pages: out }.to_canonical()?, output.as_deref())
        }
        Command::Suppress { pages, output } => {
            let mut pages = read_pages(pages)?;
            let kept: Vec<_> = pages.par_iter().map(|p| suppress_page(p, &cfg)).collect();
            for (p, k) in pages.iter_mut().zip(kept) {
                p.table_candidates = k;
            }
            emit(&pages_to_string(&pages)?, output.as_deref())
        }
        Command::EvalDetect { gt, pred, iou_thresholds, report: args } => {
            let r = evaluate_detection(&TablesFile::load(gt)?, &TablesFile::load(pred)?, iou_thresholds)?;
            let mut s = String::from("threshold  precision  recall  f1\n");
            for t in &r.iou.per_threshold {
                s.push_str(&format!("{:>9.2}  {:>9.4}  {:>6.4}  {:.4}\n", t.threshold, t.precision, t.recall, t.f1));
            }
            s.push_str(&format!("weighted f1: {:.4}\n", r.iou.weighted_f1));
            if let Some(c) = &r.characters {
                s.push_str(&format!(
                    "characters: recall {:.4} precision {:.4} f1 {:.4} purity {} completeness {} ({} documents)\n",
                    c.aggregate.recall,
                    c.aggregate.precision,
                    c.aggregate.f1,
                    c.purity,
                    c.completeness,
                    c.per_document.len()
                ));
            }
            report(&r, s, args)
        }
        Command::EvalStructure { gt, pred, report: args } => {
            let r = evaluate_structure(&TablesFile::load(gt)?, &TablesFile::load(pred)?, &cfg.adjacency);
            let s = format!(
                "adjacency: recall {:.4} precision {:.4} f1 {:.4} ({} gt, {} predicted, {} matched relations; {} tables, {} unmatched predictions)\n",
                r.adjacency.recall,
                r.adjacency.precision,
                r.adjacency.f1,
                r.counts.gt,
                r.counts.pred,
                r.counts.matched,
                r.per_table.len(),
                r.unmatched_predictions
            );
            report(&r, s, args)
        }
        Command::EvalTeds { gt, pred, report: args } => {
            let r = evaluate_structure(&TablesFile::load(gt)?, &TablesFile::load(pred)?, &cfg.adjacency);
            #[derive(Serialize)]
            struct TedsReport {
                mean_teds: f64,
                per_table: Vec<(String, usize, usize, f64)>,
            }
            let t = TedsReport {
                mean_teds: r.mean_teds,
                per_table: r.per_table.iter().map(|t| (t.doc_id.clone(), t.page_index, t.gt_table, t.teds)).collect(),
            };
            let s = format!("teds: {:.4} over {} tables\n", t.mean_teds, t.per_table.len());
            report(&t, s, args)
        }
        Command::Augment { pages, scheme, gt, output } => {
            let mut pages = read_pages(pages)?;
            match scheme {
                Scheme::NoLines => {
                    for p in pages.iter_mut() {
                        p.ruling_lines = augment_no_lines(&p.ruling_lines);
                    }
                }
                Scheme::FullBoundaries => {
                    let gt_path = gt
                        .as_ref()
                        .ok_or_else(|| Error::Input("--scheme full-boundaries needs --gt".into()))?;
                    let gt = TablesFile::load(gt_path)?;
                    for p in pages.iter_mut() {
                        let mut lines: Vec<RulingLine> = Vec::new();
                        if let Some(g) = gt.page(&p.doc_id, p.page_index) {
                            for (i, t) in g.tables.iter().enumerate() {
                                let s = t.structure.as_ref().ok_or_else(|| {
                                    Error::Input(format!("{} page {} table {i} has no structure", p.doc_id, p.page_index))
                                })?;
                                lines.extend(augment_full_boundaries(s, &t.bbox)?);
                            }
                        }
                        p.ruling_lines = lines;
                    }
                }
            }
            match output {
                Some(o) => save_pages(&pages, o),
                None => emit(&pages_to_string(&pages)?, None),
            }
        }
        Command::Label { html, tokens, output } => {
            let markup = std::fs::read_to_string(html).map_err(|e| Error::io(html, e))?;
            let table = HtmlTable::parse(&markup)?;
            let text = std::fs::read_to_string(tokens).map_err(|e| Error::io(tokens, e))?;
            let value = parse_json(&text, &tokens.display().to_string())?;
            let lines: Vec<TextLine> = if value.is_array() {
                from_value_at(value, "")?
            } else {
                from_value_at::<PageInput>(value, "")?.text_lines
            };
            let a = align_html_to_tokens(&table, &lines, &cfg.labeler)?;
            if a.failed {
                eprintln!(
                    "warning: alignment failed: {:.1}% of cells matched, {} unmatched",
                    100.0 * a.match_rate,
                    a.unmatched.len()
                );
            }
            emit(&to_canonical_string(&a)?, output.as_deref())
        }
        Command::GenFixtures { rows, cols, pages, seed, gaps, output, gt } => {
            let (r_lo, r_hi) = parse_range(rows, "rows")?;
            let (c_lo, c_hi) = parse_range(cols, "cols")?;
            let mut g = Generator::new(*seed);
            let mut out_pages = Vec::with_capacity(*pages);
            let mut truth = TablesFile::default();
            for i in 0..*pages {
                let (r, c) = (g.pick(r_lo, r_hi), g.pick(c_lo, c_hi));
                let style = match gaps {
                    Gaps::Uniform => GapStyle::Uniform,
                    Gaps::Jittered => GapStyle::Jittered,
                    Gaps::Mixed if g.coin() => GapStyle::Jittered,
                    Gaps::Mixed => GapStyle::Uniform,
                };
                let p = g.page(&format!("synthetic-{i:04}"), r, c, style);
                truth.pages.push(p.ground_truth());
                out_pages.push(p.page);
            }
            if let Some(path) = gt {
                truth.save(path)?;
            }
            emit(&pages_to_string(&out_pages)?, output.as_deref())
        }
    }
}
