//! Analysis subcommands over a prediction export: KC difficulty agreement,
//! learning curves, and per-dialogue case studies. Each can fold its section
//! into an existing report so `plot` finds everything in one file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;

use dikt_core::eval::{
    case_study_table, import_predictions_csv, kc_difficulty_agreement, learning_curve,
    mask_first_labels, render_case_study, top_kcs, CaseStudy, EvalReport, PredictionRecord,
};
use dikt_core::{Corpus, Error, TurnEstimate};

use crate::config::Resolved;
use crate::manifest::ManifestBuilder;

use super::{ensure_out_dir, write_json};

fn load_records(predictions: &Path, corpus: &Corpus) -> Result<Vec<PredictionRecord>> {
    let text = std::fs::read_to_string(predictions)
        .with_context(|| format!("read {}", predictions.display()))?;
    Ok(import_predictions_csv(&text, corpus)?)
}

fn load_report(path: &Path) -> Result<EvalReport> {
    let text = std::fs::read_to_string(path).with_context(|| format!("read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("report {}", path.display()))
}

// ---------------------------------------------------------------------------
// analyze-difficulty
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct AnalyzeDifficultyArgs {
    #[arg(long)]
    pub predictions: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Existing report.json to enrich with the difficulty section.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

pub fn run_difficulty(args: &AnalyzeDifficultyArgs, resolved: &Resolved) -> Result<()> {
    let out = ensure_out_dir(resolved)?;
    let corpus = Corpus::load(&args.corpus, args.catalog.as_deref())?;
    let records = load_records(&args.predictions, &corpus)?;
    let masked = mask_first_labels(&records);
    let agreement = kc_difficulty_agreement(&masked, resolved.min_kc_count)?;

    let section_path = write_json(out, "difficulty_agreement.json", &agreement)?;
    let mut manifest =
        ManifestBuilder::new("analyze-difficulty", resolved.snapshot(), resolved.seed);
    manifest
        .input(&args.predictions)
        .input(&args.corpus)
        .output(&section_path);
    if let Some(report_path) = &args.report {
        let mut report = load_report(report_path)?;
        report.difficulty_agreement = Some(agreement.clone());
        let enriched = write_json(out, "report.json", &report)?;
        manifest.input(report_path).output(&enriched);
    }
    manifest.write(out)?;

    println!(
        "difficulty agreement over {} KCs: r = {:.4}, p = {:.3e} -> {}",
        agreement.points.len(),
        agreement.pearson_r,
        agreement.p_value,
        section_path.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// learning-curve
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct LearningCurveArgs {
    #[arg(long)]
    pub predictions: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Explicit KC ids; when absent the most frequent KCs are used.
    #[arg(long = "kc")]
    pub kcs: Vec<String>,
    /// How many of the most frequent KCs to plot when none are named.
    #[arg(long, default_value_t = 3)]
    pub top: usize,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

pub fn run_curves(args: &LearningCurveArgs, resolved: &Resolved) -> Result<()> {
    let out = ensure_out_dir(resolved)?;
    let corpus = Corpus::load(&args.corpus, args.catalog.as_deref())?;
    let records = load_records(&args.predictions, &corpus)?;
    let masked = mask_first_labels(&records);

    let kcs = if args.kcs.is_empty() {
        top_kcs(&masked, args.top)
    } else {
        args.kcs.clone()
    };
    let mut curves = BTreeMap::new();
    for kc in &kcs {
        curves.insert(
            kc.clone(),
            learning_curve(&masked, kc, resolved.mastery_source.into())?,
        );
    }

    let curves_path = write_json(out, "learning_curves.json", &curves)?;
    let mut manifest = ManifestBuilder::new("learning-curve", resolved.snapshot(), resolved.seed);
    manifest
        .input(&args.predictions)
        .input(&args.corpus)
        .output(&curves_path);
    if let Some(report_path) = &args.report {
        let mut report = load_report(report_path)?;
        report.learning_curves = Some(curves.clone());
        let enriched = write_json(out, "report.json", &report)?;
        manifest.input(report_path).output(&enriched);
    }
    manifest.write(out)?;

    for (kc, curve) in &curves {
        let shape: Vec<String> = curve
            .iter()
            .map(|p| format!("{:.3}(n={})", p.mean_mastery, p.count))
            .collect();
        println!("{kc}: {}", shape.join(" -> "));
    }
    println!("curves -> {}", curves_path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// case-study
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct CaseStudyArgs {
    #[arg(long)]
    pub predictions: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    #[arg(long)]
    pub dialogue_id: String,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

pub fn run_case_study(args: &CaseStudyArgs, resolved: &Resolved) -> Result<()> {
    let out = ensure_out_dir(resolved)?;
    let corpus = Corpus::load(&args.corpus, args.catalog.as_deref())?;
    let dialogue = corpus
        .dialogues
        .iter()
        .find(|d| d.dialogue_id == args.dialogue_id)
        .ok_or_else(|| {
            Error::AlignmentError(format!("no dialogue `{}` in the corpus", args.dialogue_id))
        })?;
    let records = load_records(&args.predictions, &corpus)?;
    let estimates: Vec<TurnEstimate> = records
        .iter()
        .filter(|r| r.dialogue_id == args.dialogue_id)
        .map(|r| TurnEstimate {
            pair_index: r.pair_index,
            theta: r.theta,
            d: r.d,
            r_hat: Some(r.r_hat),
        })
        .collect();
    let rows = case_study_table(dialogue, &estimates, resolved.display.into())?;
    let case = CaseStudy {
        dialogue_id: args.dialogue_id.clone(),
        rows: rows.clone(),
    };

    let json_path = write_json(out, "case_study.json", &case)?;
    let rendered = render_case_study(&args.dialogue_id, &rows);
    let text_path = out.join("case_study.txt");
    std::fs::write(&text_path, &rendered)
        .with_context(|| format!("write {}", text_path.display()))?;

    let mut manifest = ManifestBuilder::new("case-study", resolved.snapshot(), resolved.seed);
    manifest
        .input(&args.predictions)
        .input(&args.corpus)
        .output(&json_path)
        .output(&text_path);
    if let Some(report_path) = &args.report {
        let mut report = load_report(report_path)?;
        report
            .case_studies
            .get_or_insert_with(Vec::new)
            .retain(|c| c.dialogue_id != case.dialogue_id);
        report
            .case_studies
            .get_or_insert_with(Vec::new)
            .push(case.clone());
        let enriched = write_json(out, "report.json", &report)?;
        manifest.input(report_path).output(&enriched);
    }
    manifest.write(out)?;

    print!("{rendered}");
    Ok(())
}
