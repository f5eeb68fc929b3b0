//! `dikt plot`: render report sections as deterministic SVG images.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};

use dikt_core::eval::EvalReport;
use dikt_core::Error;

use crate::config::Resolved;
use crate::manifest::ManifestBuilder;
use crate::svg;

use super::ensure_out_dir;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum PlotKind {
    /// Predicted vs empirical KC difficulty scatter.
    DifficultyScatter,
    /// One mastery curve per KC.
    LearningCurves,
    /// Per-dialogue ability/difficulty trajectories.
    DialogueCurve,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long, value_enum)]
    pub kind: PlotKind,
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '-' })
        .collect()
}

pub fn run(args: &PlotArgs, resolved: &Resolved) -> Result<()> {
    let out = ensure_out_dir(resolved)?;
    let report: EvalReport = serde_json::from_str(
        &std::fs::read_to_string(&args.report)
            .with_context(|| format!("read {}", args.report.display()))?,
    )
    .with_context(|| format!("report {}", args.report.display()))?;

    let mut written = Vec::new();
    match args.kind {
        PlotKind::DifficultyScatter => {
            let section = report
                .difficulty_agreement
                .as_ref()
                .ok_or_else(|| Error::MissingSection("difficulty_agreement".to_string()))?;
            let path = out.join("difficulty_scatter.svg");
            std::fs::write(
                &path,
                svg::difficulty_scatter(&section.points, section.pearson_r),
            )
            .with_context(|| format!("write {}", path.display()))?;
            written.push(path);
        }
        PlotKind::LearningCurves => {
            let section = report
                .learning_curves
                .as_ref()
                .ok_or_else(|| Error::MissingSection("learning_curves".to_string()))?;
            if section.is_empty() {
                return Err(Error::MissingSection("learning_curves".to_string()).into());
            }
            for (kc, curve) in section {
                let path = out.join(format!("learning_curve_{}.svg", sanitize(kc)));
                std::fs::write(&path, svg::learning_curve_plot(kc, curve))
                    .with_context(|| format!("write {}", path.display()))?;
                written.push(path);
            }
        }
        PlotKind::DialogueCurve => {
            let section = report
                .case_studies
                .as_ref()
                .ok_or_else(|| Error::MissingSection("case_studies".to_string()))?;
            if section.is_empty() {
                return Err(Error::MissingSection("case_studies".to_string()).into());
            }
            for case in section {
                let path = out.join(format!(
                    "dialogue_curve_{}.svg",
                    sanitize(&case.dialogue_id)
                ));
                std::fs::write(
                    &path,
                    svg::dialogue_curve_plot(&case.dialogue_id, &case.rows),
                )
                .with_context(|| format!("write {}", path.display()))?;
                written.push(path);
            }
        }
    }

    let mut manifest = ManifestBuilder::new("plot", resolved.snapshot(), resolved.seed);
    manifest.input(&args.report);
    for path in &written {
        manifest.output(path);
    }
    manifest.write(out)?;

    for path in &written {
        println!("{}", path.display());
    }
    Ok(())
}
