//! Evaluation: masked AUC/accuracy, per-KC difficulty agreement, learning
//! curves, and case-study tables.
//!
//! Metrics are computed over prediction records, one per labeled pair. The
//! first label of each dialogue is masked out of metric computation (there
//! is no prior observation to condition on at that point); training still
//! uses it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Dialogue};
use crate::error::{Error, Result};
use crate::estimator::{estimate_dialogue, LogitProvider, TurnEstimate};
use crate::irt::{predict, sigmoid, IRTParams};

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

/// One evaluated (label, prediction) pair with its interpretable estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub dialogue_id: String,
    pub pair_index: usize,
    pub kc_ids: Vec<String>,
    pub label: bool,
    pub r_hat: f64,
    pub theta: f64,
    pub d: f64,
    pub is_first_label: bool,
}

/// Estimate every dialogue in the corpus and attach IRT predictions.
pub fn build_prediction_records(
    corpus: &Corpus,
    provider: &dyn LogitProvider,
    irt: &IRTParams,
) -> Result<Vec<PredictionRecord>> {
    let mut records = Vec::new();
    for dialogue in &corpus.dialogues {
        let estimates = estimate_dialogue(provider, dialogue, &corpus.kc_catalog)?;
        let first = dialogue.first_labeled_pair_index();
        for est in estimates {
            let label = dialogue
                .labels
                .iter()
                .find(|l| l.pair_index == est.pair_index)
                .expect("estimates exist only for labeled pairs");
            records.push(PredictionRecord {
                dialogue_id: dialogue.dialogue_id.clone(),
                pair_index: est.pair_index,
                kc_ids: label.kc_ids.clone(),
                label: label.correctness,
                r_hat: predict(est.theta, est.d, irt)?,
                theta: est.theta,
                d: est.d,
                is_first_label: Some(est.pair_index) == first,
            });
        }
    }
    Ok(records)
}

/// Drop the earliest labeled pair of every dialogue.
pub fn mask_first_labels(records: &[PredictionRecord]) -> Vec<PredictionRecord> {
    let mut first: BTreeMap<&str, usize> = BTreeMap::new();
    for r in records {
        first
            .entry(r.dialogue_id.as_str())
            .and_modify(|m| *m = (*m).min(r.pair_index))
            .or_insert(r.pair_index);
    }
    records
        .iter()
        .filter(|r| first[r.dialogue_id.as_str()] != r.pair_index)
        .cloned()
        .collect()
}

// ---------------------------------------------------------------------------
// Binary metrics
// ---------------------------------------------------------------------------

/// Rank-statistic AUC: the probability that a random positive outscores a
/// random negative, ties counting one half.
pub fn auc(labels: &[bool], scores: &[f64]) -> Result<f64> {
    if labels.len() != scores.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} labels vs {} scores",
            labels.len(),
            scores.len()
        )));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric(
            "AUC needs both classes present".to_string(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // average ranks over tied groups
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            if labels[idx] {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Fraction of records where `(score >= threshold)` equals the label.
pub fn accuracy(labels: &[bool], scores: &[f64], threshold: f64) -> Result<f64> {
    if labels.len() != scores.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} labels vs {} scores",
            labels.len(),
            scores.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::UndefinedMetric(
            "accuracy of empty input".to_string(),
        ));
    }
    let correct = labels
        .iter()
        .zip(scores)
        .filter(|(&l, &s)| (s >= threshold) == l)
        .count();
    Ok(correct as f64 / labels.len() as f64)
}

// ---------------------------------------------------------------------------
// KC difficulty agreement
// ---------------------------------------------------------------------------

/// Classical-test-theory difficulty per KC: the portion of incorrect
/// responses, `1 − correct/total`. A record with several KCs contributes one
/// observation to each.
pub fn empirical_kc_difficulty(records: &[PredictionRecord]) -> BTreeMap<String, (f64, usize)> {
    let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for r in records {
        for kc in &r.kc_ids {
            let entry = counts.entry(kc).or_insert((0, 0));
            entry.1 += 1;
            if r.label {
                entry.0 += 1;
            }
        }
    }
    counts
        .into_iter()
        .map(|(kc, (correct, total))| {
            (kc.to_string(), (1.0 - correct as f64 / total as f64, total))
        })
        .collect()
}

/// Affine rescale onto [0, 1]; min maps to 0, max to 1, order preserved.
pub fn minmax_normalize(values: &[f64]) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::DegenerateRange);
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Err(Error::DegenerateRange);
    }
    Ok(values.iter().map(|v| (v - min) / (max - min)).collect())
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} vs {} values",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::UndefinedMetric(
            "pearson needs at least 3 points".to_string(),
        ));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedMetric(
            "pearson of a constant vector".to_string(),
        ));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Two-sided p-value for a Pearson r via the t-distribution with `n − 2`
/// degrees of freedom.
pub fn pearson_p_value(r: f64, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::UndefinedMetric(
            "p-value needs at least 3 points".to_string(),
        ));
    }
    let df = (n - 2) as f64;
    if r.abs() >= 1.0 {
        return Ok(0.0);
    }
    let t = r * (df / (1.0 - r * r)).sqrt();
    // P(|T| > t) = I_{df/(df+t^2)}(df/2, 1/2)
    Ok(incomplete_beta(df / 2.0, 0.5, df / (df + t * t)))
}

/// One KC's scatter point in the predicted-vs-empirical difficulty plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KCDifficultyPoint {
    pub kc_id: String,
    pub ground_truth: f64,
    pub predicted_normalized: f64,
    pub sample_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifficultyAgreement {
    pub points: Vec<KCDifficultyPoint>,
    pub pearson_r: f64,
    pub p_value: f64,
}

/// Compare per-KC mean predicted difficulty (min–max normalized) against
/// classical-test-theory ground truth. KCs with fewer than
/// `min_sample_count` records are excluded.
pub fn kc_difficulty_agreement(
    records: &[PredictionRecord],
    min_sample_count: usize,
) -> Result<DifficultyAgreement> {
    let mut stats: BTreeMap<&str, (usize, usize, f64)> = BTreeMap::new(); // correct, total, d sum
    for r in records {
        for kc in &r.kc_ids {
            let entry = stats.entry(kc).or_insert((0, 0, 0.0));
            entry.1 += 1;
            entry.2 += r.d;
            if r.label {
                entry.0 += 1;
            }
        }
    }
    let eligible: Vec<(&str, usize, f64, f64)> = stats
        .iter()
        .filter(|(_, (_, total, _))| *total >= min_sample_count)
        .map(|(kc, (correct, total, d_sum))| {
            (
                *kc,
                *total,
                1.0 - *correct as f64 / *total as f64,
                d_sum / *total as f64,
            )
        })
        .collect();
    if eligible.len() < 3 {
        return Err(Error::UndefinedMetric(format!(
            "difficulty agreement needs >= 3 eligible KCs, have {}",
            eligible.len()
        )));
    }
    let predicted_raw: Vec<f64> = eligible.iter().map(|e| e.3).collect();
    let predicted_normalized = minmax_normalize(&predicted_raw)?;
    let ground_truth: Vec<f64> = eligible.iter().map(|e| e.2).collect();
    let r = pearson(&ground_truth, &predicted_normalized)?;
    let p = pearson_p_value(r, eligible.len())?;
    let points = eligible
        .iter()
        .zip(&predicted_normalized)
        .map(|((kc, total, gt, _), &pn)| KCDifficultyPoint {
            kc_id: kc.to_string(),
            ground_truth: *gt,
            predicted_normalized: pn,
            sample_count: *total,
        })
        .collect();
    Ok(DifficultyAgreement {
        points,
        pearson_r: r,
        p_value: p,
    })
}

// ---------------------------------------------------------------------------
// Learning curves
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MasterySource {
    /// σ(θ): ability mapped onto [0, 1], the stable mastery signal.
    SigmoidTheta,
    /// The predicted correctness probability itself.
    RHat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub occurrence_index: usize,
    pub mean_mastery: f64,
    pub count: usize,
}

/// Mean mastery against the number of prior opportunities to practice a KC.
///
/// Within each dialogue the KC's records are numbered 1, 2, … in pair
/// order; across dialogues mastery is averaged per occurrence index. The
/// numbering is relative to the records given: pass masked records to get
/// curves over evaluated labels only.
pub fn learning_curve(
    records: &[PredictionRecord],
    kc_id: &str,
    source: MasterySource,
) -> Result<Vec<CurvePoint>> {
    let mut per_dialogue: BTreeMap<&str, Vec<&PredictionRecord>> = BTreeMap::new();
    let mut seen = false;
    for r in records {
        if r.kc_ids.iter().any(|k| k == kc_id) {
            seen = true;
            per_dialogue
                .entry(r.dialogue_id.as_str())
                .or_default()
                .push(r);
        }
    }
    if !seen {
        return Err(Error::UnknownKC(kc_id.to_string()));
    }
    let mut sums: Vec<(f64, usize)> = Vec::new();
    for (_, mut dialogue_records) in per_dialogue {
        dialogue_records.sort_by_key(|r| r.pair_index);
        for (occurrence, r) in dialogue_records.iter().enumerate() {
            if sums.len() <= occurrence {
                sums.push((0.0, 0));
            }
            let mastery = match source {
                MasterySource::SigmoidTheta => sigmoid(r.theta),
                MasterySource::RHat => r.r_hat,
            };
            sums[occurrence].0 += mastery;
            sums[occurrence].1 += 1;
        }
    }
    Ok(sums
        .into_iter()
        .enumerate()
        .map(|(i, (sum, count))| CurvePoint {
            occurrence_index: i + 1,
            mean_mastery: sum / count as f64,
            count,
        })
        .collect())
}

/// The `n` most frequent KCs among the records, ties broken by id.
pub fn top_kcs(records: &[PredictionRecord], n: usize) -> Vec<String> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for r in records {
        for kc in &r.kc_ids {
            *counts.entry(kc).or_insert(0) += 1;
        }
    }
    let mut by_count: Vec<(&str, usize)> = counts.into_iter().collect();
    by_count.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    by_count
        .into_iter()
        .take(n)
        .map(|(kc, _)| kc.to_string())
        .collect()
}

// ---------------------------------------------------------------------------
// Case study
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisplayRule {
    /// σ for both ability and difficulty.
    Sigmoid,
    /// σ for ability; min–max over the dialogue's difficulty estimates for
    /// difficulty, mirroring how predicted difficulties are normalized in
    /// the aggregate analysis.
    CorpusMinmax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseStudyRow {
    pub pair_index: usize,
    pub tutor_text: String,
    /// Absent on the opening pair, rendered as `--` in tables.
    pub display_d: Option<f64>,
    pub student_text: String,
    pub display_theta: f64,
    pub label: bool,
}

/// One row per labeled pair, in order, with estimates mapped onto [0, 1]
/// under the chosen display rule. The first pair's difficulty is reported
/// as absent.
pub fn case_study_table(
    dialogue: &Dialogue,
    estimates: &[TurnEstimate],
    display: DisplayRule,
) -> Result<Vec<CaseStudyRow>> {
    let pairs = dialogue.turn_pairs()?;
    let labeled: Vec<_> = pairs.iter().filter(|p| p.label.is_some()).collect();
    let mut aligned = Vec::with_capacity(labeled.len());
    for pair in &labeled {
        let est = estimates
            .iter()
            .find(|e| e.pair_index == pair.pair_index)
            .ok_or_else(|| {
                Error::AlignmentError(format!(
                    "no estimate for labeled pair {} of dialogue `{}`",
                    pair.pair_index, dialogue.dialogue_id
                ))
            })?;
        aligned.push((pair, est));
    }
    let display_d: Vec<f64> = match display {
        DisplayRule::Sigmoid => aligned.iter().map(|(_, e)| sigmoid(e.d)).collect(),
        DisplayRule::CorpusMinmax => {
            let raw: Vec<f64> = aligned.iter().map(|(_, e)| e.d).collect();
            minmax_normalize(&raw)?
        }
    };
    Ok(aligned
        .iter()
        .zip(display_d)
        .enumerate()
        .map(|(i, ((pair, est), d_value))| CaseStudyRow {
            pair_index: pair.pair_index,
            tutor_text: pair.tutor.text.clone(),
            display_d: (i > 0).then_some(d_value),
            student_text: pair.student.text.clone(),
            display_theta: sigmoid(est.theta),
            label: pair.label.expect("labeled").correctness,
        })
        .collect())
}

/// Text rendering of a case-study table; `--` marks the absent opening
/// difficulty. Values print with three decimals, matching how the numbers
/// are read in the analysis.
pub fn render_case_study(dialogue_id: &str, rows: &[CaseStudyRow]) -> String {
    let mut out = format!("case study: {dialogue_id}\n");
    out.push_str("| # | tutor turn | d | student turn | theta | correct |\n");
    out.push_str("|---|------------|---|--------------|-------|---------|\n");
    for row in rows {
        let d = row
            .display_d
            .map(|v| format!("{v:.3}"))
            .unwrap_or_else(|| "--".to_string());
        out.push_str(&format!(
            "| {} | {} | {} | {} | {:.3} | {} |\n",
            row.pair_index,
            row.tutor_text.replace('\n', " / "),
            d,
            row.student_text.replace('\n', " / "),
            row.display_theta,
            u8::from(row.label),
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Report and prediction export
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseStudy {
    pub dialogue_id: String,
    pub rows: Vec<CaseStudyRow>,
}

/// The structured evaluation report the CLI reads and writes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub auc: f64,
    pub accuracy: f64,
    pub n_evaluated: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub difficulty_agreement: Option<DifficultyAgreement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_curves: Option<BTreeMap<String, Vec<CurvePoint>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case_studies: Option<Vec<CaseStudy>>,
}

/// Masked AUC and accuracy over prediction records.
pub fn evaluate_records(records: &[PredictionRecord], threshold: f64) -> Result<EvalReport> {
    let masked = mask_first_labels(records);
    let labels: Vec<bool> = masked.iter().map(|r| r.label).collect();
    let scores: Vec<f64> = masked.iter().map(|r| r.r_hat).collect();
    Ok(EvalReport {
        auc: auc(&labels, &scores)?,
        accuracy: accuracy(&labels, &scores, threshold)?,
        n_evaluated: masked.len(),
        difficulty_agreement: None,
        learning_curves: None,
        case_studies: None,
    })
}

fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

/// Delimited per-record export: dialogue_id, pair_index, label, r_hat,
/// theta, d. Floats use shortest round-trip formatting.
pub fn export_predictions_csv(records: &[PredictionRecord]) -> String {
    let mut out = String::from("dialogue_id,pair_index,label,r_hat,theta,d\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            csv_field(&r.dialogue_id),
            r.pair_index,
            u8::from(r.label),
            r.r_hat,
            r.theta,
            r.d
        ));
    }
    out
}

/// Re-import an export, rejoining KC ids and first-label flags from the
/// corpus.
pub fn import_predictions_csv(text: &str, corpus: &Corpus) -> Result<Vec<PredictionRecord>> {
    let dialogues: BTreeMap<&str, &Dialogue> = corpus
        .dialogues
        .iter()
        .map(|d| (d.dialogue_id.as_str(), d))
        .collect();
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.is_empty() {
            continue;
        }
        let fields = split_csv_line(line);
        if fields.len() != 6 {
            return Err(Error::ParseError {
                line: i + 1,
                message: format!("expected 6 fields, got {}", fields.len()),
            });
        }
        let parse_err = |message: String| Error::ParseError {
            line: i + 1,
            message,
        };
        let dialogue_id = fields[0].clone();
        let pair_index: usize = fields[1]
            .parse()
            .map_err(|e| parse_err(format!("pair_index: {e}")))?;
        let label = match fields[2].as_str() {
            "0" => false,
            "1" => true,
            other => return Err(parse_err(format!("label must be 0 or 1, got {other}"))),
        };
        let r_hat: f64 = fields[3]
            .parse()
            .map_err(|e| parse_err(format!("r_hat: {e}")))?;
        let theta: f64 = fields[4]
            .parse()
            .map_err(|e| parse_err(format!("theta: {e}")))?;
        let d: f64 = fields[5]
            .parse()
            .map_err(|e| parse_err(format!("d: {e}")))?;
        let dialogue = dialogues
            .get(dialogue_id.as_str())
            .ok_or_else(|| Error::AlignmentError(format!("unknown dialogue `{dialogue_id}`")))?;
        let kc_ids = dialogue
            .labels
            .iter()
            .find(|l| l.pair_index == pair_index)
            .map(|l| l.kc_ids.clone())
            .ok_or_else(|| {
                Error::AlignmentError(format!(
                    "dialogue `{dialogue_id}` has no label at pair {pair_index}"
                ))
            })?;
        records.push(PredictionRecord {
            is_first_label: dialogue.first_labeled_pair_index() == Some(pair_index),
            dialogue_id,
            pair_index,
            kc_ids,
            label,
            r_hat,
            theta,
            d,
        });
    }
    Ok(records)
}

fn split_csv_line(line: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut field = String::new();
    let mut in_quotes = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' if in_quotes && chars.peek() == Some(&'"') => {
                field.push('"');
                chars.next();
            }
            '"' => in_quotes = !in_quotes,
            ',' if !in_quotes => fields.push(std::mem::take(&mut field)),
            _ => field.push(c),
        }
    }
    fields.push(field);
    fields
}

// ---------------------------------------------------------------------------
// Incomplete beta (for the t-distribution tail)
// ---------------------------------------------------------------------------

/// Regularized incomplete beta function `I_x(a, b)` via the continued
/// fraction expansion.
fn incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 200;
    const TINY: f64 = 1e-300;
    const EPS: f64 = 3e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Lanczos approximation of ln Γ(x).
fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 6] = [
        76.18009172947146,
        -86.50532032941677,
        24.01409824083091,
        -1.231739572450155,
        0.1208650973866179e-2,
        -0.5395239384953e-5,
    ];
    let mut y = x;
    let tmp = x + 5.5;
    let tmp = tmp - (x + 0.5) * tmp.ln();
    let mut ser = 1.000000000190015;
    for c in COEFFS {
        y += 1.0;
        ser += c / y;
    }
    -tmp + (2.5066282746310005 * ser / x).ln()
}

// ---------------------------------------------------------------------------
