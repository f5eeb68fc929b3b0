//! Dialogue corpus: data model, transcript normalization, and JSONL storage.
//!
//! A [`Dialogue`] is an alternating tutor/student turn sequence attached to
//! the original question a student is working on. Tutor turns with
//! pedagogical intent carry an [`AssessmentLabel`]: the knowledge components
//! they assess and whether the following student turn was correct. The corpus
//! file format is line-delimited JSON, one dialogue per line, with a sidecar
//! JSON map from KC id to human-readable KC name.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_pcg::Pcg64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Current corpus file schema version.
pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    Tutor,
    Student,
}

impl fmt::Display for Speaker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Speaker::Tutor => write!(f, "tutor"),
            Speaker::Student => write!(f, "student"),
        }
    }
}

/// One merged utterance in a dialogue.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Turn {
    /// Position in the dialogue, consecutive from 0.
    pub index: usize,
    pub speaker: Speaker,
    pub text: String,
}

/// Links a tutor-posed task (pair `j`) to its knowledge components and the
/// correctness of the following student turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssessmentLabel {
    /// 1-based index of the (tutor, student) pair this label scores.
    pub pair_index: usize,
    pub kc_ids: Vec<String>,
    #[serde(with = "binary_int")]
    pub correctness: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTag {
    Train,
    Validation,
    Test,
}

/// One tutoring session.
#[derive(Debug, Clone, PartialEq)]
pub struct Dialogue {
    pub dialogue_id: String,
    /// The original math question, including any answer options.
    pub question_text: String,
    pub turns: Vec<Turn>,
    pub labels: Vec<AssessmentLabel>,
    pub split_tag: SplitTag,
}

/// A dialogue collection plus the KC id → name catalog.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    pub dialogues: Vec<Dialogue>,
    pub kc_catalog: BTreeMap<String, String>,
}

/// A (tutor, student) pair in dialogue order; `label` is present iff the
/// tutor turn was annotated as a formative assessment.
#[derive(Debug, Clone, Copy)]
pub struct TurnPair<'a> {
    /// 1-based pair index `j`.
    pub pair_index: usize,
    pub tutor: &'a Turn,
    pub student: &'a Turn,
    pub label: Option<&'a AssessmentLabel>,
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Alternation,
    NonConsecutiveIndex,
    EmptyTurnText,
    EmptyQuestion,
    DanglingLabel,
    DuplicateLabel,
    EmptyKcList,
    DuplicateDialogueId,
    UnknownKcId,
}

/// One violated invariant. Violations are data, not failures: validation
/// reports all of them instead of stopping at the first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.message)
    }
}

fn violation(kind: ViolationKind, message: impl Into<String>) -> Violation {
    Violation {
        kind,
        message: message.into(),
    }
}

// ---------------------------------------------------------------------------
// Transcript normalization
// ---------------------------------------------------------------------------

/// Merge consecutive same-speaker utterances into single turns, preserving
/// order. Adjacent texts are joined with a single newline so utterance
/// boundaries survive into prompt rendering. Indices are reassigned from 0.
pub fn merge_consecutive_utterances(raw_turns: &[(Speaker, String)]) -> Result<Vec<Turn>> {
    if raw_turns.is_empty() {
        return Err(Error::EmptyDialogue);
    }
    let mut merged: Vec<Turn> = Vec::new();
    for (i, (speaker, text)) in raw_turns.iter().enumerate() {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Err(Error::EmptyUtterance { index: i });
        }
        match merged.last_mut() {
            Some(last) if last.speaker == *speaker => {
                last.text.push('\n');
                last.text.push_str(trimmed);
            }
            _ => merged.push(Turn {
                index: merged.len(),
                speaker: *speaker,
                text: trimmed.to_string(),
            }),
        }
    }
    Ok(merged)
}

impl Dialogue {
    /// Position of the first non-leading-student turn: 1 when the student
    /// opened the dialogue, 0 otherwise. Pairs are counted from here.
    fn pair_offset(&self) -> usize {
        match self.turns.first() {
            Some(t) if t.speaker == Speaker::Student => 1,
            _ => 0,
        }
    }

    /// Number of complete (tutor, student) pairs.
    pub fn pair_count(&self) -> usize {
        self.turns.len().saturating_sub(self.pair_offset()) / 2
    }

    /// Check every dialogue invariant; empty iff the dialogue is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.question_text.trim().is_empty() {
            out.push(violation(
                ViolationKind::EmptyQuestion,
                "question_text is empty",
            ));
        }
        for (pos, turn) in self.turns.iter().enumerate() {
            if turn.index != pos {
                out.push(violation(
                    ViolationKind::NonConsecutiveIndex,
                    format!("turn at position {pos} has index {}", turn.index),
                ));
            }
            if turn.text.trim().is_empty() {
                out.push(violation(
                    ViolationKind::EmptyTurnText,
                    format!("turn {pos} has empty text"),
                ));
            }
        }
        for w in self.turns.windows(2) {
            if w[0].speaker == w[1].speaker {
                out.push(violation(
                    ViolationKind::Alternation,
                    format!(
                        "turns {} and {} share speaker {}",
                        w[0].index, w[1].index, w[0].speaker
                    ),
                ));
            }
        }
        let offset = self.pair_offset();
        let n_pairs = self.pair_count();
        let mut seen = BTreeSet::new();
        for label in &self.labels {
            if label.pair_index == 0 || label.pair_index > n_pairs {
                out.push(violation(
                    ViolationKind::DanglingLabel,
                    format!(
                        "label pair_index {} has no (tutor, student) pair (dialogue has {})",
                        label.pair_index, n_pairs
                    ),
                ));
            } else {
                let t = offset + 2 * (label.pair_index - 1);
                if self.turns[t].speaker != Speaker::Tutor
                    || self.turns[t + 1].speaker != Speaker::Student
                {
                    out.push(violation(
                        ViolationKind::DanglingLabel,
                        format!(
                            "label pair_index {} does not align with a (tutor, student) pair",
                            label.pair_index
                        ),
                    ));
                }
            }
            if !seen.insert(label.pair_index) {
                out.push(violation(
                    ViolationKind::DuplicateLabel,
                    format!("multiple labels for pair_index {}", label.pair_index),
                ));
            }
            if label.kc_ids.is_empty() {
                out.push(violation(
                    ViolationKind::EmptyKcList,
                    format!("label at pair_index {} has no KCs", label.pair_index),
                ));
            }
        }
        out
    }

    fn ensure_valid(&self) -> Result<()> {
        let violations = self.validate();
        match violations.first() {
            None => Ok(()),
            Some(first) => Err(Error::InvariantViolation {
                dialogue_id: self.dialogue_id.clone(),
                first: first.to_string(),
            }),
        }
    }

    /// The (tutor, student) pairs in dialogue order. A leading student turn
    /// is context only and never part of a pair; a trailing tutor turn
    /// without a reply is excluded (see [`Dialogue::pending_tutor_turn`]).
    pub fn turn_pairs(&self) -> Result<Vec<TurnPair<'_>>> {
        self.ensure_valid()?;
        let offset = self.pair_offset();
        let mut pairs = Vec::with_capacity(self.pair_count());
        let mut j = 1;
        let mut pos = offset;
        while pos + 1 < self.turns.len() {
            pairs.push(TurnPair {
                pair_index: j,
                tutor: &self.turns[pos],
                student: &self.turns[pos + 1],
                label: self.labels.iter().find(|l| l.pair_index == j),
            });
            j += 1;
            pos += 2;
        }
        Ok(pairs)
    }

    /// A trailing tutor turn that has no student reply yet.
    pub fn pending_tutor_turn(&self) -> Option<&Turn> {
        let remaining = self.turns.len() - self.pair_offset();
        if remaining % 2 == 1 {
            self.turns.last().filter(|t| t.speaker == Speaker::Tutor)
        } else {
            None
        }
    }

    /// Turns strictly before the tutor turn of pair `pair_index`; the
    /// conditioning history for estimating that pair.
    pub fn history_before_pair(&self, pair_index: usize) -> &[Turn] {
        let end = self.pair_offset() + 2 * (pair_index - 1);
        &self.turns[..end.min(self.turns.len())]
    }

    /// The tutor turn of pair `pair_index`.
    pub fn tutor_turn_of_pair(&self, pair_index: usize) -> Option<&Turn> {
        self.turns.get(self.pair_offset() + 2 * (pair_index - 1))
    }

    /// Earliest labeled pair index, if any label exists.
    pub fn first_labeled_pair_index(&self) -> Option<usize> {
        self.labels.iter().map(|l| l.pair_index).min()
    }
}

impl Corpus {
    /// Corpus-level invariants plus every dialogue's own.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut ids = BTreeSet::new();
        for d in &self.dialogues {
            if !ids.insert(d.dialogue_id.as_str()) {
                out.push(violation(
                    ViolationKind::DuplicateDialogueId,
                    format!("dialogue_id `{}` appears more than once", d.dialogue_id),
                ));
            }
            for label in &d.labels {
                for kc in &label.kc_ids {
                    if !self.kc_catalog.contains_key(kc) {
                        out.push(violation(
                            ViolationKind::UnknownKcId,
                            format!("dialogue `{}` references unknown KC `{kc}`", d.dialogue_id),
                        ));
                    }
                }
            }
            for v in d.validate() {
                out.push(Violation {
                    kind: v.kind,
                    message: format!("dialogue `{}`: {}", d.dialogue_id, v.message),
                });
            }
        }
        out
    }

    /// Total number of assessment labels across all dialogues.
    pub fn label_count(&self) -> usize {
        self.dialogues.iter().map(|d| d.labels.len()).sum()
    }
}

// ---------------------------------------------------------------------------
// JSONL storage
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TurnRecord {
    speaker: Speaker,
    text: String,
}

#[derive(Serialize, Deserialize)]
struct DialogueRecord {
    schema_version: String,
    dialogue_id: String,
    question_text: String,
    turns: Vec<TurnRecord>,
    labels: Vec<AssessmentLabel>,
    split_tag: SplitTag,
}

impl From<&Dialogue> for DialogueRecord {
    fn from(d: &Dialogue) -> Self {
        DialogueRecord {
            schema_version: SCHEMA_VERSION.to_string(),
            dialogue_id: d.dialogue_id.clone(),
            question_text: d.question_text.clone(),
            turns: d
                .turns
                .iter()
                .map(|t| TurnRecord {
                    speaker: t.speaker,
                    text: t.text.clone(),
                })
                .collect(),
            labels: d.labels.clone(),
            split_tag: d.split_tag,
        }
    }
}

impl DialogueRecord {
    fn into_dialogue(self) -> Dialogue {
        Dialogue {
            dialogue_id: self.dialogue_id,
            question_text: self.question_text,
            turns: self
                .turns
                .into_iter()
                .enumerate()
                .map(|(index, t)| Turn {
                    index,
                    speaker: t.speaker,
                    text: t.text,
                })
                .collect(),
            labels: self.labels,
            split_tag: self.split_tag,
        }
    }
}

impl Corpus {
    /// Load dialogues from a JSONL file and, when given, the KC catalog
    /// sidecar.
    pub fn load(corpus_path: &Path, catalog_path: Option<&Path>) -> Result<Corpus> {
        let text = fs::read_to_string(corpus_path).map_err(|e| Error::ParseError {
            line: 0,
            message: format!("cannot read {}: {e}", corpus_path.display()),
        })?;
        let mut dialogues = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let record: DialogueRecord =
                serde_json::from_str(line).map_err(|e| Error::ParseError {
                    line: line_no,
                    message: e.to_string(),
                })?;
            if record.schema_version != SCHEMA_VERSION {
                return Err(Error::VersionError {
                    line: line_no,
                    found: record.schema_version,
                    expected: SCHEMA_VERSION.to_string(),
                });
            }
            dialogues.push(record.into_dialogue());
        }
        let kc_catalog = match catalog_path {
            Some(p) => load_kc_catalog(p)?,
            None => BTreeMap::new(),
        };
        Ok(Corpus {
            dialogues,
            kc_catalog,
        })
    }

    /// Write dialogues as canonical JSONL and, when given, the catalog
    /// sidecar. Saving then loading yields a structurally equal corpus, and
    /// re-saving yields byte-identical files.
    pub fn save(&self, corpus_path: &Path, catalog_path: Option<&Path>) -> Result<()> {
        let mut out = Vec::new();
        for d in &self.dialogues {
            let record = DialogueRecord::from(d);
            let line = serde_json::to_string(&record).map_err(|e| Error::ParseError {
                line: 0,
                message: e.to_string(),
            })?;
            out.write_all(line.as_bytes()).expect("vec write");
            out.push(b'\n');
        }
        fs::write(corpus_path, out).map_err(|e| Error::ParseError {
            line: 0,
            message: format!("cannot write {}: {e}", corpus_path.display()),
        })?;
        if let Some(p) = catalog_path {
            save_kc_catalog(&self.kc_catalog, p)?;
        }
        Ok(())
    }
}

/// Load the `{kc_id: kc name}` sidecar map.
pub fn load_kc_catalog(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::ParseError {
        line: 0,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    serde_json::from_str(&text).map_err(|e| Error::ParseError {
        line: 0,
        message: format!("kc_catalog: {e}"),
    })
}

/// Write the KC catalog with sorted keys so output is canonical.
pub fn save_kc_catalog(catalog: &BTreeMap<String, String>, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(catalog).map_err(|e| Error::ParseError {
        line: 0,
        message: e.to_string(),
    })?;
    fs::write(path, text + "\n").map_err(|e| Error::ParseError {
        line: 0,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

// ---------------------------------------------------------------------------
// Validation split
// ---------------------------------------------------------------------------

/// Partition a corpus into (train, validation) by whole dialogue.
///
/// The partition is deterministic for a fixed seed; validation receives
/// `round(fraction * n)` dialogues. Both sides keep original dialogue order
/// and share the KC catalog.
pub fn split_validation(corpus: &Corpus, fraction: f64, seed: u64) -> Result<(Corpus, Corpus)> {
    let n = corpus.dialogues.len();
    if n < 2 {
        return Err(Error::DegenerateSplit(format!(
            "need at least 2 dialogues, have {n}"
        )));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::DegenerateSplit(format!(
            "fraction {fraction} outside (0, 1)"
        )));
    }
    let n_val = (fraction * n as f64).round() as usize;
    if n_val == 0 || n_val == n {
        return Err(Error::DegenerateSplit(format!(
            "fraction {fraction} leaves an empty side for {n} dialogues"
        )));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = Pcg64::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let val_set: BTreeSet<usize> = indices[..n_val].iter().copied().collect();

    let mut train = Corpus {
        dialogues: Vec::with_capacity(n - n_val),
        kc_catalog: corpus.kc_catalog.clone(),
    };
    let mut validation = Corpus {
        dialogues: Vec::with_capacity(n_val),
        kc_catalog: corpus.kc_catalog.clone(),
    };
    for (i, d) in corpus.dialogues.iter().enumerate() {
        if val_set.contains(&i) {
            validation.dialogues.push(d.clone());
        } else {
            train.dialogues.push(d.clone());
        }
    }
    Ok((train, validation))
}

mod binary_int {
    use serde::de::Error as DeError;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(u8::from(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(D::Error::custom(format!(
                "correctness must be 0 or 1, got {other}"
            ))),
        }
    }
}

// ---------------------------------------------------------------------------
