//! Prompt rendering for the two scoring tasks.
//!
//! Knowledge prompts ask for a one-token judgment of the student's current
//! ability (menu `GOOD BAD`); difficulty prompts ask for a one-token judgment
//! of the upcoming tutor-posed task (menu `HARD EASY`). Rendering is
//! byte-deterministic: equal inputs always produce equal prompt text, and
//! golden-file tests pin the exact layout. Inputs containing a reserved
//! marker are rejected instead of escaped, so marker blocks can be parsed
//! back out of a rendered prompt unambiguously.

use crate::corpus::{Speaker, Turn};
use crate::error::{Error, Result};

pub const BEGIN_QUESTION: &str = "[BEGIN QUESTION]";
pub const END_QUESTION: &str = "[END QUESTION]";
pub const BEGIN_DIALOGUE: &str = "[BEGIN DIALOGUE]";
pub const END_DIALOGUE: &str = "[END DIALOGUE]";
pub const BEGIN_TEACHER_TURN: &str = "[BEGIN CURRENT TEACHER TURN]";
pub const END_TEACHER_TURN: &str = "[END CURRENT TEACHER TURN]";
pub const BEGIN_KC: &str = "[BEGIN KC]";
pub const END_KC: &str = "[END KC]";

/// Every reserved marker; input text may not contain any of them.
pub const ALL_MARKERS: [&str; 8] = [
    BEGIN_QUESTION,
    END_QUESTION,
    BEGIN_DIALOGUE,
    END_DIALOGUE,
    BEGIN_TEACHER_TURN,
    END_TEACHER_TURN,
    BEGIN_KC,
    END_KC,
];

const KNOWLEDGE_INSTRUCTION: &str = "You are an experienced math teacher. Given a dialogue where the student is working through a multiple-choice diagnostic math question, based on the student's responses and demonstrated understanding in the dialogue, classify the student's current ability level. Respond with exactly one token from: GOOD BAD.";

const DIFFICULTY_INSTRUCTION: &str = "You are an experienced math teacher. Given a dialogue where the student is working through a multiple-choice diagnostic math question, based on the question content and required knowledge components, classify the question's difficulty level. Respond with exactly one token from: HARD EASY.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PromptKind {
    Knowledge,
    Difficulty,
}

/// A rendered prompt plus the pair index it predicts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptText {
    pub text: String,
    pub kind: PromptKind,
    /// 1-based index of the (tutor, student) pair being predicted.
    pub pair_index: usize,
}

fn check_markers(text: &str) -> Result<()> {
    for marker in ALL_MARKERS {
        if text.contains(marker) {
            return Err(Error::MarkerCollision {
                marker: marker.to_string(),
            });
        }
    }
    Ok(())
}

fn check_history(history: &[Turn]) -> Result<()> {
    for w in history.windows(2) {
        if w[0].speaker == w[1].speaker {
            return Err(Error::SpeakerMismatch {
                expected: "alternating history speakers".to_string(),
                got: format!("consecutive {} turns", w[0].speaker),
            });
        }
    }
    for t in history {
        check_markers(&t.text)?;
    }
    Ok(())
}

fn block(begin: &str, content: &str, end: &str) -> String {
    if content.is_empty() {
        format!("{begin}\n{end}")
    } else {
        format!("{begin}\n{content}\n{end}")
    }
}

fn dialogue_lines(history: &[Turn]) -> String {
    history
        .iter()
        .map(|t| match t.speaker {
            Speaker::Tutor => format!("Tutor: {}", t.text),
            Speaker::Student => format!("Student: {}", t.text),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Pairs are indexed from 1; a history ending at student turn `s_j` contains
/// `j` tutor turns, so the predicted pair is `j + 1`.
fn predicted_pair_index(history: &[Turn]) -> usize {
    history
        .iter()
        .filter(|t| t.speaker == Speaker::Tutor)
        .count()
        + 1
}

/// Render the knowledge-estimation prompt for the pair following `history`.
///
/// `history` runs up to and including student turn `s_j`; it never contains
/// the tutor turn being predicted.
pub fn build_knowledge_prompt(question_text: &str, history: &[Turn]) -> Result<PromptText> {
    if question_text.trim().is_empty() {
        return Err(Error::MissingQuestion);
    }
    check_markers(question_text)?;
    check_history(history)?;
    let text = [
        KNOWLEDGE_INSTRUCTION.to_string(),
        block(BEGIN_QUESTION, question_text, END_QUESTION),
        block(BEGIN_DIALOGUE, &dialogue_lines(history), END_DIALOGUE),
    ]
    .join("\n\n");
    Ok(PromptText {
        text,
        kind: PromptKind::Knowledge,
        pair_index: predicted_pair_index(history),
    })
}

/// Render the difficulty-estimation prompt for the tutor-posed task
/// `next_tutor_turn`, given the same history as the knowledge prompt plus
/// the KC names attached to the task.
pub fn build_difficulty_prompt(
    question_text: &str,
    history: &[Turn],
    next_tutor_turn: &Turn,
    kc_names: &[String],
) -> Result<PromptText> {
    if question_text.trim().is_empty() {
        return Err(Error::MissingQuestion);
    }
    if next_tutor_turn.speaker != Speaker::Tutor {
        return Err(Error::SpeakerMismatch {
            expected: "tutor".to_string(),
            got: next_tutor_turn.speaker.to_string(),
        });
    }
    if kc_names.is_empty() {
        return Err(Error::MissingKC);
    }
    check_markers(question_text)?;
    check_history(history)?;
    check_markers(&next_tutor_turn.text)?;
    for name in kc_names {
        check_markers(name)?;
    }
    let text = [
        DIFFICULTY_INSTRUCTION.to_string(),
        block(BEGIN_QUESTION, question_text, END_QUESTION),
        block(BEGIN_DIALOGUE, &dialogue_lines(history), END_DIALOGUE),
        block(BEGIN_TEACHER_TURN, &next_tutor_turn.text, END_TEACHER_TURN),
        block(BEGIN_KC, &kc_names.join("\n"), END_KC),
    ]
    .join("\n\n");
    Ok(PromptText {
        text,
        kind: PromptKind::Difficulty,
        pair_index: predicted_pair_index(history),
    })
}

/// Shrink a prompt to `max_bytes` by dropping the oldest lines inside the
/// dialogue block. The question, current teacher turn, and KC blocks are
/// never touched; if the budget still cannot be met the shortened prompt is
/// returned as-is and the provider decides what to do.
pub fn truncate_to_budget(prompt: &PromptText, max_bytes: usize) -> PromptText {
    if prompt.text.len() <= max_bytes {
        return prompt.clone();
    }
    let (Some(begin), Some(end)) = (
        prompt.text.find(BEGIN_DIALOGUE),
        prompt.text.find(END_DIALOGUE),
    ) else {
        return prompt.clone();
    };
    let content_start = begin + BEGIN_DIALOGUE.len() + 1; // past the marker line
    if content_start >= end {
        return prompt.clone();
    }
    let head = &prompt.text[..content_start];
    let tail = &prompt.text[end..];
    let mut lines: Vec<&str> = prompt.text[content_start..end]
        .trim_end_matches('\n')
        .lines()
        .collect();
    while !lines.is_empty() {
        let body = lines.join("\n");
        let candidate = format!("{head}{body}\n{tail}");
        if candidate.len() <= max_bytes {
            return PromptText {
                text: candidate,
                ..prompt.clone()
            };
        }
        lines.remove(0);
    }
    // Empty dialogue block: collapse to adjacent markers.
    let collapsed = format!(
        "{}{}",
        &prompt.text[..begin + BEGIN_DIALOGUE.len() + 1],
        tail
    );
    PromptText {
        text: collapsed,
        ..prompt.clone()
    }
}
