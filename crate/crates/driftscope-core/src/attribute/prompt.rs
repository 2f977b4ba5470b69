//! Prompt construction and answer parsing.

use super::{AttributeError, AttributeSet};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Builds the attribute-analysis prompt: the analysis instruction, the
/// numbered attribute list, the YES-OR-NO instruction, then the document.
/// Byte-stable for fixed inputs.
pub fn build_attribute_prompt(
    attributes: &AttributeSet,
    document: &str,
) -> Result<String, AttributeError> {
    if attributes.is_empty() {
        return Err(AttributeError::EmptyAttributeSet);
    }
    if document.is_empty() {
        return Err(AttributeError::EmptyDocument("<inline>".into()));
    }
    let mut prompt = String::from(
        "Analyze the following text by answering the following questions including:\n",
    );
    for (i, q) in attributes.questions.iter().enumerate() {
        let _ = writeln!(prompt, "{}. {}", i + 1, q);
    }
    prompt.push_str("For each question provide \"YES OR NO\" answer only.\n\n");
    prompt.push_str(document);
    Ok(prompt)
}

/// Builds the rewrite prompt that makes a document sound less formal.
/// Byte-stable for fixed inputs.
pub fn build_humanize_prompt(document: &str) -> Result<String, AttributeError> {
    if document.is_empty() {
        return Err(AttributeError::EmptyDocument("<inline>".into()));
    }
    Ok(format!(
        "Make the following context sound less formal, paraphrase using some colloquial language.\n\n{document}"
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
    Unparsed,
}

/// Maps a completion to one answer per attribute.
///
/// The completion is scanned line by line; every standalone YES/NO word
/// token (case-insensitive, numbering and punctuation tolerated) is
/// collected in order, and the k-th token answers attribute k. Positions
/// with no recognized token are unparsed.
pub fn parse_answers(completion: &str, n_attributes: usize) -> Vec<Answer> {
    assert!(n_attributes >= 1, "need at least one attribute");
    let mut tokens = Vec::new();
    for line in completion.lines() {
        for word in line.split(|c: char| !c.is_alphabetic()) {
            if word.eq_ignore_ascii_case("yes") {
                tokens.push(Answer::Yes);
            } else if word.eq_ignore_ascii_case("no") {
                tokens.push(Answer::No);
            }
        }
    }
    (0..n_attributes)
        .map(|k| tokens.get(k).copied().unwrap_or(Answer::Unparsed))
        .collect()
}

/// Renders an answer list in the canonical numbered form; the mock provider
/// and the audit replay share this representation.
pub fn render_answers(answers: &[Answer]) -> String {
    let mut out = String::new();
    for (i, a) in answers.iter().enumerate() {
        let word = match a {
            Answer::Yes => "YES",
            Answer::No => "NO",
            Answer::Unparsed => "N/A",
        };
        let _ = writeln!(out, "{}. {}", i + 1, word);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn attrs(n: usize) -> AttributeSet {
        AttributeSet::new((0..n).map(|i| format!("Attribute {i}")).collect()).unwrap()
    }

    #[test]
    fn prompt_orders_sections() {
        let prompt = build_attribute_prompt(&attrs(1), "hi").unwrap();
        let attr_pos = prompt.find("Attribute 0").unwrap();
        let instr_pos = prompt.find("\"YES OR NO\"").unwrap();
        let doc_pos = prompt.find("hi").unwrap();
        assert!(attr_pos < instr_pos && instr_pos < doc_pos);
    }

    #[test]
    fn prompt_is_byte_stable() {
        let a = build_attribute_prompt(&attrs(3), "same document").unwrap();
        let b = build_attribute_prompt(&attrs(3), "same document").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_attribute_set_rejected() {
        let empty = AttributeSet { questions: vec![] };
        assert!(matches!(
            build_attribute_prompt(&empty, "doc"),
            Err(AttributeError::EmptyAttributeSet)
        ));
    }

    #[test]
    fn humanize_prompt_leads_with_instruction() {
        let p = build_humanize_prompt("Dear sir or madam").unwrap();
        assert!(p.starts_with("Make the following context sound less formal"));
        assert!(p.ends_with("Dear sir or madam"));
        assert_eq!(p, build_humanize_prompt("Dear sir or madam").unwrap());
        assert!(matches!(
            build_humanize_prompt(""),
            Err(AttributeError::EmptyDocument(_))
        ));
    }

    #[test]
    fn canonical_numbered_answers() {
        assert_eq!(
            parse_answers("1. YES\n2. NO", 2),
            vec![Answer::Yes, Answer::No]
        );
    }

    #[test]
    fn mixed_case_and_punctuation_tokens() {
        assert_eq!(
            parse_answers("Yes — no — YES", 3),
            vec![Answer::Yes, Answer::No, Answer::Yes]
        );
    }

    #[test]
    fn unrecognized_text_is_unparsed() {
        assert_eq!(parse_answers("maybe", 1), vec![Answer::Unparsed]);
    }

    #[test]
    fn missing_tail_positions_are_unparsed() {
        assert_eq!(
            parse_answers("1. YES", 3),
            vec![Answer::Yes, Answer::Unparsed, Answer::Unparsed]
        );
    }

    #[test]
    fn prose_with_embedded_answers_parses_in_order() {
        let completion = "Sure! 1. YES, the structure is consistent.\n2. No, informal.\n";
        assert_eq!(parse_answers(completion, 2), vec![Answer::Yes, Answer::No]);
    }

    #[test]
    fn render_parse_round_trip() {
        let answers = vec![Answer::Yes, Answer::No, Answer::Yes, Answer::No];
        assert_eq!(parse_answers(&render_answers(&answers), 4), answers);
    }
}
