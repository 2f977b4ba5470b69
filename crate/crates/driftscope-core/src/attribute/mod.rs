//! Attribute-based explanations for text corpora.
//!
//! Each document is sent to a chat-completion provider with a fixed list of
//! yes/no attribute questions; per-corpus YES percentages and a separability
//! classifier over the answer vectors summarize how the corpora differ.

mod percentages;
mod prompt;
mod provider;

pub use percentages::{
    attribute_percentages, replay_audit, separability_score, tables_to_csv, AttributeTable,
    AuditRecord, DocumentAnswers, RetryPolicy, SeparabilityReport,
};
pub use prompt::{build_attribute_prompt, build_humanize_prompt, parse_answers, Answer};
pub use provider::{HttpChatProvider, LlmProvider, MockProvider, ProviderError, ProviderInfo};

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AttributeError {
    #[error("corpus \"{0}\" has no documents")]
    EmptyCorpus(String),
    #[error("duplicate document id \"{0}\"")]
    DuplicateDocumentId(String),
    #[error("document \"{0}\" is empty")]
    EmptyDocument(String),
    #[error("attribute set is empty")]
    EmptyAttributeSet,
    #[error("attribute question {0} is empty")]
    EmptyAttributeQuestion(usize),
    #[error("provider failed for all {failed} documents; last error: {last}")]
    ProviderFailure { failed: usize, last: String },
    #[error("separability needs documents from both corpora in the training split")]
    SingleClass,
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("corpus csv error: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
}

/// A named list of documents with stable, unique ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextCorpus {
    pub name: String,
    pub documents: Vec<Document>,
}

impl TextCorpus {
    pub fn new(name: &str, documents: Vec<Document>) -> Result<Self, AttributeError> {
        if documents.is_empty() {
            return Err(AttributeError::EmptyCorpus(name.to_string()));
        }
        let mut seen = BTreeSet::new();
        for doc in &documents {
            if doc.text.is_empty() {
                return Err(AttributeError::EmptyDocument(doc.id.clone()));
            }
            if !seen.insert(doc.id.clone()) {
                return Err(AttributeError::DuplicateDocumentId(doc.id.clone()));
            }
        }
        Ok(Self {
            name: name.to_string(),
            documents,
        })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// One document per non-empty line; ids are `doc-<line index>`.
    pub fn from_lines(name: &str, text: &str) -> Result<Self, AttributeError> {
        let documents = text
            .lines()
            .enumerate()
            .filter(|(_, line)| !line.trim().is_empty())
            .map(|(i, line)| Document {
                id: format!("doc-{i}"),
                text: line.trim_end_matches('\r').to_string(),
            })
            .collect();
        Self::new(name, documents)
    }

    /// Two-column CSV (id, text) with a header row; quoting per RFC 4180.
    pub fn from_csv_path(name: &str, path: &Path) -> Result<Self, AttributeError> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| AttributeError::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(e.to_string()),
        })?;
        let mut documents = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| AttributeError::Csv(e.to_string()))?;
            if record.len() < 2 {
                return Err(AttributeError::Csv(format!(
                    "expected 2 columns (id, text), found {}",
                    record.len()
                )));
            }
            documents.push(Document {
                id: record[0].to_string(),
                text: record[1].to_string(),
            });
        }
        Self::new(name, documents)
    }

    pub fn from_text_path(name: &str, path: &Path) -> Result<Self, AttributeError> {
        let text = std::fs::read_to_string(path).map_err(|source| AttributeError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_lines(name, &text)
    }
}

/// Ordered yes/no attribute questions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSet {
    pub questions: Vec<String>,
}

impl AttributeSet {
    pub fn new(questions: Vec<String>) -> Result<Self, AttributeError> {
        if questions.is_empty() {
            return Err(AttributeError::EmptyAttributeSet);
        }
        for (i, q) in questions.iter().enumerate() {
            if q.trim().is_empty() {
                return Err(AttributeError::EmptyAttributeQuestion(i));
            }
        }
        Ok(Self { questions })
    }

    pub fn len(&self) -> usize {
        self.questions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.questions.is_empty()
    }
}
