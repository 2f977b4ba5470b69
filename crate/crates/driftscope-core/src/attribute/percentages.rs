//! Per-corpus attribute aggregation and the separability classifier.

use super::prompt::{build_attribute_prompt, parse_answers, Answer};
use super::provider::{LlmProvider, ProviderInfo};
use super::{AttributeError, AttributeSet, TextCorpus};
use crate::influence::{fit_logistic, InfluenceError};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Retry policy for provider calls. Transient failures retry up to
/// `max_retries` with exponential backoff from `base_delay_ms` (rate-limit
/// responses back off twice as hard).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_retries: usize,
    pub base_delay_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 3,
            base_delay_ms: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentAnswers {
    pub id: String,
    pub answers: Vec<Answer>,
}

/// Raw completion kept for audit and replay.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub doc_id: String,
    pub completion: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeTable {
    pub corpus: String,
    pub attributes: Vec<String>,
    pub yes_counts: Vec<usize>,
    pub no_counts: Vec<usize>,
    pub unparsed_counts: Vec<usize>,
    /// yes / (yes + no) · 100 per attribute; unparsed slots are excluded
    /// from the denominator. NaN-free: attributes with nothing parsed
    /// report 0 and show up in `unparsed_counts`.
    pub yes_percentages: Vec<f64>,
    pub per_document: Vec<DocumentAnswers>,
    /// Documents the provider failed on after retries.
    pub failed_documents: Vec<String>,
    pub retry_attempts: usize,
    pub provider: ProviderInfo,
    pub audit: Vec<AuditRecord>,
}

impl AttributeTable {
    pub fn n_documents_answered(&self) -> usize {
        self.per_document.len()
    }

    /// Shares of yes/no/unparsed over all answered documents; the three sum
    /// to 100% per attribute.
    pub fn answer_shares(&self, attribute: usize) -> (f64, f64, f64) {
        let total = (self.yes_counts[attribute]
            + self.no_counts[attribute]
            + self.unparsed_counts[attribute]) as f64;
        if total == 0.0 {
            return (0.0, 0.0, 0.0);
        }
        (
            self.yes_counts[attribute] as f64 / total * 100.0,
            self.no_counts[attribute] as f64 / total * 100.0,
            self.unparsed_counts[attribute] as f64 / total * 100.0,
        )
    }

    /// Audit log as JSON lines; the first line is a header recording the
    /// provider settings.
    pub fn audit_jsonl(&self) -> String {
        let mut out = serde_json::json!({"header": {
            "corpus": self.corpus,
            "provider": self.provider,
            "attributes": self.attributes,
        }})
        .to_string();
        out.push('\n');
        for record in &self.audit {
            out.push_str(&serde_json::to_string(record).expect("record serializes"));
            out.push('\n');
        }
        out
    }
}

fn tabulate(
    corpus_name: &str,
    attributes: &AttributeSet,
    answered: Vec<(String, String)>,
    failed: Vec<String>,
    retry_attempts: usize,
    provider_info: ProviderInfo,
) -> AttributeTable {
    let n_attrs = attributes.len();
    let mut yes_counts = vec![0usize; n_attrs];
    let mut no_counts = vec![0usize; n_attrs];
    let mut unparsed_counts = vec![0usize; n_attrs];
    let mut per_document = Vec::with_capacity(answered.len());
    let mut audit = Vec::with_capacity(answered.len());
    for (id, completion) in answered {
        let answers = parse_answers(&completion, n_attrs);
        for (k, a) in answers.iter().enumerate() {
            match a {
                Answer::Yes => yes_counts[k] += 1,
                Answer::No => no_counts[k] += 1,
                Answer::Unparsed => unparsed_counts[k] += 1,
            }
        }
        per_document.push(DocumentAnswers {
            id: id.clone(),
            answers,
        });
        audit.push(AuditRecord {
            doc_id: id,
            completion,
        });
    }
    let yes_percentages = (0..n_attrs)
        .map(|k| {
            let answered = yes_counts[k] + no_counts[k];
            if answered == 0 {
                0.0
            } else {
                yes_counts[k] as f64 / answered as f64 * 100.0
            }
        })
        .collect();
    AttributeTable {
        corpus: corpus_name.to_string(),
        attributes: attributes.questions.clone(),
        yes_counts,
        no_counts,
        unparsed_counts,
        yes_percentages,
        per_document,
        failed_documents: failed,
        retry_attempts,
        provider: provider_info,
        audit,
    }
}

/// Queries the provider once per document and aggregates per-attribute YES
/// percentages. Transient failures retry per the policy; documents that
/// still fail are recorded and excluded, and the call errors only when
/// every document failed.
pub fn attribute_percentages(
    corpus: &TextCorpus,
    attributes: &AttributeSet,
    provider: &dyn LlmProvider,
    retry: &RetryPolicy,
) -> Result<AttributeTable, AttributeError> {
    if attributes.is_empty() {
        return Err(AttributeError::EmptyAttributeSet);
    }
    let mut answered = Vec::with_capacity(corpus.len());
    let mut failed = Vec::new();
    let mut retry_attempts = 0usize;
    let mut last_error = String::new();
    for doc in &corpus.documents {
        let prompt = build_attribute_prompt(attributes, &doc.text)?;
        let mut attempt = 0usize;
        let outcome = loop {
            match provider.complete(&prompt) {
                Ok(completion) => break Some(completion),
                Err(e) => {
                    last_error = e.message.clone();
                    if !e.transient || attempt >= retry.max_retries {
                        break None;
                    }
                    attempt += 1;
                    retry_attempts += 1;
                    if retry.base_delay_ms > 0 {
                        let factor = if e.rate_limited { 2u64 } else { 1 };
                        let delay = retry.base_delay_ms * factor * (1 << (attempt - 1).min(6));
                        std::thread::sleep(std::time::Duration::from_millis(delay));
                    }
                }
            }
        };
        match outcome {
            Some(completion) => answered.push((doc.id.clone(), completion)),
            None => failed.push(doc.id.clone()),
        }
    }
    if answered.is_empty() {
        return Err(AttributeError::ProviderFailure {
            failed: failed.len(),
            last: last_error,
        });
    }
    Ok(tabulate(
        &corpus.name,
        attributes,
        answered,
        failed,
        retry_attempts,
        provider.info(),
    ))
}

/// Rebuilds an attribute table from persisted raw completions. Replaying an
/// audit log yields the table that produced it.
pub fn replay_audit(
    corpus_name: &str,
    attributes: &AttributeSet,
    records: &[AuditRecord],
    provider_info: ProviderInfo,
) -> AttributeTable {
    let answered = records
        .iter()
        .map(|r| (r.doc_id.clone(), r.completion.clone()))
        .collect();
    tabulate(
        corpus_name,
        attributes,
        answered,
        Vec::new(),
        0,
        provider_info,
    )
}

/// Table-4-style CSV: one row per corpus, one column per attribute.
pub fn tables_to_csv(tables: &[&AttributeTable]) -> String {
    let mut out = String::from("corpus");
    if let Some(first) = tables.first() {
        for attr in &first.attributes {
            let _ = write!(out, ",{}", attr.replace(',', ";"));
        }
    }
    out.push('\n');
    for table in tables {
        let _ = write!(out, "{}", table.corpus);
        for pct in &table.yes_percentages {
            let _ = write!(out, ",{pct:.1}%");
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityReport {
    pub accuracy: f64,
    pub n_train: usize,
    pub n_test: usize,
    /// Unparsed answer slots imputed as "no" for the classifier.
    pub imputed_unparsed: usize,
    pub seed: u64,
}

fn answers_to_features(docs: &[Vec<Answer>], imputed: &mut usize) -> Vec<Vec<f64>> {
    docs.iter()
        .map(|answers| {
            answers
                .iter()
                .map(|a| match a {
                    Answer::Yes => 1.0,
                    Answer::No => 0.0,
                    Answer::Unparsed => {
                        *imputed += 1;
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// Held-out accuracy of the shared logistic model at telling the corpora
/// apart from their attribute vectors, on a seeded 80/20 split.
pub fn separability_score(
    docs_a: &[Vec<Answer>],
    docs_b: &[Vec<Answer>],
    seed: u64,
) -> Result<SeparabilityReport, AttributeError> {
    if docs_a.is_empty() || docs_b.is_empty() {
        return Err(AttributeError::SingleClass);
    }
    let mut imputed = 0usize;
    let mut features = answers_to_features(docs_a, &mut imputed);
    features.extend(answers_to_features(docs_b, &mut imputed));
    let mut labels = vec![1.0; docs_a.len()];
    labels.extend(vec![0.0; docs_b.len()]);

    let n = features.len();
    let mut order: Vec<usize> = (0..n).collect();
    use rand::seq::SliceRandom;
    order.shuffle(&mut crate::substream(seed, 0x73_706c_6974));
    let n_test = (n / 5).max(1);
    let (test_idx, train_idx) = order.split_at(n_test);

    let train_x: Vec<Vec<f64>> = train_idx.iter().map(|&i| features[i].clone()).collect();
    let train_y: Vec<f64> = train_idx.iter().map(|&i| labels[i]).collect();
    let test_x: Vec<Vec<f64>> = test_idx.iter().map(|&i| features[i].clone()).collect();
    let test_y: Vec<f64> = test_idx.iter().map(|&i| labels[i]).collect();

    let model = fit_logistic(&train_x, &train_y, 1e-2, 1e-8, 200).map_err(|e| match e {
        InfluenceError::SingleClass => AttributeError::SingleClass,
        other => AttributeError::ProviderFailure {
            failed: 0,
            last: other.to_string(),
        },
    })?;
    Ok(SeparabilityReport {
        accuracy: model.accuracy(&test_x, &test_y),
        n_train: train_x.len(),
        n_test: test_x.len(),
        imputed_unparsed: imputed,
        seed,
    })
}
