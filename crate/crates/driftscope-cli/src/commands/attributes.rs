//! `driftscope attributes`: per-corpus attribute percentages, separability,
//! and the optional humanize rewrite pass.

use super::{write_file, write_report, CommandError};
use crate::config::RunConfig;
use crate::report::ExplanationReport;
use driftscope_core::attribute::{
    attribute_percentages, build_humanize_prompt, separability_score, tables_to_csv, AttributeSet,
    AttributeTable, Document, HttpChatProvider, LlmProvider, MockProvider, RetryPolicy, TextCorpus,
};
use std::path::Path;

fn load_corpus(name: &str, path: &Path) -> Result<TextCorpus, CommandError> {
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let corpus = if is_csv {
        TextCorpus::from_csv_path(name, path)?
    } else {
        TextCorpus::from_text_path(name, path)?
    };
    Ok(corpus)
}

fn make_provider(
    config: &RunConfig,
    corpus: &TextCorpus,
    fixture_path: Option<&String>,
) -> Result<Box<dyn LlmProvider>, CommandError> {
    match config.provider.as_str() {
        "http" => Ok(Box::new(HttpChatProvider::new(
            &config.endpoint,
            &config.model,
            &config.api_key_env,
        ))),
        "mock" => {
            let Some(path) = fixture_path else {
                return Err(CommandError::Validation(
                    "provider = mock requires mock_fixture_path (and mock_fixture_d_prime_path)"
                        .into(),
                ));
            };
            let text = std::fs::read_to_string(path).map_err(|e| {
                CommandError::Validation(format!("cannot read fixture {path}: {e}"))
            })?;
            let fixture = MockProvider::parse_fixture(&text)
                .map_err(|e| CommandError::Validation(format!("fixture {path}: {e}")))?;
            Ok(Box::new(MockProvider::from_fixture(corpus, &fixture)))
        }
        "mock-echo" => Ok(Box::new(MockProvider::echo())),
        other => Err(CommandError::Validation(format!(
            "provider \"{other}\" is not one of mock | mock-echo | http"
        ))),
    }
}

pub fn run(config: &RunConfig, out_dir: &Path) -> Result<ExplanationReport, CommandError> {
    config.validate_common()?;
    let attributes = AttributeSet::new(config.attributes.clone())
        .map_err(|e| CommandError::Validation(e.to_string()))?;
    let mut corpus_d = load_corpus(&config.d_name, &config.d_file()?)?;
    corpus_d.name = config.d_name.clone();
    let mut corpus_dp = load_corpus(&config.d_prime_name, &config.d_prime_file()?)?;
    corpus_dp.name = config.d_prime_name.clone();

    let retry = RetryPolicy {
        max_retries: config.max_retries,
        base_delay_ms: config.retry_base_delay_ms,
    };
    let provider_d = make_provider(config, &corpus_d, config.mock_fixture_path.as_ref())?;
    let provider_dp = make_provider(
        config,
        &corpus_dp,
        config
            .mock_fixture_d_prime_path
            .as_ref()
            .or(config.mock_fixture_path.as_ref()),
    )?;

    let table_d = attribute_percentages(&corpus_d, &attributes, provider_d.as_ref(), &retry)?;
    let table_dp = attribute_percentages(&corpus_dp, &attributes, provider_dp.as_ref(), &retry)?;
    write_file(out_dir, "audit_d.jsonl", &table_d.audit_jsonl())?;
    write_file(out_dir, "audit_d_prime.jsonl", &table_dp.audit_jsonl())?;

    let answers = |t: &AttributeTable| -> Vec<Vec<driftscope_core::attribute::Answer>> {
        t.per_document.iter().map(|d| d.answers.clone()).collect()
    };
    // Degrades to null when coverage is too thin for a two-class split.
    let mut separability_note = None;
    let separability =
        match separability_score(&answers(&table_d), &answers(&table_dp), config.seed) {
            Ok(s) => Some(s),
            Err(driftscope_core::attribute::AttributeError::SingleClass) => {
                separability_note = Some(
                    "separability skipped: not enough answered documents in both corpora"
                        .to_string(),
                );
                None
            }
            Err(e) => return Err(e.into()),
        };

    // Optional rewrite pass: a third corpus of humanized D' documents.
    let mut tables: Vec<AttributeTable> = vec![table_d, table_dp];
    let mut humanized_section = None;
    if config.humanize {
        let rewriter = make_provider(
            config,
            &corpus_dp,
            config
                .mock_fixture_d_prime_path
                .as_ref()
                .or(config.mock_fixture_path.as_ref()),
        )?;
        let mut rewritten = Vec::with_capacity(corpus_dp.len());
        for doc in &corpus_dp.documents {
            let prompt = build_humanize_prompt(&doc.text)?;
            let text = rewriter.complete(&prompt).map_err(|e| {
                CommandError::Provider(format!("humanize pass failed on \"{}\": {e}", doc.id))
            })?;
            rewritten.push(Document {
                id: doc.id.clone(),
                text,
            });
        }
        let corpus_h = TextCorpus::new(&format!("{}_humanized", config.d_prime_name), rewritten)?;
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(["id", "text"]).ok();
        for doc in &corpus_h.documents {
            writer
                .write_record([doc.id.as_str(), doc.text.as_str()])
                .ok();
        }
        let csv_bytes = writer.into_inner().unwrap_or_default();
        write_file(
            out_dir,
            "humanized_corpus.csv",
            &String::from_utf8_lossy(&csv_bytes),
        )?;
        let provider_h = make_provider(
            config,
            &corpus_h,
            config
                .mock_fixture_d_prime_path
                .as_ref()
                .or(config.mock_fixture_path.as_ref()),
        )?;
        let table_h = attribute_percentages(&corpus_h, &attributes, provider_h.as_ref(), &retry);
        match table_h {
            Ok(table) => {
                write_file(out_dir, "audit_humanized.jsonl", &table.audit_jsonl())?;
                let sep_h =
                    separability_score(&answers(&tables[0]), &answers(&table), config.seed).ok();
                humanized_section = Some(serde_json::json!({
                    "corpus": table.corpus,
                    "documents": corpus_h.len(),
                    "separability_after": sep_h,
                }));
                tables.push(table);
            }
            Err(driftscope_core::attribute::AttributeError::ProviderFailure { .. }) => {
                // The echo mock cannot answer attribute questions; record the
                // rewritten corpus without a third table.
                humanized_section = Some(serde_json::json!({
                    "corpus": corpus_h.name,
                    "documents": corpus_h.len(),
                }));
            }
            Err(e) => return Err(e.into()),
        }
    }

    let table_refs: Vec<&AttributeTable> = tables.iter().collect();
    write_file(out_dir, "attribute_table.csv", &tables_to_csv(&table_refs))?;

    let mut report = ExplanationReport::new("attributes", config);
    let mut failed_total = 0usize;
    let table_values: Vec<serde_json::Value> = tables
        .iter()
        .map(|t| {
            failed_total += t.failed_documents.len();
            serde_json::to_value(t).expect("table serializes")
        })
        .collect();
    report.attribute_tables = Some(serde_json::Value::Array(table_values));
    report.separability = separability
        .as_ref()
        .map(|s| serde_json::to_value(s).expect("serializes"));
    if let Some(note) = separability_note {
        report.notes.push(note);
    }
    if let Some(h) = humanized_section {
        report
            .notes
            .push("humanize pass produced a rewritten corpus".into());
        report.eval = Some(h);
    }
    if failed_total > 0 {
        report.notes.push(format!(
            "{failed_total} document(s) failed after retries; their ids are listed per table"
        ));
    }
    write_report(out_dir, &report)?;
    if failed_total > 0 {
        return Err(CommandError::Provider(format!(
            "{failed_total} document(s) failed after retries; partial tables were written to {}",
            out_dir.display()
        )));
    }
    Ok(report)
}
