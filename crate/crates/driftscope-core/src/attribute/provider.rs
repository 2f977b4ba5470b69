//! Chat-completion providers: a real HTTP client and a deterministic mock.

use super::prompt::{render_answers, Answer};
use super::TextCorpus;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
#[error("{message}")]
pub struct ProviderError {
    pub message: String,
    /// Worth retrying (transport failure, timeout, 5xx).
    pub transient: bool,
    /// The provider asked us to back off (429).
    pub rate_limited: bool,
}

impl ProviderError {
    pub fn fatal(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            transient: false,
            rate_limited: false,
        }
    }

    pub fn transient(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            transient: true,
            rate_limited: false,
        }
    }
}

/// Recorded in the audit header so a run's sampling setup is reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderInfo {
    pub name: String,
    pub model: String,
    pub temperature: f64,
}

/// A request contract: prompt in, completion out.
pub trait LlmProvider: Sync {
    fn complete(&self, prompt: &str) -> Result<String, ProviderError>;
    fn info(&self) -> ProviderInfo;
}

/// JSON chat-completion HTTP client. The API key is read from an
/// environment variable at call time; temperature is pinned to the most
/// deterministic setting and recorded in the audit header.
pub struct HttpChatProvider {
    pub endpoint: String,
    pub model: String,
    pub api_key_env: String,
    pub timeout: std::time::Duration,
    pub temperature: f64,
}

impl HttpChatProvider {
    pub fn new(endpoint: &str, model: &str, api_key_env: &str) -> Self {
        Self {
            endpoint: endpoint.to_string(),
            model: model.to_string(),
            api_key_env: api_key_env.to_string(),
            timeout: std::time::Duration::from_secs(60),
            temperature: 0.0,
        }
    }
}

impl LlmProvider for HttpChatProvider {
    fn complete(&self, prompt: &str) -> Result<String, ProviderError> {
        let key = std::env::var(&self.api_key_env).map_err(|_| {
            ProviderError::fatal(format!(
                "API key environment variable {} is not set",
                self.api_key_env
            ))
        })?;
        let request = serde_json::json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
        });
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .build()
            .into();
        let mut response = agent
            .post(&self.endpoint)
            .header("Authorization", &format!("Bearer {key}"))
            .send_json(&request)
            .map_err(|e| match &e {
                ureq::Error::StatusCode(429) => ProviderError {
                    message: e.to_string(),
                    transient: true,
                    rate_limited: true,
                },
                ureq::Error::StatusCode(code) if *code >= 500 => {
                    ProviderError::transient(e.to_string())
                }
                ureq::Error::Timeout(_) | ureq::Error::Io(_) | ureq::Error::ConnectionFailed => {
                    ProviderError::transient(e.to_string())
                }
                _ => ProviderError::fatal(e.to_string()),
            })?;
        let value: serde_json::Value = response
            .body_mut()
            .read_json()
            .map_err(|e| ProviderError::fatal(format!("malformed response body: {e}")))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| {
                ProviderError::fatal(format!("response carries no completion text: {value}"))
            })
    }

    fn info(&self) -> ProviderInfo {
        ProviderInfo {
            name: "http".to_string(),
            model: self.model.clone(),
            temperature: self.temperature,
        }
    }
}

#[derive(Debug, Clone)]
enum MockBehavior {
    /// Look the document up in the fixture and render its answer list.
    Fixture(BTreeMap<String, Vec<Answer>>),
    /// Return the document portion of the prompt unchanged (rewrite mock).
    Echo,
}

/// Deterministic provider driven by a fixture table: a pure function of
/// (prompt, fixture). Documents are recognized as the text after the
/// prompt's final blank line, matching how the prompts are built.
pub struct MockProvider {
    by_text: BTreeMap<String, String>,
    behavior: MockBehavior,
    /// Fail this many times before the first success (retry testing).
    failures_before_success: std::sync::atomic::AtomicUsize,
}

impl MockProvider {
    /// Fixture mock: `fixture` maps document ids to answer lists. Documents
    /// are resolved to texts through the corpus.
    pub fn from_fixture(corpus: &TextCorpus, fixture: &BTreeMap<String, Vec<Answer>>) -> Self {
        let by_text = corpus
            .documents
            .iter()
            .map(|d| (d.text.clone(), d.id.clone()))
            .collect();
        Self {
            by_text,
            behavior: MockBehavior::Fixture(fixture.clone()),
            failures_before_success: std::sync::atomic::AtomicUsize::new(0),
        }
    }

    /// Echo mock: completes any prompt with its document portion.
    pub fn echo() -> Self {
        Self {
            by_text: BTreeMap::new(),
            behavior: MockBehavior::Echo,
            failures_before_success: std::sync::atomic::AtomicUsize::new(0),
        }
    }

    /// Makes the next `n` calls fail with a transient error.
    pub fn failing_first(self, n: usize) -> Self {
        self.failures_before_success
            .store(n, std::sync::atomic::Ordering::SeqCst);
        self
    }

    fn document_of(prompt: &str) -> &str {
        match prompt.rfind("\n\n") {
            Some(pos) => &prompt[pos + 2..],
            None => prompt,
        }
    }

    /// Parses a fixture file: a JSON map from document id to an answer list
    /// like ["YES", "NO"].
    pub fn parse_fixture(json: &str) -> Result<BTreeMap<String, Vec<Answer>>, ProviderError> {
        let raw: BTreeMap<String, Vec<String>> = serde_json::from_str(json)
            .map_err(|e| ProviderError::fatal(format!("malformed fixture: {e}")))?;
        let mut out = BTreeMap::new();
        for (id, answers) in raw {
            let parsed = answers
                .iter()
                .map(|a| {
                    if a.eq_ignore_ascii_case("yes") {
                        Ok(Answer::Yes)
                    } else if a.eq_ignore_ascii_case("no") {
                        Ok(Answer::No)
                    } else if a.eq_ignore_ascii_case("unparsed") || a == "N/A" {
                        Ok(Answer::Unparsed)
                    } else {
                        Err(ProviderError::fatal(format!(
                            "fixture answer \"{a}\" for \"{id}\" is not YES/NO/unparsed"
                        )))
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            out.insert(id, parsed);
        }
        Ok(out)
    }
}

impl LlmProvider for MockProvider {
    fn complete(&self, prompt: &str) -> Result<String, ProviderError> {
        use std::sync::atomic::Ordering;
        let remaining = self.failures_before_success.load(Ordering::SeqCst);
        if remaining > 0 {
            self.failures_before_success
                .store(remaining - 1, Ordering::SeqCst);
            return Err(ProviderError::transient("injected transient failure"));
        }
        let document = Self::document_of(prompt);
        match &self.behavior {
            MockBehavior::Echo => Ok(document.to_string()),
            MockBehavior::Fixture(fixture) => {
                let id = self.by_text.get(document).ok_or_else(|| {
                    ProviderError::fatal("prompt document not present in the mock corpus")
                })?;
                let answers = fixture.get(id).ok_or_else(|| {
                    ProviderError::fatal(format!("no fixture entry for document \"{id}\""))
                })?;
                Ok(render_answers(answers))
            }
        }
    }

    fn info(&self) -> ProviderInfo {
        ProviderInfo {
            name: "mock".to_string(),
            model: match self.behavior {
                MockBehavior::Echo => "echo".to_string(),
                MockBehavior::Fixture(_) => "fixture".to_string(),
            },
            temperature: 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attribute::prompt::build_attribute_prompt;
    use crate::attribute::{AttributeSet, Document};

    fn corpus() -> TextCorpus {
        TextCorpus::new(
            "c",
            vec![
                Document {
                    id: "a".into(),
                    text: "alpha doc".into(),
                },
                Document {
                    id: "b".into(),
                    text: "beta doc".into(),
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn fixture_mock_is_pure_and_keyed_by_document() {
        let mut fixture = BTreeMap::new();
        fixture.insert("a".to_string(), vec![Answer::Yes, Answer::No]);
        fixture.insert("b".to_string(), vec![Answer::No, Answer::No]);
        let mock = MockProvider::from_fixture(&corpus(), &fixture);
        let attrs = AttributeSet::new(vec!["q1".into(), "q2".into()]).unwrap();
        let prompt = build_attribute_prompt(&attrs, "alpha doc").unwrap();
        let once = mock.complete(&prompt).unwrap();
        let twice = mock.complete(&prompt).unwrap();
        assert_eq!(once, twice);
        assert_eq!(once, "1. YES\n2. NO\n");
    }

    #[test]
    fn unknown_document_is_a_fatal_error() {
        let mock = MockProvider::from_fixture(&corpus(), &BTreeMap::new());
        let err = mock.complete("whatever\n\nunknown doc").unwrap_err();
        assert!(!err.transient);
    }

    #[test]
    fn echo_mock_returns_document_portion() {
        let mock = MockProvider::echo();
        let prompt = "Make this nicer.\n\nthe document body";
        assert_eq!(mock.complete(prompt).unwrap(), "the document body");
    }

    #[test]
    fn injected_failures_are_transient_then_recover() {
        let mock = MockProvider::echo().failing_first(2);
        assert!(mock.complete("p\n\nd").unwrap_err().transient);
        assert!(mock.complete("p\n\nd").unwrap_err().transient);
        assert_eq!(mock.complete("p\n\nd").unwrap(), "d");
    }

    #[test]
    fn fixture_parsing_accepts_case_insensitive_answers() {
        let json = r#"{"a": ["yes", "NO"], "b": ["unparsed"]}"#;
        let fixture = MockProvider::parse_fixture(json).unwrap();
        assert_eq!(fixture["a"], vec![Answer::Yes, Answer::No]);
        assert_eq!(fixture["b"], vec![Answer::Unparsed]);
        assert!(MockProvider::parse_fixture(r#"{"a": ["bogus"]}"#).is_err());
    }
}
