//! Report document: one machine-readable JSON value per run plus a Markdown
//! narrative rendered from that JSON and nothing else.

use crate::config::RunConfig;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

pub const TOOL_NAME: &str = "driftscope";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

/// The report.json document. Sections are filled per subcommand; absent
/// sections serialize as null so the schema stays stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationReport {
    pub tool: ToolInfo,
    pub command: String,
    /// Fully resolved configuration, defaults applied; rerunning with this
    /// object reproduces the report.
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prototypes: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub neighbourhood: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partial_prototypes: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub influence: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary_table: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attribute_tables: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub separability: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eval: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub embedding: Option<serde_json::Value>,
    /// Free-form notes (sentinel prevalence, coverage warnings, embedding
    /// method caveats). Strings only; all numbers live in the sections.
    pub notes: Vec<String>,
}

impl ExplanationReport {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            tool: ToolInfo {
                name: TOOL_NAME.to_string(),
                version: TOOL_VERSION.to_string(),
            },
            command: command.to_string(),
            config: config.clone(),
            prototypes: None,
            neighbourhood: None,
            partial_prototypes: None,
            influence: None,
            summary_table: None,
            attribute_tables: None,
            separability: None,
            eval: None,
            embedding: None,
            notes: Vec::new(),
        }
    }

    pub fn to_json_string(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }
}

fn fmt3(v: f64) -> String {
    format!("{v:.3}")
}

/// Renders the Markdown narrative. Everything shown here is read back out
/// of the JSON report; no independent computation happens.
pub fn render_markdown(report: &ExplanationReport) -> String {
    let mut md = String::new();
    let _ = writeln!(
        md,
        "# {} {} report: {}\n",
        report.tool.name, report.tool.version, report.command
    );
    let config = &report.config;
    let _ = writeln!(md, "- seed: {}", config.seed);

    if let Some(neigh) = &report.neighbourhood {
        let _ = writeln!(md, "\n## Prototype comparison\n");
        let _ = writeln!(
            md,
            "| prototype | share of {} | share of {} | NSPD | NSDD |",
            config.d_name, config.d_prime_name
        );
        let _ = writeln!(md, "|---|---|---|---|---|");
        let rows = neigh["per_prototype"]
            .as_array()
            .cloned()
            .unwrap_or_default();
        for row in &rows {
            let nsdd = row["nsdd"]
                .as_f64()
                .map_or("not comparable".to_string(), fmt3);
            let _ = writeln!(
                md,
                "| {} | {} | {} | {} | {} |",
                row["prototype_id"],
                fmt3(row["proportion_d"].as_f64().unwrap_or(f64::NAN)),
                fmt3(row["proportion_dp"].as_f64().unwrap_or(f64::NAN)),
                fmt3(row["nspd"].as_f64().unwrap_or(f64::NAN)),
                nsdd,
            );
        }
        // Narrative for the most divergent prototype.
        if let Some(extreme) = rows.iter().max_by(|a, b| {
            let av = a["nspd"].as_f64().unwrap_or(0.0).abs();
            let bv = b["nspd"].as_f64().unwrap_or(0.0).abs();
            av.partial_cmp(&bv).unwrap()
        }) {
            let nspd = extreme["nspd"].as_f64().unwrap_or(0.0);
            let comparison = if nspd > 0.0 { "fewer" } else { "more" };
            let _ = writeln!(
                md,
                "\nCompared to {}, {} contains {} samples whose nearest prototype is \
                 prototype {} (NSPD {}).",
                config.d_name,
                config.d_prime_name,
                comparison,
                extreme["prototype_id"],
                fmt3(nspd),
            );
        }
    }

    if let Some(partials) = &report.partial_prototypes {
        let _ = writeln!(md, "\n## Partial prototypes\n");
        for p in partials.as_array().cloned().unwrap_or_default() {
            let indices: Vec<String> = p["selected"]
                .as_array()
                .cloned()
                .unwrap_or_default()
                .iter()
                .map(|s| s["index"].to_string())
                .collect();
            let _ = writeln!(
                md,
                "- prototype {} keeps features [{}]",
                p["prototype_id"],
                indices.join(", ")
            );
        }
    }

    if let Some(influence) = &report.influence {
        let _ = writeln!(md, "\n## Influential examples\n");
        let _ = writeln!(
            md,
            "- discriminator accuracy: {}",
            fmt3(
                influence["discriminator_accuracy"]
                    .as_f64()
                    .unwrap_or(f64::NAN)
            )
        );
        let _ = writeln!(
            md,
            "- alignment after removing {} rows of {}: {}",
            influence["selected_ids"].as_array().map_or(0, Vec::len),
            config.d_prime_name,
            fmt3(influence["alignment"].as_f64().unwrap_or(f64::NAN))
        );
        let _ = writeln!(
            md,
            "- importance gap: {} before, {} after",
            fmt3(influence["gap_before"].as_f64().unwrap_or(f64::NAN)),
            fmt3(influence["gap_after"].as_f64().unwrap_or(f64::NAN))
        );
    }

    if let Some(summary) = &report.summary_table {
        let _ = writeln!(md, "\n## Dataset summary\n");
        let features = summary["features"].as_array().cloned().unwrap_or_default();
        let mut header = String::from("| dataset |");
        for f in &features {
            let _ = write!(header, " {} mean ± se |", f.as_str().unwrap_or("?"));
        }
        header.push_str(" class 0 | class 1 |");
        let _ = writeln!(md, "{header}");
        let _ = writeln!(md, "|{}", "---|".repeat(features.len() + 3));
        for row in summary["rows"].as_array().cloned().unwrap_or_default() {
            let mut line = format!("| {} |", row["dataset"].as_str().unwrap_or("?"));
            for cell in row["features"].as_array().cloned().unwrap_or_default() {
                let _ = write!(
                    line,
                    " {} ± {} |",
                    fmt3(cell["mean"].as_f64().unwrap_or(f64::NAN)),
                    fmt3(cell["stderr"].as_f64().unwrap_or(f64::NAN))
                );
            }
            let _ = write!(
                line,
                " {} | {} |",
                row["class0"].as_u64().unwrap_or(0),
                row["class1"].as_u64().unwrap_or(0)
            );
            let _ = writeln!(md, "{line}");
        }
    }

    if let Some(tables) = &report.attribute_tables {
        let _ = writeln!(md, "\n## Attribute percentages\n");
        let arr = tables.as_array().cloned().unwrap_or_default();
        if let Some(first) = arr.first() {
            let mut header = String::from("| corpus |");
            for attr in first["attributes"].as_array().cloned().unwrap_or_default() {
                let _ = write!(header, " {} |", attr.as_str().unwrap_or("?"));
            }
            let _ = writeln!(md, "{header}");
            let n = first["attributes"].as_array().map_or(0, Vec::len);
            let _ = writeln!(md, "|{}", "---|".repeat(n + 1));
            for table in &arr {
                let mut line = format!("| {} |", table["corpus"].as_str().unwrap_or("?"));
                for pct in table["yes_percentages"]
                    .as_array()
                    .cloned()
                    .unwrap_or_default()
                {
                    let _ = write!(line, " {}% |", fmt3(pct.as_f64().unwrap_or(f64::NAN)));
                }
                let _ = writeln!(md, "{line}");
            }
        }
    }

    if let Some(sep) = &report.separability {
        let _ = writeln!(
            md,
            "\nA logistic model told the corpora apart with held-out accuracy {}.",
            fmt3(sep["accuracy"].as_f64().unwrap_or(f64::NAN))
        );
    }

    if let Some(eval) = &report.eval {
        let _ = writeln!(md, "\n## Evaluation\n");
        let _ = writeln!(
            md,
            "```json\n{}\n```",
            serde_json::to_string_pretty(eval).unwrap()
        );
    }

    if !report.notes.is_empty() {
        let _ = writeln!(md, "\n## Notes\n");
        for note in &report.notes {
            let _ = writeln!(md, "- {note}");
        }
    }
    md
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_serialization_is_stable() {
        let report = ExplanationReport::new("prototypes", &RunConfig::default());
        assert_eq!(report.to_json_string(), report.to_json_string());
        let back: ExplanationReport = serde_json::from_str(&report.to_json_string()).unwrap();
        assert_eq!(report, back);
    }

    /// Every number printed in the Markdown must also appear in the JSON
    /// document (same value, up to the 3-decimal display rounding).
    #[test]
    fn markdown_numbers_come_from_the_json() {
        let mut report = ExplanationReport::new("prototypes", &RunConfig::default());
        report.neighbourhood = Some(serde_json::json!({
            "per_prototype": [
                {"prototype_id": 0, "proportion_d": 0.625, "proportion_dp": 0.25, "nspd": 0.375, "nsdd": 0.5},
            ]
        }));
        let md = render_markdown(&report);
        let number_pattern = regex_lite_numbers(&md);
        for num in number_pattern {
            // Display rounds to 3 decimals; the JSON must contain a value
            // that rounds to it. Non-numeric dotted tokens (the version
            // string) are skipped.
            let Ok(shown) = num.parse::<f64>() else {
                continue;
            };
            let found = json_numbers(&report)
                .iter()
                .any(|v| (v - shown).abs() < 5e-4 || format!("{v:.3}") == format!("{shown:.3}"));
            assert!(found, "markdown number {num} missing from JSON");
        }
    }

    fn regex_lite_numbers(text: &str) -> Vec<String> {
        let mut out = Vec::new();
        let mut current = String::new();
        for c in text.chars() {
            if c.is_ascii_digit() || c == '.' || c == '-' {
                current.push(c);
            } else {
                if current.contains('.') {
                    out.push(current.clone());
                }
                current.clear();
            }
        }
        out
    }

    fn json_numbers(report: &ExplanationReport) -> Vec<f64> {
        fn collect(v: &serde_json::Value, out: &mut Vec<f64>) {
            match v {
                serde_json::Value::Number(n) => {
                    if let Some(f) = n.as_f64() {
                        out.push(f);
                    }
                }
                serde_json::Value::Array(a) => a.iter().for_each(|v| collect(v, out)),
                serde_json::Value::Object(o) => o.values().for_each(|v| collect(v, out)),
                _ => {}
            }
        }
        let mut out = Vec::new();
        collect(&serde_json::to_value(report).unwrap(), &mut out);
        out
    }
}
