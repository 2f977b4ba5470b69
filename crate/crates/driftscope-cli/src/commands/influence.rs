//! `driftscope influence`: binarize, build near-optimal ensembles, run the
//! influential-example selection, and emit the report plus summary tables.

use super::{write_file, write_report, CommandError};
use crate::config::RunConfig;
use crate::report::ExplanationReport;
use driftscope_core::dataset::{binarize, load_csv, TabularDataset};
use driftscope_core::influence::{
    concat_datasets, top_k_influential, RashomonDatasetProvider, TopKOptions,
};
use driftscope_core::rashomon::{build_ensemble, EnsembleParams};
use std::fmt::Write as _;
use std::path::Path;

pub fn run(config: &RunConfig, out_dir: &Path) -> Result<ExplanationReport, CommandError> {
    config.validate_common()?;
    let label = config.label_column.as_deref().ok_or_else(|| {
        CommandError::Validation("influence requires label_column (the task labels)".into())
    })?;
    let d = load_csv(&config.d_file()?, Some(label))?;
    let dp = load_csv(&config.d_prime_file()?, Some(label))?;
    if d.columns() != dp.columns() {
        return Err(CommandError::Validation(format!(
            "datasets disagree on columns: [{}] vs [{}]",
            d.columns().join(", "),
            dp.columns().join(", ")
        )));
    }
    if config.top_k == 0 || config.top_k > dp.n_rows() {
        return Err(CommandError::Validation(format!(
            "top_k = {} is out of range for {} with {} rows",
            config.top_k,
            config.d_prime_name,
            dp.n_rows()
        )));
    }

    // Shared threshold scheme over both datasets, shared interventional
    // background from D.
    let both = concat_datasets(&d, &dp)?;
    let provider = RashomonDatasetProvider::fit(
        &both,
        config.max_thresholds_per_column,
        EnsembleParams {
            bootstraps: config.bootstraps,
            epsilon: config.epsilon,
            depth: config.tree_depth,
            lambda: config.lambda,
            candidates_per_bootstrap: config.candidates_per_bootstrap,
            feature_subsample: config.feature_subsample,
            seed: config.seed,
        },
        config.background_cap,
    )?
    .with_shared_background(&d, config.seed)?;

    // The fitted near-optimal ensembles as standalone documents; the seeds
    // match the provider's internal builds, so these are the same trees.
    for (data, seed_tag, name) in [
        (&d, 1u64, "ensemble_d.json"),
        (&dp, 2, "ensemble_d_prime.json"),
    ] {
        let bin = binarize(&provider.scheme, data)?;
        let ensemble = build_ensemble(
            &bin,
            &EnsembleParams {
                bootstraps: config.bootstraps,
                epsilon: config.epsilon,
                depth: config.tree_depth,
                lambda: config.lambda,
                candidates_per_bootstrap: config.candidates_per_bootstrap,
                feature_subsample: config.feature_subsample,
                seed: driftscope_core::substream_seed(config.seed, seed_tag),
            },
        )?;
        let mut doc = serde_json::to_string_pretty(&ensemble.to_json()).expect("serializes");
        doc.push('\n');
        write_file(out_dir, name, &doc)?;
    }

    let opts = TopKOptions {
        k: config.top_k,
        l2: config.l2,
        tol: config.tol,
        max_iter: config.max_iter,
        class_weighted: config.class_weighted,
        seed: config.seed,
    };
    let influence_report = top_k_influential(&d, &dp, &provider, &opts)?;

    write_file(out_dir, "influence.csv", &influence_report.to_csv())?;
    let feature_names = provider.feature_names();
    for (name, values, dataset) in [
        (
            "gifim_d.csv",
            &influence_report.gifim_d,
            config.d_name.as_str(),
        ),
        (
            "gifim_d_prime.csv",
            &influence_report.gifim_dp,
            config.d_prime_name.as_str(),
        ),
        (
            "gifim_d_prime_minus_s.csv",
            &influence_report.gifim_dp_minus_s,
            "d_prime_minus_s",
        ),
    ] {
        let vector = driftscope_core::ImportanceVector {
            values: values.clone(),
            provenance: driftscope_core::rashomon::Provenance::Gifim {
                dataset: Some(dataset.to_string()),
            },
        };
        write_file(out_dir, name, &vector.to_csv(&feature_names))?;
    }
    let selected = dp.subset(&influence_report.selected_ids);
    let summary = summary_table(config, &d, &dp, &selected);
    write_file(out_dir, "summary_table.csv", &summary_csv(&summary))?;

    let mut report = ExplanationReport::new("influence", config);
    report.influence = Some(influence_report.to_json());
    report.summary_table = Some(summary);
    for (data, name) in [(&d, &config.d_name), (&dp, &config.d_prime_name)] {
        let sentinel = data.sentinel_prevalence(-8.0);
        if sentinel.iter().any(|c| *c > 0) {
            report.notes.push(format!(
                "sentinel value -8 appears in {name} (per-column counts {sentinel:?}); sentinels pass through statistics verbatim"
            ));
        }
    }
    write_report(out_dir, &report)?;
    Ok(report)
}

/// Per-feature mean ± standard error and class counts for D, D', and the
/// influential subset.
fn summary_table(
    config: &RunConfig,
    d: &TabularDataset,
    dp: &TabularDataset,
    selected: &TabularDataset,
) -> serde_json::Value {
    let row = |name: &str, data: &TabularDataset| {
        let features: Vec<serde_json::Value> = (0..data.n_features())
            .map(|j| {
                let values = data.column_values(j);
                let n = values.len() as f64;
                let mean = values.iter().sum::<f64>() / n;
                let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                // Standard error of the mean.
                let stderr = (var / n).sqrt();
                serde_json::json!({"mean": mean, "stderr": stderr})
            })
            .collect();
        let labels = data.labels().unwrap_or(&[]);
        let class1 = labels.iter().filter(|&&y| y == 1.0).count();
        serde_json::json!({
            "dataset": name,
            "features": features,
            "class0": labels.len() - class1,
            "class1": class1,
        })
    };
    serde_json::json!({
        "features": d.columns(),
        "rows": [
            row(&config.d_name, d),
            row(&config.d_prime_name, dp),
            row("influential_examples", selected),
        ],
    })
}

fn summary_csv(summary: &serde_json::Value) -> String {
    let features = summary["features"].as_array().cloned().unwrap_or_default();
    let mut out = String::from("dataset");
    for f in &features {
        let name = f.as_str().unwrap_or("?");
        let _ = write!(out, ",{name}_mean,{name}_stderr");
    }
    out.push_str(",class0_count,class1_count\n");
    for row in summary["rows"].as_array().cloned().unwrap_or_default() {
        let _ = write!(out, "{}", row["dataset"].as_str().unwrap_or("?"));
        for cell in row["features"].as_array().cloned().unwrap_or_default() {
            let _ = write!(
                out,
                ",{},{}",
                cell["mean"].as_f64().unwrap_or(f64::NAN),
                cell["stderr"].as_f64().unwrap_or(f64::NAN)
            );
        }
        let _ = writeln!(
            out,
            ",{},{}",
            row["class0"].as_u64().unwrap_or(0),
            row["class1"].as_u64().unwrap_or(0)
        );
    }
    out
}
