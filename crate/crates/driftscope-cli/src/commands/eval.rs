//! `driftscope eval`: sweeps, influence validation, and mixture generation.

use super::{write_file, write_report, CommandError};
use crate::config::RunConfig;
use crate::report::ExplanationReport;
use driftscope_core::dataset::to_csv;
use driftscope_core::eval::{
    faithfulness_sweep, gen_circle_mixture_pair, gen_sweep_corpus, tradeoff_sweep,
    validate_influence, MixturePairSpec, Selection,
};
use std::path::Path;

pub fn run_faithfulness(
    config: &RunConfig,
    out_dir: &Path,
) -> Result<ExplanationReport, CommandError> {
    config.validate_common()?;
    let m = config.eval_m.max(6);
    let corpus = gen_sweep_corpus(config.eval_n, m, config.seed);
    let k_values: Vec<usize> = if config.eval_k_values.is_empty() {
        (1..=m).collect()
    } else {
        config.eval_k_values.clone()
    };
    let seeds: Vec<u64> = (0..config.eval_seeds as u64).collect();
    let scored = faithfulness_sweep(
        &corpus,
        &k_values,
        Selection::Scored,
        &seeds,
        config.eval_n_trials,
    )?;
    let random = faithfulness_sweep(
        &corpus,
        &k_values,
        Selection::Random,
        &seeds,
        config.eval_n_trials,
    )?;
    let mut merged = scored;
    merged.records.extend(random.records);
    write_file(out_dir, "faithfulness_sweep.csv", &merged.to_csv())?;

    let mut report = ExplanationReport::new("eval faithfulness", config);
    report.eval = Some(serde_json::json!({
        "kind": "faithfulness",
        "k_values": k_values,
        "records": merged.records.len(),
        "file": "faithfulness_sweep.csv",
    }));
    write_report(out_dir, &report)?;
    Ok(report)
}

pub fn run_tradeoff(config: &RunConfig, out_dir: &Path) -> Result<ExplanationReport, CommandError> {
    config.validate_common()?;
    let m = config.eval_m.max(8);
    let corpus = gen_sweep_corpus(config.eval_n, m, config.seed);
    let k_set: Vec<usize> = if config.eval_k_values.is_empty() {
        vec![3, 4, 5]
    } else {
        config.eval_k_values.clone()
    };
    let result = tradeoff_sweep(
        &corpus,
        config.eval_n_samples,
        (1e-2, 10.0),
        &k_set,
        config.delta_percentile,
        config.seed,
    )?;
    write_file(out_dir, "tradeoff_sweep.csv", &result.to_csv())?;

    let mut report = ExplanationReport::new("eval tradeoff", config);
    report.eval = Some(serde_json::json!({
        "kind": "tradeoff",
        "n_samples": config.eval_n_samples,
        "k_set": k_set,
        "records": result.records.len(),
        "file": "tradeoff_sweep.csv",
    }));
    write_report(out_dir, &report)?;
    Ok(report)
}

pub fn run_validate_influence(
    config: &RunConfig,
    out_dir: &Path,
) -> Result<ExplanationReport, CommandError> {
    config.validate_common()?;
    if config.eval_n < 20 {
        return Err(CommandError::Validation(
            "eval_n must be at least 20 for the influence validation".into(),
        ));
    }
    let result = validate_influence(config.eval_n, config.eval_m, config.l2, config.seed)?;
    let mut doc = serde_json::to_string_pretty(&result.to_json()).expect("serializes");
    doc.push('\n');
    write_file(out_dir, "influence_validation.json", &doc)?;

    let mut report = ExplanationReport::new("eval validate-influence", config);
    report.eval = Some(result.to_json());
    write_report(out_dir, &report)?;
    Ok(report)
}

pub fn run_gen_mixture(
    config: &RunConfig,
    out_dir: &Path,
) -> Result<ExplanationReport, CommandError> {
    config.validate_common()?;
    let spec_x = MixturePairSpec::case1_x(config.seed);
    let spec_y = match config.mixture_case {
        1 => MixturePairSpec::case1_y(driftscope_core::substream_seed(config.seed, 1)),
        2 => MixturePairSpec::case2_y(driftscope_core::substream_seed(config.seed, 1)),
        other => {
            return Err(CommandError::Validation(format!(
                "mixture_case {other} is not 1 or 2"
            )))
        }
    };
    let (x, y, truth) = gen_circle_mixture_pair(&spec_x, &spec_y)?;
    write_file(out_dir, "mixture_x.csv", &to_csv(&x, None))?;
    write_file(out_dir, "mixture_y.csv", &to_csv(&y, None))?;
    let mut truth_doc = serde_json::to_string_pretty(&truth.to_json()).expect("serializes");
    truth_doc.push('\n');
    write_file(out_dir, "groundtruth.json", &truth_doc)?;

    let mut report = ExplanationReport::new("eval gen-mixture", config);
    report.eval = Some(serde_json::json!({
        "kind": "gen-mixture",
        "case": config.mixture_case,
        "rows_x": x.n_rows(),
        "rows_y": y.n_rows(),
        "files": ["mixture_x.csv", "mixture_y.csv", "groundtruth.json"],
    }));
    write_report(out_dir, &report)?;
    Ok(report)
}
