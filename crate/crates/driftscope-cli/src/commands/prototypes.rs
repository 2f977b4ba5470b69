//! `driftscope prototypes`: normalize by D's statistics, build prototypes,
//! compare neighbourhoods, select partial prototypes, and export plot data.

use super::{write_file, write_report, CommandError};
use crate::config::RunConfig;
use crate::report::ExplanationReport;
use driftscope_core::dataset::{
    apply_normalizer, binarize, denormalize_vector, fit_binarizer, fit_normalizer, load_csv,
    normalize_vector,
};
use driftscope_core::influence::concat_datasets;
use driftscope_core::prototype::{
    kmeans_prototypes, neighbourhood_stats_opts, partial_prototypes, percentile_grid_prototypes,
    prototypes_to_json, DeltaSpec, NeighbourhoodOptions, PartialParams, Prototype,
};
use driftscope_core::rashomon::{
    background_sample, build_ensemble, EnsembleParams, RashomonPairProvider,
};
use std::fmt::Write as _;
use std::path::Path;

pub fn run(config: &RunConfig, out_dir: &Path) -> Result<ExplanationReport, CommandError> {
    config.validate_common()?;
    let metric = config.metric_enum()?;
    let d_raw = load_csv(&config.d_file()?, config.label_column.as_deref())?;
    let dp_raw = load_csv(&config.d_prime_file()?, config.label_column.as_deref())?;
    if d_raw.columns() != dp_raw.columns() {
        return Err(CommandError::Validation(format!(
            "datasets disagree on columns: [{}] vs [{}]",
            d_raw.columns().join(", "),
            dp_raw.columns().join(", ")
        )));
    }

    let stats = fit_normalizer(&d_raw)?;
    let (d, dp) = if config.normalize {
        (
            apply_normalizer(&stats, &d_raw)?,
            apply_normalizer(&stats, &dp_raw)?,
        )
    } else {
        (d_raw.clone(), dp_raw.clone())
    };
    let opts = NeighbourhoodOptions {
        metric,
        label_aware: config.label_aware,
    };

    let prototypes: Vec<Prototype> = match config.prototype_method.as_str() {
        "kmeans" => {
            kmeans_prototypes(&d, config.k_prototypes, config.seed, config.kmeans_max_iter)?
        }
        "percentile_grid" => {
            let columns = config.grid_columns.as_ref().ok_or_else(|| {
                CommandError::Validation(
                    "prototype_method = percentile_grid requires grid_columns (two names)".into(),
                )
            })?;
            if columns.len() != 2 {
                return Err(CommandError::Validation(format!(
                    "grid_columns needs exactly 2 names, got {}",
                    columns.len()
                )));
            }
            // Percentiles are taken in raw units; the resulting prototypes
            // are mapped into the normalized space for distance work.
            let raw = percentile_grid_prototypes(
                &d_raw,
                [columns[0].as_str(), columns[1].as_str()],
                &config.percentiles,
                config.label_tree_depth,
            )?;
            if config.normalize {
                raw.into_iter()
                    .map(|mut p| {
                        p.features = normalize_vector(&stats, &p.features);
                        p
                    })
                    .collect()
            } else {
                raw
            }
        }
        other => {
            return Err(CommandError::Validation(format!(
                "prototype_method \"{other}\" is not one of kmeans | percentile_grid"
            )))
        }
    };

    let neighbourhood = neighbourhood_stats_opts(&prototypes, &d, &dp, &opts)?;

    // Partial prototypes; rank terms need the ensemble-backed provider.
    let params = PartialParams {
        k: config.partial_k.min(d.n_features()),
        c1: config.c1,
        c2: config.c2,
        c3: config.c3,
        delta: DeltaSpec::Percentile(config.delta_percentile),
        delta_dp: None,
        opts,
    };
    let need_ranks = config.c1 > 0.0 || config.c2 > 0.0;
    let partials = if need_ranks {
        if !d_raw.is_labeled() {
            return Err(CommandError::Validation(
                "c1/c2 rank terms need labeled data: pass label_column or set c1 = c2 = 0".into(),
            ));
        }
        let both = concat_datasets(&d_raw, &dp_raw)?;
        let scheme = fit_binarizer(&both, config.max_thresholds_per_column)?;
        let ensemble_params = EnsembleParams {
            bootstraps: config.bootstraps,
            epsilon: config.epsilon,
            depth: config.tree_depth,
            lambda: config.lambda,
            candidates_per_bootstrap: config.candidates_per_bootstrap,
            feature_subsample: config.feature_subsample,
            seed: config.seed,
        };
        let bin_d = binarize(&scheme, &d_raw)?;
        let bin_dp = binarize(&scheme, &dp_raw)?;
        let ensemble_d = build_ensemble(&bin_d, &ensemble_params)?;
        let ensemble_dp = build_ensemble(
            &bin_dp,
            &EnsembleParams {
                seed: driftscope_core::substream_seed(config.seed, 1),
                ..ensemble_params
            },
        )?;
        let background = background_sample(&bin_d, config.background_cap, config.seed);
        let provider = RashomonPairProvider {
            schema: &d_raw,
            scheme: &scheme,
            stats: &stats,
            ensemble_d: &ensemble_d,
            ensemble_dp: &ensemble_dp,
            background_d: background.clone(),
            background_dp: background,
        };
        partial_prototypes(&prototypes, &d, &dp, &params, Some(&provider))?
    } else {
        partial_prototypes(&prototypes, &d, &dp, &params, None)?
    };

    // Exports. Prototype features are reported in original units.
    let display_prototypes: Vec<Prototype> = prototypes
        .iter()
        .map(|p| Prototype {
            id: p.id,
            features: if config.normalize {
                denormalize_vector(&stats, &p.features)
            } else {
                p.features.clone()
            },
            label: p.label,
            provenance: p.provenance,
        })
        .collect();
    let prototypes_json = prototypes_to_json(&display_prototypes, d_raw.columns());
    let mut prototypes_doc = serde_json::to_string_pretty(&prototypes_json).expect("serializes");
    prototypes_doc.push('\n');
    write_file(out_dir, "prototypes.json", &prototypes_doc)?;
    write_file(out_dir, "neighbourhood_stats.csv", &neighbourhood.to_csv())?;

    let mut report = ExplanationReport::new("prototypes", config);
    report.prototypes = Some(prototypes_json);
    report.neighbourhood = Some(serde_json::to_value(&neighbourhood).expect("serializes"));
    report.partial_prototypes = Some(serde_json::to_value(&partials).expect("serializes"));
    let sentinel = d_raw.sentinel_prevalence(-8.0);
    if sentinel.iter().any(|c| *c > 0) {
        report.notes.push(format!(
            "sentinel value -8 appears in {} (per-column counts {:?}); sentinels pass through statistics verbatim",
            config.d_name, sentinel
        ));
    }

    match config.embedding.as_str() {
        "pca" => {
            let mut rows: Vec<Vec<f64>> = d.rows().to_vec();
            rows.extend(dp.rows().iter().cloned());
            let coords = driftscope_core::linalg::pca_2d(&rows);
            let csv = embedding_csv(&coords, d.n_rows(), &config.d_name, &config.d_prime_name);
            write_file(out_dir, "embedding.csv", &csv)?;
            report.embedding = Some(serde_json::json!({
                "method": "pca",
                "note": "principal components, not a structure-preserving manifold embedding",
                "file": "embedding.csv",
            }));
        }
        "precomputed" => {
            let path = config.embedding_path.as_ref().expect("validated");
            let text = std::fs::read_to_string(path).map_err(|e| {
                CommandError::Validation(format!("cannot read embedding {path}: {e}"))
            })?;
            let n_rows = text.lines().skip(1).filter(|l| !l.is_empty()).count();
            let expected = d.n_rows() + dp.n_rows();
            if n_rows != expected {
                return Err(CommandError::Validation(format!(
                    "precomputed embedding has {n_rows} rows; expected {expected}"
                )));
            }
            write_file(out_dir, "embedding.csv", &text)?;
            report.embedding = Some(serde_json::json!({
                "method": "precomputed",
                "source": path,
                "file": "embedding.csv",
            }));
        }
        _ => {}
    }

    write_report(out_dir, &report)?;
    Ok(report)
}

fn embedding_csv(coords: &[(f64, f64)], n_d: usize, d_name: &str, dp_name: &str) -> String {
    let mut out = String::from("dataset,row_id,x,y\n");
    for (i, (x, y)) in coords.iter().enumerate() {
        let (name, row) = if i < n_d {
            (d_name, i)
        } else {
            (dp_name, i - n_d)
        };
        let _ = writeln!(out, "{name},{row},{x},{y}");
    }
    out
}
