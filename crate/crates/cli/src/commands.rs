//! The three workflows behind the binary's subcommands.
//!
//! Each command loads and imputes its input, runs the library, and writes
//! exactly one artifact (JSON for select/eval, CSV for bench) carrying the
//! tool version and the run's config fingerprint. A human-oriented one-line
//! summary goes to stderr so stdout stays pipeable.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use sfsdfc::{
    cross_validate, feature_relevances, impute_missing, load_csv, mean_ranks, parse_schema,
    run_pipeline, Dataset, EvalOptions, FeatureKind, ImputePolicy, PipelineOptions,
    PipelineOutput,
};

use crate::config::{BenchArgs, EvalArgs, InputArgs, ProtocolArgs, RunConfig, SelectArgs, TuneArgs};
use crate::report::{BenchReport, BenchRow, METHODS};

const VERSION: &str = env!("CARGO_PKG_VERSION");

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

/// Load a CSV, honoring an optional schema sidecar, and impute it.
fn prepare(
    input: &Path,
    label_flag: Option<&str>,
    schema_path: Option<&Path>,
    impute: ImputePolicy,
) -> Result<Dataset> {
    let mut declared: HashMap<String, FeatureKind> = HashMap::new();
    let mut schema_label = None;
    if let Some(path) = schema_path {
        let schema =
            parse_schema(path).with_context(|| format!("reading schema {}", path.display()))?;
        declared = schema.kinds.into_iter().collect();
        schema_label = schema.label;
    }
    let label = label_flag
        .map(str::to_string)
        .or(schema_label)
        .unwrap_or_else(|| "class".to_string());
    let dataset = load_csv(input, &label, &declared)
        .with_context(|| format!("loading {}", input.display()))?;
    impute_missing(&dataset, impute).context("imputing missing cells")
}

fn prepare_from(args: &InputArgs) -> Result<Dataset> {
    prepare(
        &args.input,
        args.label.as_deref(),
        args.schema.as_deref(),
        args.impute.into(),
    )
}

fn pipeline_options(tune: &TuneArgs) -> PipelineOptions {
    PipelineOptions {
        epsilon: tune.epsilon,
        beta: tune.beta,
        gamma: tune.gamma,
    }
}

fn eval_options(protocol: &ProtocolArgs) -> EvalOptions {
    EvalOptions {
        folds: protocol.folds,
        repeats: protocol.repeats,
        k: protocol.k,
        seed: protocol.seed,
    }
}

/// Stamp the version and config fingerprint into a JSON artifact.
///
/// When the payload already carries a `config` object (the eval report
/// declares its metric there), its keys are folded into the fingerprint
/// instead of being discarded.
fn fingerprinted(payload: Value, config: &RunConfig) -> Result<Value> {
    let Value::Object(mut map) = payload else {
        bail!("artifact payload must be a JSON object");
    };
    let mut fingerprint = match serde_json::to_value(config)? {
        Value::Object(map) => map,
        _ => bail!("run config must serialize to a JSON object"),
    };
    if let Some(Value::Object(own)) = map.remove("config") {
        fingerprint.extend(own);
    }
    map.insert("version".to_string(), json!(VERSION));
    map.insert("config".to_string(), Value::Object(fingerprint));
    Ok(Value::Object(map))
}

/// Write text to the output file, or stdout when none was requested.
fn write_output(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("writing {}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// select
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ClusterDump {
    kind: FeatureKind,
    center: usize,
    center_name: String,
    members: Vec<usize>,
    radius: f64,
}

fn cluster_dumps(out: &PipelineOutput) -> Vec<ClusterDump> {
    let mut dumps = Vec::new();
    for (artifacts, kind) in [
        (&out.cont, FeatureKind::Continuous),
        (&out.disc, FeatureKind::Discrete),
    ] {
        let Some(a) = artifacts else { continue };
        for c in &a.clustering.clusters {
            dumps.push(ClusterDump {
                kind,
                center: a.indices[c.center],
                center_name: a.names[c.center].clone(),
                members: c.members.iter().map(|&m| a.indices[m]).collect(),
                radius: c.radius,
            });
        }
    }
    dumps
}

fn dump_artifacts(args: &SelectArgs, out: &PipelineOutput) -> Result<()> {
    if let Some(prefix) = &args.dump_dissim {
        for (artifacts, tag) in [(&out.cont, "continuous"), (&out.disc, "discrete")] {
            let Some(a) = artifacts else { continue };
            let path = PathBuf::from(format!("{}.{tag}.csv", prefix.display()));
            a.matrix
                .write_csv(&path, &a.names)
                .with_context(|| format!("writing {}", path.display()))?;
        }
    }
    if let Some(path) = &args.dump_clusters {
        let text = serde_json::to_string_pretty(&cluster_dumps(out))?;
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

pub fn cmd_select(args: &SelectArgs) -> Result<()> {
    let config = RunConfig::for_select(args);
    let dataset = prepare_from(&args.input)?;
    let out = run_pipeline(&dataset, &pipeline_options(&args.tune))?;
    dump_artifacts(args, &out)?;

    let artifact = fingerprinted(serde_json::to_value(&out.result)?, &config)?;
    write_output(args.output.as_deref(), &serde_json::to_string_pretty(&artifact)?)?;

    let c = &out.result.counts;
    eprintln!(
        "{}: {} features ({} continuous in {} clusters, {} discrete in {} clusters), selected {}",
        out.result.dataset,
        dataset.m(),
        c.continuous,
        c.clusters_cont,
        c.discrete,
        c.clusters_disc,
        out.result.selected.len(),
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

/// Pull the subset indices out of a selection artifact.
fn read_subset(path: &Path) -> Result<Vec<usize>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading subset {}", path.display()))?;
    let value: Value = serde_json::from_str(&text)
        .with_context(|| format!("parsing subset {}", path.display()))?;
    let selected = value
        .get("selected")
        .and_then(Value::as_array)
        .ok_or_else(|| anyhow!("{} has no `selected` array", path.display()))?;
    selected
        .iter()
        .map(|entry| {
            entry
                .get("index")
                .and_then(Value::as_u64)
                .map(|i| i as usize)
                .ok_or_else(|| anyhow!("a `selected` entry has no numeric `index`"))
        })
        .collect()
}

pub fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let config = RunConfig::for_eval(args);
    let dataset = prepare_from(&args.input)?;
    let subset = match &args.subset {
        Some(path) => read_subset(path)?,
        None => (0..dataset.m()).collect(),
    };
    let report = cross_validate(&dataset, &subset, &eval_options(&args.protocol))?;

    let artifact = fingerprinted(serde_json::to_value(&report)?, &config)?;
    write_output(args.output.as_deref(), &serde_json::to_string_pretty(&artifact)?)?;

    eprintln!(
        "{}: subset of {} scored {:.4} mean accuracy ({:.4} std) over {}x{} folds",
        dataset.name,
        report.subset_size,
        report.mean_accuracy,
        report.std_accuracy,
        report.config.repeats,
        report.config.folds,
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

/// The MI-top-k baseline: rank every feature by label relevance and keep
/// as many as the pipeline selected (ties toward lower index).
fn mi_top_k(dataset: &Dataset, k: usize) -> Vec<usize> {
    let scores = feature_relevances(dataset);
    let mut order: Vec<usize> = (0..dataset.m()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut subset: Vec<usize> = order.into_iter().take(k).collect();
    subset.sort_unstable();
    subset
}

fn bench_one(path: &Path, args: &BenchArgs) -> Result<BenchRow> {
    let schema_path = path.with_extension("schema");
    let schema = schema_path.exists().then_some(schema_path);
    let dataset = prepare(path, args.label.as_deref(), schema.as_deref(), args.impute.into())?;

    let select_start = Instant::now();
    let out = run_pipeline(&dataset, &pipeline_options(&args.tune))?;
    let select_time_s = select_start.elapsed().as_secs_f64();

    let selected = out.result.indices();
    let full: Vec<usize> = (0..dataset.m()).collect();
    let baseline = mi_top_k(&dataset, selected.len());

    let options = eval_options(&args.protocol);
    let eval_start = Instant::now();
    let selected_report = cross_validate(&dataset, &selected, &options)?;
    let eval_time_s = eval_start.elapsed().as_secs_f64();
    let full_report = cross_validate(&dataset, &full, &options)?;
    let baseline_report = cross_validate(&dataset, &baseline, &options)?;

    Ok(BenchRow {
        dataset: dataset.name.clone(),
        n: dataset.n(),
        m: dataset.m(),
        selected: selected.len(),
        sfsdfc_acc: selected_report.mean_accuracy,
        full_acc: full_report.mean_accuracy,
        mi_topk_acc: baseline_report.mean_accuracy,
        select_time_s,
        eval_time_s,
    })
}

pub fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let config = RunConfig::for_bench(args);
    let mut paths: Vec<PathBuf> = fs::read_dir(&args.input)
        .with_context(|| format!("reading directory {}", args.input.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "csv"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no .csv datasets in {}", args.input.display());
    }

    let mut rows = Vec::new();
    let mut failed = 0usize;
    for path in &paths {
        match bench_one(path, args) {
            Ok(row) => rows.push(row),
            Err(err) => {
                failed += 1;
                log::warn!("skipping {}: {err:#}", path.display());
            }
        }
    }
    if rows.is_empty() {
        bail!("all {failed} dataset(s) failed to benchmark");
    }

    let methods: Vec<String> = METHODS.iter().map(|m| m.to_string()).collect();
    let table: Vec<Vec<f64>> = rows.iter().map(|r| r.accuracies().to_vec()).collect();
    let ranks = mean_ranks(&methods, &table)?;
    let report = BenchReport {
        rows,
        mean_ranks: [ranks.mean_ranks[0], ranks.mean_ranks[1], ranks.mean_ranks[2]],
    };

    let config_line = serde_json::to_string(&config)?;
    write_output(args.output.as_deref(), &report.to_csv(VERSION, &config_line)?)?;
    eprintln!(
        "benchmarked {} dataset(s), {failed} skipped; mean ranks: {} {:.2}, {} {:.2}, {} {:.2}",
        report.rows.len(),
        METHODS[0],
        report.mean_ranks[0],
        METHODS[1],
        report.mean_ranks[1],
        METHODS[2],
        report.mean_ranks[2],
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use sfsdfc::synth;

    #[test]
    fn mi_top_k_keeps_the_most_relevant_features() {
        let d = synth::heart_like(3);
        let scores = feature_relevances(&d);
        let subset = mi_top_k(&d, 4);
        assert_eq!(subset.len(), 4);
        let chosen_min = subset
            .iter()
            .map(|&i| scores[i])
            .fold(f64::INFINITY, f64::min);
        for i in 0..d.m() {
            if !subset.contains(&i) {
                assert!(scores[i] <= chosen_min + 1e-12);
            }
        }
    }

    #[test]
    fn subset_files_round_trip_from_select_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let d = synth::heart_like(5);
        let out = run_pipeline(&d, &PipelineOptions::default()).unwrap();
        let path = dir.path().join("selection.json");
        let artifact = serde_json::to_string(&out.result).unwrap();
        fs::write(&path, artifact).unwrap();
        assert_eq!(read_subset(&path).unwrap(), out.result.indices());
    }

    #[test]
    fn subset_reader_rejects_other_json() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bogus.json");
        fs::write(&path, "{\"hello\": 1}").unwrap();
        assert!(read_subset(&path).is_err());
    }
}
