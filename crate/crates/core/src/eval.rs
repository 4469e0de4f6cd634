//! Subset evaluation: repeated stratified cross-validation with a kNN
//! classifier over mixed feature types, plus cross-method rank aggregation.
//!
//! The distance is heterogeneous Euclidean-overlap: squared differences on
//! standardized continuous features, 0/1 mismatch on discrete ones.
//! Standardization statistics come from the training split of each fold
//! only, so the held-out split never leaks into the model. Every tie in the
//! protocol (neighbor distance, vote count) breaks deterministically, and
//! repeats/folds are written into preassigned slots, so a report is
//! bitwise-reproducible across runs and thread counts.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{Dataset, FeatureKind};
use crate::error::Error;
use crate::Result;

// ---------------------------------------------------------------------------
// Report types
// ---------------------------------------------------------------------------

/// Evaluation knobs. Defaults mirror the reference protocol: 5 folds,
/// 10 repeats, 3 neighbors.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EvalOptions {
    pub folds: usize,
    pub repeats: usize,
    pub k: usize,
    pub seed: u64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { folds: 5, repeats: 10, k: 3, seed: 0 }
    }
}

/// Identifies the fixed parts of the protocol in serialized reports.
#[derive(Debug, Clone, Serialize)]
pub struct EvalConfig {
    pub folds: usize,
    pub repeats: usize,
    pub k: usize,
    /// Distance used by the classifier.
    pub metric: &'static str,
}

/// Cross-validation outcome for one (dataset, subset) pair.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    /// repeats x folds accuracy matrix, all entries in [0, 1].
    pub accuracies: Vec<Vec<f64>>,
    /// Arithmetic mean over every repeat-fold cell.
    pub mean_accuracy: f64,
    /// Population standard deviation over every repeat-fold cell.
    pub std_accuracy: f64,
    pub subset_size: usize,
    pub seed: u64,
    pub wall_time_s: f64,
    pub config: EvalConfig,
}

/// Per-dataset ranks of competing methods, 1 = best, ties averaged.
#[derive(Debug, Clone, Serialize)]
pub struct RankTable {
    pub methods: Vec<String>,
    /// dataset x method matrix of ranks.
    pub per_dataset_ranks: Vec<Vec<f64>>,
    pub mean_ranks: Vec<f64>,
}

// ---------------------------------------------------------------------------
// Distance and classifier
// ---------------------------------------------------------------------------

/// Heterogeneous Euclidean-overlap distance between two projected samples.
/// Continuous entries are assumed standardized already; discrete entries
/// contribute 1 per mismatch.
pub fn mixed_distance(a: &[f64], b: &[f64], kinds: &[FeatureKind]) -> f64 {
    assert_eq!(a.len(), kinds.len());
    assert_eq!(b.len(), kinds.len());
    let mut sum = 0.0;
    for i in 0..kinds.len() {
        match kinds[i] {
            FeatureKind::Continuous => {
                let d = a[i] - b[i];
                sum += d * d;
            }
            FeatureKind::Discrete => {
                if a[i] != b[i] {
                    sum += 1.0;
                }
            }
        }
    }
    sum.sqrt()
}

/// Majority vote among the k nearest training samples. Distance ties keep
/// the lower training index; vote ties pick the smallest class id.
pub fn knn_predict(
    train: &[Vec<f64>],
    labels: &[u32],
    kinds: &[FeatureKind],
    query: &[f64],
    k: usize,
) -> Result<u32> {
    if k == 0 || k > train.len() {
        return Err(Error::BadNeighborCount { k, train: train.len() });
    }
    let mut order: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, row)| (mixed_distance(query, row, kinds), i))
        .collect();
    order.sort_unstable_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));

    let mut votes: Vec<(u32, usize)> = Vec::with_capacity(k);
    for &(_, i) in order.iter().take(k) {
        let class = labels[i];
        match votes.iter_mut().find(|(c, _)| *c == class) {
            Some((_, n)) => *n += 1,
            None => votes.push((class, 1)),
        }
    }
    votes.sort_unstable_by(|x, y| x.0.cmp(&y.0));
    let mut winner = votes[0];
    for &v in &votes[1..] {
        if v.1 > winner.1 {
            winner = v;
        }
    }
    Ok(winner.0)
}

// ---------------------------------------------------------------------------
// Fold construction and accuracy
// ---------------------------------------------------------------------------

/// Assign each sample to a fold: per-class seeded shuffle, then a single
/// round-robin pass so fold sizes stay balanced both per class and overall.
pub fn stratified_kfold(labels: &[u32], folds: usize, seed: u64) -> Result<Vec<usize>> {
    let n = labels.len();
    if folds < 2 || folds > n {
        return Err(Error::BadFoldCount { folds, samples: n });
    }
    let mut classes: Vec<u32> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; n];
    let mut next = 0usize;
    for class in classes {
        let mut members: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
        if members.len() < folds {
            log::warn!(
                "class {class} has {} member(s), fewer than {folds} folds; distributing best-effort",
                members.len()
            );
        }
        members.shuffle(&mut rng);
        for idx in members {
            assignment[idx] = next % folds;
            next += 1;
        }
    }
    Ok(assignment)
}

/// Fraction of predictions matching the truth.
pub fn accuracy(predicted: &[u32], truth: &[u32]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch(predicted.len(), truth.len()));
    }
    if predicted.is_empty() {
        return Err(Error::InvalidOption("accuracy of an empty prediction".to_string()));
    }
    let correct = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(correct as f64 / predicted.len() as f64)
}

// ---------------------------------------------------------------------------
// Cross-validation driver
// ---------------------------------------------------------------------------

fn validate_subset(dataset: &Dataset, subset: &[usize]) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::InvalidSubset("subset is empty".to_string()));
    }
    let mut seen = vec![false; dataset.m()];
    for &i in subset {
        if i >= dataset.m() {
            return Err(Error::InvalidSubset(format!(
                "feature index {i} out of range for {} columns",
                dataset.m()
            )));
        }
        if seen[i] {
            return Err(Error::InvalidSubset(format!("feature index {i} appears twice")));
        }
        seen[i] = true;
    }
    Ok(())
}

/// Project every sample onto the subset, standardizing continuous features
/// with statistics from the training rows only.
fn project_fold(
    dataset: &Dataset,
    subset: &[usize],
    train_rows: &[usize],
) -> (Vec<Vec<f64>>, Vec<FeatureKind>) {
    let n = dataset.n();
    let kinds: Vec<FeatureKind> = subset.iter().map(|&i| dataset.columns[i].kind).collect();
    let mut projected = vec![vec![0.0f64; subset.len()]; n];
    for (j, &fi) in subset.iter().enumerate() {
        let col = &dataset.columns[fi].values;
        match kinds[j] {
            FeatureKind::Discrete => {
                for r in 0..n {
                    projected[r][j] = col[r];
                }
            }
            FeatureKind::Continuous => {
                let m = train_rows.iter().map(|&r| col[r]).sum::<f64>() / train_rows.len() as f64;
                let var = train_rows
                    .iter()
                    .map(|&r| (col[r] - m) * (col[r] - m))
                    .sum::<f64>()
                    / train_rows.len() as f64;
                let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
                for r in 0..n {
                    projected[r][j] = (col[r] - m) / sd;
                }
            }
        }
    }
    (projected, kinds)
}

fn fold_accuracy(
    dataset: &Dataset,
    subset: &[usize],
    assignment: &[usize],
    fold: usize,
    k: usize,
) -> Result<f64> {
    let n = dataset.n();
    let train_rows: Vec<usize> = (0..n).filter(|&r| assignment[r] != fold).collect();
    let test_rows: Vec<usize> = (0..n).filter(|&r| assignment[r] == fold).collect();
    let (projected, kinds) = project_fold(dataset, subset, &train_rows);

    let train: Vec<Vec<f64>> = train_rows.iter().map(|&r| projected[r].clone()).collect();
    let train_labels: Vec<u32> = train_rows.iter().map(|&r| dataset.labels[r]).collect();

    let mut predicted = Vec::with_capacity(test_rows.len());
    for &r in &test_rows {
        predicted.push(knn_predict(&train, &train_labels, &kinds, &projected[r], k)?);
    }
    let truth: Vec<u32> = test_rows.iter().map(|&r| dataset.labels[r]).collect();
    accuracy(&predicted, &truth)
}

/// Evaluate a feature subset with repeated stratified k-fold
/// cross-validation. Repeat r derives its fold assignment from `seed + r`,
/// and every (repeat, fold) cell is computed independently, so the accuracy
/// matrix is identical across runs and thread counts.
pub fn cross_validate(dataset: &Dataset, subset: &[usize], options: &EvalOptions) -> Result<EvalReport> {
    let start = Instant::now();
    validate_subset(dataset, subset)?;
    if !dataset.fully_observed() {
        return Err(Error::InvalidOption(
            "dataset contains missing cells; impute before evaluation".to_string(),
        ));
    }
    if options.repeats == 0 {
        return Err(Error::InvalidOption("repeats must be at least 1".to_string()));
    }
    let n = dataset.n();
    if options.folds < 2 || options.folds > n {
        return Err(Error::BadFoldCount { folds: options.folds, samples: n });
    }

    let assignments: Vec<Vec<usize>> = (0..options.repeats)
        .map(|r| stratified_kfold(&dataset.labels, options.folds, options.seed + r as u64))
        .collect::<Result<_>>()?;

    // The smallest training split must still hold k neighbors.
    for assignment in &assignments {
        for fold in 0..options.folds {
            let train = assignment.iter().filter(|&&a| a != fold).count();
            if options.k == 0 || options.k > train {
                return Err(Error::BadNeighborCount { k: options.k, train });
            }
        }
    }

    let slots: Vec<(usize, usize)> = (0..options.repeats)
        .flat_map(|r| (0..options.folds).map(move |f| (r, f)))
        .collect();
    let cells: Vec<f64> = slots
        .par_iter()
        .map(|&(r, f)| fold_accuracy(dataset, subset, &assignments[r], f, options.k))
        .collect::<Result<_>>()?;

    let accuracies: Vec<Vec<f64>> = cells
        .chunks(options.folds)
        .map(|chunk| chunk.to_vec())
        .collect();
    let count = (options.repeats * options.folds) as f64;
    let mean = cells.iter().sum::<f64>() / count;
    let var = cells.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / count;

    Ok(EvalReport {
        accuracies,
        mean_accuracy: mean,
        std_accuracy: var.sqrt(),
        subset_size: subset.len(),
        seed: options.seed,
        wall_time_s: start.elapsed().as_secs_f64(),
        config: EvalConfig {
            folds: options.folds,
            repeats: options.repeats,
            k: options.k,
            metric: "heom",
        },
    })
}

// ---------------------------------------------------------------------------
// Rank aggregation
// ---------------------------------------------------------------------------

/// Rank methods per dataset by accuracy (1 = best, ties share the average
/// rank) and average the ranks over datasets.
pub fn mean_ranks(methods: &[String], accuracy_table: &[Vec<f64>]) -> Result<RankTable> {
    let m = methods.len();
    if m < 2 {
        return Err(Error::InvalidOption("ranking needs at least two methods".to_string()));
    }
    if accuracy_table.is_empty() {
        return Err(Error::InvalidOption("ranking needs at least one dataset".to_string()));
    }
    for row in accuracy_table {
        if row.len() != m {
            return Err(Error::LengthMismatch(row.len(), m));
        }
    }

    let mut per_dataset_ranks = Vec::with_capacity(accuracy_table.len());
    for row in accuracy_table {
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        let mut ranks = vec![0.0f64; m];
        let mut pos = 0;
        while pos < m {
            let mut end = pos + 1;
            while end < m && row[order[end]] == row[order[pos]] {
                end += 1;
            }
            // Positions pos..end (0-based) share the average 1-based rank.
            let avg = (pos + 1 + end) as f64 / 2.0;
            for &method in &order[pos..end] {
                ranks[method] = avg;
            }
            pos = end;
        }
        per_dataset_ranks.push(ranks);
    }

    let datasets = per_dataset_ranks.len() as f64;
    let mean_ranks = (0..m)
        .map(|j| per_dataset_ranks.iter().map(|r| r[j]).sum::<f64>() / datasets)
        .collect();
    Ok(RankTable {
        methods: methods.to_vec(),
        per_dataset_ranks,
        mean_ranks,
    })
}
