//! Per-cluster feature selection and end-to-end pipeline orchestration.
//!
//! Each feature cluster contributes its center, plus the member with the
//! highest mutual information with the labels when that member strictly
//! beats the center. The union of the continuous-side and discrete-side
//! picks, ordered by original column index, is the selected subset. Subset
//! size is emergent: it is bounded by twice the number of clusters, and the
//! cluster count is itself an output of the density clustering, never a
//! parameter.

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{
    infer_feature_kinds, split_by_kind, standardize, ContinuousView, Dataset, DiscreteView,
    FeatureKind,
};
use crate::error::Error;
use crate::fclust::{cluster_features_with, estimate_params, Clustering, DensityParams};
use crate::measures::{dissimilarity_matrix, relevance_mi, DissimilarityMatrix, FeatureRef, KindView};
use crate::Result;

/// Why a feature made it into the subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionReason {
    /// The feature is its cluster's center and no member beat its relevance.
    Center,
    /// The feature beat its cluster's center on label relevance.
    MostRelevant,
}

/// One selected feature with its provenance.
#[derive(Debug, Clone, Serialize)]
pub struct SelectedFeature {
    /// Column index in the original dataset.
    pub index: usize,
    pub name: String,
    pub kind: FeatureKind,
    /// Cluster id within this feature's kind (0-based clustering order).
    pub cluster: usize,
    pub reason: SelectionReason,
    /// Mutual information with the labels, in bits.
    pub relevance_bits: f64,
}

/// Per-kind shape summary: how many features of each kind entered the
/// clustering (constants excluded) and how many clusters each kind formed.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SelectionCounts {
    /// Non-constant continuous features.
    pub continuous: usize,
    /// Non-constant discrete features.
    pub discrete: usize,
    pub clusters_cont: usize,
    pub clusters_disc: usize,
}

/// The pipeline's primary artifact.
#[derive(Debug, Clone, Serialize)]
pub struct SelectionResult {
    pub dataset: String,
    pub options: PipelineOptions,
    pub selected: Vec<SelectedFeature>,
    pub counts: SelectionCounts,
}

impl SelectionResult {
    /// Original-index list of the selected features.
    pub fn indices(&self) -> Vec<usize> {
        self.selected.iter().map(|f| f.index).collect()
    }
}

/// Tunable pipeline knobs. `None` means "use the estimated/default value".
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct PipelineOptions {
    /// Distinct-value threshold for kind inference (default `sqrt(n)`).
    pub epsilon: Option<f64>,
    /// Kernel bandwidth override (default: mean off-diagonal dissimilarity,
    /// estimated separately per kind).
    pub beta: Option<f64>,
    /// Kernel sharpening override (default 2).
    pub gamma: Option<f64>,
}

impl PipelineOptions {
    fn validate(&self) -> Result<()> {
        for (name, v) in [("epsilon", self.epsilon), ("beta", self.beta), ("gamma", self.gamma)] {
            if let Some(v) = v {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::InvalidOption(format!("{name} must be positive, got {v}")));
                }
            }
        }
        Ok(())
    }
}

/// Everything the pipeline computed for one feature kind, kept around for
/// debugging dumps and tests.
#[derive(Debug, Clone)]
pub struct KindArtifacts {
    /// Original dataset indices of the view's features (constants removed).
    pub indices: Vec<usize>,
    pub names: Vec<String>,
    pub matrix: DissimilarityMatrix,
    pub clustering: Clustering,
    /// Label relevance (bits) per view feature.
    pub relevance: Vec<f64>,
}

/// Full pipeline output: the selection plus per-kind artifacts.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub result: SelectionResult,
    pub cont: Option<KindArtifacts>,
    pub disc: Option<KindArtifacts>,
    /// Original indices of constant columns that were excluded.
    pub dropped_constant: Vec<usize>,
}

/// One pick of the per-cluster argmax step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClusterPick {
    /// Cluster id within the kind.
    pub cluster: usize,
    /// View-local feature index.
    pub feature: usize,
    pub reason: SelectionReason,
}

/// The per-cluster argmax rule, separated from relevance computation so the
/// rule itself is testable: the center is always picked; a member is added
/// only when its relevance strictly exceeds the center's maximum-attained
/// relevance (ties among non-center members break toward the lowest index).
pub fn pick_from_scores(clustering: &Clustering, relevance: &[f64]) -> Vec<ClusterPick> {
    let mut picks = Vec::new();
    for (cid, cluster) in clustering.clusters.iter().enumerate() {
        let center_score = relevance[cluster.center];
        let mut best: usize = cluster.center;
        for &f in &cluster.members {
            if f != cluster.center && relevance[f] > relevance[best] {
                best = f;
            } else if f != cluster.center
                && best != cluster.center
                && relevance[f] == relevance[best]
                && f < best
            {
                best = f;
            }
        }
        picks.push(ClusterPick {
            cluster: cid,
            feature: cluster.center,
            reason: SelectionReason::Center,
        });
        if best != cluster.center && relevance[best] > center_score {
            picks.push(ClusterPick {
                cluster: cid,
                feature: best,
                reason: SelectionReason::MostRelevant,
            });
        }
    }
    picks
}

/// Columns of one kind prepared for relevance scoring.
enum RelevanceColumns<'a> {
    Continuous(&'a [Vec<f64>]),
    Discrete(&'a [Vec<u32>]),
}

fn relevance_of_view(cols: RelevanceColumns<'_>, labels: &[u32]) -> Vec<f64> {
    match cols {
        RelevanceColumns::Continuous(cs) => cs
            .par_iter()
            .map(|c| relevance_mi(FeatureRef::Continuous(c), labels))
            .collect(),
        RelevanceColumns::Discrete(cs) => cs
            .par_iter()
            .map(|c| relevance_mi(FeatureRef::Discrete(c), labels))
            .collect(),
    }
}

/// Run the selection rule over one kind's clustering, mapping view-local
/// picks back to original dataset indices.
pub fn select_from_clusters(artifacts: &KindArtifacts, kind: FeatureKind) -> Vec<SelectedFeature> {
    let picks = pick_from_scores(&artifacts.clustering, &artifacts.relevance);
    picks
        .into_iter()
        .map(|p| SelectedFeature {
            index: artifacts.indices[p.feature],
            name: artifacts.names[p.feature].clone(),
            kind,
            cluster: p.cluster,
            reason: p.reason,
            relevance_bits: artifacts.relevance[p.feature],
        })
        .collect()
}

/// Label relevance (bits) of every feature in original column order,
/// regardless of clustering: continuous columns are binned first, discrete
/// columns are scored on their codes. Baseline rankers use this to pick
/// top-k subsets comparable with the pipeline's.
pub fn feature_relevances(dataset: &Dataset) -> Vec<f64> {
    let (cont, disc) = split_by_kind(dataset);
    let mut scores = vec![0.0f64; dataset.m()];
    let cont_scores = relevance_of_view(RelevanceColumns::Continuous(&cont.columns), &dataset.labels);
    for (&i, s) in cont.indices.iter().zip(cont_scores) {
        scores[i] = s;
    }
    let disc_scores = relevance_of_view(RelevanceColumns::Discrete(&disc.columns), &dataset.labels);
    for (&i, s) in disc.indices.iter().zip(disc_scores) {
        scores[i] = s;
    }
    scores
}

fn resolve_params(matrix: &DissimilarityMatrix, options: &PipelineOptions) -> DensityParams {
    let est = estimate_params(matrix);
    DensityParams {
        beta: options.beta.unwrap_or(est.beta),
        gamma: options.gamma.unwrap_or(est.gamma),
    }
}

fn continuous_stage(
    view: ContinuousView,
    labels: &[u32],
    options: &PipelineOptions,
) -> Result<KindArtifacts> {
    let (std_view, constant) = standardize(&view);
    debug_assert!(constant.iter().all(|&c| !c), "constants filtered before this stage");
    let matrix = dissimilarity_matrix(KindView::Continuous(&std_view))?;
    let clustering = cluster_features_with(&matrix, resolve_params(&matrix, options));
    let relevance = relevance_of_view(RelevanceColumns::Continuous(&view.columns), labels);
    Ok(KindArtifacts {
        indices: view.indices,
        names: view.names,
        matrix,
        clustering,
        relevance,
    })
}

fn discrete_stage(
    view: DiscreteView,
    labels: &[u32],
    options: &PipelineOptions,
) -> Result<KindArtifacts> {
    let matrix = dissimilarity_matrix(KindView::Discrete(&view))?;
    let clustering = cluster_features_with(&matrix, resolve_params(&matrix, options));
    let relevance = relevance_of_view(RelevanceColumns::Discrete(&view.columns), labels);
    Ok(KindArtifacts {
        indices: view.indices,
        names: view.names,
        matrix,
        clustering,
        relevance,
    })
}

/// Run the whole selection pipeline on an imputed dataset: infer kinds,
/// split into per-kind views, drop constant columns, build each kind's
/// dissimilarity matrix, cluster, and take the per-cluster picks. The
/// result lists features in ascending original-index order.
pub fn run_pipeline(dataset: &Dataset, options: &PipelineOptions) -> Result<PipelineOutput> {
    options.validate()?;
    if !dataset.fully_observed() {
        return Err(Error::InvalidOption(
            "dataset contains missing cells; impute before selection".to_string(),
        ));
    }

    let mut d = dataset.clone();
    let kinds = infer_feature_kinds(&d, options.epsilon);
    d.set_kinds(&kinds);

    let (cont_view, disc_view) = split_by_kind(&d);
    let (cont_view, mut dropped) = cont_view.split_constant();
    let (disc_view, dropped_disc) = disc_view.split_constant();
    dropped.extend(dropped_disc);
    dropped.sort_unstable();
    if !dropped.is_empty() {
        log::info!(
            "excluded {} constant feature(s) from selection: {:?}",
            dropped.len(),
            dropped
        );
    }

    if cont_view.is_empty() && disc_view.is_empty() {
        return Err(Error::NoInformativeFeatures);
    }

    let cont = if cont_view.is_empty() {
        None
    } else {
        Some(continuous_stage(cont_view, &d.labels, options)?)
    };
    let disc = if disc_view.is_empty() {
        None
    } else {
        Some(discrete_stage(disc_view, &d.labels, options)?)
    };

    let mut selected = Vec::new();
    if let Some(a) = &cont {
        selected.extend(select_from_clusters(a, FeatureKind::Continuous));
    }
    if let Some(a) = &disc {
        selected.extend(select_from_clusters(a, FeatureKind::Discrete));
    }
    selected.sort_by_key(|f| f.index);

    let counts = SelectionCounts {
        continuous: cont.as_ref().map_or(0, |a| a.indices.len()),
        discrete: disc.as_ref().map_or(0, |a| a.indices.len()),
        clusters_cont: cont.as_ref().map_or(0, |a| a.clustering.clusters.len()),
        clusters_disc: disc.as_ref().map_or(0, |a| a.clustering.clusters.len()),
    };

    let result = SelectionResult {
        dataset: d.name.clone(),
        options: *options,
        selected,
        counts,
    };
    Ok(PipelineOutput {
        result,
        cont,
        disc,
        dropped_constant: dropped,
    })
}
