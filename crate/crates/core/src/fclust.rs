//! Density-based feature clustering over a dissimilarity matrix.
//!
//! Each feature gets a kernel density score from its dissimilarities to all
//! features; high-density features sitting in unclaimed territory become
//! temporary cluster centers (fitness-proportionate sharing keeps one
//! density peak from dominating), every feature joins its nearest center,
//! and clusters whose radii overlap are merged to a fixed point. The number
//! of clusters is an output of the procedure, never an input.
//!
//! Determinism contract: all density ties break toward the lowest feature
//! index, pair scans run in a fixed lowest-index-first order, and the only
//! parallel step (per-feature density row sums) writes independent slots.

use serde::Serialize;

use rayon::prelude::*;

use crate::dataset::FeatureKind;
use crate::measures::DissimilarityMatrix;

/// Kernel parameters for the density computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityParams {
    /// Normalization parameter: the kernel bandwidth, the FPS neighborhood
    /// radius, and the coverage radius all use this value.
    pub beta: f64,
    /// Stabilization parameter: sharpens the kernel.
    pub gamma: f64,
}

/// Multiplicative density penalty applied inside a chosen center's
/// neighborhood during the center search.
const SHARING_FACTOR: f64 = 0.5;

/// One feature cluster: a center, its member indices (center included,
/// sorted ascending), and the maximum center-to-member dissimilarity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureCluster {
    pub center: usize,
    pub members: Vec<usize>,
    pub radius: f64,
}

/// A complete clustering of one feature view.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clustering {
    pub clusters: Vec<FeatureCluster>,
    pub params: DensityParams,
    pub kind: FeatureKind,
}

impl Clustering {
    /// Total number of features covered by the clusters.
    pub fn feature_count(&self) -> usize {
        self.clusters.iter().map(|c| c.members.len()).sum()
    }
}

/// Estimate kernel parameters from the matrix: `beta` is the mean
/// off-diagonal dissimilarity (falling back to 1 when every feature is
/// identical or the matrix is smaller than 2x2), `gamma` is fixed at 2.
///
/// The parameter estimation procedure this stands in for is published
/// elsewhere and not reproduced here; the mean dissimilarity is a standard
/// kernel-bandwidth heuristic and both values can be overridden.
pub fn estimate_params(matrix: &DissimilarityMatrix) -> DensityParams {
    let mean = matrix.mean_off_diagonal();
    DensityParams {
        beta: if mean > 0.0 { mean } else { 1.0 },
        gamma: 2.0,
    }
}

/// Kernel density of every feature:
/// `P(f_j) = sum_k exp(-Dist(f_j,f_k)/beta)^gamma = sum_k exp(-gamma Dist/beta)`.
///
/// The self-term contributes exactly 1, so densities live in `[1, m']`.
/// Rows are independent sums over a read-only matrix, so parallel and
/// sequential evaluation are bitwise identical.
pub fn density(matrix: &DissimilarityMatrix, params: &DensityParams) -> Vec<f64> {
    let m = matrix.size();
    let scale = params.gamma / params.beta;
    (0..m)
        .into_par_iter()
        .map(|j| (0..m).map(|k| (-scale * matrix.get(j, k)).exp()).sum())
        .collect()
}

/// Temporary-center search by fitness-proportionate sharing.
///
/// Repeatedly pick the highest-density feature not yet covered by a chosen
/// center (density ties break toward the lowest index), then scale the
/// working density of every feature within dissimilarity `< beta` of the
/// pick (itself included) by the sharing factor and mark them covered. The
/// search stops when every feature is covered, which takes at most `m'`
/// rounds since each pick covers at least itself.
pub fn fps_centers(
    matrix: &DissimilarityMatrix,
    densities: &[f64],
    params: &DensityParams,
) -> Vec<usize> {
    let m = matrix.size();
    let mut working = densities.to_vec();
    let mut covered = vec![false; m];
    let mut centers = Vec::new();
    while let Some(next) = (0..m)
        .filter(|&j| !covered[j])
        .max_by(|&a, &b| working[a].partial_cmp(&working[b]).unwrap().then(b.cmp(&a)))
    {
        centers.push(next);
        for k in 0..m {
            if matrix.get(next, k) < params.beta {
                working[k] *= SHARING_FACTOR;
                covered[k] = true;
            }
        }
    }
    centers
}

/// Assign every feature to its nearest center (distance ties break toward
/// the lower center index). Returned clusters are ordered by center index.
pub fn assign(matrix: &DissimilarityMatrix, centers: &[usize]) -> Vec<FeatureCluster> {
    assert!(!centers.is_empty(), "assign needs at least one center");
    let mut ordered: Vec<usize> = centers.to_vec();
    ordered.sort_unstable();

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); ordered.len()];
    for f in 0..matrix.size() {
        let mut best = 0;
        for (ci, &c) in ordered.iter().enumerate() {
            if matrix.get(f, c) < matrix.get(f, ordered[best]) {
                best = ci;
            }
        }
        members[best].push(f);
    }

    ordered
        .iter()
        .zip(members)
        .filter(|(_, ms)| !ms.is_empty())
        .map(|(&center, ms)| cluster_of(center, ms, matrix))
        .collect()
}

fn cluster_of(center: usize, members: Vec<usize>, matrix: &DissimilarityMatrix) -> FeatureCluster {
    let radius = members
        .iter()
        .map(|&f| matrix.get(center, f))
        .fold(0.0, f64::max);
    FeatureCluster {
        center,
        members,
        radius,
    }
}

/// Merge overlapping clusters to a fixed point: while any pair of clusters
/// has center distance strictly below the sum of their radii, merge the
/// first such pair in lowest-index-first scan order and restart the scan.
/// A merged cluster's center is its highest-density member (ties toward the
/// lowest index) and its radius is recomputed from the new center.
pub fn merge(
    mut clusters: Vec<FeatureCluster>,
    matrix: &DissimilarityMatrix,
    densities: &[f64],
) -> Vec<FeatureCluster> {
    'scan: loop {
        for i in 0..clusters.len() {
            for j in (i + 1)..clusters.len() {
                let d = matrix.get(clusters[i].center, clusters[j].center);
                if d < clusters[i].radius + clusters[j].radius {
                    let second = clusters.remove(j);
                    let first = clusters[i].clone();
                    clusters[i] = merge_pair(first, second, matrix, densities);
                    continue 'scan;
                }
            }
        }
        return clusters;
    }
}

fn merge_pair(
    a: FeatureCluster,
    b: FeatureCluster,
    matrix: &DissimilarityMatrix,
    densities: &[f64],
) -> FeatureCluster {
    let mut members = a.members;
    members.extend(b.members);
    members.sort_unstable();
    let center = members
        .iter()
        .copied()
        .max_by(|&x, &y| densities[x].partial_cmp(&densities[y]).unwrap().then(y.cmp(&x)))
        .expect("merged cluster is nonempty");
    cluster_of(center, members, matrix)
}

/// Run the full clustering pass with estimated parameters.
pub fn cluster_features(matrix: &DissimilarityMatrix) -> Clustering {
    cluster_features_with(matrix, estimate_params(matrix))
}

/// Run the full clustering pass (density, center search, assignment,
/// overlap merge) with explicit parameters. An empty matrix yields an
/// empty clustering: a dataset may lack one feature kind entirely.
pub fn cluster_features_with(matrix: &DissimilarityMatrix, params: DensityParams) -> Clustering {
    assert!(params.beta > 0.0 && params.gamma > 0.0, "kernel parameters must be positive");
    if matrix.size() == 0 {
        return Clustering {
            clusters: Vec::new(),
            params,
            kind: matrix.kind(),
        };
    }
    let densities = density(matrix, &params);
    let centers = fps_centers(matrix, &densities, &params);
    let assigned = assign(matrix, &centers);
    let merged = merge(assigned, matrix, &densities);
    Clustering {
        clusters: merged,
        params,
        kind: matrix.kind(),
    }
}
