//! Pairwise feature dissimilarity and feature-label relevance.
//!
//! Continuous pairs are scored with a compression index equal to twice the
//! smallest eigenvalue of their 2x2 covariance matrix; on standardized
//! columns, half that value is exactly `1 - |rho|`, giving a dissimilarity
//! in [0,1]. Discrete pairs are scored with symmetric uncertainty (entropy
//! normalized mutual information), complemented into a dissimilarity.
//! Feature-label relevance is mutual information in bits; continuous
//! features are binned with an equal-frequency cut before the count.
//!
//! All entropies use log base 2. Any fixed base would do (similarity
//! rankings are base-invariant) but one base keeps reports reproducible.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;

use crate::dataset::{ContinuousView, DiscreteView, FeatureKind};
use crate::error::Error;
use crate::Result;

// --- continuous measures ---------------------------------------------------

fn check_pair(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(Error::ShortColumn);
    }
    Ok(())
}

fn population_moments(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|&v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

/// Product-moment correlation, clamped to [-1,1] against rounding.
/// Population variance convention throughout.
pub fn pearson(fj: &[f64], fk: &[f64]) -> Result<f64> {
    check_pair(fj, fk)?;
    let (mj, vj) = population_moments(fj);
    let (mk, vk) = population_moments(fk);
    if vj == 0.0 || vk == 0.0 {
        return Err(Error::ConstantColumn);
    }
    let n = fj.len() as f64;
    let cov = fj
        .iter()
        .zip(fk)
        .map(|(&a, &b)| (a - mj) * (b - mk))
        .sum::<f64>()
        / n;
    Ok((cov / (vj * vk).sqrt()).clamp(-1.0, 1.0))
}

/// Information compression index of a continuous pair:
/// `Var(fj) + Var(fk) - sqrt((Var(fj)+Var(fk))^2 - 4 Var(fj) Var(fk) (1-rho^2))`,
/// which equals twice the smallest eigenvalue of the pair's covariance
/// matrix. Zero means one feature is a linear function of the other. The
/// radicand is clamped at zero against rounding.
pub fn mici(fj: &[f64], fk: &[f64]) -> Result<f64> {
    let rho = pearson(fj, fk)?;
    let (_, vj) = population_moments(fj);
    let (_, vk) = population_moments(fk);
    let sum = vj + vk;
    let radicand = (sum * sum - 4.0 * vj * vk * (1.0 - rho * rho)).max(0.0);
    Ok((sum - radicand.sqrt()).max(0.0))
}

/// Dissimilarity of a standardized continuous pair: `mici/2`, which on
/// unit-variance columns reduces to `1 - |rho|`. Clamped to [0,1].
pub fn cont_dissimilarity(fj: &[f64], fk: &[f64]) -> Result<f64> {
    Ok((mici(fj, fk)? / 2.0).clamp(0.0, 1.0))
}

// --- discrete measures ------------------------------------------------------

/// Codes are usually contiguous and small, so plain count arrays beat tree
/// maps by a wide margin; fall back to a map only for sparse code spaces.
fn dense_alphabet(f: &[u32]) -> Option<usize> {
    let max = *f.iter().max()? as usize;
    if max < 4 * f.len() + 64 {
        Some(max + 1)
    } else {
        None
    }
}

fn entropy_of_counts<'a>(counts: impl Iterator<Item = &'a usize>, n: f64) -> f64 {
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / n;
            h -= p * p.log2();
        }
    }
    h
}

/// Shannon entropy of an integer-coded column, in bits.
pub fn entropy(f: &[u32]) -> f64 {
    if f.is_empty() {
        return 0.0;
    }
    let n = f.len() as f64;
    match dense_alphabet(f) {
        Some(size) => {
            let mut counts = vec![0usize; size];
            for &v in f {
                counts[v as usize] += 1;
            }
            entropy_of_counts(counts.iter(), n)
        }
        None => {
            let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
            for &v in f {
                *counts.entry(v).or_insert(0) += 1;
            }
            entropy_of_counts(counts.values(), n)
        }
    }
}

/// Information gained about `fj` by observing `fk`: `H(fj) - H(fj|fk)`,
/// from the joint contingency table. Symmetric in its arguments (this is
/// the mutual information); never negative.
pub fn information_gain(fj: &[u32], fk: &[u32]) -> f64 {
    assert_eq!(fj.len(), fk.len(), "columns must have equal length");
    if fj.is_empty() {
        return 0.0;
    }
    let n = fj.len() as f64;
    let dense = match (dense_alphabet(fj), dense_alphabet(fk)) {
        (Some(rows), Some(cols)) if rows.saturating_mul(cols) <= 16 * fj.len() + 1024 => {
            Some((rows, cols))
        }
        _ => None,
    };
    let conditional = match dense {
        Some((rows, cols)) => {
            let mut joint = vec![0usize; rows * cols];
            let mut group_sizes = vec![0usize; cols];
            for (&a, &b) in fj.iter().zip(fk) {
                joint[b as usize * rows + a as usize] += 1;
                group_sizes[b as usize] += 1;
            }
            let mut conditional = 0.0;
            for b in 0..cols {
                if group_sizes[b] > 0 {
                    let h = entropy_of_counts(
                        joint[b * rows..(b + 1) * rows].iter(),
                        group_sizes[b] as f64,
                    );
                    conditional += (group_sizes[b] as f64 / n) * h;
                }
            }
            conditional
        }
        None => {
            let mut groups: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
            for (&a, &b) in fj.iter().zip(fk) {
                groups.entry(b).or_default().push(a);
            }
            let mut conditional = 0.0;
            for group in groups.values() {
                conditional += (group.len() as f64 / n) * entropy(group);
            }
            conditional
        }
    };
    (entropy(fj) - conditional).max(0.0)
}

/// Symmetric uncertainty: `2 * gain / (H(fj) + H(fk))`, in [0,1]. One for
/// identical partitions, zero for independent columns. When both columns
/// are constant the ratio is 0/0; that case is defined as 0 (no shared
/// information) since constant features carry nothing to share.
pub fn su(fj: &[u32], fk: &[u32]) -> f64 {
    let h_sum = entropy(fj) + entropy(fk);
    if h_sum == 0.0 {
        log::warn!("symmetric uncertainty of two constant columns defined as 0");
        return 0.0;
    }
    (2.0 * information_gain(fj, fk) / h_sum).clamp(0.0, 1.0)
}

/// Dissimilarity of a discrete pair: `1 - su`.
pub fn disc_dissimilarity(fj: &[u32], fk: &[u32]) -> f64 {
    (1.0 - su(fj, fk)).clamp(0.0, 1.0)
}

// --- discretization and relevance -------------------------------------------

/// Default bin count for equal-frequency cuts: `ceil(sqrt(n))`.
pub fn default_bins(n: usize) -> usize {
    ((n as f64).sqrt().ceil() as usize).max(2)
}

/// Equal-frequency binning of a continuous column into at most
/// `min(bins, distinct values)` codes.
///
/// Every occurrence of a value lands in the same bin (a value's bin comes
/// from the rank of its first occurrence in sorted order), so a duplicate
/// mass heavier than a bin can shrink the realized bin count below the cap,
/// the usual quantile-cut behavior. Codes are contiguous from 0 in value
/// order.
pub fn discretize(f: &[f64], bins: usize) -> Vec<u32> {
    let n = f.len();
    if n == 0 {
        return Vec::new();
    }
    let bins = bins.max(1);

    let mut sorted: Vec<f64> = f.iter().map(|&v| v + 0.0).collect();
    sorted.sort_by(f64::total_cmp);

    // Distinct values with the rank of their first occurrence.
    let mut distinct: Vec<(f64, usize)> = Vec::new();
    for (rank, &v) in sorted.iter().enumerate() {
        if distinct.last().map(|&(d, _)| d == v) != Some(true) {
            distinct.push((v, rank));
        }
    }

    // Raw quantile bin per distinct value, then squeeze the used bins into
    // a contiguous code range.
    let raw: Vec<usize> = distinct
        .iter()
        .map(|&(_, rank)| rank * bins / n)
        .collect();
    let mut code_of_raw: BTreeMap<usize, u32> = BTreeMap::new();
    for &r in &raw {
        let next = code_of_raw.len() as u32;
        code_of_raw.entry(r).or_insert(next);
    }

    f.iter()
        .map(|&v| {
            let v = v + 0.0;
            let pos = distinct
                .binary_search_by(|&(d, _)| d.total_cmp(&v))
                .expect("value present in its own distinct set");
            code_of_raw[&raw[pos]]
        })
        .collect()
}

/// A borrowed feature column of either kind, for relevance scoring.
#[derive(Debug, Clone, Copy)]
pub enum FeatureRef<'a> {
    Continuous(&'a [f64]),
    Discrete(&'a [u32]),
}

/// Mutual information between a feature and the class labels, in bits:
/// `I(Y;f) = H(Y) - H(Y|f)`. Continuous features are first cut into
/// `ceil(sqrt(n))` equal-frequency bins.
pub fn relevance_mi(f: FeatureRef<'_>, labels: &[u32]) -> f64 {
    match f {
        FeatureRef::Discrete(codes) => information_gain(labels, codes),
        FeatureRef::Continuous(values) => {
            let codes = discretize(values, default_bins(values.len()));
            information_gain(labels, &codes)
        }
    }
}

// --- dissimilarity matrix ----------------------------------------------------

/// Dense symmetric dissimilarity matrix over the features of one kind.
/// Entries live in [0,1] with a zero diagonal; each off-diagonal pair is
/// computed once and mirrored, so symmetry is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    size: usize,
    kind: FeatureKind,
    values: Vec<f64>,
}

impl DissimilarityMatrix {
    /// Build a matrix from an upper-triangle generator (used by tests and
    /// synthetic benchmarks). `f(j,k)` is consulted only for `j < k`.
    pub fn from_fn(size: usize, kind: FeatureKind, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DissimilarityMatrix {
            size,
            kind,
            values: vec![0.0; size * size],
        };
        for j in 0..size {
            for k in (j + 1)..size {
                let v = f(j, k).clamp(0.0, 1.0);
                m.values[j * size + k] = v;
                m.values[k * size + j] = v;
            }
        }
        m
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.values[j * self.size + k]
    }

    /// Mean of the off-diagonal entries; 0 for matrices smaller than 2x2.
    pub fn mean_off_diagonal(&self) -> f64 {
        if self.size < 2 {
            return 0.0;
        }
        let mut sum = 0.0;
        for j in 0..self.size {
            for k in (j + 1)..self.size {
                sum += self.get(j, k);
            }
        }
        let pairs = (self.size * (self.size - 1) / 2) as f64;
        sum / pairs
    }

    /// Dump the matrix as CSV with feature names as the header row and a
    /// leading name column (debugging aid).
    pub fn write_csv(&self, path: &Path, names: &[String]) -> Result<()> {
        assert_eq!(names.len(), self.size, "one name per feature");
        let mut w = csv::Writer::from_path(path).map_err(Error::Csv)?;
        let mut header = vec!["feature".to_string()];
        header.extend_from_slice(names);
        w.write_record(&header)?;
        for j in 0..self.size {
            let mut rec = vec![names[j].clone()];
            for k in 0..self.size {
                rec.push(format!("{}", self.get(j, k)));
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Ok(())
    }
}

/// A borrowed per-kind view, input to [`dissimilarity_matrix`].
#[derive(Debug, Clone, Copy)]
pub enum KindView<'a> {
    /// Must be standardized (see [`crate::dataset::standardize`]) with
    /// constant columns removed.
    Continuous(&'a ContinuousView),
    /// Single-code columns must have been removed.
    Discrete(&'a DiscreteView),
}

/// Build the full dissimilarity matrix of one feature view. Pairs are
/// computed independently (possibly in parallel) and written to fixed
/// positions, so the result is bitwise identical at any thread count.
pub fn dissimilarity_matrix(view: KindView<'_>) -> Result<DissimilarityMatrix> {
    let (size, kind) = match view {
        KindView::Continuous(v) => (v.len(), FeatureKind::Continuous),
        KindView::Discrete(v) => (v.len(), FeatureKind::Discrete),
    };
    let pairs: Vec<(usize, usize)> = (0..size)
        .flat_map(|j| ((j + 1)..size).map(move |k| (j, k)))
        .collect();
    let computed: Result<Vec<f64>> = pairs
        .par_iter()
        .map(|&(j, k)| match view {
            KindView::Continuous(v) => cont_dissimilarity(&v.columns[j], &v.columns[k]),
            KindView::Discrete(v) => Ok(disc_dissimilarity(&v.columns[j], &v.columns[k])),
        })
        .collect();
    let computed = computed?;

    let mut m = DissimilarityMatrix {
        size,
        kind,
        values: vec![0.0; size * size],
    };
    for (&(j, k), &v) in pairs.iter().zip(&computed) {
        m.values[j * size + k] = v;
        m.values[k * size + j] = v;
    }
    Ok(m)
}
