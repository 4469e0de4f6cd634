//! Release gate for the whole workspace: eight end-to-end checks covering
//! the information measures, the clustering invariants, recovery of planted
//! structure, accuracy floors on benchmark-shaped data, subset-size bounds,
//! runtime scaling, rank aggregation, and protocol determinism.
//!
//! Each check prints one `[PASS]`/`[FAIL]` line with its measured numbers.
//! The checks share a gate so the timed ones run alone; the suite is meant
//! to be read top to bottom as the crate's contract.

use std::path::Path;
use std::process::Command;
use std::sync::{Mutex, MutexGuard};
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use sfsdfc::dataset::FeatureKind;
use sfsdfc::fclust::cluster_features;
use sfsdfc::measures::{entropy, information_gain, mici, relevance_mi, su, FeatureRef};
use sfsdfc::synth;
use sfsdfc::{
    cross_validate, mean_ranks, run_pipeline, DissimilarityMatrix, EvalOptions, PipelineOptions,
};

// --- pinned tolerances and limits --------------------------------------------

/// Discrete measures must match joint-distribution enumeration this tightly.
const DISCRETE_ORACLE_TOL: f64 = 1e-12;
/// `mici` must match twice the smallest covariance eigenvalue this tightly.
const MICI_ORACLE_TOL: f64 = 1e-9;
/// Wall-clock budget for the measure-oracle sweep, seconds.
const ORACLE_TIME_LIMIT_S: f64 = 10.0;
/// Wall-clock budget for the 500-matrix clustering sweep, seconds.
const CLUSTER_TIME_LIMIT_S: f64 = 30.0;
/// Planted-group recovery must succeed in at least this many of 20 trials.
const RECOVERY_MIN_HITS: usize = 18;
/// Accuracy floor for the selected subset on the 307x35 all-discrete table.
const SOYBEAN_MIN_ACC: f64 = 0.93;
/// Selected-subset accuracy may trail the full set by at most this much.
const SOYBEAN_FULL_GAP: f64 = 0.03;
/// Accuracy floor for the selected subset on the 270x13 mixed table.
const HEART_MIN_ACC: f64 = 0.73;
/// Wall-clock budget per benchmark-shaped dataset, seconds.
const DATASET_TIME_LIMIT_S: f64 = 120.0;
/// Selected-subset cap on the 1473x9 table.
const CONTRACEPTIVE_MAX_SELECTED: usize = 6;
/// Doubling the feature count must multiply runtime by 4 within 35 percent.
const M_RATIO_BOUNDS: (f64, f64) = (2.6, 5.4);
/// Doubling the sample count must multiply runtime by 2 within 35 percent.
const N_RATIO_BOUNDS: (f64, f64) = (1.3, 2.7);

// --- harness ------------------------------------------------------------------

/// The timed checks need the machine to themselves, so every check holds
/// this gate for its whole body. A panicked holder must not wedge the rest.
static GATE: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] {name}: {detail}");
    assert!(pass, "{name}: {detail}");
}

// --- 1: measure oracles -------------------------------------------------------

/// Entropy of a count vector against the given total, straight from the
/// probability definition.
fn oracle_entropy(counts: &[usize], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Visit every 3x3 contingency table whose total is at most `budget`.
fn visit_tables(cells: &mut [usize; 9], idx: usize, budget: usize, visit: &mut impl FnMut(&[usize; 9])) {
    if idx == 8 {
        for last in 0..=budget {
            cells[8] = last;
            visit(cells);
        }
        cells[8] = 0;
        return;
    }
    for v in 0..=budget {
        cells[idx] = v;
        visit_tables(cells, idx + 1, budget - v, visit);
    }
    cells[idx] = 0;
}

/// The discrete measures depend on a column pair only through its joint
/// contingency table (count accumulation is exact and the entropy sums run
/// in fixed count order), so checking one representative pair per table
/// checks every pair of columns with codes below 3 and length up to 12.
#[test]
fn a1_information_measures_match_enumeration_oracles() {
    let _gate = serial();
    let start = Instant::now();

    let mut tables = 0usize;
    let mut worst: (f64, String) = (0.0, String::new());
    let mut fj: Vec<u32> = Vec::with_capacity(12);
    let mut fk: Vec<u32> = Vec::with_capacity(12);

    let mut check = |cells: &[usize; 9]| {
        let total: usize = cells.iter().sum();
        if total < 2 {
            return;
        }
        tables += 1;

        fj.clear();
        fk.clear();
        let mut rows = [0usize; 3];
        let mut cols = [0usize; 3];
        for a in 0..3 {
            for b in 0..3 {
                rows[a] += cells[a * 3 + b];
                cols[b] += cells[a * 3 + b];
                for _ in 0..cells[a * 3 + b] {
                    fj.push(a as u32);
                    fk.push(b as u32);
                }
            }
        }

        let n = total as f64;
        let h_j = oracle_entropy(&rows, n);
        let h_k = oracle_entropy(&cols, n);
        let h_joint = oracle_entropy(cells, n);
        let mi = (h_j + h_k - h_joint).max(0.0);
        let expected_su = if h_j + h_k == 0.0 {
            0.0
        } else {
            (2.0 * mi / (h_j + h_k)).clamp(0.0, 1.0)
        };

        let checks = [
            ("entropy(fj)", (entropy(&fj) - h_j).abs()),
            ("entropy(fk)", (entropy(&fk) - h_k).abs()),
            ("information_gain", (information_gain(&fj, &fk) - mi).abs()),
            ("su", (su(&fj, &fk) - expected_su).abs()),
            (
                "relevance_mi",
                (relevance_mi(FeatureRef::Discrete(&fk), &fj) - mi).abs(),
            ),
        ];
        for (label, dev) in checks {
            if dev > worst.0 {
                worst = (dev, format!("{label} off by {dev:.3e} on table {cells:?}"));
            }
        }
    };
    visit_tables(&mut [0; 9], 0, 12, &mut check);

    // Continuous side: twice the smallest eigenvalue of the 2x2 covariance
    // matrix, recovered independently through the trace and determinant.
    let mut rng = ChaCha8Rng::seed_from_u64(424242);
    let mut worst_mici = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(4..200);
        let sd_a = rng.random_range(0.5..2.0);
        let sd_b = rng.random_range(0.5..2.0);
        let mix = rng.random_range(-1.5..1.5);
        let base = Normal::new(0.0, sd_a).unwrap();
        let noise = Normal::new(0.0, sd_b).unwrap();
        let a: Vec<f64> = (0..n).map(|_| base.sample(&mut rng)).collect();
        let b: Vec<f64> = a
            .iter()
            .map(|&v| mix * v + noise.sample(&mut rng))
            .collect();

        let nf = n as f64;
        let mean = |xs: &[f64]| xs.iter().sum::<f64>() / nf;
        let (ma, mb) = (mean(&a), mean(&b));
        let va = a.iter().map(|&v| (v - ma) * (v - ma)).sum::<f64>() / nf;
        let vb = b.iter().map(|&v| (v - mb) * (v - mb)).sum::<f64>() / nf;
        let cov = a
            .iter()
            .zip(&b)
            .map(|(&x, &y)| (x - ma) * (y - mb))
            .sum::<f64>()
            / nf;
        let trace = va + vb;
        let det = va * vb - cov * cov;
        let lambda_min = (trace - (trace * trace - 4.0 * det).max(0.0).sqrt()) / 2.0;

        let dev = (mici(&a, &b).unwrap() - 2.0 * lambda_min).abs();
        worst_mici = worst_mici.max(dev);
    }

    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst.0 <= DISCRETE_ORACLE_TOL
        && worst_mici <= MICI_ORACLE_TOL
        && elapsed < ORACLE_TIME_LIMIT_S;
    report(
        "a1 measure oracles",
        pass,
        &format!(
            "{tables} joint tables (worst {:.3e}), 1000 covariance pairs (worst {:.3e}), {elapsed:.1}s{}",
            worst.0,
            worst_mici,
            if worst.0 > DISCRETE_ORACLE_TOL { format!("; {}", worst.1) } else { String::new() },
        ),
    );
}

// --- 2: clustering invariants ---------------------------------------------------

#[test]
fn a2_clustering_yields_stable_overlap_free_partitions() {
    let _gate = serial();
    let start = Instant::now();

    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut failures: Vec<String> = Vec::new();
    for trial in 0..500 {
        let m = rng.random_range(2..=30);
        // A coarse grid on some trials forces exact dissimilarity ties.
        let quantize = rng.random_bool(0.3);
        let mut draws: Vec<f64> = Vec::new();
        for _ in 0..m * m {
            let x: f64 = rng.random_range(0.0..1.0);
            draws.push(if quantize { (x * 4.0).round() / 4.0 } else { x });
        }
        let matrix = DissimilarityMatrix::from_fn(m, FeatureKind::Continuous, |j, k| {
            draws[j * m + k]
        });

        let base = cluster_features(&matrix);

        let mut seen = vec![false; m];
        let mut partition_ok = true;
        for cluster in &base.clusters {
            partition_ok &= cluster.members.contains(&cluster.center);
            for &f in &cluster.members {
                partition_ok &= f < m && !seen[f];
                seen[f] = true;
            }
        }
        partition_ok &= seen.iter().all(|&s| s);

        let mut fixed_point_ok = true;
        for (i, a) in base.clusters.iter().enumerate() {
            for b in &base.clusters[i + 1..] {
                fixed_point_ok &= matrix.get(a.center, b.center) >= a.radius + b.radius;
            }
        }

        let single = one.install(|| cluster_features(&matrix));
        let multi = four.install(|| cluster_features(&matrix));
        let deterministic = serde_json::to_string(&single).unwrap()
            == serde_json::to_string(&multi).unwrap()
            && serde_json::to_string(&single).unwrap() == serde_json::to_string(&base).unwrap();

        if !(partition_ok && fixed_point_ok && deterministic) {
            failures.push(format!(
                "trial {trial} (m={m}): partition={partition_ok} fixed_point={fixed_point_ok} deterministic={deterministic}"
            ));
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    let pass = failures.is_empty() && elapsed < CLUSTER_TIME_LIMIT_S;
    report(
        "a2 clustering invariants",
        pass,
        &format!(
            "500 random matrices, {} violations, {elapsed:.1}s{}",
            failures.len(),
            failures.first().map(|f| format!("; first: {f}")).unwrap_or_default(),
        ),
    );
}

// --- 3: planted-group recovery ------------------------------------------------

#[test]
fn a3_pipeline_recovers_planted_redundancy_groups() {
    let _gate = serial();

    let mut hits = 0;
    for seed in 0..20 {
        let (data, groups) = synth::noisy_copies(seed);
        let out = run_pipeline(&data, &PipelineOptions::default()).unwrap();
        let cont = out.cont.as_ref().expect("all features are continuous");
        let clusters = &cont.clustering.clusters;
        let pure = clusters.iter().all(|c| {
            let first = groups[cont.indices[c.members[0]]];
            c.members.iter().all(|&f| groups[cont.indices[f]] == first)
        });
        if clusters.len() == 4 && pure {
            hits += 1;
        }
    }

    report(
        "a3 planted-group recovery",
        hits >= RECOVERY_MIN_HITS,
        &format!("{hits}/20 trials recovered exactly 4 pure clusters (need >= {RECOVERY_MIN_HITS})"),
    );
}

// --- 4: benchmark-shaped accuracy floors ----------------------------------------

fn select_and_score(data: &sfsdfc::Dataset) -> (usize, f64, f64, f64) {
    let start = Instant::now();
    let out = run_pipeline(data, &PipelineOptions::default()).unwrap();
    let subset = out.result.indices();
    let opts = EvalOptions::default();
    let selected = cross_validate(data, &subset, &opts).unwrap();
    let full: Vec<usize> = (0..data.m()).collect();
    let full_report = cross_validate(data, &full, &opts).unwrap();
    (
        subset.len(),
        selected.mean_accuracy,
        full_report.mean_accuracy,
        start.elapsed().as_secs_f64(),
    )
}

#[test]
fn a4_benchmark_shaped_accuracy_floors() {
    let _gate = serial();

    let soy = synth::soybean_like(42);
    let (soy_m, soy_sel, soy_full, soy_t) = select_and_score(&soy);
    let heart = synth::heart_like(42);
    let (heart_m, heart_sel, heart_full, heart_t) = select_and_score(&heart);

    let pass = soy_sel >= SOYBEAN_MIN_ACC
        && soy_sel >= soy_full - SOYBEAN_FULL_GAP
        && heart_sel >= HEART_MIN_ACC
        && soy_t < DATASET_TIME_LIMIT_S
        && heart_t < DATASET_TIME_LIMIT_S;
    report(
        "a4 benchmark-shaped floors",
        pass,
        &format!(
            "307x35 discrete: {soy_m} features, selected {soy_sel:.4} vs full {soy_full:.4} ({soy_t:.1}s); \
             270x13 mixed: {heart_m} features, selected {heart_sel:.4} vs full {heart_full:.4} ({heart_t:.1}s)"
        ),
    );
}

// --- 5: subset-size bounds ------------------------------------------------------

#[test]
fn a5_selected_subset_size_bounds() {
    let _gate = serial();

    let cases = [
        ("soybean_like", synth::soybean_like(42)),
        ("heart_like", synth::heart_like(42)),
        ("contraceptive_like", synth::contraceptive_like(42)),
        ("noisy_copies", synth::noisy_copies(42).0),
    ];

    let mut details = Vec::new();
    let mut pass = true;
    for (name, data) in &cases {
        let out = run_pipeline(data, &PipelineOptions::default()).unwrap();
        let len = out.result.selected.len();
        let clusters = out.result.counts.clusters_cont + out.result.counts.clusters_disc;
        pass &= len >= 1 && len <= 2 * clusters;
        if *name == "contraceptive_like" {
            pass &= len <= CONTRACEPTIVE_MAX_SELECTED;
        }
        details.push(format!("{name} {len} of {} clusters", clusters));
    }

    report("a5 subset-size bounds", pass, &details.join(", "));
}

// --- 6: runtime scaling ---------------------------------------------------------

#[test]
fn a6_runtime_scales_quadratic_in_features_linear_in_samples() {
    let _gate = serial();

    let ms = [50usize, 100, 200];
    let ns = [500usize, 1000, 2000];
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let options = PipelineOptions::default();

    let mut medians = std::collections::BTreeMap::new();
    for &m in &ms {
        for &n in &ns {
            let data = synth::scaling(m, n, 11);
            let mut times: Vec<f64> = (0..5)
                .map(|_| {
                    let t = Instant::now();
                    pool.install(|| run_pipeline(&data, &options)).unwrap();
                    t.elapsed().as_secs_f64()
                })
                .collect();
            times.sort_by(f64::total_cmp);
            medians.insert((m, n), times[2]);
        }
    }

    let mut m_ratios = Vec::new();
    for &n in &ns {
        m_ratios.push(medians[&(100, n)] / medians[&(50, n)]);
        m_ratios.push(medians[&(200, n)] / medians[&(100, n)]);
    }
    let mut n_ratios = Vec::new();
    for &m in &ms {
        n_ratios.push(medians[&(m, 1000)] / medians[&(m, 500)]);
        n_ratios.push(medians[&(m, 2000)] / medians[&(m, 1000)]);
    }

    let span = |rs: &[f64]| {
        let lo = rs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = rs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    };
    let (m_lo, m_hi) = span(&m_ratios);
    let (n_lo, n_hi) = span(&n_ratios);

    let pass = m_lo >= M_RATIO_BOUNDS.0
        && m_hi <= M_RATIO_BOUNDS.1
        && n_lo >= N_RATIO_BOUNDS.0
        && n_hi <= N_RATIO_BOUNDS.1;
    report(
        "a6 runtime scaling",
        pass,
        &format!(
            "feature-doubling ratios {m_lo:.2}..{m_hi:.2} (need {:.1}..{:.1}), \
             sample-doubling ratios {n_lo:.2}..{n_hi:.2} (need {:.1}..{:.1})",
            M_RATIO_BOUNDS.0, M_RATIO_BOUNDS.1, N_RATIO_BOUNDS.0, N_RATIO_BOUNDS.1,
        ),
    );
}

// --- 7: rank aggregation --------------------------------------------------------

#[test]
fn a7_mean_ranks_match_hand_computed_table() {
    let _gate = serial();

    // Accuracy percentages for six selection methods on thirteen datasets;
    // the expected means were computed by hand from the per-row orderings.
    let methods: Vec<String> = ["mrmr", "cfs", "relief", "rfs", "frs", "dfc"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let table = vec![
        vec![43.99, 38.48, 36.38, 35.60, 48.09, 47.55],
        vec![53.47, 53.68, 54.47, 61.57, 60.67, 61.74],
        vec![48.77, 54.53, 47.48, 52.52, 57.33, 57.55],
        vec![67.42, 69.63, 63.33, 83.33, 81.48, 80.14],
        vec![67.02, 70.68, 68.56, 72.65, 71.13, 71.78],
        vec![47.14, 56.57, 66.08, 71.71, 75.67, 72.97],
        vec![63.09, 63.33, 62.85, 61.67, 57.14, 63.81],
        vec![71.51, 69.79, 69.50, 68.94, 74.29, 70.65],
        vec![80.22, 71.94, 70.55, 78.23, 83.12, 75.46],
        vec![68.34, 70.50, 68.10, 59.40, 68.40, 70.60],
        vec![46.57, 45.68, 46.64, 42.97, 48.50, 49.62],
        vec![73.33, 72.50, 71.95, 74.89, 77.45, 77.89],
        vec![96.12, 96.85, 96.44, 97.05, 97.47, 97.58],
    ];
    let expected = [4.31, 4.00, 4.92, 3.77, 2.23, 1.77];

    let ranks = mean_ranks(&methods, &table).unwrap();
    let rounded: Vec<f64> = ranks
        .mean_ranks
        .iter()
        .map(|r| (r * 100.0).round() / 100.0)
        .collect();
    let pass = rounded == expected;
    report(
        "a7 rank aggregation",
        pass,
        &format!("mean ranks {rounded:?} (expected {expected:?})"),
    );
}

// --- 8: protocol determinism ----------------------------------------------------

fn eval_accuracies(bin: &str, csv: &Path, schema: &Path, out: &Path, threads: &str) -> String {
    let output = Command::new(bin)
        .args([
            "eval",
            "--input",
            csv.to_str().unwrap(),
            "--schema",
            schema.to_str().unwrap(),
            "--seed",
            "7",
            "--output",
            out.to_str().unwrap(),
        ])
        .env("RAYON_NUM_THREADS", threads)
        .output()
        .expect("spawning the eval command");
    assert!(
        output.status.success(),
        "eval command failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let artifact: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    serde_json::to_string(&artifact["accuracies"]).unwrap()
}

#[test]
fn a8_eval_command_is_deterministic_across_runs_and_threads() {
    let _gate = serial();

    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("heart_like.csv");
    let schema = dir.path().join("heart_like.schema");
    let data = synth::heart_like(42);
    data.write_csv(&csv).unwrap();
    data.write_schema(&schema).unwrap();

    let bin = env!("CARGO_BIN_EXE_sfsdfc");
    let first = eval_accuracies(bin, &csv, &schema, &dir.path().join("a.json"), "4");
    let second = eval_accuracies(bin, &csv, &schema, &dir.path().join("b.json"), "4");
    let single = eval_accuracies(bin, &csv, &schema, &dir.path().join("c.json"), "1");

    let pass = first == second && first == single;
    report(
        "a8 protocol determinism",
        pass,
        &format!(
            "accuracy matrices byte-identical across two runs and 1 vs 4 threads ({} bytes)",
            first.len()
        ),
    );
}
