//! Regenerate the bundled synthetic benchmark suite.
//!
//! Usage: `cargo run -p sfsdfc --example gen_datasets [DIR]` (default
//! `data/`). Seeds are fixed, so the files are byte-stable; the heart-shaped
//! table also gets a schema sidecar to exercise the declared-kinds path.

use std::path::PathBuf;

use sfsdfc::synth;

fn main() {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data"));
    std::fs::create_dir_all(&dir).expect("creating the output directory");

    let soybean = synth::soybean_like(42);
    soybean
        .write_csv(&dir.join("soybean_like.csv"))
        .expect("writing soybean_like.csv");

    let heart = synth::heart_like(42);
    heart
        .write_csv(&dir.join("heart_like.csv"))
        .expect("writing heart_like.csv");
    heart
        .write_schema(&dir.join("heart_like.schema"))
        .expect("writing heart_like.schema");

    let contraceptive = synth::contraceptive_like(42);
    contraceptive
        .write_csv(&dir.join("contraceptive_like.csv"))
        .expect("writing contraceptive_like.csv");

    println!(
        "wrote 3 datasets to {} (soybean 307x35, heart 270x13, contraceptive 1473x9)",
        dir.display()
    );
}
