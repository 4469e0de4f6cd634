//! Benchmark-only crate; the measurements live in `benches/pipeline.rs`.
//!
//! Run with `cargo bench -p sfsdfc-bench`. All inputs are generated from
//! fixed seeds so timings are comparable across machines and runs.
