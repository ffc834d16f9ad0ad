//! Benchmark-only crate; see `benches/evaluation.rs`.
