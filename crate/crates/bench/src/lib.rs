//! Benchmark-only crate; see `benches/model.rs` for the measurements.
