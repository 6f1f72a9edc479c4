//! Benchmark-only crate; see `benches/ford.rs`.
