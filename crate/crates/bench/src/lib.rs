//! Criterion benchmarks for the repeater engine live in `benches/`.
