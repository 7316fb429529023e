//! Criterion benchmarks for critprobe; see `benches/`.
