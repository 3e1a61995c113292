//! Criterion benchmarks for idbound live under `benches/`.
