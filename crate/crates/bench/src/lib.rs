//! Criterion benchmarks for the `deepssm` library; see `benches/`.
