//! Criterion benchmarks for `fracconv`; see `benches/`.
