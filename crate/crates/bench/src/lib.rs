//! Criterion benchmarks for `sumform`; see `benches/`.
