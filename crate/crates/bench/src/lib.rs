//! Criterion benchmarks for `weyl-core`; see `benches/`.
