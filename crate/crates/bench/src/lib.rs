//! Criterion benchmarks for `kelly-market`; see `benches/`.
