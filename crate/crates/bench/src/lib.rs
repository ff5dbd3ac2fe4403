//! Criterion benchmarks for `kwidth-core`; see `benches/`.
