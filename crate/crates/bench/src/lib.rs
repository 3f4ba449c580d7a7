//! Criterion benchmarks for `delaylight` live in `benches/`.
