//! Criterion benchmarks for the packing solvers; see `benches/`.
