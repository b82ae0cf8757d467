//! Criterion benchmarks for the qltc kernels; see `benches/`.
