//! Criterion benchmarks for the `schatten-core` kernels; see `benches/`.
