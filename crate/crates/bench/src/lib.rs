//! Criterion benchmarks for `aqrm-core`; see `benches/`.
