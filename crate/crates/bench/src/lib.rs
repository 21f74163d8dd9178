//! Criterion benchmarks for synthesis, processing and pathway enumeration.
//! Run with `cargo bench -p stmas-bench`.
