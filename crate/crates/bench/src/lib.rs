//! Criterion benchmarks for the filter recursion, the birth models, the
//! metrics and whole simulated trials. Run with `cargo bench -p soa-phd-bench`.
