//! Criterion benchmarks for the classifier and the regularized flow live in
//! `benches/`.
