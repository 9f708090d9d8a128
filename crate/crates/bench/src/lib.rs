//! Criterion benchmarks for the forward pass, backprop, the baselines and batched prediction; see `benches/`.
