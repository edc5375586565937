//! Benchmarks for the hjortic engine; see `benches/engine.rs`.
