//! Benchmarks for `duem-core`; see `benches/consensus.rs`.
