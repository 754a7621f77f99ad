//! Benchmark-only crate; see benches/simulator.rs.
