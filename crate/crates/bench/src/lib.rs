//! Timing benchmarks live in `benches/`; run them with `cargo bench -p wsquad-bench`.
