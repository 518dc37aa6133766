//! Empty library crate; the package exists to host the criterion
//! benchmarks under `benches/`.
