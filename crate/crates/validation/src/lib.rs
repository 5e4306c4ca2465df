//! Holds the `acceptance` integration test; no library code.
//!
//! The checks live in their own package so that `cargo test --workspace`
//! runs them after every unit and property test.
