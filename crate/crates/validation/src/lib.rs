//! Holds the `acceptance` test target. The package sorts after the library
//! crates, so their tests run first under `cargo test --workspace`.
