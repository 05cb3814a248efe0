//! End-to-end acceptance checks for the `dirclosure` crate; see `tests/acceptance.rs`.
