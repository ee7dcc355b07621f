//! Holds the end-to-end acceptance test (`tests/acceptance.rs`). It runs
//! after every other crate's tests in a workspace run.
