//! Multi-party harness, socket transport, benchmarks and property suites
//! for the protocols in `oblivis-core`.

pub mod bench;
pub mod harness;
pub mod verify;

pub use oblivis_core as core;
