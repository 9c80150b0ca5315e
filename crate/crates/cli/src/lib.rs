//! Library side of the CLI: config ingestion, run manifests and the
//! deterministic writers. The binary in `main.rs` wires these to the
//! subcommands; integration tests reuse them directly.

pub mod config;
pub mod manifest;
pub mod output;
