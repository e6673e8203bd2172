//! File formats, the benchmark harness and the command line front end for
//! `bnci-core`.

pub mod arcs;
pub mod bench;
pub mod bif;
pub mod error;
pub mod table;

pub use arcs::{emit_arcs, parse_arcs};
pub use bench::{run_protocol, summarize, BenchRecord, Protocol};
pub use bif::{emit_bif, parse_bif};
pub use error::{Error, Result};
pub use table::{load_csv, parse_levels, write_csv};
