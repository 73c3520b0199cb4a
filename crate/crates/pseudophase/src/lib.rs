//! File formats, netlist parsing and command-line orchestration on top of
//! [`pseudophase_core`].

pub mod cli;
pub mod diag;
pub mod formats;
pub mod netlist;
pub mod runner;

pub use diag::{Diagnostic, Severity};
pub use netlist::{parse_netlist, pretty_print};
pub use pseudophase_core;
