//! Data files, experiment harness and command-line front end for the ESPC
//! learned index. The algorithms live in [`espc_core`].

pub mod bench;
pub mod cli;
pub mod data;

pub use espc_core;
