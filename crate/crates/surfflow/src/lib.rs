//! Configuration, file formats and run orchestration around
//! [`surfflow_core`]. The `surfflow` binary is a thin layer over
//! [`runner::run_to_dir`], [`ops::operator_checks`] and the sweep helpers in
//! [`config`].

mod atomic;
pub mod config;
mod error;
pub mod invariants;
pub mod ledger_csv;
pub mod manifest;
pub mod obj;
pub mod ops;
pub mod runner;
pub mod svg;

pub use atomic::write_atomic;
pub use error::{IoError, IoResult};
