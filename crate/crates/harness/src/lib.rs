//! Experiment harness for the [`phieb`] exploration library.
//!
//! The core crate knows nothing about files, threads, or processes; this
//! companion crate adds the operational layer:
//!
//! * [`config`] — JSON experiment configs with per-architecture
//!   defaults and validation;
//! * [`runner`] — multi-trial parallel execution, CSV learning curves,
//!   summaries, and beta sweeps;
//! * [`oracle`] — deliberately naive reference computations that tests
//!   check the optimised library against.
//!
//! The `phieb` binary in this crate exposes all of it on the command
//! line; see the repository README for usage.

#![deny(missing_docs)]

pub mod config;
pub mod oracle;
pub mod runner;
