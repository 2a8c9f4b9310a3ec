//! Std companion to `lpp-core`: sampling experiments, reference spectra,
//! file formats, and the CLI plumbing shared by the binaries.

pub use lpp_core;

pub mod calib;
pub mod config;
pub mod experiments;
pub mod io;
pub mod oracle;
pub mod report;
pub mod runner;
pub mod stats;
