//! Command-line plumbing for boundary forests: LIBSVM ingestion, train/eval
//! runs, benchmark sweeps, and machine-readable reports.

pub mod bench;
pub mod dataset;
pub mod report;
pub mod run;
