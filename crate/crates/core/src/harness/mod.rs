//! Experiment plumbing: scan configuration, result files, and the verification suites.

mod config;
mod scan;
mod verify;

pub use config::{Format, IndexSelection, ScanConfig, ScanOverrides, Tolerances};
pub use scan::{determinism_hash, read_rows, run_scan, scan_rows, write_rows, ResultRow, ScanSummary, CSV_HEADER};
pub use verify::{
    bgs_instance_random, convolution_check, duality_check, parseval_check, random_measure, run_suite, run_verify,
    Suite, SuiteResult, VerifyReport,
};
