//! Command-line front end for `qcf-core`: manifold sources (presets and
//! chart-spec JSON), report formatting, property suites and the oracle
//! ledger.

pub mod cli;
pub mod format;
pub mod ledger;
pub mod report;
pub mod source;
pub mod suites;
