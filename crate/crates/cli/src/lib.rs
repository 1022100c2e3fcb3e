//! Command-line frontend for `qexpander`: ensemble files, composition
//! commands and run reports.

pub mod commands;
pub mod format;
pub mod report;

pub use commands::{run, Cli, Command};
pub use format::{read_ensemble, read_file, write_ensemble, Encoding, EnsembleFile, FormatError};
pub use report::{ReportRow, RunReport, ValueTag};

/// Exit status for a run whose checks failed.
pub const EXIT_VERIFICATION_FAILED: u8 = 1;
/// Exit status for usage and I/O errors.
pub const EXIT_USAGE: u8 = 2;
