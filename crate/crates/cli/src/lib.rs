//! Problem-file driver for `nielsen-core`: parsing, command dispatch and
//! report emission.

use std::fmt;
use std::str::FromStr;

use clap::ValueEnum;

pub mod problem;
pub mod report;
pub mod run;

pub use problem::{parse_spec, ProblemError, ProblemFile};
pub use report::{emit_report, Format, Report};
pub use run::{run_command, Options, RunError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Check every section of the file.
    Validate,
    /// Netness / NR verdict per tower level.
    Netness,
    /// Coincidence number of branch 1 with the `[coincidence]` map.
    Coincidence,
    /// Coincidence number of branch 1 with the covering projection.
    Projection,
    /// Nielsen number of the (n-valued) map given by the branches.
    Nielsen,
    /// Averaging and Reidemeister cross-checks of the Nielsen number.
    Oracle,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Netness => "netness",
            Command::Coincidence => "coincidence",
            Command::Projection => "projection",
            Command::Nielsen => "nielsen",
            Command::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <Command as ValueEnum>::from_str(s, false).map_err(|_| format!("unknown command `{s}`"))
    }
}

/// Process exit statuses.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const IO: i32 = 1;
    pub const SYNTAX: i32 = 3;
    pub const SEMANTIC: i32 = 4;
    pub const COMPUTATION: i32 = 5;
    pub const ORACLE_MISMATCH: i32 = 6;
}
