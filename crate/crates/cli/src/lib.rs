//! Library side of the `fedosov-lab` command-line tool: expression parsing,
//! suite configuration, suite runners and report emission.

pub mod config;
pub mod expr;
pub mod report;
pub mod suites;

pub use config::{Command, ConfigError, Format, Levels, SuiteConfig};
pub use expr::{parse_expression, ParseError};
pub use report::{emit, Report, Row, Status};
pub use suites::run;
