//! Command-line front end: device description files, report documents and
//! the verification subcommands.

pub mod commands;
pub mod device_spec;
pub mod report;

pub use commands::{run_command, Cli, Command, CommandOutput};
pub use device_spec::{parse_device_spec, DeviceSpecDocument, SpecError};
pub use report::{emit_report, Format, ReportDocument, Table};
