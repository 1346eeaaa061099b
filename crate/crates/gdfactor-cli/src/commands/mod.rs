//! Subcommand implementations. Each command reads its parameters from the
//! shared key=value config (flags already merged in), runs, prints a
//! summary, writes CSV/SVG artifacts when an output directory is set, and
//! returns a typed outcome for library callers (the integration tests drive
//! the commands through these functions directly).

pub mod demo;
pub mod init_compare;
pub mod psd;
pub mod schedule_report;
pub mod sweep;
