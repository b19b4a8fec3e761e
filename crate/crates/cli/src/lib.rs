//! Command-line front end of `tprabi-core`: configuration, sweeps and
//! CSV/JSON output.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{run, RunError};
pub use config::{Command, ConfigError, Format, RunConfig};
pub use output::{to_csv, to_json, Cell, Table};

/// Renders a finished table with the configuration echo as header.
pub fn render(cfg: &RunConfig, table: &Table) -> String {
    let mut meta = cfg.echo();
    meta.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    match cfg.format {
        Format::Csv => to_csv(table, &meta),
        Format::Json => to_json(table, &meta),
    }
}
