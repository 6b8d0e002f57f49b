use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::SCHEMA_VERSION;
use crate::error::CliError;

#[derive(Args, Debug, Default, Clone)]
pub struct OutputArgs {
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the CSV table here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Wraps a result with the schema version and the resolved configuration.
pub fn report<C: Serialize>(command: &str, config: &C, result: Value) -> Value {
    json!({
        "schema": SCHEMA_VERSION,
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "result": result,
    })
}

pub fn emit(report: &Value, out: &OutputArgs) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(report).expect("report is valid JSON");
    match &out.out {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e)),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// CSV tables start with a comment line carrying the schema and config.
pub fn write_csv<C, F>(path: &Path, command: &str, config: &C, body: F) -> Result<(), CliError>
where
    C: Serialize,
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let header = json!({"schema": SCHEMA_VERSION, "command": command, "config": config});
    writeln!(w, "# {header}").and_then(|_| body(&mut w)).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

/// Serializes `rows` with the `csv` crate into `w`.
pub fn csv_rows<T: Serialize>(w: &mut dyn Write, rows: &[T]) -> std::io::Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    for r in rows {
        writer.serialize(r).map_err(std::io::Error::other)?;
    }
    writer.flush()
}
