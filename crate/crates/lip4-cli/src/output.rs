//! Output plumbing shared by the subcommands: format selection and
//! file-or-stdout emission.

use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutFormat {
    Csv,
    Json,
}

/// Writes to `out` when given, stdout otherwise.
pub fn emit(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, content)
                .map_err(|e| CliError::Input(format!("cannot write {path:?}: {e}")))?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(content.as_bytes())
                .and_then(|_| {
                    if content.ends_with('\n') {
                        Ok(())
                    } else {
                        lock.write_all(b"\n")
                    }
                })
                .map_err(|e| CliError::Input(e.to_string()))?;
        }
    }
    Ok(())
}

pub fn emit_json<T: serde::Serialize>(out: Option<&Path>, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Numeric(format!("cannot serialize report: {e}")))?;
    emit(out, &text)
}
