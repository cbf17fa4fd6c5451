use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{io_error, CliError};
use crate::manifest::Run;

pub fn read_bytes(path: &Path, run: &mut Run) -> Result<Vec<u8>, CliError> {
    let bytes = std::fs::read(path).map_err(|e| io_error(path, e))?;
    run.input(&path.display().to_string(), &bytes);
    Ok(bytes)
}

pub fn read_text(path: &Path, run: &mut Run) -> Result<String, CliError> {
    String::from_utf8(read_bytes(path, run)?)
        .map_err(|_| CliError::Input(format!("{}: not UTF-8", path.display())))
}

pub fn read_json<T: DeserializeOwned>(path: &Path, run: &mut Run) -> Result<T, CliError> {
    let text = read_text(path, run)?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn write_bytes(path: &Path, bytes: &[u8], run: &mut Run) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| io_error(path, e))?;
    run.output(path);
    Ok(())
}

pub fn write_json(path: &Path, value: &impl Serialize, run: &mut Run) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_bytes(path, text.as_bytes(), run)
}
