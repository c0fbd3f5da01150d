use std::io::Write;
use std::path::Path;

use serde_json::Value;
use tempfile::NamedTempFile;

use crate::CliError;

/// Write `contents` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let fail = |e: &dyn std::fmt::Display| {
        CliError::validation(format!("cannot write {}: {e}", dir.join(name).display()))
    };
    std::fs::create_dir_all(dir).map_err(|e| fail(&e))?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| fail(&e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| fail(&e))?;
    tmp.persist(dir.join(name)).map_err(|e| fail(&e.error))?;
    Ok(())
}

/// Print to stdout; a closed pipe is not an error worth reporting.
pub fn print_json(doc: &Value) {
    let text = serde_json::to_string_pretty(doc).expect("JSON values always serialize");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

pub fn print_text(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}
