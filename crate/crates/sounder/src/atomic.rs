//! Whole-file writes that never leave a half-written target behind.

use std::io::Write;
use std::path::Path;

use crate::error::{Result, SounderError};

/// Writes `bytes` to a temporary file next to `path`, then renames it over
/// `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| SounderError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| SounderError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| SounderError::io(path, e))?;
    tmp.persist(path).map_err(|e| SounderError::io(path, e.error))?;
    Ok(())
}

pub fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| SounderError::io(path, e))
}
