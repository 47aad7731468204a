//! Atomic output files.

use std::fs;
use std::io::Write;
use std::path::Path;

use tempfile::NamedTempFile;

use crate::error::Result;

/// Writes `bytes` to `dir/name` through a temporary file in the same
/// directory followed by a rename, so readers never see a partial file.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(dir.join(name)).map_err(|e| e.error)?;
    Ok(())
}

/// Rounds to the 9 significant digits used by every CSV, so JSON data
/// agrees with it.
pub fn sig9(x: f64) -> f64 {
    if x.is_finite() {
        ppvl::grid::fmt_sig(x).parse().unwrap_or(x)
    } else {
        x
    }
}
