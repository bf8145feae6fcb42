//! Version manifests: one knowledge-base file path per line, oldest first.
//! Blank lines and lines starting with `#` are ignored.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ManifestError {
    #[error("manifest is not valid UTF-8 (byte {0})")]
    NotUtf8(usize),
    #[error("manifest line {0}: path contains a NUL byte")]
    BadPath(usize),
    #[error("manifest lists no version files")]
    Empty,
}

/// Version file paths in declared (chronological) order, exactly as written.
pub fn load_manifest(bytes: &[u8]) -> Result<Vec<PathBuf>, ManifestError> {
    let text = std::str::from_utf8(bytes).map_err(|e| ManifestError::NotUtf8(e.valid_up_to()))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let entry = line.trim();
        if entry.is_empty() || entry.starts_with('#') {
            continue;
        }
        if entry.contains('\0') {
            return Err(ManifestError::BadPath(n + 1));
        }
        out.push(PathBuf::from(entry));
    }
    if out.is_empty() {
        return Err(ManifestError::Empty);
    }
    Ok(out)
}
