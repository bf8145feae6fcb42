//! File formats: `.cgx` knowledge-base versions and version manifests.

mod cgx;
mod manifest;

pub use cgx::{parse_kb, serialize_kb, ParseError};
pub(crate) use cgx::{escape, num};
pub use manifest::{load_manifest, ManifestError};
