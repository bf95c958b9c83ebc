//! Output plumbing: atomic file writes so failed runs never leave partial
//! result files behind.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

/// Writes `content` to `path`, or to stdout when no path is given.
///
/// File output goes to a sibling temp file first and is renamed into place,
/// so a crash or write error cannot leave a truncated result file.
pub fn write_output(path: Option<&Path>, content: &str) -> io::Result<()> {
    match path {
        None => {
            io::stdout().write_all(content.as_bytes())?;
            io::stdout().flush()
        }
        Some(path) => {
            let tmp = path.with_extension("tmp");
            fs::write(&tmp, content)?;
            fs::rename(&tmp, path)
        }
    }
}
