pub mod estimate;
pub mod plan;
pub mod simulate;
pub mod verify;

use std::fs;
use std::path::Path;

use crate::error::CliError;

/// Reports go to `--out` when given, stdout otherwise.
pub fn write_out(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
