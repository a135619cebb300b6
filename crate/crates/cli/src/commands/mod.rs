pub mod graph;
pub mod roc;
pub mod simulate;

use std::path::Path;

use crate::CliError;

pub(crate) fn write_or_return(
    out: &Option<std::path::PathBuf>,
    content: String,
) -> Result<Option<String>, CliError> {
    match out {
        Some(path) => {
            write_file(path, &content)?;
            Ok(None)
        }
        None => Ok(Some(content)),
    }
}

pub(crate) fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content)
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}
