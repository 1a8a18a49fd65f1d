//! File access: up-front path validation, parsing with located errors, and
//! atomic output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use pardiff_core::stencil::{parse_stencil_file, StencilFile};
use pardiff_core::{parse, CoeffExpr, GridFunction};

use crate::error::{CliError, CliResult};

pub fn check_input(path: &Path) -> CliResult<()> {
    match fs::metadata(path) {
        Ok(m) if m.is_file() => Ok(()),
        Ok(_) => Err(CliError::Usage(format!("{}: not a regular file", path.display()))),
        Err(source) => Err(CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
    }
}

pub fn check_output(path: &Path) -> CliResult<()> {
    let parent = parent_dir(path);
    match fs::metadata(&parent) {
        Ok(m) if m.is_dir() => {}
        Ok(_) => {
            return Err(CliError::Usage(format!(
                "{}: parent is not a directory",
                path.display()
            )))
        }
        Err(source) => return Err(CliError::Io { path: parent, source }),
    }
    if path.is_dir() {
        return Err(CliError::Usage(format!("{}: is a directory", path.display())));
    }
    Ok(())
}

fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_grid(path: &Path) -> CliResult<GridFunction> {
    GridFunction::parse_text(&read_text(path)?).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_stencil(path: &Path) -> CliResult<StencilFile> {
    parse_stencil_file(&read_text(path)?).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

pub fn parse_expr(flag: &'static str, src: &str) -> CliResult<CoeffExpr> {
    parse(src).map_err(|source| CliError::Expr { flag, source })
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so a failed run never leaves a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp = tempfile::NamedTempFile::new_in(parent_dir(path)).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.flush().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// Appends `.sol.grd` in place of the extension of `grid`.
pub fn default_solution_path(grid: &Path) -> PathBuf {
    grid.with_extension("sol.grd")
}
