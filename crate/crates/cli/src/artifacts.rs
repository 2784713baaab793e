//! Output files are written under a `.partial` name and renamed into place
//! only once every artifact of a command has been produced.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use crate::failure::{Failure, Tag};

pub fn partial_path(path: &Path) -> PathBuf {
    let mut name = OsString::from(path.as_os_str());
    name.push(".partial");
    PathBuf::from(name)
}

#[derive(Debug, Default)]
pub struct Staged {
    files: Vec<PathBuf>,
}

impl Staged {
    pub fn new() -> Self {
        Self::default()
    }

    /// Runs `write` against the `.partial` path of `path` and remembers it.
    pub fn stage<F>(&mut self, module: &'static str, path: &Path, write: F) -> Result<(), Failure>
    where
        F: FnOnce(&Path) -> Result<(), Failure>,
    {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).tag(module)?;
        }
        let tmp = partial_path(path);
        write(&tmp)?;
        self.files.push(path.to_path_buf());
        Ok(())
    }

    pub fn commit(self) -> Result<Vec<PathBuf>, Failure> {
        for f in &self.files {
            std::fs::rename(partial_path(f), f).tag("io")?;
        }
        Ok(self.files)
    }
}
