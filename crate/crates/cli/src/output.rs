use std::fs;
use std::path::{Path, PathBuf};

use gkp_core::io::write_manifest;

use crate::error::CliError;

/// Collects the files written by one command and lists them in `manifest.json`.
pub struct Output {
    dir: Option<PathBuf>,
    files: Vec<PathBuf>,
    command: String,
}

impl Output {
    pub fn new(dir: Option<&Path>, command: String) -> Result<Self, CliError> {
        if let Some(d) = dir {
            fs::create_dir_all(d).map_err(|source| CliError::Write {
                path: d.to_path_buf(),
                source,
            })?;
        }
        Ok(Output {
            dir: dir.map(Path::to_path_buf),
            files: Vec::new(),
            command,
        })
    }

    /// Writes `name` under the output directory; a no-op without one.
    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        if let Some(d) = &self.dir {
            let path = d.join(name);
            fs::write(&path, contents).map_err(|source| CliError::Write { path: path.clone(), source })?;
            self.files.push(path);
        }
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &serde_json::Value) -> Result<(), CliError> {
        self.write(name, &serde_json::to_string_pretty(value).expect("json value serializes"))
    }

    /// Registers a file written elsewhere.
    pub fn record(&mut self, path: PathBuf) {
        self.files.push(path);
    }

    pub fn finish(self) -> Result<(), CliError> {
        if let Some(d) = &self.dir {
            write_manifest(d, &self.command, &self.files)?;
        }
        Ok(())
    }
}
