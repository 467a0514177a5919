use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;

/// Plain-text record of a run: tool version, command, every parameter and
/// the files written. Contains nothing time- or host-dependent.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Manifest {
    command: String,
    params: Vec<(String, String)>,
    files: Vec<String>,
}

impl Manifest {
    pub const FILE_NAME: &'static str = "manifest.txt";

    pub fn new(command: impl Into<String>) -> Self {
        Self { command: command.into(), ..Self::default() }
    }

    pub fn param(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    pub fn file(&mut self, name: impl Into<String>) -> &mut Self {
        self.files.push(name.into());
        self
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "tool = {}\nversion = {}\ncommand = {}\n",
            env!("CARGO_PKG_NAME"),
            env!("CARGO_PKG_VERSION"),
            self.command
        );
        for (k, v) in &self.params {
            out.push_str(&format!("{k} = {v}\n"));
        }
        for f in &self.files {
            out.push_str(&format!("file = {f}\n"));
        }
        out
    }

    /// Writes `manifest.txt` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(Self::FILE_NAME);
        fs::write(&path, self.render())?;
        Ok(path)
    }
}
