//! Backends running as separate executables.
//!
//! A backend named `NAME` is the executable `morphlab-backend-NAME` found in
//! one of the directories listed in `MORPHLAB_BACKEND_PATH`. It must support
//!
//! * `morphlab-backend-NAME describe` printing its descriptor line, and
//! * `morphlab-backend-NAME serve JOB_DIR` processing the manifest, exiting
//!   non-zero only on protocol-level failure.

use std::env;
use std::path::{Path, PathBuf};
use std::process::Command;

use super::{Backend, BackendDescriptor};
use crate::error::{Error, Result};

pub const BACKEND_PATH_ENV: &str = "MORPHLAB_BACKEND_PATH";

#[derive(Debug, Clone)]
pub struct ExternalBackend {
    name: String,
    executable: PathBuf,
}

impl ExternalBackend {
    pub fn new(name: impl Into<String>, executable: impl Into<PathBuf>) -> Self {
        ExternalBackend {
            name: name.into(),
            executable: executable.into(),
        }
    }

    /// Find `morphlab-backend-<name>` on `MORPHLAB_BACKEND_PATH`.
    pub fn locate(name: &str) -> Result<Self> {
        let search = env::var_os(BACKEND_PATH_ENV).ok_or_else(|| {
            Error::backend(None, format!("{BACKEND_PATH_ENV} is not set; cannot locate backend {name:?}"))
        })?;
        let file = format!("morphlab-backend-{name}");
        env::split_paths(&search)
            .map(|dir| dir.join(&file))
            .find(|p| p.is_file())
            .map(|p| Self::new(name, p))
            .ok_or_else(|| Error::backend(None, format!("{file} not found on {BACKEND_PATH_ENV}")))
    }

    pub fn executable(&self) -> &Path {
        &self.executable
    }
}

impl Backend for ExternalBackend {
    fn descriptor(&self) -> Result<BackendDescriptor> {
        let out = Command::new(&self.executable)
            .arg("describe")
            .output()
            .map_err(|e| Error::backend(None, format!("cannot run {}: {e}", self.executable.display())))?;
        if !out.status.success() {
            return Err(Error::backend(
                None,
                format!(
                    "{} describe exited with {}: {}",
                    self.name,
                    out.status,
                    String::from_utf8_lossy(&out.stderr).trim()
                ),
            ));
        }
        let text = String::from_utf8_lossy(&out.stdout);
        let d = BackendDescriptor::parse(&text)
            .map_err(|e| Error::backend(None, format!("bad descriptor from {}: {e}", self.name)))?;
        if d.name != self.name {
            return Err(Error::backend(
                None,
                format!("executable for {} describes itself as {}", self.name, d.name),
            ));
        }
        Ok(d)
    }

    fn serve(&self, job_dir: &Path) -> Result<()> {
        let status = Command::new(&self.executable)
            .arg("serve")
            .arg(job_dir)
            .status()
            .map_err(|e| Error::backend(None, format!("cannot run {}: {e}", self.executable.display())))?;
        if !status.success() {
            return Err(Error::backend(None, format!("{} serve exited with {status}", self.name)));
        }
        Ok(())
    }
}
