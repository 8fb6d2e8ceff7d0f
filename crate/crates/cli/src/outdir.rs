//! Output directory ownership and artifact paths.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

const LOCK: &str = ".gan-event.lock";

/// An output directory held by this process until dropped.
pub struct OutDir {
    dir: PathBuf,
    lock: PathBuf,
}

impl OutDir {
    pub fn lock(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        let lock = dir.join(LOCK);
        match OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(mut f) => {
                writeln!(f, "{}", std::process::id())?;
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => bail!(
                "output directory {} is in use by another gan-event command (remove {} if none is running)",
                dir.display(),
                lock.display()
            ),
            Err(e) => return Err(e).with_context(|| format!("cannot write to {}", dir.display())),
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            lock,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Path of an input artifact; an error names the command that makes it.
    pub fn require(&self, path: PathBuf, producer: &str) -> Result<PathBuf> {
        if path.is_file() {
            Ok(path)
        } else {
            bail!("missing {}: run `gan-event {producer}` first", path.display())
        }
    }

    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let p = self.path(name);
        gan_event_core::io::write_atomic(&p, bytes).with_context(|| format!("cannot write {}", p.display()))?;
        Ok(p)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }
}

impl Drop for OutDir {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.lock);
    }
}
