use crate::field::ExponentFit;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const COMPLETION_MARKER: &str = "COMPLETE";

/// Run record: written before any output and rewritten with the results at the end.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: String,
    pub seed: u64,
    /// Resolved configuration (file values with command-line overrides applied).
    pub config: BTreeMap<String, String>,
    /// Parameter grid of the sweep.
    pub grid: serde_json::Value,
    pub tolerances: BTreeMap<String, f64>,
    pub git_revision: String,
    pub status: RunStatus,
    pub fit: Option<ExponentFit>,
    pub summary: BTreeMap<String, f64>,
    pub files: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Complete,
}

/// Output directory of one run.
#[derive(Clone, Debug)]
pub struct RunDirectory {
    pub path: PathBuf,
}

impl RunDirectory {
    /// Creates the directory and removes a stale completion marker.
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        fs::create_dir_all(&path)?;
        let marker = path.join(COMPLETION_MARKER);
        if marker.exists() {
            fs::remove_file(marker)?;
        }
        Ok(Self { path })
    }

    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        if !path.is_dir() {
            return Err(Error::Io(std::io::Error::new(std::io::ErrorKind::NotFound, format!("{} is not a run directory", path.display()))));
        }
        Ok(Self { path })
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    pub fn write_manifest(&self, manifest: &Manifest) -> Result<()> {
        let text = serde_json::to_string_pretty(manifest)?;
        fs::write(self.file(MANIFEST_FILE), text + "\n")?;
        Ok(())
    }

    pub fn read_manifest(&self) -> Result<Manifest> {
        Ok(serde_json::from_str(&fs::read_to_string(self.file(MANIFEST_FILE))?)?)
    }

    /// Written last; its absence marks an interrupted run.
    pub fn mark_complete(&self) -> Result<()> {
        fs::write(self.file(COMPLETION_MARKER), b"complete\n")?;
        Ok(())
    }

    pub fn is_complete(&self) -> bool {
        self.file(COMPLETION_MARKER).is_file()
    }
}

/// `git rev-parse HEAD` in the working directory, or `"unknown"`.
pub fn git_revision() -> String {
    std::process::Command::new("git")
        .args(["rev-parse", "HEAD"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".into())
}

/// Parses flat `key = value` text; `#` starts a comment, blank lines are ignored and a
/// repeated key keeps its last value.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("line {}: expected key = value, got `{raw}`", n + 1)))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Format(format!("line {}: empty key", n + 1)));
        }
        out.insert(key.to_string(), value.trim().to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_values_with_comments_and_overrides() {
        let kv = parse_key_values("# run\nexperiment = sigma_law\n\nseed=3 # inline\nseed = 4\n").unwrap();
        assert_eq!(kv["experiment"], "sigma_law");
        assert_eq!(kv["seed"], "4");
        assert!(matches!(parse_key_values("novalue\n"), Err(Error::Format(_))));
        assert!(matches!(parse_key_values(" = 3\n"), Err(Error::Format(_))));
    }

    #[test]
    fn marker_lifecycle() {
        let dir = tempfile::tempdir().unwrap();
        let run = RunDirectory::create(dir.path().join("a")).unwrap();
        assert!(!run.is_complete());
        run.mark_complete().unwrap();
        assert!(run.is_complete());
        let again = RunDirectory::create(&run.path).unwrap();
        assert!(!again.is_complete());
    }
}
