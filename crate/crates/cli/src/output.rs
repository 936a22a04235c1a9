use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;

/// Record written next to the outputs of a run.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub artifacts: Vec<PathBuf>,
    pub duration_secs: f64,
}

pub fn manifest_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    artifact.with_file_name(name)
}

/// Collects artifacts of one command and writes the manifest at the end.
pub struct Run {
    command: &'static str,
    started: Instant,
    artifacts: Vec<PathBuf>,
}

impl Run {
    pub fn start(command: &'static str) -> Self {
        Self {
            command,
            started: Instant::now(),
            artifacts: Vec::new(),
        }
    }

    /// Writes `text` to `path`, or to stdout when there is no path.
    pub fn emit(&mut self, path: Option<&Path>, text: &str) -> Result<()> {
        match path {
            Some(p) => {
                std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
                self.artifacts.push(p.to_path_buf());
            }
            None => std::io::stdout().lock().write_all(text.as_bytes())?,
        }
        Ok(())
    }

    /// Writes one manifest next to each artifact. Nothing happens when all
    /// output went to stdout.
    pub fn finish(self, parameters: impl Serialize, seed: Option<u64>) -> Result<()> {
        if self.artifacts.is_empty() {
            return Ok(());
        }
        let manifest = RunManifest {
            command: self.command.to_string(),
            parameters: serde_json::to_value(parameters)?,
            seed,
            artifacts: self.artifacts.clone(),
            duration_secs: self.started.elapsed().as_secs_f64(),
        };
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        for a in &self.artifacts {
            let p = manifest_path(a);
            std::fs::write(&p, &text).with_context(|| format!("writing {}", p.display()))?;
        }
        Ok(())
    }
}

/// Builds CSV text from a header and numeric rows.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new<S: AsRef<str>>(header: impl IntoIterator<Item = S>) -> Self {
        let cols: Vec<String> = header.into_iter().map(|s| s.as_ref().to_string()).collect();
        Self {
            text: cols.join(",") + "\n",
        }
    }

    pub fn row<V: std::fmt::Display>(&mut self, values: impl IntoIterator<Item = V>) {
        let mut first = true;
        for v in values {
            if !first {
                self.text.push(',');
            }
            first = false;
            write!(self.text, "{v}").expect("writing to a String");
        }
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut csv = Csv::new(["t", "v"]);
        csv.row([0.5, -1.0]);
        csv.row([1e-20, 3.0]);
        assert_eq!(csv.finish(), "t,v\n0.5,-1\n0.00000000000000000001,3\n");
    }

    #[test]
    fn manifest_sits_next_to_artifact() {
        assert_eq!(
            manifest_path(Path::new("out/l.csv")),
            PathBuf::from("out/l.csv.manifest.json")
        );
    }
}
