//! Deterministic report files. Each file starts with a `generated_at` line
//! (the only line that varies between identical runs) and embeds the fully
//! resolved configuration.

use crate::config::ExperimentConfig;
use crate::CliError;
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const STAMP_KEY: &str = "generated_at";

pub struct ReportWriter {
    dir: PathBuf,
    stamp: String,
    config: ExperimentConfig,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    generated_at: &'a str,
    config: &'a ExperimentConfig,
    #[serde(flatten)]
    body: &'a T,
}

impl ReportWriter {
    pub fn new(dir: &Path, config: &ExperimentConfig) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            stamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            config: config.clone(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn json<T: Serialize>(&self, name: &str, body: &T) -> Result<PathBuf, CliError> {
        let env = Envelope {
            generated_at: &self.stamp,
            config: &self.config,
            body,
        };
        let mut text =
            serde_json::to_string_pretty(&env).map_err(|e| CliError::Io(format!("{name}: {e}")))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// `header` names the columns; rows are written in the order given.
    pub fn csv<R: Serialize>(
        &self,
        name: &str,
        header: &[&str],
        rows: &[R],
    ) -> Result<PathBuf, CliError> {
        let mut out = Vec::new();
        writeln!(out, "# {STAMP_KEY}: {}", self.stamp).expect("in-memory write");
        writeln!(
            out,
            "# config: {}",
            serde_json::to_string(&self.config).expect("config serializes")
        )
        .expect("in-memory write");
        {
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(&mut out);
            let io = |e: csv::Error| CliError::Io(format!("{name}: {e}"));
            w.write_record(header).map_err(io)?;
            for r in rows {
                w.serialize(r).map_err(io)?;
            }
            w.flush()
                .map_err(|e| CliError::Io(format!("{name}: {e}")))?;
        }
        self.write(name, &out)
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

/// File contents with every `generated_at` line removed.
pub fn strip_stamp(text: &str) -> String {
    text.lines()
        .filter(|l| !l.contains(STAMP_KEY))
        .map(|l| format!("{l}\n"))
        .collect()
}
