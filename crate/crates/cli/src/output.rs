//! Run directory: CSV files, `summary.json`, the effective `config.json` and
//! the `_INCOMPLETE` / `FAILED` markers.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

pub const INCOMPLETE_MARKER: &str = "_INCOMPLETE";
pub const FAILED_MARKER: &str = "FAILED";

/// Twelve significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub columns: Vec<String>,
}

#[derive(Debug)]
pub struct RunDir {
    dir: PathBuf,
    files: Vec<FileEntry>,
    results: Map<String, Value>,
}

impl RunDir {
    /// Creates the directory and drops the incomplete marker.
    pub fn create(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        let _ = fs::remove_file(dir.join(FAILED_MARKER));
        fs::write(dir.join(INCOMPLETE_MARKER), "run in progress\n")?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            results: Map::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn csv<I>(&mut self, name: &str, columns: &[&str], rows: I) -> io::Result<()>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let mut w = BufWriter::new(fs::File::create(self.dir.join(name))?);
        writeln!(w, "{}", columns.join(","))?;
        for row in rows {
            writeln!(w, "{}", row.join(","))?;
        }
        w.flush()?;
        self.files.push(FileEntry {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
        });
        Ok(())
    }

    /// Beam grid: header `N,pitch_mm`, then one `re,im` pair per sample in
    /// row-major order.
    pub fn beam_grid(&mut self, name: &str, beam: &delaylight::BeamProfile) -> io::Result<()> {
        let mut w = BufWriter::new(fs::File::create(self.dir.join(name))?);
        writeln!(w, "N,pitch_mm")?;
        writeln!(w, "{},{}", beam.n, num(beam.pitch))?;
        for v in &beam.samples {
            writeln!(w, "{},{}", num(v.re), num(v.im))?;
        }
        w.flush()?;
        self.files.push(FileEntry {
            name: name.to_string(),
            columns: vec!["re".into(), "im".into()],
        });
        Ok(())
    }

    pub fn result(&mut self, key: &str, value: impl Into<Value>) {
        self.results.insert(key.to_string(), value.into());
    }

    /// Writes the summary and effective config, then clears the marker.
    pub fn finish(self, scenario: &str, config: &impl Serialize) -> io::Result<PathBuf> {
        let config_json = serde_json::to_string_pretty(config).map_err(io::Error::other)?;
        fs::write(self.dir.join("config.json"), config_json + "\n")?;
        let summary = serde_json::json!({
            "scenario": scenario,
            "files": self.files,
            "results": self.results,
        });
        let path = self.dir.join("summary.json");
        fs::write(&path, serde_json::to_string_pretty(&summary).map_err(io::Error::other)? + "\n")?;
        fs::remove_file(self.dir.join(INCOMPLETE_MARKER))?;
        Ok(path)
    }
}

/// Replaces the incomplete marker with a failure marker holding `message`.
pub fn mark_failed(dir: &Path, message: &str) {
    if dir.is_dir() {
        let _ = fs::write(dir.join(FAILED_MARKER), format!("{message}\n"));
        let _ = fs::remove_file(dir.join(INCOMPLETE_MARKER));
    }
}
