//! Buffered outputs, committed to disk all at once.
//!
//! Every file of a run is rendered in memory first. [`Artifacts::commit`]
//! writes each to a hidden temporary next to its destination and renames
//! the temporaries only after all of them were written, so a failed run
//! leaves no partial output behind.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

/// One row of a profile CSV. `epsilon` or `length` is empty when the row is
/// indexed by the other; `value` is empty for unresolved entries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileRow {
    pub system: &'static str,
    pub quantity: &'static str,
    pub point: usize,
    pub epsilon: Option<f64>,
    pub length: Option<f64>,
    pub value: Option<f64>,
}

/// A log-log pair of a fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotRow {
    pub series: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
    /// Checks that found counterexamples or violations.
    pub failures: Vec<String>,
}

impl Artifacts {
    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut bytes = serde_json::to_vec_pretty(value).expect("report types serialize");
        bytes.push(b'\n');
        self.files.push((name.to_string(), bytes));
    }

    pub fn add_csv<T: Serialize>(&mut self, name: &str, rows: &[T]) {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r).expect("rows serialize");
        }
        self.files.push((name.to_string(), w.into_inner().expect("in-memory writer")));
    }

    pub fn add_text(&mut self, name: &str, text: String) {
        self.files.push((name.to_string(), text.into_bytes()));
    }

    pub fn fail(&mut self, what: impl Into<String>) {
        self.failures.push(what.into());
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }

    /// Writes every file under `dir`, creating it if needed.
    pub fn commit(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut staged = Vec::new();
        let result = (|| {
            for (name, bytes) in &self.files {
                let tmp = dir.join(format!(".{name}.tmp"));
                fs::write(&tmp, bytes)?;
                staged.push((tmp, dir.join(name)));
            }
            Ok(())
        })();
        if let Err(e) = result {
            for (tmp, _) in &staged {
                let _ = fs::remove_file(tmp);
            }
            return Err(e);
        }
        let mut written = Vec::new();
        for (tmp, dest) in staged {
            fs::rename(&tmp, &dest)?;
            written.push(dest);
        }
        Ok(written)
    }
}
