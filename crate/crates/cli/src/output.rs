//! Output-directory writer: JSON reports and CSV tables, tracking the file
//! list for the manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use levyglass::Error;

pub struct OutDir {
    dir: PathBuf,
    files: Vec<String>,
}

impl OutDir {
    pub fn create(dir: &Path) -> Result<Self, Error> {
        fs::create_dir_all(dir).map_err(|e| Error::Input(format!("create {dir:?}: {e}")))?;
        Ok(OutDir {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Error> {
        let text = serde_json::to_string_pretty(value)
            .map_err(|e| Error::Input(format!("serialize {name}: {e}")))?;
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|e| Error::Input(format!("write {path:?}: {e}")))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn write_csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), Error>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path)
            .map_err(|e| Error::Input(format!("open {path:?}: {e}")))?;
        w.write_record(header)
            .map_err(|e| Error::Input(format!("write {path:?}: {e}")))?;
        for row in rows {
            w.write_record(&row)
                .map_err(|e| Error::Input(format!("write {path:?}: {e}")))?;
        }
        w.flush().map_err(|e| Error::Input(format!("flush {path:?}: {e}")))?;
        self.files.push(name.to_string());
        Ok(())
    }
}

/// Format a float with full round-trip precision (deterministic output).
pub fn fmt(x: f64) -> String {
    format!("{x:?}")
}
