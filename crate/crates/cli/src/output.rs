//! Output helpers: config hashing, commented headers, JSON documents.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use apgkit::io::OutputHeader;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// SHA-256 of the canonical JSON of a configuration.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let json = serde_json::to_string(config).expect("config serializes");
    hex::encode(Sha256::digest(json.as_bytes()))
}

pub fn header<T: Serialize>(config: &T, seed: Option<u64>) -> OutputHeader {
    OutputHeader::new(config_hash(config), seed)
}

pub struct OutDir {
    dir: PathBuf,
}

impl OutDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(apgkit::Error::from)?;
        Ok(OutDir { dir: dir.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn writer(&self, name: &str) -> Result<BufWriter<fs::File>, CliError> {
        let f = fs::File::create(self.path(name)).map_err(apgkit::Error::from)?;
        Ok(BufWriter::new(f))
    }

    /// Writes `{"header": ..., <body fields>}` as pretty JSON.
    pub fn json<T: Serialize>(&self, name: &str, header: &OutputHeader, body: &T) -> Result<(), CliError> {
        let mut w = self.writer(name)?;
        w.write_all(json_document(header, body).as_bytes()).map_err(apgkit::Error::from)?;
        w.flush().map_err(apgkit::Error::from)?;
        Ok(())
    }
}

#[derive(Serialize)]
struct Document<'a, T> {
    header: &'a OutputHeader,
    #[serde(flatten)]
    body: &'a T,
}

pub fn json_document<T: Serialize>(header: &OutputHeader, body: &T) -> String {
    let mut s = serde_json::to_string_pretty(&Document { header, body }).expect("report serializes");
    s.push('\n');
    s
}
