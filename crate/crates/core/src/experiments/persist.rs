//! Versioned JSON documents and the sweep CSV table.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::SweepRecord;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

pub const SWEEP_HEADER: [&str; 7] = [
    "snr_db",
    "algorithm",
    "cluster_id",
    "rate_bits",
    "occupancy_percent",
    "channel_seed",
    "init_seed",
];

#[derive(Serialize)]
struct EnvelopeOut<'a, T> {
    schema_version: u32,
    kind: &'a str,
    data: &'a T,
}

#[derive(Deserialize)]
struct Header {
    schema_version: u32,
    kind: String,
}

#[derive(Deserialize)]
struct EnvelopeIn<T> {
    data: T,
}

pub fn to_json_document<T: Serialize>(kind: &str, data: &T) -> String {
    let env = EnvelopeOut {
        schema_version: SCHEMA_VERSION,
        kind,
        data,
    };
    serde_json::to_string_pretty(&env).expect("document serializes")
}

/// Writes `data` wrapped as `{"schema_version", "kind", "data"}`.
pub fn save_json<T: Serialize>(path: impl AsRef<Path>, kind: &str, data: &T) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_json_document(kind, data) + "\n").map_err(|e| Error::io(path, e))
}

/// Kind recorded in a document, after checking its schema version.
pub fn document_kind(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(read_header(path, &text)?.kind)
}

fn read_header(path: &Path, text: &str) -> Result<Header> {
    let header: Header = serde_json::from_str(text).map_err(|e| Error::format(path, e))?;
    if header.schema_version != SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            path: path.to_path_buf(),
            found: header.schema_version,
            supported: SCHEMA_VERSION,
        });
    }
    Ok(header)
}

pub fn load_json<T: DeserializeOwned>(path: impl AsRef<Path>, kind: &str) -> Result<T> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header = read_header(path, &text)?;
    if header.kind != kind {
        return Err(Error::format(
            path,
            format!("expected a {kind:?} document, found {:?}", header.kind),
        ));
    }
    let env: EnvelopeIn<T> = serde_json::from_str(&text).map_err(|e| Error::format(path, e))?;
    Ok(env.data)
}

pub fn write_sweep_csv(path: impl AsRef<Path>, records: &[SweepRecord]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, sweep_csv(records)).map_err(|e| Error::io(path, e))
}

pub fn sweep_csv(records: &[SweepRecord]) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(SWEEP_HEADER).expect("in-memory write");
    for r in records {
        w.serialize(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

pub fn read_sweep_csv(path: impl AsRef<Path>) -> Result<Vec<SweepRecord>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = r.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().ne(SWEEP_HEADER) {
        return Err(Error::format(
            path,
            format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        ));
    }
    r.deserialize()
        .collect::<std::result::Result<Vec<SweepRecord>, _>>()
        .map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::format(path, format!("{other:?}")),
        }
    } else {
        Error::format(path, e)
    }
}
