//! On-disk framing for stores, indexes and models: a one-line magic header
//! carrying the format version, followed by a JSON body.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub(crate) fn write_framed<T: Serialize>(
    path: &Path,
    magic: &str,
    version: u32,
    value: &T,
    pretty: bool,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{magic} v{version}").map_err(|e| Error::io(path, e))?;
    let res = if pretty {
        serde_json::to_writer_pretty(&mut w, value)
    } else {
        serde_json::to_writer(&mut w, value)
    };
    res.map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    writeln!(w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub(crate) fn read_framed<T: DeserializeOwned>(
    path: &Path,
    magic: &str,
    version: u32,
) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let mut header = String::new();
    r.read_line(&mut header).map_err(|e| Error::io(path, e))?;
    let expected = format!("{magic} v{version}");
    if header.trim_end() != expected {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: format!("bad header {:?}, expected {expected:?}", header.trim_end()),
        });
    }
    serde_json::from_reader(r).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
