//! Shared helpers for the on-disk artifact formats.
//!
//! Every artifact starts with plain-text header lines. Lines beginning with
//! `#` carry the run configuration echo and are ignored by readers except for
//! round-trip checks; `key=value` lines carry format metadata. Binary
//! payloads follow a literal `---` line.

use std::io::{self, BufRead, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("{artifact}: bad magic line {found:?}")]
    BadMagic { artifact: &'static str, found: String },
    #[error("{artifact}: line {line}: {msg}")]
    Parse { artifact: &'static str, line: usize, msg: String },
    #[error("{artifact}: truncated binary section")]
    Truncated { artifact: &'static str },
}

impl FileError {
    pub fn parse(artifact: &'static str, line: usize, msg: impl Into<String>) -> Self {
        FileError::Parse { artifact, line, msg: msg.into() }
    }
}

/// Header block: magic line, `# ...` echo lines, `key=value` metadata, `---`.
#[derive(Debug)]
pub struct Header {
    pub echo: Vec<String>,
    pub meta: Vec<(String, String)>,
}

impl Header {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn require(&self, artifact: &'static str, key: &str) -> Result<&str, FileError> {
        self.get(key).ok_or_else(|| FileError::parse(artifact, 0, format!("missing header key {key}")))
    }

    pub fn require_parsed<T: std::str::FromStr>(&self, artifact: &'static str, key: &str) -> Result<T, FileError> {
        let raw = self.require(artifact, key)?;
        raw.parse().map_err(|_| FileError::parse(artifact, 0, format!("bad value for {key}: {raw:?}")))
    }
}

pub fn write_header<W: Write>(
    w: &mut W,
    magic: &str,
    echo: &[String],
    meta: &[(&str, String)],
) -> io::Result<()> {
    writeln!(w, "{magic}")?;
    for line in echo {
        writeln!(w, "# {line}")?;
    }
    for (k, v) in meta {
        writeln!(w, "{k}={v}")?;
    }
    writeln!(w, "---")
}

/// Read the header block, leaving the reader positioned at the payload.
pub fn read_header<R: BufRead>(r: &mut R, artifact: &'static str, magic: &str) -> Result<Header, FileError> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    if line.trim_end_matches('\n') != magic {
        return Err(FileError::BadMagic { artifact, found: line.trim_end().to_string() });
    }
    let mut echo = Vec::new();
    let mut meta = Vec::new();
    let mut lineno = 1;
    loop {
        line.clear();
        lineno += 1;
        if r.read_line(&mut line)? == 0 {
            return Err(FileError::parse(artifact, lineno, "missing --- separator"));
        }
        let trimmed = line.trim_end_matches('\n');
        if trimmed == "---" {
            return Ok(Header { echo, meta });
        }
        if let Some(rest) = trimmed.strip_prefix("# ") {
            echo.push(rest.to_string());
        } else if let Some((k, v)) = trimmed.split_once('=') {
            meta.push((k.to_string(), v.to_string()));
        } else {
            return Err(FileError::parse(artifact, lineno, format!("unexpected header line {trimmed:?}")));
        }
    }
}

pub fn write_varint<W: Write>(w: &mut W, mut v: u64) -> io::Result<()> {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            return w.write_all(&[byte]);
        }
        w.write_all(&[byte | 0x80])?;
    }
}

pub fn read_varint<R: io::Read>(r: &mut R, artifact: &'static str) -> Result<u64, FileError> {
    let mut v = 0u64;
    let mut shift = 0;
    loop {
        let mut byte = [0u8; 1];
        if r.read(&mut byte)? == 0 {
            return Err(FileError::Truncated { artifact });
        }
        v |= ((byte[0] & 0x7f) as u64) << shift;
        if byte[0] & 0x80 == 0 {
            return Ok(v);
        }
        shift += 7;
        if shift > 63 {
            return Err(FileError::parse(artifact, 0, "varint overflow"));
        }
    }
}

/// Format a float so it round-trips bit-exactly (17 significant digits).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
