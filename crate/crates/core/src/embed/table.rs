//! Embedding table formats.
//!
//! Text (`ETBL`): a header line `ETBL1 <dim>`, then one record per line —
//! the id, whitespace, `dim` decimal floats.
//!
//! Binary (`ETBB`): magic `ETBB`, little-endian u32 dim and record count,
//! then per record a u16 id length, the id bytes, and `dim` f32 values.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::{Error, Result};

/// Text features keyed by target id, all of one dimension.
#[derive(Debug, Clone)]
pub struct TextTable {
    dim: usize,
    entries: BTreeMap<String, Vec<f64>>,
}

impl TextTable {
    pub fn from_rows<I>(dim: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Vec<f64>)>,
    {
        if dim == 0 {
            return Err(Error::MalformedTable("dimension must be >= 1".into()));
        }
        let mut entries = BTreeMap::new();
        for (id, values) in rows {
            if values.len() != dim {
                return Err(Error::MalformedTable(format!(
                    "record {id:?} has {} values, expected {dim}",
                    values.len()
                )));
            }
            if entries.insert(id.clone(), values).is_some() {
                return Err(Error::MalformedTable(format!("duplicate id {id:?}")));
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.entries.get(id).map(|v| v.as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }
}

/// Read either table format, dispatching on the magic bytes.
pub fn ingest_text_features(path: &Path) -> Result<TextTable> {
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if bytes.starts_with(b"ETBL1") {
        parse_text(std::str::from_utf8(&bytes).map_err(|_| {
            Error::MalformedTable("ETBL file is not valid UTF-8".into())
        })?)
    } else if bytes.starts_with(b"ETBB") {
        parse_binary(&bytes)
    } else {
        Err(Error::MalformedTable(format!(
            "{}: unrecognized magic",
            path.display()
        )))
    }
}

fn parse_text(text: &str) -> Result<TextTable> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::MalformedTable("empty file".into()))?;
    let dim: usize = header
        .strip_prefix("ETBL1")
        .map(str::trim)
        .and_then(|d| d.parse().ok())
        .ok_or_else(|| Error::MalformedTable(format!("bad header {header:?}")))?;
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let id = fields.next().unwrap().to_string();
        let values = fields
            .map(|f| {
                f.parse::<f64>().map_err(|_| {
                    Error::MalformedTable(format!("line {}: bad float {f:?}", lineno + 2))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != dim {
            return Err(Error::MalformedTable(format!(
                "line {}: {} values, expected {dim}",
                lineno + 2,
                values.len()
            )));
        }
        rows.push((id, values));
    }
    TextTable::from_rows(dim, rows)
}

fn parse_binary(bytes: &[u8]) -> Result<TextTable> {
    let need = |cond: bool| {
        if cond {
            Ok(())
        } else {
            Err(Error::MalformedTable("truncated ETBB payload".into()))
        }
    };
    need(bytes.len() >= 12)?;
    let dim = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let count = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let mut pos = 12;
    let mut rows = Vec::with_capacity(count);
    for _ in 0..count {
        need(pos + 2 <= bytes.len())?;
        let id_len = u16::from_le_bytes(bytes[pos..pos + 2].try_into().unwrap()) as usize;
        pos += 2;
        need(pos + id_len + dim * 4 <= bytes.len())?;
        let id = std::str::from_utf8(&bytes[pos..pos + id_len])
            .map_err(|_| Error::MalformedTable("record id is not valid UTF-8".into()))?
            .to_string();
        pos += id_len;
        let values = bytes[pos..pos + dim * 4]
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
            .collect();
        pos += dim * 4;
        rows.push((id, values));
    }
    TextTable::from_rows(dim, rows)
}

/// Write the text format, one record per row in the given order.
pub fn write_text_table(path: &Path, dim: usize, rows: &[(String, Vec<f64>)]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("ETBL1 {dim}\n"));
    for (id, values) in rows {
        check_row(dim, id, values)?;
        out.push_str(id);
        for v in values {
            out.push(' ');
            out.push_str(&format!("{v}"));
        }
        out.push('\n');
    }
    write_bytes(path, out.as_bytes())
}

/// Write the binary format in the given order.
pub fn write_binary_table(path: &Path, dim: usize, rows: &[(String, Vec<f64>)]) -> Result<()> {
    let mut out = Vec::new();
    out.extend_from_slice(b"ETBB");
    out.extend_from_slice(&(dim as u32).to_le_bytes());
    out.extend_from_slice(&(rows.len() as u32).to_le_bytes());
    for (id, values) in rows {
        check_row(dim, id, values)?;
        if id.len() > u16::MAX as usize {
            return Err(Error::MalformedTable(format!("id too long: {} bytes", id.len())));
        }
        out.extend_from_slice(&(id.len() as u16).to_le_bytes());
        out.extend_from_slice(id.as_bytes());
        for v in values {
            out.extend_from_slice(&(*v as f32).to_le_bytes());
        }
    }
    write_bytes(path, &out)
}

fn check_row(dim: usize, id: &str, values: &[f64]) -> Result<()> {
    if values.len() != dim {
        return Err(Error::MalformedTable(format!(
            "record {id:?} has {} values, expected {dim}",
            values.len()
        )));
    }
    if id.chars().any(char::is_whitespace) || id.is_empty() {
        return Err(Error::MalformedTable(format!("invalid id {id:?}")));
    }
    Ok(())
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    file.write_all(bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
