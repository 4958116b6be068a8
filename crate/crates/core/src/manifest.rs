//! Corpus manifests: the line-oriented format every CLI stage reads and
//! writes.
//!
//! Layout: a `MMAN1` header line, a `key=value` parameter block, then one
//! tab-separated entry per line — target id, image path, template id (`-`
//! for none), text-feature id (`-` for none). Any line containing a tab is
//! an entry; parameter lines must not contain tabs. Keys are written sorted
//! so output is diffable and byte-stable.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::{Error, Result};

pub const MAGIC: &str = "MMAN1";

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub id: String,
    /// Image path, relative to the manifest's directory unless absolute.
    pub path: PathBuf,
    pub template_id: Option<usize>,
    pub text_id: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct Manifest {
    pub params: BTreeMap<String, String>,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, line)) if line.trim_end() == MAGIC => {}
            _ => {
                return Err(Error::MalformedManifest(format!(
                    "missing {MAGIC} header"
                )))
            }
        }
        let mut manifest = Manifest::default();
        let mut seen = std::collections::BTreeSet::new();
        for (lineno, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            if line.contains('\t') {
                let entry = Self::parse_entry(line, lineno + 1)?;
                if !seen.insert(entry.id.clone()) {
                    return Err(Error::MalformedManifest(format!(
                        "line {}: duplicate id {:?}",
                        lineno + 1,
                        entry.id
                    )));
                }
                manifest.entries.push(entry);
            } else if let Some((key, value)) = line.split_once('=') {
                manifest
                    .params
                    .insert(key.trim().to_string(), value.trim().to_string());
            } else {
                return Err(Error::MalformedManifest(format!(
                    "line {}: neither key=value nor a tab-separated entry: {line:?}",
                    lineno + 1
                )));
            }
        }
        Ok(manifest)
    }

    fn parse_entry(line: &str, lineno: usize) -> Result<ManifestEntry> {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::MalformedManifest(format!(
                "line {lineno}: expected 4 tab-separated fields, got {}",
                fields.len()
            )));
        }
        let template_id = match fields[2] {
            "-" => None,
            v => Some(v.parse().map_err(|_| {
                Error::MalformedManifest(format!("line {lineno}: bad template id {v:?}"))
            })?),
        };
        let text_id = match fields[3] {
            "-" => None,
            v => Some(v.to_string()),
        };
        Ok(ManifestEntry {
            id: fields[0].to_string(),
            path: PathBuf::from(fields[1]),
            template_id,
            text_id,
        })
    }

    /// Parse a manifest file and check that every referenced image exists.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let manifest = Self::parse(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        for entry in &manifest.entries {
            let resolved = manifest.resolve(base, entry);
            if !resolved.exists() {
                return Err(Error::MalformedManifest(format!(
                    "entry {:?} references missing file {}",
                    entry.id,
                    resolved.display()
                )));
            }
        }
        Ok(manifest)
    }

    /// Resolve an entry's image path against the manifest directory.
    pub fn resolve(&self, base: &Path, entry: &ManifestEntry) -> PathBuf {
        if entry.path.is_absolute() {
            entry.path.clone()
        } else {
            base.join(&entry.path)
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from(MAGIC);
        out.push('\n');
        for (key, value) in &self.params {
            out.push_str(key);
            out.push('=');
            out.push_str(value);
            out.push('\n');
        }
        for e in &self.entries {
            let template = e
                .template_id
                .map(|t| t.to_string())
                .unwrap_or_else(|| "-".into());
            let text = e.text_id.clone().unwrap_or_else(|| "-".into());
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                e.id,
                e.path.display(),
                template,
                text
            ));
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn param_f64(&self, key: &str) -> Result<Option<f64>> {
        self.params
            .get(key)
            .map(|v| {
                v.parse().map_err(|_| {
                    Error::MalformedManifest(format!("parameter {key}={v:?} is not a number"))
                })
            })
            .transpose()
    }

    pub fn set_param(&mut self, key: &str, value: impl ToString) {
        self.params.insert(key.to_string(), value.to_string());
    }
}
