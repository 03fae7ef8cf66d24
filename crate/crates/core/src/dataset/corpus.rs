use std::collections::{HashMap, HashSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use super::window::{TargetMode, WindowSample};
use crate::encoding::ALPHABET_LEN;
use crate::geometry::{load_pdb_file, ChainRecord};
use crate::{Error, Result};

/// One line of a dataset manifest: a PDB file path and an optional class
/// label, tab-separated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: Option<String>,
}

/// Reads a manifest file. Blank lines and `#` comments are skipped; relative
/// paths resolve against the manifest's directory.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
    let base = path.parent().unwrap_or(Path::new(""));
    Ok(text
        .lines()
        .map(str::trim_end)
        .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|line| {
            let mut parts = line.splitn(2, '\t');
            let file = PathBuf::from(parts.next().unwrap_or_default().trim());
            let label = parts
                .next()
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string);
            ManifestEntry {
                path: if file.is_absolute() { file } else { base.join(file) },
                label,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Protein {
    pub id: String,
    pub label: Option<String>,
    pub chains: Vec<ChainRecord>,
}

/// A set of proteins addressable by ID, in manifest order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    proteins: Vec<Protein>,
    index: HashMap<String, usize>,
}

impl Corpus {
    pub fn new(proteins: Vec<Protein>) -> Result<Self> {
        let mut index = HashMap::with_capacity(proteins.len());
        for (i, p) in proteins.iter().enumerate() {
            if index.insert(p.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(p.id.clone()));
            }
        }
        Ok(Corpus { proteins, index })
    }

    /// Loads every file named in a manifest. A protein's ID is its file stem.
    /// Files are parsed on all available cores.
    pub fn load(manifest: impl AsRef<Path>) -> Result<Self> {
        let entries = load_manifest(manifest)?;
        let mut stems = HashSet::new();
        for e in &entries {
            let stem = file_stem(&e.path);
            if !stems.insert(stem.clone()) {
                return Err(Error::DuplicateId(stem));
            }
        }

        let workers = std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
            .min(entries.len().max(1));
        let chunk = entries.len().div_ceil(workers).max(1);
        let loaded: Vec<Result<Vec<Protein>>> = std::thread::scope(|scope| {
            let handles: Vec<_> = entries
                .chunks(chunk)
                .map(|part| {
                    scope.spawn(move || {
                        part.iter()
                            .map(|e| {
                                Ok(Protein {
                                    id: file_stem(&e.path),
                                    label: e.label.clone(),
                                    chains: load_pdb_file(&e.path)?,
                                })
                            })
                            .collect()
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("pdb loader thread panicked"))
                .collect()
        });
        let mut proteins = Vec::with_capacity(entries.len());
        for part in loaded {
            proteins.extend(part?);
        }
        Corpus::new(proteins)
    }

    pub fn proteins(&self) -> &[Protein] {
        &self.proteins
    }

    pub fn get(&self, id: &str) -> Option<&Protein> {
        self.index.get(id).map(|&i| &self.proteins[i])
    }

    pub fn ids(&self) -> Vec<String> {
        self.proteins.iter().map(|p| p.id.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.proteins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.proteins.is_empty()
    }
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Writes samples as comma-separated text: a header row, then one sample per
/// line with the flattened window (`in_<position>_<component>`) followed by
/// the targets (`sin_phi,cos_phi,sin_psi,cos_psi` as applicable).
pub fn write_samples_csv<W: Write>(
    mut out: W,
    samples: &[WindowSample],
    window_size: usize,
    mode: TargetMode,
) -> Result<()> {
    let mut header: Vec<String> = (0..window_size)
        .flat_map(|p| (0..ALPHABET_LEN).map(move |c| format!("in_{p}_{c}")))
        .collect();
    for (angle, on) in [("phi", mode.predicts_phi()), ("psi", mode.predicts_psi())] {
        if on {
            header.push(format!("sin_{angle}"));
            header.push(format!("cos_{angle}"));
        }
    }
    writeln!(out, "{}", header.join(","))?;

    let mut line = String::new();
    for s in samples {
        if s.inputs.len() != window_size || s.target.len() != mode.output_width() {
            return Err(Error::Shape {
                op: "write_samples_csv",
                left: vec![window_size, mode.output_width()],
                right: vec![s.inputs.len(), s.target.len()],
            });
        }
        line.clear();
        for v in s.inputs.iter().flatten().chain(&s.target) {
            if !line.is_empty() {
                line.push(',');
            }
            line.push_str(&v.to_string());
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}
