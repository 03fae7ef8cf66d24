use std::path::Path;
use std::sync::OnceLock;

use super::alphabet::{letter_index, ALPHABET, ALPHABET_LEN};
use crate::{Error, Result};

/// Names of the substitution matrices compiled into the crate.
pub const BUILTIN_MATRICES: [&str; 10] = [
    "BLOSUM30",
    "BLOSUM45",
    "BLOSUM62",
    "BLOSUM65",
    "BLOSUM80",
    "BLOSUM100",
    "PAM30",
    "PAM60",
    "PAM120",
    "PAM250",
];

const BUILTIN_SOURCES: [&str; 10] = [
    include_str!("../matrices/BLOSUM30.txt"),
    include_str!("../matrices/BLOSUM45.txt"),
    include_str!("../matrices/BLOSUM62.txt"),
    include_str!("../matrices/BLOSUM65.txt"),
    include_str!("../matrices/BLOSUM80.txt"),
    include_str!("../matrices/BLOSUM100.txt"),
    include_str!("../matrices/PAM30.txt"),
    include_str!("../matrices/PAM60.txt"),
    include_str!("../matrices/PAM120.txt"),
    include_str!("../matrices/PAM250.txt"),
];

/// An integer substitution matrix restricted to the encoding alphabet, with
/// rows and columns in [`ALPHABET`] order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstitutionMatrix {
    name: String,
    values: [[i32; ALPHABET_LEN]; ALPHABET_LEN],
}

impl SubstitutionMatrix {
    /// Looks up one of the embedded matrices, ignoring ASCII case.
    pub fn builtin(name: &str) -> Option<&'static SubstitutionMatrix> {
        static TABLES: OnceLock<Vec<SubstitutionMatrix>> = OnceLock::new();
        let tables = TABLES.get_or_init(|| {
            BUILTIN_MATRICES
                .iter()
                .zip(BUILTIN_SOURCES)
                .map(|(name, text)| {
                    SubstitutionMatrix::from_ncbi_str(*name, text)
                        .unwrap_or_else(|e| panic!("embedded matrix {name} is malformed: {e}"))
                })
                .collect()
        });
        tables.iter().find(|m| m.name.eq_ignore_ascii_case(name))
    }

    /// Builds a matrix from a full 21×21 grid in alphabet order.
    pub fn from_values(name: impl Into<String>, values: [[i32; ALPHABET_LEN]; ALPHABET_LEN]) -> Result<Self> {
        let m = SubstitutionMatrix {
            name: name.into(),
            values,
        };
        m.check_symmetric()?;
        Ok(m)
    }

    /// Parses a whitespace-delimited matrix in the NCBI layout: `#` comment
    /// lines, a header row of single-letter column labels, then one row per
    /// letter starting with its label.
    ///
    /// Extra letters such as `B`, `Z` or `*` are ignored. All twenty standard
    /// residues must be present; a missing `X` row/column is filled with 0.
    pub fn from_ncbi_str(name: impl Into<String>, text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));

        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::MatrixFormat("missing header row".into()))?;
        let columns: Vec<char> = header
            .split_whitespace()
            .map(|tok| {
                let mut chars = tok.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) => Ok(c.to_ascii_uppercase()),
                    _ => Err(Error::MatrixFormat(format!("header token {tok:?} is not a single letter"))),
                }
            })
            .collect::<Result<_>>()?;

        let mut values = [[0i32; ALPHABET_LEN]; ALPHABET_LEN];
        let mut seen = [[false; ALPHABET_LEN]; ALPHABET_LEN];

        for (idx, line) in lines {
            let mut tokens = line.split_whitespace();
            let label = tokens.next().unwrap_or_default();
            let row_letter = label.chars().next().map(|c| c.to_ascii_uppercase());
            let row_values: Vec<&str> = tokens.collect();
            if row_values.len() != columns.len() {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!(
                        "row {label:?} has {} values, header has {}",
                        row_values.len(),
                        columns.len()
                    ),
                });
            }
            let Some(row) = row_letter.and_then(letter_index) else {
                continue;
            };
            for (&col_letter, raw) in columns.iter().zip(&row_values) {
                let Some(col) = letter_index(col_letter) else {
                    continue;
                };
                values[row][col] = raw.parse().map_err(|_| Error::Parse {
                    line: idx + 1,
                    message: format!("non-integer matrix entry {raw:?}"),
                })?;
                seen[row][col] = true;
            }
        }

        for (i, &a) in ALPHABET[..20].iter().enumerate() {
            for (j, &b) in ALPHABET[..20].iter().enumerate() {
                if !seen[i][j] {
                    return Err(Error::MatrixFormat(format!("missing entry for {a}/{b}")));
                }
            }
        }
        Self::from_values(name, values)
    }

    /// Reads a user-supplied matrix file; the file stem becomes its name.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "custom".into());
        Self::from_ncbi_str(name, &text).map_err(|e| e.in_file(path))
    }

    fn check_symmetric(&self) -> Result<()> {
        for (i, a) in ALPHABET[..20].iter().enumerate() {
            for (j, b) in ALPHABET[..i].iter().enumerate() {
                if self.values[i][j] != self.values[j][i] {
                    return Err(Error::MatrixFormat(format!("{} is not symmetric at {a}/{b}", self.name)));
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[[i32; ALPHABET_LEN]; ALPHABET_LEN] {
        &self.values
    }

    /// Row for the residue at alphabet position `idx`.
    pub fn row(&self, idx: usize) -> &[i32; ALPHABET_LEN] {
        &self.values[idx]
    }

    pub fn score(&self, a: char, b: char) -> Option<i32> {
        Some(self.values[letter_index(a)?][letter_index(b)?])
    }

    pub(crate) fn min_max(&self) -> (i32, i32) {
        let flat = self.values.iter().flatten();
        let min = flat.clone().copied().min().unwrap_or(0);
        let max = flat.copied().max().unwrap_or(0);
        (min, max)
    }
}
