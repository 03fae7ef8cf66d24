use std::fmt::Write as _;

use super::Vec3;
use crate::{Error, Result};

/// A single ATOM record from a PDB file.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    /// Atom label with surrounding whitespace removed, e.g. `CA`.
    pub name: String,
    /// Alternate location indicator; `' '` when absent.
    pub alt_loc: char,
    pub residue_name: String,
    pub chain_id: char,
    pub residue_seq: i32,
    /// Insertion code; `' '` when absent.
    pub insertion_code: char,
    pub coords: Vec3,
    pub model_number: u32,
}

impl Atom {
    /// Formats the atom as a fixed-column `ATOM` line.
    pub fn to_pdb_line(&self, serial: usize) -> String {
        // One- to three-character names start in column 14 by convention.
        let name = if self.name.len() < 4 {
            format!(" {:<3}", self.name)
        } else {
            self.name.clone()
        };
        let element = self.name.chars().next().unwrap_or(' ');
        format!(
            "ATOM  {:>5} {}{}{:>3} {}{:>4}{}   {:>8.3}{:>8.3}{:>8.3}{:>6.2}{:>6.2}          {:>2}",
            serial % 100_000,
            name,
            self.alt_loc,
            self.residue_name,
            self.chain_id,
            self.residue_seq,
            self.insertion_code,
            self.coords[0],
            self.coords[1],
            self.coords[2],
            1.0,
            0.0,
            element,
        )
    }
}

/// Renders atoms as a minimal single-model PDB file.
pub fn write_pdb(atoms: &[Atom]) -> String {
    let mut out = String::new();
    let mut prev_chain = None;
    for (i, atom) in atoms.iter().enumerate() {
        if prev_chain.is_some_and(|c| c != atom.chain_id) {
            out.push_str("TER\n");
        }
        prev_chain = Some(atom.chain_id);
        let _ = writeln!(out, "{}", atom.to_pdb_line(i + 1));
    }
    if !atoms.is_empty() {
        out.push_str("TER\n");
    }
    out.push_str("END\n");
    out
}

/// 1-based inclusive column slice. Returns `None` if the line is too short.
fn columns(line: &str, first: usize, last: usize) -> Option<&str> {
    let end = last.min(line.len());
    if first > end {
        return None;
    }
    line.get(first - 1..end)
}

fn column_char(line: &str, col: usize) -> char {
    columns(line, col, col)
        .and_then(|s| s.chars().next())
        .unwrap_or(' ')
}

fn parse_coord(line: &str, line_no: usize, first: usize, last: usize, axis: char) -> Result<f64> {
    let field = columns(line, first, last).ok_or_else(|| Error::Parse {
        line: line_no,
        message: format!("record too short for {axis} coordinate"),
    })?;
    let value: f64 = field.trim().parse().map_err(|_| Error::Parse {
        line: line_no,
        message: format!("malformed {axis} coordinate {:?}", field.trim()),
    })?;
    if !value.is_finite() {
        return Err(Error::Parse {
            line: line_no,
            message: format!("non-finite {axis} coordinate"),
        });
    }
    Ok(value)
}

fn parse_atom_line(line: &str, line_no: usize, model_number: u32) -> Result<Atom> {
    let name = columns(line, 13, 16).unwrap_or("").trim();
    if name.is_empty() {
        return Err(Error::Parse {
            line: line_no,
            message: "missing atom name".into(),
        });
    }
    let seq_field = columns(line, 23, 26).unwrap_or("").trim();
    let residue_seq = seq_field.parse().map_err(|_| Error::Parse {
        line: line_no,
        message: format!("malformed residue sequence number {seq_field:?}"),
    })?;

    Ok(Atom {
        name: name.to_string(),
        alt_loc: column_char(line, 17),
        residue_name: columns(line, 18, 20).unwrap_or("").trim().to_string(),
        chain_id: column_char(line, 22),
        residue_seq,
        insertion_code: column_char(line, 27),
        coords: [
            parse_coord(line, line_no, 31, 38, 'x')?,
            parse_coord(line, line_no, 39, 46, 'y')?,
            parse_coord(line, line_no, 47, 54, 'z')?,
        ],
        model_number,
    })
}

/// Parses the ATOM records of the first model in a PDB file.
///
/// Records that precede any `MODEL` line belong to model 1. Parsing stops at
/// the first `ENDMDL` or at a `MODEL` line that would open a second model.
/// HETATM and all other record types are ignored, as are alternate locations
/// other than blank and `A`. Line numbers in errors are 1-based.
pub fn parse_pdb(text: &str) -> Result<Vec<Atom>> {
    let mut atoms = Vec::new();
    let mut model_number = 1;
    let mut model_open = false;

    for (idx, line) in text.lines().enumerate() {
        let record = columns(line, 1, 6).unwrap_or(line).trim_end();
        match record {
            "MODEL" => {
                if model_open || !atoms.is_empty() {
                    break;
                }
                model_open = true;
                model_number = columns(line, 11, 14)
                    .and_then(|s| s.trim().parse().ok())
                    .or_else(|| line.get(5..).and_then(|s| s.trim().parse().ok()))
                    .unwrap_or(1);
            }
            "ENDMDL" => break,
            "ATOM" => {
                let atom = parse_atom_line(line, idx + 1, model_number)?;
                if matches!(atom.alt_loc, ' ' | 'A') {
                    atoms.push(atom);
                }
            }
            _ => {}
        }
    }
    Ok(atoms)
}

/// The four-character ID code from a `HEADER` record (columns 63–66), if any.
pub fn pdb_id_from_header(text: &str) -> Option<String> {
    text.lines()
        .find(|l| l.starts_with("HEADER"))
        .and_then(|l| columns(l, 63, 66))
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
}
