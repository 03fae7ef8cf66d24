use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use super::dihedral::{dihedral, distance, Vec3};
use super::pdb::{parse_pdb, pdb_id_from_header, Atom};
use crate::encoding::three_to_one;
use crate::{Error, Result};

/// Peptide C(i−1)–N(i) distance in Ångström above which the chain is
/// considered broken.
pub const CHAIN_BREAK_DISTANCE: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ResidueBackbone {
    pub residue_seq: i32,
    pub residue_name: String,
    pub n: Vec3,
    pub ca: Vec3,
    pub c: Vec3,
}

/// Backbone dihedrals of one residue in degrees; `None` marks an undefined
/// angle.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidueTorsions {
    pub residue_seq: i32,
    pub one_letter: char,
    pub phi: Option<f64>,
    pub psi: Option<f64>,
    pub omega: Option<f64>,
    /// The chain is broken between this residue and the previous one.
    pub break_before: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainRecord {
    pub pdb_id: String,
    pub chain_id: char,
    pub residues: Vec<ResidueTorsions>,
    pub sequence: String,
}

impl ChainRecord {
    /// Contiguous runs of residues between chain breaks.
    pub fn segments(&self) -> impl Iterator<Item = &[ResidueTorsions]> {
        let mut start = 0;
        let residues = &self.residues;
        let mut bounds = Vec::new();
        for (i, r) in residues.iter().enumerate().skip(1) {
            if r.break_before {
                bounds.push((start, i));
                start = i;
            }
        }
        if !residues.is_empty() {
            bounds.push((start, residues.len()));
        }
        bounds.into_iter().map(move |(a, b)| &residues[a..b])
    }

    pub fn break_count(&self) -> usize {
        self.residues.iter().skip(1).filter(|r| r.break_before).count()
    }
}

#[derive(Default)]
struct ResidueAtoms {
    residue_seq: i32,
    residue_name: String,
    n: Option<Vec3>,
    ca: Option<Vec3>,
    c: Option<Vec3>,
    skip: bool,
}

type ResidueIndex = HashMap<(i32, char), usize>;

/// Groups atoms into chains and residues and computes φ, ψ and ω.
///
/// Residues missing N, CA or C are dropped and the gap is treated as a chain
/// break, as is a C(i−1)–N(i) distance above [`CHAIN_BREAK_DISTANCE`].
/// Residues with an insertion code, or whose sequence number does not exceed
/// the previous kept residue, are dropped the same way.
pub fn compute_torsions(pdb_id: &str, atoms: &[Atom]) -> Vec<ChainRecord> {
    let mut chain_order: Vec<char> = Vec::new();
    let mut chains: HashMap<char, (Vec<ResidueAtoms>, ResidueIndex)> = HashMap::new();

    for atom in atoms {
        let (residues, index) = chains.entry(atom.chain_id).or_insert_with(|| {
            chain_order.push(atom.chain_id);
            Default::default()
        });
        let key = (atom.residue_seq, atom.insertion_code);
        let slot = *index.entry(key).or_insert_with(|| {
            residues.push(ResidueAtoms {
                residue_seq: atom.residue_seq,
                residue_name: atom.residue_name.clone(),
                skip: atom.insertion_code != ' ',
                ..Default::default()
            });
            residues.len() - 1
        });
        let res = &mut residues[slot];
        let target = match atom.name.as_str() {
            "N" => &mut res.n,
            "CA" => &mut res.ca,
            "C" => &mut res.c,
            _ => continue,
        };
        target.get_or_insert(atom.coords);
    }

    chain_order
        .into_iter()
        .filter_map(|chain_id| {
            let (residues, _) = chains.remove(&chain_id)?;
            chain_record(pdb_id, chain_id, residues)
        })
        .collect()
}

fn chain_record(pdb_id: &str, chain_id: char, residues: Vec<ResidueAtoms>) -> Option<ChainRecord> {
    let mut backbone: Vec<(ResidueBackbone, bool)> = Vec::new();
    let mut pending_break = false;
    for r in residues {
        let increasing = backbone
            .last()
            .is_none_or(|(prev, _)| r.residue_seq > prev.residue_seq);
        match (r.n, r.ca, r.c) {
            (Some(n), Some(ca), Some(c)) if !r.skip && increasing => {
                backbone.push((
                    ResidueBackbone {
                        residue_seq: r.residue_seq,
                        residue_name: r.residue_name,
                        n,
                        ca,
                        c,
                    },
                    pending_break,
                ));
                pending_break = false;
            }
            _ => pending_break = !backbone.is_empty(),
        }
    }
    if backbone.is_empty() {
        return None;
    }

    let breaks: Vec<bool> = backbone
        .iter()
        .enumerate()
        .map(|(i, (bb, flagged))| {
            i > 0 && (*flagged || distance(backbone[i - 1].0.c, bb.n) > CHAIN_BREAK_DISTANCE)
        })
        .collect();

    let residues: Vec<ResidueTorsions> = (0..backbone.len())
        .map(|i| {
            let cur = &backbone[i].0;
            let prev = (i > 0 && !breaks[i]).then(|| &backbone[i - 1].0);
            let next = (i + 1 < backbone.len() && !breaks[i + 1]).then(|| &backbone[i + 1].0);
            ResidueTorsions {
                residue_seq: cur.residue_seq,
                one_letter: three_to_one(&cur.residue_name),
                phi: prev.and_then(|p| dihedral(p.c, cur.n, cur.ca, cur.c).ok()),
                psi: next.and_then(|nx| dihedral(cur.n, cur.ca, cur.c, nx.n).ok()),
                omega: prev.and_then(|p| dihedral(p.ca, p.c, cur.n, cur.ca).ok()),
                break_before: breaks[i],
            }
        })
        .collect();

    Some(ChainRecord {
        pdb_id: pdb_id.to_string(),
        chain_id,
        sequence: residues.iter().map(|r| r.one_letter).collect(),
        residues,
    })
}

/// Reads a PDB file and returns its chains. The ID comes from the `HEADER`
/// record when present, otherwise from the file stem.
pub fn load_pdb_file(path: impl AsRef<Path>) -> Result<Vec<ChainRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
    let atoms = parse_pdb(&text).map_err(|e| e.in_file(path))?;
    let id = pdb_id_from_header(&text).unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    Ok(compute_torsions(&id, &atoms))
}

fn fmt_angle(angle: Option<f64>) -> String {
    angle.map(|a| format!("{a:.3}")).unwrap_or_default()
}

/// Writes `pdb_id,chain,residue_seq,letter,phi,psi,omega` rows with empty
/// fields for undefined angles.
pub fn write_torsions_csv<W: Write>(mut out: W, chains: &[ChainRecord]) -> Result<()> {
    writeln!(out, "pdb_id,chain,residue_seq,letter,phi,psi,omega")?;
    for chain in chains {
        for r in &chain.residues {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                chain.pdb_id,
                chain.chain_id,
                r.residue_seq,
                r.one_letter,
                fmt_angle(r.phi),
                fmt_angle(r.psi),
                fmt_angle(r.omega),
            )?;
        }
    }
    Ok(())
}
