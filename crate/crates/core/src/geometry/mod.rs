//! Backbone geometry: PDB atom records, dihedral angles and per-residue
//! φ/ψ/ω extraction.

mod dihedral;
mod pdb;
pub mod synth;
mod torsions;

pub use dihedral::{dihedral, wrap_degrees, Vec3};
pub use pdb::{parse_pdb, pdb_id_from_header, write_pdb, Atom};
pub use torsions::{
    compute_torsions, load_pdb_file, write_torsions_csv, ChainRecord, ResidueBackbone,
    ResidueTorsions, CHAIN_BREAK_DISTANCE,
};

#[cfg(test)]
pub(crate) fn build_test_chain(len: usize) -> Vec<Atom> {
    let specs: Vec<_> = (0..len)
        .map(|i| synth::ResidueSpec::new(crate::encoding::ALPHABET[i % 20], -60.0, -45.0, 180.0))
        .collect();
    synth::build_chain('A', 1, &specs)
}
