//! Ideal-geometry backbone construction from torsion angles (NeRF placement).
//!
//! Used to synthesize test corpora with known φ/ψ/ω.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::dihedral::{add, cross, norm, scale, sub, Vec3};
use super::pdb::{write_pdb, Atom};
use crate::encoding::alphabet::one_to_three;
use crate::{Error, Result};

pub const BOND_N_CA: f64 = 1.458;
pub const BOND_CA_C: f64 = 1.525;
pub const BOND_C_N: f64 = 1.329;
pub const ANGLE_N_CA_C: f64 = 111.2;
pub const ANGLE_CA_C_N: f64 = 116.2;
pub const ANGLE_C_N_CA: f64 = 121.7;

/// Residue letter and the torsions that position it, in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidueSpec {
    pub letter: char,
    pub phi: f64,
    pub psi: f64,
    pub omega: f64,
}

impl ResidueSpec {
    pub fn new(letter: char, phi: f64, psi: f64, omega: f64) -> Self {
        ResidueSpec { letter, phi, psi, omega }
    }
}

fn normalize(v: Vec3) -> Vec3 {
    scale(v, 1.0 / norm(v))
}

/// Places atom d so that |cd| = `bond`, angle bcd = `angle` and dihedral
/// abcd = `torsion` (degrees).
pub fn place_atom(a: Vec3, b: Vec3, c: Vec3, bond: f64, angle: f64, torsion: f64) -> Vec3 {
    let (angle, torsion) = (angle.to_radians(), torsion.to_radians());
    let bc = normalize(sub(c, b));
    let n = normalize(cross(sub(b, a), bc));
    let m = cross(n, bc);
    let d2 = [
        -bond * angle.cos(),
        bond * angle.sin() * torsion.cos(),
        bond * angle.sin() * torsion.sin(),
    ];
    add(c, add(scale(bc, d2[0]), add(scale(m, d2[1]), scale(n, d2[2]))))
}

/// Builds N, CA and C atoms for a chain. φ of the first residue, ω of the
/// first residue and ψ of the last residue do not affect the coordinates.
pub fn build_chain(chain_id: char, first_seq: i32, residues: &[ResidueSpec]) -> Vec<Atom> {
    let mut atoms = Vec::with_capacity(residues.len() * 3);
    let mut prev: Option<(Vec3, Vec3, Vec3, f64)> = None;
    for (i, spec) in residues.iter().enumerate() {
        let (n, ca, c) = match prev {
            None => {
                let n = [0.0, 0.0, 0.0];
                let ca = [BOND_N_CA, 0.0, 0.0];
                let t = (180.0 - ANGLE_N_CA_C).to_radians();
                let c = add(ca, [BOND_CA_C * t.cos(), BOND_CA_C * t.sin(), 0.0]);
                (n, ca, c)
            }
            Some((pn, pca, pc, ppsi)) => {
                let n = place_atom(pn, pca, pc, BOND_C_N, ANGLE_CA_C_N, ppsi);
                let ca = place_atom(pca, pc, n, BOND_N_CA, ANGLE_C_N_CA, spec.omega);
                let c = place_atom(pc, n, ca, BOND_CA_C, ANGLE_N_CA_C, spec.phi);
                (n, ca, c)
            }
        };
        let seq = first_seq + i as i32;
        for (name, coords) in [("N", n), ("CA", ca), ("C", c)] {
            atoms.push(Atom {
                name: name.into(),
                alt_loc: ' ',
                residue_name: one_to_three(spec.letter).into(),
                chain_id,
                residue_seq: seq,
                insertion_code: ' ',
                coords,
                model_number: 1,
            });
        }
        prev = Some((n, ca, c, spec.psi));
    }
    atoms
}

/// Ideal right-handed α-helix torsions.
pub const HELIX_PHI: f64 = -57.0;
pub const HELIX_PSI: f64 = -47.0;

/// A helical chain of random standard residues whose φ and ψ carry Gaussian
/// noise of standard deviation `noise_deg` around the ideal helix.
pub fn noisy_helix<R: Rng + ?Sized>(rng: &mut R, length: usize, noise_deg: f64) -> Vec<ResidueSpec> {
    let noise = Normal::new(0.0, noise_deg.max(0.0)).expect("finite noise");
    (0..length)
        .map(|_| {
            let letter = crate::encoding::ALPHABET[rng.gen_range(0..20)];
            ResidueSpec::new(
                letter,
                HELIX_PHI + noise.sample(rng),
                HELIX_PSI + noise.sample(rng),
                180.0,
            )
        })
        .collect()
}

/// Writes `chains` noisy helices of `length` residues as PDB files named
/// `helix_NNN.pdb` in `dir`, plus a `manifest.txt` listing them. Returns the
/// manifest path.
pub fn write_helix_corpus(
    dir: impl AsRef<Path>,
    chains: usize,
    length: usize,
    noise_deg: f64,
    seed: u64,
) -> Result<PathBuf> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::from(e).in_file(dir))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut manifest = String::new();
    for i in 0..chains {
        let name = format!("helix_{i:03}.pdb");
        let atoms = build_chain('A', 1, &noisy_helix(&mut rng, length, noise_deg));
        let path = dir.join(&name);
        std::fs::write(&path, write_pdb(&atoms)).map_err(|e| Error::from(e).in_file(&path))?;
        manifest.push_str(&name);
        manifest.push('\n');
    }
    let path = dir.join("manifest.txt");
    std::fs::write(&path, manifest).map_err(|e| Error::from(e).in_file(&path))?;
    Ok(path)
}
