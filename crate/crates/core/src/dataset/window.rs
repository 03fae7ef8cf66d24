use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::codec::encode_angle;
use super::corpus::Corpus;
use super::split::SplitManifest;
use crate::encoding::{encode_sequence, EncodedResidue, EncodingScheme};
use crate::geometry::{ChainRecord, ResidueTorsions};
use crate::{Error, Result};

/// Supported window sizes: the odd values from 3 to 23.
pub const WINDOW_SIZES: [usize; 11] = [3, 5, 7, 9, 11, 13, 15, 17, 19, 21, 23];

/// Which angles a model predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetMode {
    Phi,
    Psi,
    Both,
}

impl TargetMode {
    pub const ALL: [TargetMode; 3] = [TargetMode::Phi, TargetMode::Psi, TargetMode::Both];

    /// Number of network outputs: one sin/cos pair per predicted angle.
    pub fn output_width(self) -> usize {
        match self {
            TargetMode::Phi | TargetMode::Psi => 2,
            TargetMode::Both => 4,
        }
    }

    pub fn predicts_phi(self) -> bool {
        matches!(self, TargetMode::Phi | TargetMode::Both)
    }

    pub fn predicts_psi(self) -> bool {
        matches!(self, TargetMode::Psi | TargetMode::Both)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TargetMode::Phi => "phi",
            TargetMode::Psi => "psi",
            TargetMode::Both => "both",
        }
    }

    /// Required angles of a residue in target order, or `None` if any is
    /// undefined.
    fn angles(self, r: &ResidueTorsions) -> Option<Vec<f64>> {
        match self {
            TargetMode::Phi => Some(vec![r.phi?]),
            TargetMode::Psi => Some(vec![r.psi?]),
            TargetMode::Both => Some(vec![r.phi?, r.psi?]),
        }
    }
}

impl fmt::Display for TargetMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TargetMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "phi" => Ok(TargetMode::Phi),
            "psi" => Ok(TargetMode::Psi),
            "both" => Ok(TargetMode::Both),
            other => Err(Error::Config(format!("unknown target mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowConfig {
    window_size: usize,
    pub scheme: EncodingScheme,
    pub target_mode: TargetMode,
}

impl WindowConfig {
    pub fn new(window_size: usize, scheme: EncodingScheme, target_mode: TargetMode) -> Result<Self> {
        if !WINDOW_SIZES.contains(&window_size) {
            return Err(Error::InvalidWindow(window_size));
        }
        Ok(WindowConfig {
            window_size,
            scheme,
            target_mode,
        })
    }

    pub fn window_size(&self) -> usize {
        self.window_size
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CenterResidue {
    pub pdb_id: String,
    pub chain_id: char,
    pub residue_seq: i32,
}

/// One training example: `window_size` encoded residues and the sin/cos
/// targets of the center residue.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSample {
    pub inputs: Vec<EncodedResidue>,
    /// `(sin, cos)` pairs in the order φ then ψ.
    pub target: Vec<f64>,
    /// Source angles in degrees, same order as the target pairs.
    pub angles: Vec<f64>,
    pub center: CenterResidue,
}

/// Slides full windows over each break-free segment of the chain.
///
/// Terminal residues get no window, windows never span a chain break, and
/// windows whose center lacks a required angle are dropped. Undefined angles
/// on non-center residues do not matter.
pub fn make_windows(chain: &ChainRecord, config: &WindowConfig) -> Result<Vec<WindowSample>> {
    let w = config.window_size;
    let half = w / 2;
    let encoded = encode_sequence(&config.scheme, &chain.sequence)?;
    if encoded.len() != chain.residues.len() {
        return Err(Error::LengthMismatch {
            left: encoded.len(),
            right: chain.residues.len(),
        });
    }

    let mut samples = Vec::new();
    let mut offset = 0;
    for segment in chain.segments() {
        let rows = &encoded[offset..offset + segment.len()];
        offset += segment.len();
        if segment.len() < w {
            continue;
        }
        for start in 0..=segment.len() - w {
            let center = &segment[start + half];
            let Some(angles) = config.target_mode.angles(center) else {
                continue;
            };
            let mut target = Vec::with_capacity(angles.len() * 2);
            for &a in &angles {
                let (s, c) = encode_angle(Some(a))?;
                target.push(s);
                target.push(c);
            }
            samples.push(WindowSample {
                inputs: rows[start..start + w].to_vec(),
                target,
                angles,
                center: CenterResidue {
                    pdb_id: chain.pdb_id.clone(),
                    chain_id: chain.chain_id,
                    residue_seq: center.residue_seq,
                },
            });
        }
    }
    Ok(samples)
}

/// Window samples for the three partitions of a split.
#[derive(Debug, Clone, Default)]
pub struct Partitions {
    pub train: Vec<WindowSample>,
    pub validation: Vec<WindowSample>,
    pub test: Vec<WindowSample>,
}

impl Partitions {
    /// Encodes every chain of every protein after the split, so each protein
    /// contributes samples to exactly one partition.
    pub fn build(corpus: &Corpus, split: &SplitManifest, config: &WindowConfig) -> Result<Self> {
        let windows_for = |ids: &[String]| -> Result<Vec<WindowSample>> {
            let mut out = Vec::new();
            for id in ids {
                if let Some(protein) = corpus.get(id) {
                    for chain in &protein.chains {
                        out.extend(make_windows(chain, config)?);
                    }
                }
            }
            Ok(out)
        };
        Ok(Partitions {
            train: windows_for(&split.train)?,
            validation: windows_for(&split.validation)?,
            test: windows_for(&split.test)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn straight_chain(len: usize) -> ChainRecord {
        let residues: Vec<ResidueTorsions> = (0..len)
            .map(|i| ResidueTorsions {
                residue_seq: i as i32 + 1,
                one_letter: 'A',
                phi: (i > 0).then_some(-60.0),
                psi: (i + 1 < len).then_some(-45.0),
                omega: (i > 0).then_some(180.0),
                break_before: false,
            })
            .collect();
        ChainRecord {
            pdb_id: "TEST".into(),
            chain_id: 'A',
            sequence: "A".repeat(len),
            residues,
        }
    }

    fn config(w: usize, mode: TargetMode) -> WindowConfig {
        WindowConfig::new(w, EncodingScheme::one_hot(), mode).unwrap()
    }

    #[test]
    fn window_counts_from_protein_lengths() {
        let cfg = config(5, TargetMode::Both);
        assert_eq!(make_windows(&straight_chain(20), &cfg).unwrap().len(), 16);
        assert_eq!(make_windows(&straight_chain(30), &cfg).unwrap().len(), 26);
        assert!(make_windows(&straight_chain(5), &config(7, TargetMode::Phi))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn invalid_window_sizes() {
        for w in [0, 1, 2, 4, 25] {
            assert!(matches!(
                WindowConfig::new(w, EncodingScheme::one_hot(), TargetMode::Phi),
                Err(Error::InvalidWindow(_))
            ));
        }
    }

    #[test]
    fn windows_do_not_span_breaks() {
        let mut chain = straight_chain(12);
        chain.residues[6].break_before = true;
        chain.residues[6].phi = None;
        chain.residues[6].omega = None;
        chain.residues[5].psi = None;
        // two segments of 6: 6 - 5 + 1 = 2 windows each
        let samples = make_windows(&chain, &config(5, TargetMode::Both)).unwrap();
        let centers: Vec<i32> = samples.iter().map(|s| s.center.residue_seq).collect();
        assert_eq!(centers, vec![3, 4, 9, 10]);
    }

    #[test]
    fn undefined_center_angle_drops_window() {
        let mut chain = straight_chain(10);
        chain.residues[4].psi = None;
        let both = make_windows(&chain, &config(3, TargetMode::Both)).unwrap();
        let phi = make_windows(&chain, &config(3, TargetMode::Phi)).unwrap();
        assert_eq!(both.len(), 7);
        assert_eq!(phi.len(), 8);
    }

    #[test]
    fn both_mode_target_order() {
        let samples = make_windows(&straight_chain(3), &config(3, TargetMode::Both)).unwrap();
        let t = &samples[0].target;
        let (sp, cp) = (-60f64).to_radians().sin_cos();
        let (ss, cs) = (-45f64).to_radians().sin_cos();
        assert_eq!(t, &vec![sp, cp, ss, cs]);
        assert_eq!(samples[0].angles, vec![-60.0, -45.0]);
        assert_eq!(samples[0].inputs.len(), 3);
    }

    #[test]
    fn target_mode_parsing() {
        assert_eq!("PSI".parse::<TargetMode>().unwrap(), TargetMode::Psi);
        assert!("omega".parse::<TargetMode>().is_err());
        assert_eq!(TargetMode::Both.output_width(), 4);
        assert_eq!(TargetMode::Phi.output_width(), 2);
    }
}
