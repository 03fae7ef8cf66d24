use std::fmt;
use std::sync::Arc;

use super::alphabet::{letter_index, ALPHABET_LEN};
use super::matrix::{SubstitutionMatrix, BUILTIN_MATRICES};
use crate::{Error, Result};

pub type EncodedResidue = [f64; ALPHABET_LEN];

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    OneHot,
    Matrix(Arc<SubstitutionMatrix>),
}

/// A mapping from residue letters to 21-component vectors.
///
/// Matrix schemes emit the letter's raw matrix row. With normalization on,
/// entries are min-max scaled to [0, 1] over the whole matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingScheme {
    kind: Kind,
    normalized: bool,
}

impl EncodingScheme {
    pub const ONE_HOT: &'static str = "one-hot";

    pub fn one_hot() -> Self {
        EncodingScheme {
            kind: Kind::OneHot,
            normalized: false,
        }
    }

    pub fn from_matrix(matrix: SubstitutionMatrix) -> Self {
        EncodingScheme {
            kind: Kind::Matrix(Arc::new(matrix)),
            normalized: false,
        }
    }

    /// Resolves `one-hot` (also `onehot`, `one_hot`, `one hot`) or a built-in
    /// matrix name, case-insensitively.
    pub fn by_name(name: &str) -> Result<Self> {
        let lowered = name.trim().to_ascii_lowercase();
        if matches!(lowered.as_str(), "one-hot" | "onehot" | "one_hot" | "one hot") {
            return Ok(Self::one_hot());
        }
        SubstitutionMatrix::builtin(name.trim())
            .map(|m| Self::from_matrix(m.clone()))
            .ok_or_else(|| Error::UnknownScheme(name.to_string()))
    }

    /// The eleven built-in schemes: one-hot followed by the ten matrices.
    pub fn all_builtin() -> Vec<Self> {
        std::iter::once(Self::one_hot())
            .chain(
                BUILTIN_MATRICES
                    .iter()
                    .map(|n| Self::by_name(n).expect("builtin matrix")),
            )
            .collect()
    }

    pub fn builtin_names() -> Vec<&'static str> {
        std::iter::once(Self::ONE_HOT)
            .chain(BUILTIN_MATRICES.iter().copied())
            .collect()
    }

    pub fn with_normalization(mut self, on: bool) -> Self {
        self.normalized = on;
        self
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn name(&self) -> &str {
        match &self.kind {
            Kind::OneHot => Self::ONE_HOT,
            Kind::Matrix(m) => m.name(),
        }
    }

    pub fn width(&self) -> usize {
        ALPHABET_LEN
    }

    pub fn matrix(&self) -> Option<&SubstitutionMatrix> {
        match &self.kind {
            Kind::OneHot => None,
            Kind::Matrix(m) => Some(m),
        }
    }

    fn encode_index(&self, idx: usize) -> EncodedResidue {
        let mut out = [0.0; ALPHABET_LEN];
        match &self.kind {
            Kind::OneHot => out[idx] = 1.0,
            Kind::Matrix(m) => {
                let (min, max) = if self.normalized { m.min_max() } else { (0, 1) };
                let span = f64::from((max - min).max(1));
                for (o, &v) in out.iter_mut().zip(m.row(idx)) {
                    *o = if self.normalized {
                        f64::from(v - min) / span
                    } else {
                        f64::from(v)
                    };
                }
            }
        }
        out
    }
}

impl fmt::Display for EncodingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Encodes one residue letter. Unknown residues must already be mapped to `X`.
pub fn encode_residue(scheme: &EncodingScheme, letter: char) -> Result<EncodedResidue> {
    let idx = letter_index(letter).ok_or(Error::InvalidLetter {
        letter,
        position: None,
    })?;
    Ok(scheme.encode_index(idx))
}

/// Encodes a sequence row by row; errors carry the offending position.
pub fn encode_sequence(scheme: &EncodingScheme, sequence: &str) -> Result<Vec<EncodedResidue>> {
    sequence
        .chars()
        .enumerate()
        .map(|(pos, letter)| {
            let idx = letter_index(letter).ok_or(Error::InvalidLetter {
                letter,
                position: Some(pos),
            })?;
            Ok(scheme.encode_index(idx))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::ALPHABET;

    #[test]
    fn one_hot_alanine_and_unknown() {
        let s = EncodingScheme::one_hot();
        let a = encode_residue(&s, 'A').unwrap();
        let mut expected = [0.0; 21];
        expected[0] = 1.0;
        assert_eq!(a, expected);

        let x = encode_residue(&s, 'X').unwrap();
        assert_eq!(x[20], 1.0);
        assert_eq!(x.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn blosum62_alanine_row() {
        let s = EncodingScheme::by_name("BLOSUM62").unwrap();
        let a = encode_residue(&s, 'A').unwrap();
        let expected = [
            4., -1., -2., -2., 0., -1., -1., 0., -2., -1., -1., -1., -1., -2., -1., 1., 0., -3., -2., 0., 0.,
        ];
        assert_eq!(a, expected);
    }

    #[test]
    fn invalid_letters() {
        let s = EncodingScheme::one_hot();
        assert!(matches!(
            encode_residue(&s, 'B'),
            Err(Error::InvalidLetter { letter: 'B', position: None })
        ));
        assert!(matches!(
            encode_sequence(&s, "AAZ"),
            Err(Error::InvalidLetter { letter: 'Z', position: Some(2) })
        ));
    }

    #[test]
    fn sequences() {
        let s = EncodingScheme::one_hot();
        let rows = encode_sequence(&s, "AA").unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0], rows[1]);

        let b62 = EncodingScheme::by_name("BLOSUM62").unwrap();
        assert!(encode_sequence(&b62, "").unwrap().is_empty());
    }

    #[test]
    fn names_resolve() {
        assert_eq!(EncodingScheme::by_name("One-Hot").unwrap().name(), "one-hot");
        assert_eq!(EncodingScheme::by_name("pam120").unwrap().name(), "PAM120");
        assert!(matches!(
            EncodingScheme::by_name("BLOSUM50"),
            Err(Error::UnknownScheme(_))
        ));
        let all = EncodingScheme::all_builtin();
        assert_eq!(all.len(), 11);
        assert_eq!(
            all.iter().map(|s| s.name()).collect::<Vec<_>>(),
            EncodingScheme::builtin_names()
        );
    }

    #[test]
    fn normalization_maps_to_unit_interval() {
        let s = EncodingScheme::by_name("PAM250").unwrap().with_normalization(true);
        let mut saw_zero = false;
        let mut saw_one = false;
        for &c in &ALPHABET {
            for v in encode_residue(&s, c).unwrap() {
                assert!((0.0..=1.0).contains(&v));
                saw_zero |= v == 0.0;
                saw_one |= v == 1.0;
            }
        }
        assert!(saw_zero && saw_one);
        assert_eq!(
            EncodingScheme::one_hot().with_normalization(true).encode_index(3)[3],
            1.0
        );
    }
}
