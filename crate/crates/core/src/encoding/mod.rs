//! Residue encodings: one-hot and substitution-matrix rows over a fixed
//! 21-letter alphabet.

pub(crate) mod alphabet;
mod matrix;
mod scheme;

pub use alphabet::{letter_index, three_to_one, ALPHABET, ALPHABET_LEN, UNKNOWN};
pub use matrix::{SubstitutionMatrix, BUILTIN_MATRICES};
pub use scheme::{encode_residue, encode_sequence, EncodedResidue, EncodingScheme};
