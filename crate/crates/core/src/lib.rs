//! Protein backbone torsion-angle prediction from primary sequence.
//!
//! The crate covers the whole pipeline:
//!
//! * [`geometry`]: PDB parsing and φ/ψ/ω dihedral extraction.
//! * [`encoding`]: one-hot and substitution-matrix residue encodings.
//! * [`dataset`]: sliding windows, sin/cos angle targets and protein-level splits.
//! * [`neuralnet`]: dense and stacked-LSTM networks with hand-written backpropagation.
//! * [`harness`]: grid sweeps, circular error metrics, journaling and ranked reports.

pub mod dataset;
pub mod encoding;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod neuralnet;

pub use error::{Error, Result};
