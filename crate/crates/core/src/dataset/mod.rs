//! Training data: sin/cos angle targets, sliding windows over chains and the
//! protein-level train/validation/test split.

mod codec;
mod corpus;
mod split;
mod window;

pub use codec::{decode_angle, encode_angle, AngleCodec};
pub use corpus::{load_manifest, write_samples_csv, Corpus, ManifestEntry, Protein};
pub use split::{split_proteins, split_sizes, SplitManifest};
pub use window::{
    make_windows, CenterResidue, Partitions, TargetMode, WindowConfig, WindowSample, WINDOW_SIZES,
};
