use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{TargetMode, WINDOW_SIZES};
use crate::encoding::EncodingScheme;
use crate::neuralnet::{Architecture, TrainingConfig, DEFAULT_HIDDEN_WIDTH};
use crate::{Error, Result};

/// One point of the sweep grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridCell {
    pub encoding: String,
    pub window_size: usize,
    pub model: Architecture,
    pub target_mode: TargetMode,
}

impl GridCell {
    /// Seed for this cell, a stable FNV-1a hash of the global seed and the
    /// cell's identity.
    pub fn seed(&self, global_seed: u64) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let identity = format!(
            "{}|{}|{}|{}",
            self.encoding.to_ascii_uppercase(),
            self.window_size,
            self.model,
            self.target_mode
        );
        global_seed
            .to_le_bytes()
            .iter()
            .chain(identity.as_bytes())
            .fold(OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(PRIME))
    }
}

impl fmt::Display for GridCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/w{}/{}/{}", self.encoding, self.window_size, self.model, self.target_mode)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub encodings: Vec<String>,
    pub window_sizes: Vec<usize>,
    pub models: Vec<Architecture>,
    pub target_modes: Vec<TargetMode>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            encodings: EncodingScheme::builtin_names().into_iter().map(String::from).collect(),
            window_sizes: WINDOW_SIZES.to_vec(),
            models: Architecture::ALL.to_vec(),
            target_modes: TargetMode::ALL.to_vec(),
        }
    }
}

impl SweepGrid {
    pub fn len(&self) -> usize {
        self.encodings.len() * self.window_sizes.len() * self.models.len() * self.target_modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cells ordered by encoding, window, model, then target mode.
    pub fn cells(&self) -> Vec<GridCell> {
        let mut out = Vec::with_capacity(self.len());
        for encoding in &self.encodings {
            for &window_size in &self.window_sizes {
                for &model in &self.models {
                    for &target_mode in &self.target_modes {
                        out.push(GridCell {
                            encoding: encoding.clone(),
                            window_size,
                            model,
                            target_mode,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::Config("sweep grid is empty".into()));
        }
        for e in &self.encodings {
            EncodingScheme::by_name(e)?;
        }
        if let Some(w) = self.window_sizes.iter().find(|w| !WINDOW_SIZES.contains(w)) {
            return Err(Error::InvalidWindow(*w));
        }
        Ok(())
    }
}

/// Contents of a grid config file. Omitted lists default to the full grid.
///
/// ```toml
/// encodings = ["one-hot", "BLOSUM62"]
/// windows = [5, 7]
/// models = ["DNN1", "LSTM1"]
/// targets = ["phi", "both"]
/// hidden_width = 32
///
/// [training]
/// batch_size = 256
/// max_epochs = 20
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_encodings")]
    pub encodings: Vec<String>,
    #[serde(default = "default_windows")]
    pub windows: Vec<usize>,
    #[serde(default = "default_models")]
    pub models: Vec<Architecture>,
    #[serde(default = "default_targets")]
    pub targets: Vec<TargetMode>,
    #[serde(default = "default_hidden_width")]
    pub hidden_width: usize,
    #[serde(default)]
    pub training: TrainingConfig,
}

fn default_encodings() -> Vec<String> {
    SweepGrid::default().encodings
}

fn default_windows() -> Vec<usize> {
    WINDOW_SIZES.to_vec()
}

fn default_models() -> Vec<Architecture> {
    Architecture::ALL.to_vec()
}

fn default_targets() -> Vec<TargetMode> {
    TargetMode::ALL.to_vec()
}

fn default_hidden_width() -> usize {
    DEFAULT_HIDDEN_WIDTH
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            encodings: default_encodings(),
            windows: default_windows(),
            models: default_models(),
            targets: default_targets(),
            hidden_width: DEFAULT_HIDDEN_WIDTH,
            training: TrainingConfig::default(),
        }
    }
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: SweepConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.grid().validate()?;
        config.training.validate()?;
        if config.hidden_width == 0 {
            return Err(Error::Config("hidden_width must be positive".into()));
        }
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
        Self::from_toml_str(&text).map_err(|e| e.in_file(path))
    }

    pub fn grid(&self) -> SweepGrid {
        SweepGrid {
            encodings: self.encodings.clone(),
            window_sizes: self.windows.clone(),
            models: self.models.clone(),
            target_modes: self.targets.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_cardinality() {
        let g = SweepGrid::default();
        assert_eq!(
            (g.encodings.len(), g.window_sizes.len(), g.models.len(), g.target_modes.len()),
            (11, 11, 7, 3)
        );
        assert_eq!(g.len(), 2541);
        let cells = g.cells();
        assert_eq!(cells.len(), 2541);
        let unique: std::collections::HashSet<_> = cells.iter().collect();
        assert_eq!(unique.len(), 2541);
    }

    #[test]
    fn small_grid() {
        let g = SweepGrid {
            encodings: vec!["one-hot".into()],
            window_sizes: vec![3, 5],
            models: vec![Architecture::Dnn1],
            target_modes: vec![TargetMode::Phi],
        };
        assert_eq!(g.cells().len(), 2);
        assert!(g.validate().is_ok());
    }

    #[test]
    fn invalid_grids() {
        let mut g = SweepGrid {
            window_sizes: vec![4],
            ..Default::default()
        };
        assert!(matches!(g.validate(), Err(Error::InvalidWindow(4))));
        g.window_sizes = vec![];
        assert!(g.validate().is_err());
        let g = SweepGrid {
            encodings: vec!["BLOSUM50".into()],
            ..Default::default()
        };
        assert!(matches!(g.validate(), Err(Error::UnknownScheme(_))));
    }

    #[test]
    fn seeds_stable_and_distinct() {
        let cells = SweepGrid::default().cells();
        let seeds: std::collections::HashSet<u64> = cells.iter().map(|c| c.seed(7)).collect();
        assert_eq!(seeds.len(), cells.len());
        assert_eq!(cells[0].seed(7), cells[0].clone().seed(7));
        assert_ne!(cells[0].seed(7), cells[0].seed(8));
    }

    #[test]
    fn config_file() {
        let c = SweepConfig::from_toml_str(
            r#"
            encodings = ["one-hot", "PAM30"]
            windows = [3]
            models = ["LSTM2"]
            targets = ["psi"]
            [training]
            batch_size = 16
            "#,
        )
        .unwrap();
        assert_eq!(c.grid().len(), 2);
        assert_eq!(c.training.batch_size, 16);
        assert_eq!(c.training.dropout_rate, 0.3);
        assert_eq!(SweepConfig::from_toml_str("").unwrap().grid().len(), 2541);
        assert!(SweepConfig::from_toml_str("bogus = 1").is_err());
        assert!(SweepConfig::from_toml_str("models = [\"LSTM9\"]").is_err());
    }
}
