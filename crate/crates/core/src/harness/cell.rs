use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::circular::circular_mae;
use super::grid::GridCell;
use crate::dataset::{split_proteins, Corpus, Partitions, SplitManifest, TargetMode, WindowConfig, WindowSample};
use crate::encoding::EncodingScheme;
use crate::geometry::wrap_degrees;
use crate::neuralnet::{
    evaluate_loss, train, Architecture, Batch, Model, ModelSpec, TrainingConfig, TrainingHistory, DEFAULT_HIDDEN_WIDTH,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CellStatus {
    Completed,
    Diverged,
    Skipped,
}

/// Outcome of training and testing one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub encoding: String,
    pub window_size: usize,
    pub model: Architecture,
    pub target_mode: TargetMode,
    pub status: CellStatus,
    pub codec_mse: Option<f64>,
    pub codec_rmse: Option<f64>,
    pub degree_mae_phi: Option<f64>,
    pub degree_mae_psi: Option<f64>,
    pub epochs_run: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl SweepResult {
    fn empty(cell: &GridCell, seed: u64, status: CellStatus, reason: Option<String>) -> Self {
        SweepResult {
            encoding: cell.encoding.clone(),
            window_size: cell.window_size,
            model: cell.model,
            target_mode: cell.target_mode,
            status,
            codec_mse: None,
            codec_rmse: None,
            degree_mae_phi: None,
            degree_mae_psi: None,
            epochs_run: 0,
            seed,
            reason,
        }
    }

    pub fn cell(&self) -> GridCell {
        GridCell {
            encoding: self.encoding.clone(),
            window_size: self.window_size,
            model: self.model,
            target_mode: self.target_mode,
        }
    }
}

/// Corpus plus the protein-level split shared by every cell of a sweep.
#[derive(Debug, Clone)]
pub struct SweepData {
    pub corpus: Corpus,
    pub split: SplitManifest,
}

impl SweepData {
    /// Splits the corpus with `seed`. An empty corpus gives an empty split.
    pub fn new(corpus: Corpus, seed: u64) -> Result<Self> {
        let split = if corpus.is_empty() {
            SplitManifest {
                train: vec![],
                validation: vec![],
                test: vec![],
                seed,
            }
        } else {
            split_proteins(&corpus.ids(), seed)?
        };
        Ok(SweepData { corpus, split })
    }
}

/// Settings shared by all cells.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub training: TrainingConfig,
    pub hidden_width: usize,
    pub seed: u64,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            training: TrainingConfig::default(),
            hidden_width: DEFAULT_HIDDEN_WIDTH,
            seed: 0,
        }
    }
}

/// A trained cell with everything needed to evaluate or save it.
#[derive(Debug, Clone)]
pub struct TrainedCell {
    pub model: Model,
    pub history: TrainingHistory,
    pub partitions: Partitions,
    pub scheme: EncodingScheme,
    pub seed: u64,
}

impl TrainedCell {
    pub fn checkpoint_meta(&self, cell: &GridCell) -> BTreeMap<String, String> {
        BTreeMap::from([
            ("encoding".to_string(), self.scheme.name().to_string()),
            ("window_size".to_string(), cell.window_size.to_string()),
            ("seed".to_string(), self.seed.to_string()),
            ("best_epoch".to_string(), self.history.best_epoch.to_string()),
        ])
    }
}

enum CellFailure {
    Skipped(String),
    Diverged(usize),
}

fn build_partitions(cell: &GridCell, data: &SweepData) -> std::result::Result<(EncodingScheme, Partitions), CellFailure> {
    let skip = |e: Error| CellFailure::Skipped(e.to_string());
    if data.corpus.is_empty() {
        return Err(CellFailure::Skipped("empty corpus".into()));
    }
    let scheme = EncodingScheme::by_name(&cell.encoding).map_err(skip)?;
    let config = WindowConfig::new(cell.window_size, scheme.clone(), cell.target_mode).map_err(skip)?;
    let partitions = Partitions::build(&data.corpus, &data.split, &config).map_err(skip)?;
    for (name, set) in [
        ("training", &partitions.train),
        ("validation", &partitions.validation),
        ("test", &partitions.test),
    ] {
        if set.is_empty() {
            return Err(CellFailure::Skipped(format!("no {name} windows")));
        }
    }
    Ok((scheme, partitions))
}

fn train_cell_inner(
    cell: &GridCell,
    data: &SweepData,
    settings: &RunSettings,
) -> std::result::Result<TrainedCell, CellFailure> {
    let (scheme, partitions) = build_partitions(cell, data)?;
    let seed = cell.seed(settings.seed);
    let spec = ModelSpec::new(cell.model, cell.window_size, cell.target_mode).with_hidden_width(settings.hidden_width);
    let model = Model::new(spec, &mut ChaCha8Rng::seed_from_u64(seed))
        .map_err(|e| CellFailure::Skipped(e.to_string()))?;
    let config = TrainingConfig {
        seed,
        ..settings.training.clone()
    };
    let (model, history) = train(model, &partitions.train, &partitions.validation, &config).map_err(|e| match e {
        Error::Divergence { epoch } => CellFailure::Diverged(epoch.unwrap_or(0)),
        other => CellFailure::Skipped(other.to_string()),
    })?;
    Ok(TrainedCell {
        model,
        history,
        partitions,
        scheme,
        seed,
    })
}

/// Builds the cell's datasets and trains its model, without evaluating.
pub fn train_cell(cell: &GridCell, data: &SweepData, settings: &RunSettings) -> Result<TrainedCell> {
    train_cell_inner(cell, data, settings).map_err(|f| match f {
        CellFailure::Skipped(reason) => Error::Config(format!("cell {cell} cannot run: {reason}")),
        CellFailure::Diverged(epoch) => Error::Divergence { epoch: Some(epoch) },
    })
}

/// Test-set metrics for a trained model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMetrics {
    pub codec_mse: f64,
    pub codec_rmse: f64,
    pub degree_mae_phi: Option<f64>,
    pub degree_mae_psi: Option<f64>,
}

/// Codec-space loss and degree-space circular MAE on `samples`.
///
/// A predicted sin/cos pair at the exact origin decodes to 0° here instead
/// of failing, so a degenerate model still gets a (poor) score.
pub fn evaluate_model(model: &Model, samples: &[WindowSample]) -> Result<CellMetrics> {
    let report = evaluate_loss(model, samples)?;
    let mode = model.spec().target_mode;
    let k = mode.output_width();
    let mut pred: Vec<Vec<f64>> = vec![Vec::with_capacity(samples.len()); k / 2];
    for chunk in samples.chunks(2048) {
        let batch = Batch::from_samples(chunk)?;
        let out = model.forward(&batch.inputs)?;
        for row in out.data().chunks(k) {
            for (a, pair) in row.chunks(2).enumerate() {
                pred[a].push(wrap_degrees(pair[0].atan2(pair[1]).to_degrees()));
            }
        }
    }
    let truth = |a: usize| -> Vec<f64> { samples.iter().map(|s| s.angles[a]).collect() };
    let mae = |a: usize| circular_mae(&pred[a], &truth(a));
    let (phi, psi) = match mode {
        TargetMode::Phi => (Some(mae(0)?), None),
        TargetMode::Psi => (None, Some(mae(0)?)),
        TargetMode::Both => (Some(mae(0)?), Some(mae(1)?)),
    };
    Ok(CellMetrics {
        codec_mse: report.mse,
        codec_rmse: report.rmse,
        degree_mae_phi: phi,
        degree_mae_psi: psi,
    })
}

/// Trains and tests one grid cell. Failures become statuses, never errors.
pub fn run_cell(cell: &GridCell, data: &SweepData, settings: &RunSettings) -> SweepResult {
    let seed = cell.seed(settings.seed);
    let trained = match train_cell_inner(cell, data, settings) {
        Ok(t) => t,
        Err(CellFailure::Skipped(reason)) => return SweepResult::empty(cell, seed, CellStatus::Skipped, Some(reason)),
        Err(CellFailure::Diverged(epoch)) => {
            let mut r = SweepResult::empty(cell, seed, CellStatus::Diverged, Some(format!("diverged at epoch {epoch}")));
            r.epochs_run = epoch;
            return r;
        }
    };
    let epochs_run = trained.history.epochs.len();
    match evaluate_model(&trained.model, &trained.partitions.test) {
        Ok(m) => SweepResult {
            codec_mse: Some(m.codec_mse),
            codec_rmse: Some(m.codec_rmse),
            degree_mae_phi: m.degree_mae_phi,
            degree_mae_psi: m.degree_mae_psi,
            epochs_run,
            ..SweepResult::empty(cell, seed, CellStatus::Completed, None)
        },
        Err(e) => {
            let status = match e {
                Error::Divergence { .. } | Error::NonFinite(_) => CellStatus::Diverged,
                _ => CellStatus::Skipped,
            };
            let mut r = SweepResult::empty(cell, seed, status, Some(e.to_string()));
            r.epochs_run = epochs_run;
            r
        }
    }
}
