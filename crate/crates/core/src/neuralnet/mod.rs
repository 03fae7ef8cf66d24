//! Dense and LSTM networks trained with plain SGD on sin/cos targets.

mod checkpoint;
mod dense;
mod loss;
mod lstm;
mod model;
mod tensor;
mod train;

pub use checkpoint::{
    load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
};
pub use dense::{dense_forward, Activation, Dense};
pub use loss::LossReport;
pub use lstm::{lstm_step, LstmParams};
pub use model::{
    decode_outputs, predict_angles, Architecture, Batch, DropoutMask, Gradients, Model, ModelSpec,
    PredictedAngles, DEFAULT_HIDDEN_WIDTH,
};
pub use tensor::Tensor;
pub use train::{evaluate_loss, train, train_with_progress, EpochRecord, TrainingConfig, TrainingHistory};
