//! The adversarial event-set encoder.

pub mod config;
pub mod encoder;
pub mod loss;
pub mod models;
pub mod train;

pub use config::{DistanceFn, GanConfig, ModelConfig};
pub use encoder::EncoderConfig;
pub use loss::{
    adversarial_from_probs, adversarial_losses, elementwise_value, hausdorff_loss, hausdorff_value, mask_count,
    mask_events, mask_indices, reconstruction_loss_elementwise,
};
pub use models::{Discriminator, Generator};
pub use train::{event_matrix, train_gan, training_days, EpochLog, GanRun, GanTrainer, TrainingDay};

use crate::error::Result;
use crate::numerics::cosine;

/// Mean cosine similarity between each event and its leave-one-out
/// reconstruction, over every event of every day given.
pub fn leave_one_out_similarity(generator: &Generator, days: &[TrainingDay]) -> Result<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for day in days {
        for i in 0..day.events.rows() {
            let out = generator.reconstruct(&day.events, &[i])?;
            sum += cosine(day.events.row_slice(i), out.row_slice(i));
            n += 1;
        }
    }
    Ok(if n == 0 { 0.0 } else { sum / n as f64 })
}
