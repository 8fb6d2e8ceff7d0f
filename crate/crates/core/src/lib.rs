//! Adversarial event-set encoder for demand forecasting under anomalies.
//!
//! The pipeline: a transformer generator learns to reconstruct masked world
//! events from the other events of the same day, trained against a
//! transformer discriminator with a set-level (Hausdorff) reconstruction
//! loss; leave-one-out reconstructions give a per-day embedding; an LSTM
//! consumes sales plus day embeddings; evaluation focuses on the most
//! anomalous days of the test year.

pub mod embedding;
pub mod error;
pub mod eval;
pub mod events;
pub mod forecast;
pub mod gan;
pub mod io;
pub mod numerics;
pub mod rng;

pub use embedding::{day_embedding, embed_range, DayEmbedding};
pub use error::{Error, Result};
pub use events::{Event, EventCalendar, SalesSeries};
pub use numerics::{AdamW, AdamWConfig, Graph, ParamSet, Tensor};
