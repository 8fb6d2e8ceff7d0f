//! Daily sales forecasting with an LSTM over sales and event features.

pub mod config;
pub mod features;
pub mod lstm;
pub mod train;

pub use config::{FeatureMode, ForecastConfig};
pub use features::{build_features, event_rows, join_rows, pool_events, EventSource, FeatureMatrix, Scaler};
pub use lstm::{Lstm, LstmState};
pub use train::{train_forecaster, Forecaster, TrainReport};
