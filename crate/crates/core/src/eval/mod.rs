//! Residual-based anomaly days, error metrics on them and significance.

pub mod metrics;
pub mod protocol;
pub mod report;
pub mod significance;
pub mod stl;

pub use metrics::{mae_at_k, top_k_anomalies, wmape_at_k};
pub use protocol::{
    rolling_monthly_eval, test_year_range, LstmPredictor, ModelRun, MonthPredictor, MonthWindow, OraclePredictor,
    SeasonalNaive,
};
pub use report::{evaluate_runs, AnomalySet, EvalConfig, EvalReport, MetricRow};
pub use significance::{paired_permutation_test, paired_t, DEFAULT_RESAMPLES};
pub use stl::{stl_decompose, Decomposition};
