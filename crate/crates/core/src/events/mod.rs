//! World-event corpus, sales series, and synthetic generators.

pub mod calendar;
pub mod series;
pub mod synth;

pub use calendar::{
    load_events, save_events, window_end, window_start, Event, EventCalendar, LoadedEvents, Rejection, DEFAULT_DIM,
};
pub use series::{read_date_column, write_date_column, SalesSeries};
pub use synth::{
    cluster_label, random_days, synth_corpus, synth_sales, Impulse, SynthCorpus, SynthCorpusConfig, SynthSales,
    SynthSalesConfig,
};
