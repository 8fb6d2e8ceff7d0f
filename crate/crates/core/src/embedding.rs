//! Day representations from leave-one-out reconstructions.

use std::path::Path;

use chrono::{Days, NaiveDate};

use crate::error::{contract, Error, Result};
use crate::events::{Event, EventCalendar};
use crate::gan::{event_matrix, Generator};
use crate::numerics::{Graph, Tensor};

#[derive(Debug, Clone, PartialEq)]
pub struct DayEmbedding {
    pub date: NaiveDate,
    pub vector: Vec<f64>,
    pub n_events: usize,
}

/// Mean of the generator's reconstructions of each event of the day, each
/// computed with only that event masked. An empty day maps to the zero
/// vector.
pub fn day_embedding(generator: &Generator, date: NaiveDate, events: &[&Event]) -> Result<DayEmbedding> {
    let d = generator.config().dim;
    if events.is_empty() {
        return Ok(DayEmbedding {
            date,
            vector: vec![0.0; d],
            n_events: 0,
        });
    }
    let v = event_matrix(events)?;
    let vector = mean_leave_one_out(generator, &v)?;
    Ok(DayEmbedding {
        date,
        vector,
        n_events: events.len(),
    })
}

/// Leave-one-out reconstruction mean over the rows of `v` (`n x d`, n >= 1).
pub fn mean_leave_one_out(generator: &Generator, v: &Tensor) -> Result<Vec<f64>> {
    let n = v.rows();
    let mut g = Graph::new();
    let p = g.bind(&generator.params, false);
    let vv = g.constant(v.clone());
    let mut acc = vec![0.0; v.cols()];
    for i in 0..n {
        let (_, out) = generator.forward_masked(&mut g, &p, vv, &[i], None)?;
        for (a, x) in acc.iter_mut().zip(g.value(out).row_slice(i)) {
            *a += x;
        }
    }
    g.check_finite()?;
    for a in &mut acc {
        *a /= n as f64;
    }
    Ok(acc)
}

/// One embedding per day in `start..=end`, each from the day's event set
/// (events dated `t - lag ..= t`).
pub fn embed_range(
    generator: &Generator,
    calendar: &EventCalendar,
    start: NaiveDate,
    end: NaiveDate,
    lag: u32,
) -> Result<Vec<DayEmbedding>> {
    if start > end {
        return Err(contract(format!("embed_range start {start} is after end {end}")));
    }
    let mut out = Vec::with_capacity((end - start).num_days() as usize + 1);
    let mut d = start;
    while d <= end {
        let evs = calendar.day_event_set_with_lag(d, lag);
        out.push(day_embedding(generator, d, &evs)?);
        d = d + Days::new(1);
    }
    Ok(out)
}

/// Writes embeddings as CSV `date,n_events,v0,...,v{d-1}`. Values are
/// printed in shortest round-trip form, so reading back is bit-exact.
pub fn save_embeddings(embeddings: &[DayEmbedding], path: &Path) -> Result<()> {
    let d = embeddings.first().map_or(0, |e| e.vector.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["date".to_string(), "n_events".to_string()];
    header.extend((0..d).map(|i| format!("v{i}")));
    w.write_record(&header)?;
    for e in embeddings {
        let mut rec = vec![e.date.to_string(), e.n_events.to_string()];
        rec.extend(e.vector.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    crate::io::write_atomic(path, &bytes)
}

pub fn load_embeddings(path: &Path) -> Result<Vec<DayEmbedding>> {
    let mut r = csv::Reader::from_path(path)?;
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let width = r.headers()?.len();
    if width < 2 {
        return Err(err(1, "expected header date,n_events,v0,...".into()));
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let date = rec[0].parse().map_err(|e| err(line, format!("bad date: {e}")))?;
        let n_events = rec[1].parse().map_err(|e| err(line, format!("bad n_events: {e}")))?;
        let vector = (2..width)
            .map(|j| rec[j].parse::<f64>().map_err(|e| err(line, format!("bad value: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        out.push(DayEmbedding { date, vector, n_events });
    }
    Ok(out)
}
