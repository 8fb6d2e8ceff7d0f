use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};

/// Earliest event date accepted by the loader.
pub fn window_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(1980, 1, 1).expect("date")
}

/// Latest event date accepted by the loader.
pub fn window_end() -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 12, 31).expect("date")
}

/// Embedding width of the pretrained event vectors.
pub const DEFAULT_DIM: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub id: String,
    pub title: String,
    pub date: NaiveDate,
    pub category: String,
    pub link_count: u64,
    pub embedding: Vec<f64>,
}

/// Why a line of an event file was skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct Rejection {
    pub line: usize,
    pub id: String,
    pub reason: String,
}

/// Events indexed by date. Immutable once built.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventCalendar {
    dim: usize,
    by_date: BTreeMap<NaiveDate, Vec<Event>>,
    count: usize,
}

impl EventCalendar {
    pub fn new(dim: usize) -> Self {
        Self { dim, ..Self::default() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Checks the event against the calendar's contract without inserting it.
    pub fn validate(&self, e: &Event) -> std::result::Result<(), String> {
        if e.date < window_start() || e.date > window_end() {
            return Err(format!("date {} outside {}..={}", e.date, window_start(), window_end()));
        }
        if e.embedding.len() != self.dim {
            return Err(format!(
                "embedding has {} values, corpus dimension is {}",
                e.embedding.len(),
                self.dim
            ));
        }
        if e.embedding.iter().any(|v| !v.is_finite()) {
            return Err("embedding has non-finite values".into());
        }
        Ok(())
    }

    pub fn insert(&mut self, e: Event) -> Result<()> {
        self.validate(&e).map_err(contract)?;
        self.by_date.entry(e.date).or_default().push(e);
        self.count += 1;
        Ok(())
    }

    pub fn from_events(dim: usize, events: impl IntoIterator<Item = Event>) -> Result<Self> {
        let mut cal = Self::new(dim);
        for e in events {
            cal.insert(e)?;
        }
        Ok(cal)
    }

    /// Events whose date is exactly `date`, in insertion order.
    pub fn on(&self, date: NaiveDate) -> &[Event] {
        self.by_date.get(&date).map_or(&[], Vec::as_slice)
    }

    pub fn first_date(&self) -> Option<NaiveDate> {
        self.by_date.keys().next().copied()
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.by_date.keys().next_back().copied()
    }

    /// Every stored event exactly once, by date then insertion order.
    pub fn iter(&self) -> impl Iterator<Item = &Event> {
        self.by_date.values().flatten()
    }

    pub fn days(&self) -> impl Iterator<Item = (NaiveDate, &[Event])> {
        self.by_date.iter().map(|(d, v)| (*d, v.as_slice()))
    }

    /// The model's view of day `t`: events dated `t - lag ..= t`,
    /// deduplicated by id (latest date wins) and sorted by id.
    pub fn day_event_set_with_lag(&self, t: NaiveDate, lag: u32) -> Vec<&Event> {
        let mut seen: HashMap<&str, &Event> = HashMap::new();
        for back in (0..=u64::from(lag)).rev() {
            let Some(day) = t.checked_sub_days(Days::new(back)) else {
                continue;
            };
            for e in self.on(day) {
                seen.insert(e.id.as_str(), e);
            }
        }
        let mut out: Vec<&Event> = seen.into_values().collect();
        out.sort_by(|a, b| a.id.cmp(&b.id));
        out
    }

    /// `E_t ∪ E_{t-1}`.
    pub fn day_event_set(&self, t: NaiveDate) -> Vec<&Event> {
        self.day_event_set_with_lag(t, 1)
    }

    /// Most frequent category among events dated `t`; ties go to the
    /// lexicographically smallest name.
    pub fn dominant_category(&self, t: NaiveDate) -> Option<&str> {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for e in self.on(t) {
            *counts.entry(e.category.as_str()).or_default() += 1;
        }
        let best = counts.values().copied().max()?;
        counts.into_iter().find(|(_, c)| *c == best).map(|(k, _)| k)
    }
}

/// Result of reading an event file.
#[derive(Debug, Clone)]
pub struct LoadedEvents {
    pub calendar: EventCalendar,
    pub rejections: Vec<Rejection>,
}

/// Reads a JSON-lines event file. Events outside the date window or with the
/// wrong embedding width are rejected and reported; a line that is not a
/// valid event object aborts with its line number. When `dim` is `None` the
/// first event's embedding width declares the corpus dimension.
pub fn load_events(path: &Path, dim: Option<usize>) -> Result<LoadedEvents> {
    let reader = BufReader::new(File::open(path)?);
    let mut calendar: Option<EventCalendar> = dim.map(EventCalendar::new);
    let mut rejections = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let e: Event = serde_json::from_str(&line).map_err(|err| Error::Parse {
            path: path.to_path_buf(),
            line: lineno,
            message: err.to_string(),
        })?;
        let cal = calendar.get_or_insert_with(|| EventCalendar::new(e.embedding.len()));
        match cal.validate(&e) {
            Ok(()) => cal.insert(e)?,
            Err(reason) => rejections.push(Rejection {
                line: lineno,
                id: e.id,
                reason,
            }),
        }
    }
    Ok(LoadedEvents {
        calendar: calendar.unwrap_or_default(),
        rejections,
    })
}

pub fn write_events<W: Write>(cal: &EventCalendar, mut w: W) -> Result<()> {
    for e in cal.iter() {
        serde_json::to_writer(&mut w, e)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn save_events(cal: &EventCalendar, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_events(cal, &mut buf)?;
    crate::io::write_atomic(path, &buf)
}
