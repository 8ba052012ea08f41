//! Daily tweet volume by kind, case-count series and their correlation.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::ingest::{CaseCountRow, DateWindow, TweetKind, TweetRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesName {
    Original,
    Retweet,
    Reply,
    Quote,
    Confirmed,
    Deaths,
    Recovered,
}

impl SeriesName {
    pub const ALL: [SeriesName; 7] = [
        SeriesName::Original,
        SeriesName::Retweet,
        SeriesName::Reply,
        SeriesName::Quote,
        SeriesName::Confirmed,
        SeriesName::Deaths,
        SeriesName::Recovered,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SeriesName::Original => "original",
            SeriesName::Retweet => "retweet",
            SeriesName::Reply => "reply",
            SeriesName::Quote => "quote",
            SeriesName::Confirmed => "confirmed",
            SeriesName::Deaths => "deaths",
            SeriesName::Recovered => "recovered",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|n| n.as_str() == s)
    }

    fn of_kind(kind: TweetKind) -> Self {
        match kind {
            TweetKind::Original => SeriesName::Original,
            TweetKind::Retweet => SeriesName::Retweet,
            TweetKind::Reply => SeriesName::Reply,
            TweetKind::Quote => SeriesName::Quote,
        }
    }
}

impl fmt::Display for SeriesName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TimeseriesError {
    #[error("series {0} is missing or empty")]
    EmptySeries(SeriesName),
    #[error("no common dates: {a} covers {}, {b} covers {}, window {}", fmt_range(.a_range), fmt_range(.b_range), fmt_range(.window))]
    NoOverlap {
        a: SeriesName,
        b: SeriesName,
        a_range: Option<(NaiveDate, NaiveDate)>,
        b_range: Option<(NaiveDate, NaiveDate)>,
        window: Option<(NaiveDate, NaiveDate)>,
    },
    #[error("correlation needs at least 3 paired days, got {0}")]
    TooFewPoints(usize),
}

fn fmt_range(r: &Option<(NaiveDate, NaiveDate)>) -> alloc::string::String {
    match r {
        Some((a, b)) => alloc::format!("{a}..{b}"),
        None => alloc::string::String::from("unbounded"),
    }
}

/// Gap-free daily axis with one value column per series. `None` marks a day
/// with no reported value.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DailySeries {
    pub dates: Vec<NaiveDate>,
    pub values: BTreeMap<SeriesName, Vec<Option<f64>>>,
}

impl DailySeries {
    pub fn range(&self) -> Option<(NaiveDate, NaiveDate)> {
        Some((*self.dates.first()?, *self.dates.last()?))
    }

    pub fn get(&self, name: SeriesName) -> Option<&[Option<f64>]> {
        self.values.get(&name).map(Vec::as_slice)
    }

    pub fn value_at(&self, name: SeriesName, date: NaiveDate) -> Option<f64> {
        let (first, last) = self.range()?;
        if date < first || date > last {
            return None;
        }
        let i = (date - first).num_days() as usize;
        self.values.get(&name)?[i]
    }

    /// `(date, series, value)` rows, dates outermost.
    pub fn tidy_rows(&self) -> Vec<(NaiveDate, SeriesName, Option<f64>)> {
        let mut out = Vec::with_capacity(self.dates.len() * self.values.len());
        for (i, &d) in self.dates.iter().enumerate() {
            for (&name, col) in &self.values {
                out.push((d, name, col[i]));
            }
        }
        out
    }
}

fn day_axis(first: NaiveDate, last: NaiveDate) -> Vec<NaiveDate> {
    first.iter_days().take_while(|d| *d <= last).collect()
}

/// Tweets per UTC day for each kind. Days inside the range without tweets
/// count as zero.
pub fn bucket_daily(records: &[TweetRecord]) -> DailySeries {
    let mut out = DailySeries::default();
    let days: Vec<NaiveDate> = records.iter().map(TweetRecord::day).collect();
    let (Some(&first), Some(&last)) = (days.iter().min(), days.iter().max()) else {
        for k in TweetKind::ALL {
            out.values.insert(SeriesName::of_kind(k), Vec::new());
        }
        return out;
    };
    out.dates = day_axis(first, last);
    for k in TweetKind::ALL {
        out.values.insert(SeriesName::of_kind(k), vec![Some(0.0); out.dates.len()]);
    }
    for (r, d) in records.iter().zip(days) {
        let i = (d - first).num_days() as usize;
        let slot = &mut out.values.get_mut(&SeriesName::of_kind(r.kind)).unwrap()[i];
        *slot = Some(slot.unwrap() + 1.0);
    }
    out
}

/// Confirmed, deaths and recovered per day; days without a row are `None`.
pub fn case_series(rows: &[CaseCountRow]) -> DailySeries {
    let mut out = DailySeries::default();
    let names = [SeriesName::Confirmed, SeriesName::Deaths, SeriesName::Recovered];
    let (Some(first), Some(last)) = (rows.iter().map(|r| r.date).min(), rows.iter().map(|r| r.date).max()) else {
        for n in names {
            out.values.insert(n, Vec::new());
        }
        return out;
    };
    out.dates = day_axis(first, last);
    for n in names {
        out.values.insert(n, vec![None; out.dates.len()]);
    }
    for r in rows {
        let i = (r.date - first).num_days() as usize;
        for (n, v) in names.into_iter().zip([r.confirmed, r.deaths, r.recovered]) {
            out.values.get_mut(&n).unwrap()[i] = Some(v as f64);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedPair {
    pub series_a: SeriesName,
    pub series_b: SeriesName,
    /// Common range after intersecting with the window.
    pub window: (NaiveDate, NaiveDate),
    /// Days where both series have a value.
    pub dates: Vec<NaiveDate>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// Pairs two series over `window ∩ range(a) ∩ range(b)`, dropping any day on
/// which either side is `None`.
pub fn align(
    a: &DailySeries,
    name_a: SeriesName,
    b: &DailySeries,
    name_b: SeriesName,
    window: Option<DateWindow>,
) -> Result<AlignedPair, TimeseriesError> {
    let ra = a.range().filter(|_| a.get(name_a).is_some()).ok_or(TimeseriesError::EmptySeries(name_a))?;
    let rb = b.range().filter(|_| b.get(name_b).is_some()).ok_or(TimeseriesError::EmptySeries(name_b))?;
    let mut start = ra.0.max(rb.0);
    let mut end = ra.1.min(rb.1);
    if let Some(w) = window {
        start = start.max(w.start);
        end = end.min(w.end);
    }
    if start > end {
        return Err(TimeseriesError::NoOverlap {
            a: name_a,
            b: name_b,
            a_range: Some(ra),
            b_range: Some(rb),
            window: window.map(|w| (w.start, w.end)),
        });
    }
    let mut pair = AlignedPair {
        series_a: name_a,
        series_b: name_b,
        window: (start, end),
        dates: Vec::new(),
        a: Vec::new(),
        b: Vec::new(),
    };
    let mut d = start;
    while d <= end {
        if let (Some(x), Some(y)) = (a.value_at(name_a, d), b.value_at(name_b, d)) {
            pair.dates.push(d);
            pair.a.push(x);
            pair.b.push(y);
        }
        d = d + Days::new(1);
    }
    Ok(pair)
}

/// Pearson's r; `None` when either side is constant.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Option<f64> {
    debug_assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub pair: (SeriesName, SeriesName),
    /// `None` when a series is constant over the overlap.
    pub pearson_r: Option<f64>,
    pub n_overlap: usize,
    pub window: (NaiveDate, NaiveDate),
}

pub fn pearson(pair: &AlignedPair) -> Result<CorrelationReport, TimeseriesError> {
    let n = pair.dates.len();
    if n < 3 {
        return Err(TimeseriesError::TooFewPoints(n));
    }
    Ok(CorrelationReport {
        pair: (pair.series_a, pair.series_b),
        pearson_r: pearson_r(&pair.a, &pair.b),
        n_overlap: n,
        window: pair.window,
    })
}
