//! Tweet records, kind classification, corpus filtering, id deduplication
//! and case-count merging.
//!
//! Parsing of the on-disk formats (NDJSON archives, CSV tables) lives in the
//! std companion crate; everything here operates on already-decoded values.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IngestError {
    #[error("hashtag set is empty")]
    EmptyHashtagSet,
    #[error("duplicate date {date} in {table} case counts")]
    DuplicateCaseDate { date: NaiveDate, table: CaseSource },
    #[error("window start {start} is after end {end}")]
    InvertedWindow { start: NaiveDate, end: NaiveDate },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TweetKind {
    Original,
    Retweet,
    Reply,
    Quote,
}

impl TweetKind {
    pub const ALL: [TweetKind; 4] = [TweetKind::Original, TweetKind::Retweet, TweetKind::Reply, TweetKind::Quote];

    pub fn as_str(self) -> &'static str {
        match self {
            TweetKind::Original => "original",
            TweetKind::Retweet => "retweet",
            TweetKind::Reply => "reply",
            TweetKind::Quote => "quote",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        TweetKind::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for TweetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub text: String,
    pub kind: TweetKind,
    pub lang: String,
    /// Folded with [`fold_hashtag`]; no leading `#`.
    pub hashtags: Vec<String>,
    #[serde(default)]
    pub author_handle: String,
}

impl TweetRecord {
    pub fn day(&self) -> NaiveDate {
        self.created_at.date_naive()
    }
}

/// The presence of the markers that decide a tweet's kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct KindMarkers {
    pub retweeted_status: bool,
    pub is_quote_status: bool,
    pub in_reply_to_status: bool,
}

/// Precedence is retweet, then quote, then reply; a tweet with no markers is
/// an original.
pub fn classify_kind(markers: KindMarkers) -> TweetKind {
    if markers.retweeted_status {
        TweetKind::Retweet
    } else if markers.is_quote_status {
        TweetKind::Quote
    } else if markers.in_reply_to_status {
        TweetKind::Reply
    } else {
        TweetKind::Original
    }
}

/// NFC-normalizes and lowercases a hashtag, stripping one leading `#`.
pub fn fold_hashtag(tag: &str) -> String {
    let tag = tag.strip_prefix('#').unwrap_or(tag);
    tag.nfc().collect::<String>().to_lowercase()
}

/// Inclusive UTC calendar-day window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateWindow {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self, IngestError> {
        if start > end {
            return Err(IngestError::InvertedWindow { start, end });
        }
        Ok(DateWindow { start, end })
    }

    pub fn contains(&self, day: NaiveDate) -> bool {
        self.start <= day && day <= self.end
    }
}

#[derive(Debug, Clone)]
pub struct CorpusFilter {
    hashtags: BTreeSet<String>,
    lang: String,
    kinds: BTreeSet<TweetKind>,
}

impl CorpusFilter {
    pub fn new<I, S>(hashtags: I, lang: &str, kinds: &[TweetKind]) -> Result<Self, IngestError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let hashtags: BTreeSet<String> =
            hashtags.into_iter().map(|h| fold_hashtag(h.as_ref())).filter(|h| !h.is_empty()).collect();
        if hashtags.is_empty() {
            return Err(IngestError::EmptyHashtagSet);
        }
        Ok(CorpusFilter { hashtags, lang: String::from(lang), kinds: kinds.iter().copied().collect() })
    }

    pub fn accepts(&self, record: &TweetRecord) -> bool {
        record.lang == self.lang
            && self.kinds.contains(&record.kind)
            && record.hashtags.iter().any(|h| self.hashtags.contains(&fold_hashtag(h)))
    }

    pub fn hashtags(&self) -> impl Iterator<Item = &str> {
        self.hashtags.iter().map(String::as_str)
    }
}

/// Keeps records accepted by `filter`, preserving order.
pub fn filter_corpus(records: Vec<TweetRecord>, filter: &CorpusFilter) -> Vec<TweetRecord> {
    records.into_iter().filter(|r| filter.accepts(r)).collect()
}

/// First occurrence of each id wins. Returns the retained records and the
/// number dropped. Records with identical text but distinct ids are kept.
pub fn dedupe(records: Vec<TweetRecord>) -> (Vec<TweetRecord>, usize) {
    let before = records.len();
    let mut seen = BTreeSet::new();
    let kept: Vec<TweetRecord> = records.into_iter().filter(|r| seen.insert(r.id.clone())).collect();
    let dropped = before - kept.len();
    (kept, dropped)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub tweet_count_by_kind: BTreeMap<TweetKind, usize>,
    pub date_range: Option<(NaiveDate, NaiveDate)>,
    pub unique_tweet_count: usize,
    pub duplicate_dropped: usize,
}

impl CorpusManifest {
    pub fn from_records(records: &[TweetRecord], duplicate_dropped: usize) -> Self {
        let mut by_kind = BTreeMap::new();
        let mut range: Option<(NaiveDate, NaiveDate)> = None;
        for r in records {
            *by_kind.entry(r.kind).or_insert(0) += 1;
            let d = r.day();
            range = Some(match range {
                None => (d, d),
                Some((lo, hi)) => (lo.min(d), hi.max(d)),
            });
        }
        CorpusManifest {
            tweet_count_by_kind: by_kind,
            date_range: range,
            unique_tweet_count: records.len(),
            duplicate_dropped,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseSource {
    Ministry,
    Fallback,
}

impl fmt::Display for CaseSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseSource::Ministry => "ministry",
            CaseSource::Fallback => "fallback",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseCountRow {
    pub date: NaiveDate,
    pub confirmed: u64,
    pub deaths: u64,
    pub recovered: u64,
    pub source: CaseSource,
}

fn index_by_date(
    rows: Vec<CaseCountRow>,
    source: CaseSource,
) -> Result<BTreeMap<NaiveDate, CaseCountRow>, IngestError> {
    let mut out = BTreeMap::new();
    for mut row in rows {
        row.source = source;
        let date = row.date;
        if out.insert(date, row).is_some() {
            return Err(IngestError::DuplicateCaseDate { date, table: source });
        }
    }
    Ok(out)
}

/// Merges official and fallback case counts: one row per date, sorted, the
/// ministry row winning any conflict and the fallback filling gaps. Each
/// output row is tagged with the table it came from.
pub fn merge_case_counts(
    ministry: Vec<CaseCountRow>,
    fallback: Vec<CaseCountRow>,
) -> Result<Vec<CaseCountRow>, IngestError> {
    let mut merged = index_by_date(fallback, CaseSource::Fallback)?;
    for (date, row) in index_by_date(ministry, CaseSource::Ministry)? {
        merged.insert(date, row);
    }
    Ok(merged.into_values().collect())
}
