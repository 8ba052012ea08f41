//! Line-delimited JSON tweet archives.

use std::io::BufRead;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use tweetscope_core::ingest::{classify_kind, fold_hashtag, KindMarkers, TweetRecord};

const TWITTER_TIME: &str = "%a %b %d %H:%M:%S %z %Y";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Default)]
pub struct ParsedArchive {
    pub records: Vec<TweetRecord>,
    pub errors: Vec<LineError>,
}

/// Parses every non-blank line; bad lines are reported and skipped. Only a
/// read failure aborts.
pub fn parse_tweet_stream<R: BufRead>(reader: R) -> std::io::Result<ParsedArchive> {
    let mut out = ParsedArchive::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(&line) {
            Ok(r) => out.records.push(r),
            Err(message) => out.errors.push(LineError { line: i + 1, message }),
        }
    }
    Ok(out)
}

fn parse_line(line: &str) -> Result<TweetRecord, String> {
    let v: Value = serde_json::from_str(line).map_err(|e| format!("invalid JSON: {e}"))?;
    if !v.is_object() {
        return Err("not a JSON object".into());
    }
    tweet_from_value(&v)
}

fn present(v: &Value, key: &str) -> bool {
    v.get(key).is_some_and(|x| !x.is_null())
}

pub fn markers(v: &Value) -> KindMarkers {
    KindMarkers {
        retweeted_status: present(v, "retweeted_status"),
        is_quote_status: v.get("is_quote_status").and_then(Value::as_bool).unwrap_or(false),
        in_reply_to_status: present(v, "in_reply_to_status_id") || present(v, "in_reply_to_status_id_str"),
    }
}

fn text_of(v: &Value) -> Option<&str> {
    v.get("full_text")
        .and_then(Value::as_str)
        .or_else(|| v.pointer("/extended_tweet/full_text").and_then(Value::as_str))
        .or_else(|| v.get("text").and_then(Value::as_str))
}

fn parse_time(s: &str) -> Result<DateTime<Utc>, String> {
    DateTime::parse_from_str(s, TWITTER_TIME)
        .or_else(|_| DateTime::parse_from_rfc3339(s))
        .map(|t| t.with_timezone(&Utc))
        .map_err(|_| format!("unparsable created_at {s:?}"))
}

/// Tags from `entities.hashtags` (and `extended_tweet.entities`); when a
/// tweet has no entities block at all, `#words` are read from the text.
fn hashtags_of(v: &Value, text: &str) -> Vec<String> {
    let mut tags = Vec::new();
    let mut saw_entities = false;
    for ptr in ["/entities/hashtags", "/extended_tweet/entities/hashtags"] {
        if let Some(list) = v.pointer(ptr).and_then(Value::as_array) {
            saw_entities = true;
            for h in list {
                if let Some(t) = h.get("text").and_then(Value::as_str) {
                    tags.push(fold_hashtag(t));
                }
            }
        }
    }
    if !saw_entities {
        for word in text.split_whitespace() {
            if let Some(body) = word.strip_prefix('#') {
                let body: String =
                    body.chars().take_while(|c| c.is_alphanumeric() || *c == '_' || *c == '\u{200C}').collect();
                if !body.is_empty() {
                    tags.push(fold_hashtag(&body));
                }
            }
        }
    }
    let mut seen = std::collections::BTreeSet::new();
    tags.retain(|t| seen.insert(t.clone()));
    tags
}

pub fn tweet_from_value(v: &Value) -> Result<TweetRecord, String> {
    let id = match (v.get("id_str"), v.get("id")) {
        (Some(Value::String(s)), _) if !s.is_empty() => s.clone(),
        (_, Some(Value::Number(n))) => n.to_string(),
        (_, Some(Value::String(s))) if !s.is_empty() => s.clone(),
        _ => return Err("missing id_str".into()),
    };
    let text = text_of(v).ok_or("missing full_text/text")?.to_string();
    let created_at = parse_time(v.get("created_at").and_then(Value::as_str).ok_or("missing created_at")?)?;
    let lang = v.get("lang").and_then(Value::as_str).unwrap_or("und").to_string();
    let author_handle = v.pointer("/user/screen_name").and_then(Value::as_str).unwrap_or_default().to_string();
    Ok(TweetRecord {
        hashtags: hashtags_of(v, &text),
        kind: classify_kind(markers(v)),
        id,
        created_at,
        text,
        lang,
        author_handle,
    })
}

/// One hashtag per line; a single leading `#` is stripped, blank lines are
/// skipped.
pub fn parse_hashtag_list(text: &str) -> Vec<String> {
    text.lines().map(str::trim).filter(|l| !l.is_empty()).map(fold_hashtag).filter(|h| !h.is_empty()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use tweetscope_core::ingest::TweetKind;

    fn parse(s: &str) -> ParsedArchive {
        parse_tweet_stream(s.as_bytes()).unwrap()
    }

    #[test]
    fn minimal_record() {
        let a = parse(r#"{"id_str":"1","full_text":"سلام","lang":"fa","created_at":"Fri Mar 13 10:00:00 +0000 2020"}"#);
        assert_eq!(a.records.len(), 1);
        assert_eq!(a.records[0].kind, TweetKind::Original);
        assert_eq!(a.records[0].text, "سلام");
    }

    #[test]
    fn empty_stream() {
        let a = parse("");
        assert!(a.records.is_empty() && a.errors.is_empty());
    }

    #[test]
    fn truncated_middle_line() {
        let s = concat!(
            r#"{"id_str":"1","text":"a","created_at":"2020-03-13T00:00:00Z"}"#,
            "\n",
            r#"{"id_str":"2","text":"#,
            "\n",
            r#"{"id_str":"3","text":"c","created_at":"2020-03-13T00:00:00Z"}"#,
            "\n",
        );
        let a = parse(s);
        assert_eq!(a.records.len(), 2);
        assert_eq!(a.errors.len(), 1);
        assert_eq!(a.errors[0].line, 2);
    }

    #[test]
    fn kind_markers() {
        let v: Value = serde_json::from_str(r#"{"retweeted_status":{},"is_quote_status":true}"#).unwrap();
        assert_eq!(classify_kind(markers(&v)), TweetKind::Retweet);
        let v: Value = serde_json::from_str(r#"{"in_reply_to_status_id":"5"}"#).unwrap();
        assert_eq!(classify_kind(markers(&v)), TweetKind::Reply);
        let v: Value = serde_json::from_str(r#"{"in_reply_to_status_id":null,"is_quote_status":false}"#).unwrap();
        assert_eq!(classify_kind(markers(&v)), TweetKind::Original);
    }

    #[test]
    fn text_and_hashtag_sources() {
        let a = parse(concat!(
            r#"{"id":7,"text":"short","extended_tweet":{"full_text":"long #x","entities":{"hashtags":[{"text":"Corona"}]}},"#,
            r#""created_at":"Fri Mar 13 10:00:00 +0000 2020","user":{"screen_name":"someone"}}"#
        ));
        let r = &a.records[0];
        assert_eq!(r.id, "7");
        assert_eq!(r.text, "long #x");
        assert_eq!(r.hashtags, vec!["corona"]);
        assert_eq!(r.author_handle, "someone");
        let b = parse(r#"{"id_str":"8","text":"متن #کرونا، #covid_19","created_at":"2020-03-13T00:00:00Z"}"#);
        assert_eq!(b.records[0].hashtags, vec!["کرونا", "covid_19"]);
    }

    #[test]
    fn hashtag_list_strips_one_hash() {
        assert_eq!(parse_hashtag_list("#کرونا\n\n##x\nCOVID19\n"), vec!["کرونا", "#x", "covid19"]);
    }
}
