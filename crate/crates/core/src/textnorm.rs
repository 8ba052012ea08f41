//! Text normalization, whitespace tokenization and stopword filtering for
//! Persian tweets.
//!
//! Normalization runs in a fixed order: the character map first, then
//! removal of URLs, mentions, hashtag markers, emoji, punctuation and digits
//! (each removed span becomes a single space), repeated until nothing more
//! is removed, and finally whitespace collapsing. Because every removal only
//! turns non-space characters into spaces the loop terminates, and the
//! whole function is idempotent.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use unicode_properties::{GeneralCategory, GeneralCategoryGroup, UnicodeEmoji, UnicodeGeneralCategory};

const ZWJ: char = '\u{200D}';

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TextnormError {
    #[error("character map has more than one entry for U+{0:04X}")]
    DuplicateMapSource(u32),
    #[error("character map target U+{0:04X} is also a source")]
    ChainedMapTarget(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DigitPolicy {
    AsciiOnly,
    AllScripts,
    None,
}

/// One codepoint rewrite. A missing `to` deletes the character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharMapping {
    pub from: char,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<char>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct NormalizationConfig {
    pub strip_urls: bool,
    pub strip_mentions: bool,
    pub strip_emoji: bool,
    pub strip_punctuation: bool,
    pub strip_digits: DigitPolicy,
    pub char_map: Vec<CharMapping>,
    pub collapse_whitespace: bool,
}

/// Arabic Yeh and Kaf to their Persian forms, Arabic harakat (U+064B to
/// U+0652) deleted. ZWNJ is left alone.
pub fn default_char_map() -> Vec<CharMapping> {
    let mut map = alloc::vec![
        CharMapping { from: '\u{064A}', to: Some('\u{06CC}') },
        CharMapping { from: '\u{0643}', to: Some('\u{06A9}') },
    ];
    map.extend(('\u{064B}'..='\u{0652}').map(|from| CharMapping { from, to: None }));
    map
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        NormalizationConfig {
            strip_urls: true,
            strip_mentions: true,
            strip_emoji: true,
            strip_punctuation: true,
            strip_digits: DigitPolicy::AllScripts,
            char_map: default_char_map(),
            collapse_whitespace: true,
        }
    }
}

impl NormalizationConfig {
    /// Checks that the character map is a function whose targets are never
    /// sources, which makes applying it idempotent.
    pub fn validate(&self) -> Result<(), TextnormError> {
        let mut sources = BTreeSet::new();
        for m in &self.char_map {
            if !sources.insert(m.from) {
                return Err(TextnormError::DuplicateMapSource(m.from as u32));
            }
        }
        for m in &self.char_map {
            if let Some(to) = m.to {
                if sources.contains(&to) {
                    return Err(TextnormError::ChainedMapTarget(to as u32));
                }
            }
        }
        Ok(())
    }

    fn map_char(&self, c: char) -> Option<char> {
        match self.char_map.iter().find(|m| m.from == c) {
            Some(m) => m.to,
            None => Some(c),
        }
    }
}

fn is_pictographic(c: char) -> bool {
    if c.is_ascii() || c == ZWJ {
        return false;
    }
    c.is_emoji_char_or_emoji_component()
        || c == '\u{FE0E}'
        || matches!(c, '\u{1F000}'..='\u{1FAFF}' | '\u{1FC00}'..='\u{1FFFD}')
}

fn at_boundary(chars: &[char], i: usize) -> bool {
    i == 0 || !chars[i - 1].is_alphanumeric()
}

fn starts_with_ci(chars: &[char], i: usize, prefix: &str) -> bool {
    let n = prefix.chars().count();
    i + n <= chars.len() && chars[i..i + n].iter().zip(prefix.chars()).all(|(a, b)| a.to_ascii_lowercase() == b)
}

fn blank(chars: &mut [char], from: usize, to: usize) -> bool {
    let mut changed = false;
    for c in &mut chars[from..to] {
        if *c != ' ' {
            *c = ' ';
            changed = true;
        }
    }
    changed
}

fn strip_urls(chars: &mut [char]) -> bool {
    let mut changed = false;
    let mut i = 0;
    while i < chars.len() {
        let hit = starts_with_ci(chars, i, "http://")
            || starts_with_ci(chars, i, "https://")
            || (at_boundary(chars, i) && (starts_with_ci(chars, i, "www.") || starts_with_ci(chars, i, "t.co/")));
        if hit {
            let end = chars[i..].iter().position(|c| c.is_whitespace()).map_or(chars.len(), |p| i + p);
            changed |= blank(chars, i, end);
            i = end;
        } else {
            i += 1;
        }
    }
    changed
}

fn is_handle_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn strip_mentions(chars: &mut [char]) -> bool {
    let mut changed = false;
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '@' && chars.get(i + 1).is_some_and(|&c| is_handle_char(c)) {
            let end = chars[i + 1..].iter().position(|&c| !is_handle_char(c)).map_or(chars.len(), |p| i + 1 + p);
            changed |= blank(chars, i, end);
            i = end;
        } else {
            i += 1;
        }
    }
    changed
}

fn is_hashtag_body(c: char) -> bool {
    c == '_'
        || c == '\u{200C}'
        || matches!(
            c.general_category_group(),
            GeneralCategoryGroup::Letter | GeneralCategoryGroup::Mark | GeneralCategoryGroup::Number
        )
}

/// Drops the `#` marker and turns `_` inside the hashtag body into spaces.
fn rewrite_hashtags(chars: &mut [char]) -> bool {
    let mut changed = false;
    let mut i = 0;
    while i < chars.len() {
        if chars[i] != '#' {
            i += 1;
            continue;
        }
        let mut j = i;
        while j < chars.len() && chars[j] == '#' {
            j += 1;
        }
        if j < chars.len() && is_hashtag_body(chars[j]) {
            changed |= blank(chars, i, j);
            while j < chars.len() && is_hashtag_body(chars[j]) {
                if chars[j] == '_' {
                    chars[j] = ' ';
                    changed = true;
                }
                j += 1;
            }
        }
        i = j;
    }
    changed
}

fn strip_emoji(chars: &mut [char]) -> bool {
    let emoji: Vec<bool> = chars.iter().map(|&c| is_pictographic(c)).collect();
    let mut changed = false;
    for i in 0..chars.len() {
        let joiner = chars[i] == ZWJ && ((i > 0 && emoji[i - 1]) || emoji.get(i + 1).copied().unwrap_or(false));
        if emoji[i] || joiner {
            chars[i] = ' ';
            changed = true;
        }
    }
    changed
}

fn strip_where(chars: &mut [char], pred: impl Fn(char) -> bool) -> bool {
    let mut changed = false;
    for c in chars.iter_mut() {
        if *c != ' ' && pred(*c) {
            *c = ' ';
            changed = true;
        }
    }
    changed
}

fn removal_pass(chars: &mut [char], cfg: &NormalizationConfig) -> bool {
    let mut changed = false;
    if cfg.strip_urls {
        changed |= strip_urls(chars);
    }
    if cfg.strip_mentions {
        changed |= strip_mentions(chars);
    }
    changed |= rewrite_hashtags(chars);
    if cfg.strip_emoji {
        changed |= strip_emoji(chars);
    }
    if cfg.strip_punctuation {
        changed |= strip_where(chars, |c| c.general_category_group() == GeneralCategoryGroup::Punctuation);
    }
    match cfg.strip_digits {
        DigitPolicy::AsciiOnly => changed |= strip_where(chars, |c| c.is_ascii_digit()),
        DigitPolicy::AllScripts => {
            changed |= strip_where(chars, |c| c.general_category() == GeneralCategory::DecimalNumber)
        }
        DigitPolicy::None => {}
    }
    changed
}

/// Normalizes raw tweet text. Total on valid UTF-8 and idempotent for any
/// configuration that passes [`NormalizationConfig::validate`].
pub fn normalize_text(raw: &str, cfg: &NormalizationConfig) -> String {
    let mut chars: Vec<char> = raw.chars().filter_map(|c| cfg.map_char(c)).collect();
    while removal_pass(&mut chars, cfg) {}
    let text: String = chars.into_iter().collect();
    if cfg.collapse_whitespace {
        let mut out = String::with_capacity(text.len());
        for (i, word) in text.split_whitespace().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(word);
        }
        out
    } else {
        text
    }
}

/// Splits on Unicode whitespace. ZWNJ is not whitespace, so it stays inside
/// its word.
pub fn tokenize(normalized: &str) -> Vec<String> {
    normalized.split_whitespace().map(ToString::to_string).collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopwordList {
    pub words: BTreeSet<String>,
    pub source_path: String,
}

impl StopwordList {
    /// Normalizes each entry and keeps those that come out as exactly one
    /// token. The rest are returned as rejected.
    pub fn from_entries<I, S>(entries: I, cfg: &NormalizationConfig, source_path: &str) -> (Self, Vec<String>)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut words = BTreeSet::new();
        let mut rejected = Vec::new();
        for e in entries {
            let mut toks = tokenize(&normalize_text(e.as_ref(), cfg));
            if toks.len() == 1 {
                words.insert(toks.pop().unwrap());
            } else {
                rejected.push(e.as_ref().to_string());
            }
        }
        (StopwordList { words, source_path: source_path.to_string() }, rejected)
    }

    /// Parses the stopword file format: one token per line, `//` comment
    /// lines, blank lines ignored.
    pub fn parse(text: &str, cfg: &NormalizationConfig, source_path: &str) -> (Self, Vec<String>) {
        let entries = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with("//"));
        Self::from_entries(entries, cfg, source_path)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilteredTokens {
    pub tokens: Vec<String>,
    /// Set when no tokens survive; such documents are left out of the topic
    /// model corpus.
    pub empty: bool,
}

pub fn remove_stopwords(tokens: Vec<String>, list: &StopwordList) -> FilteredTokens {
    let tokens: Vec<String> = tokens.into_iter().filter(|t| !list.contains(t)).collect();
    let empty = tokens.is_empty();
    FilteredTokens { tokens, empty }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedDoc {
    pub tweet_id: String,
    pub tokens: Vec<String>,
}

/// Normalize, tokenize and filter one tweet.
pub fn preprocess(tweet_id: &str, raw: &str, cfg: &NormalizationConfig, stopwords: &StopwordList) -> TokenizedDoc {
    let filtered = remove_stopwords(tokenize(&normalize_text(raw, cfg)), stopwords);
    TokenizedDoc { tweet_id: tweet_id.to_string(), tokens: filtered.tokens }
}
