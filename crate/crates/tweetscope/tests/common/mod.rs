#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;

use chrono::NaiveDate;
use rand::Rng;
use serde_json::Value;
use tweetscope_core::rng::seeded;

pub const THEMES: [[&str; 10]; 8] = [
    ["بیمارستان", "پزشک", "پرستار", "درمان", "دارو", "بیمار", "آزمایش", "تست", "ماسک", "دستکش"],
    ["قرنطینه", "خانه", "ماندن", "تعطیل", "مدرسه", "دانشگاه", "سفر", "جاده", "نوروز", "مسافرت"],
    ["اقتصاد", "بازار", "قیمت", "دلار", "بیکاری", "کسب", "تورم", "مغازه", "حقوق", "اجاره"],
    ["دولت", "وزارت", "مسئولین", "رئیس", "تصمیم", "مجلس", "قانون", "اعلام", "سخنگو", "ابلاغ"],
    ["زیارت", "حرم", "دعا", "مسجد", "نماز", "زائران", "قم", "مشهد", "امام", "شفا"],
    ["خبر", "گزارش", "آمار", "فوت", "مبتلا", "رسانه", "تلویزیون", "روزنامه", "شمار", "رسمی"],
    ["شوخی", "خنده", "طنز", "جوک", "مسخره", "کاریکاتور", "لبخند", "بامزه", "میم", "سرگرمی"],
    ["چین", "ایتالیا", "آمریکا", "اروپا", "ووهان", "جهان", "کشورها", "مرز", "واکسن", "سازمان"],
];

pub const STOPWORDS: &str = "// common function words\nاز\nبه\nو\nدر\nکه\nاین\n";
const FILLER: [&str; 6] = ["از", "به", "و", "در", "که", "این"];
const KINDS: [&str; 4] = ["original", "retweet", "reply", "quote"];

pub struct Synthetic {
    pub ndjson: String,
    /// Generating theme of each line's tweet.
    pub themes: Vec<usize>,
}

/// Tweets about one of eight themes each, with URLs, mentions, emoji and
/// digits sprinkled in. Roughly 80% are Persian originals carrying the
/// corpus hashtag.
pub fn synthetic_archive(n: usize, seed: u64) -> Synthetic {
    let mut rng = seeded(seed);
    let mut ndjson = String::new();
    let mut themes = Vec::with_capacity(n);
    for i in 0..n {
        let theme = rng.gen_range(0..THEMES.len());
        themes.push(theme);
        let mut words = Vec::new();
        for _ in 0..rng.gen_range(6..12) {
            if rng.gen_bool(0.2) {
                words.push(FILLER[rng.gen_range(0..FILLER.len())].to_string());
            } else {
                words.push(THEMES[theme][rng.gen_range(0..10)].to_string());
            }
        }
        if rng.gen_bool(0.3) {
            words.push(format!("https://t.co/{:x}", rng.gen::<u32>()));
        }
        if rng.gen_bool(0.3) {
            words.push(format!("@user_{}", rng.gen_range(0..500)));
        }
        if rng.gen_bool(0.2) {
            words.push("😷".into());
        }
        if rng.gen_bool(0.2) {
            words.push("۱۲۳".into());
        }
        let tag = if rng.gen_bool(0.95) { "کرونا" } else { "فوتبال" };
        words.push(format!("#{tag}"));
        let kind = if rng.gen_bool(0.85) { "original" } else { KINDS[rng.gen_range(1..4)] };
        let lang = if rng.gen_bool(0.97) { "fa" } else { "en" };
        let day = 1 + (i * 31 / n.max(1)) as u32;
        let at = NaiveDate::from_ymd_opt(2020, 3, day)
            .unwrap()
            .and_hms_opt(rng.gen_range(0..24), rng.gen_range(0..60), 0)
            .unwrap();
        let mut obj = serde_json::json!({
            "id_str": format!("{}", 1_240_000_000_000_000_000u64 + i as u64),
            "created_at": at.format("%a %b %d %H:%M:%S +0000 %Y").to_string(),
            "full_text": words.join(" "),
            "lang": lang,
            "entities": { "hashtags": [{ "text": tag }] },
            "user": { "screen_name": format!("user_{}", rng.gen_range(0..500)) },
        });
        match kind {
            "retweet" => obj["retweeted_status"] = serde_json::json!({}),
            "reply" => obj["in_reply_to_status_id_str"] = "1".into(),
            "quote" => obj["is_quote_status"] = true.into(),
            _ => {}
        }
        writeln!(ndjson, "{obj}").unwrap();
    }
    Synthetic { ndjson, themes }
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_tweetscope")
}

pub struct Output {
    pub ok: bool,
    pub code: Option<i32>,
    pub json: Value,
    pub stderr: String,
}

pub fn run(dir: &Path, args: &[&str]) -> Output {
    let out =
        Command::new(bin()).args(args).current_dir(dir).env("RUST_LOG", "error").output().expect("spawn tweetscope");
    let stdout = String::from_utf8_lossy(&out.stdout);
    Output {
        ok: out.status.success(),
        code: out.status.code(),
        json: serde_json::from_str(stdout.trim()).unwrap_or(Value::Null),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

/// Runs and panics with stderr on failure.
pub fn ok(dir: &Path, args: &[&str]) -> Value {
    let o = run(dir, args);
    assert!(o.ok, "tweetscope {args:?} failed: {}", o.stderr);
    o.json
}

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// Writes the archive, hashtag list, stopwords and a config into `dir`.
pub fn write_project(dir: &Path, archive: &str, extra_toml: &str) -> PathBuf {
    std::fs::write(dir.join("archive.jsonl"), archive).unwrap();
    std::fs::write(dir.join("hashtags.txt"), "#کرونا\n").unwrap();
    std::fs::write(dir.join("stopwords.txt"), STOPWORDS).unwrap();
    let cfg = format!(
        "[paths]\narchive = \"archive.jsonl\"\nhashtags = \"hashtags.txt\"\nstopwords = \"stopwords.txt\"\noutput_dir = \"out\"\n\n{extra_toml}"
    );
    let p = dir.join("config.toml");
    std::fs::write(&p, cfg).unwrap();
    p
}

pub fn read_csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).unwrap();
    r.records().map(|r| r.unwrap().iter().map(str::to_string).collect()).collect()
}
