//! Case-count CSV tables with header `date,confirmed,deaths,recovered`.

use std::io::Read;

use chrono::NaiveDate;
use serde::Serialize;
use tweetscope_core::ingest::{CaseCountRow, CaseSource};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowError {
    pub source: CaseSource,
    /// 1-based line number in the file, header included.
    pub line: u64,
    pub message: String,
}

const HEADER: [&str; 4] = ["date", "confirmed", "deaths", "recovered"];

/// Parses one table. Rows with a bad date or count are reported and
/// skipped; a wrong header fails the whole table.
pub fn read_case_table<R: Read>(reader: R, source: CaseSource) -> anyhow::Result<(Vec<CaseCountRow>, Vec<RowError>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_ascii_lowercase).collect();
    if header != HEADER {
        anyhow::bail!("{source} case table header must be {}, got {}", HEADER.join(","), header.join(","));
    }
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        match parse_row(&rec, source) {
            Ok(r) => rows.push(r),
            Err(message) => errors.push(RowError { source, line, message }),
        }
    }
    Ok((rows, errors))
}

fn parse_row(rec: &csv::StringRecord, source: CaseSource) -> Result<CaseCountRow, String> {
    if rec.len() != 4 {
        return Err(format!("expected 4 fields, got {}", rec.len()));
    }
    let date = NaiveDate::parse_from_str(&rec[0], "%Y-%m-%d").map_err(|_| format!("bad date {:?}", &rec[0]))?;
    let count = |i: usize| -> Result<u64, String> {
        rec[i].parse::<u64>().map_err(|_| format!("bad {} count {:?}", HEADER[i], &rec[i]))
    };
    Ok(CaseCountRow { date, confirmed: count(1)?, deaths: count(2)?, recovered: count(3)?, source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tweetscope_core::ingest::merge_case_counts;

    #[test]
    fn reads_and_reports_bad_rows() {
        let csv = "date,confirmed,deaths,recovered\n2020-03-01,10,1,0\n2020-03-02,-5,0,0\nnot-a-date,1,1,1\n2020-03-04,12,2,1\n";
        let (rows, errs) = read_case_table(csv.as_bytes(), CaseSource::Ministry).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(errs.iter().map(|e| e.line).collect::<Vec<_>>(), vec![3, 4]);
    }

    #[test]
    fn wrong_header_fails() {
        assert!(read_case_table("day,c,d,r\n".as_bytes(), CaseSource::Fallback).is_err());
    }

    #[test]
    fn ministry_wins_conflicts() {
        let m = "date,confirmed,deaths,recovered\n2020-03-01,10,1,0\n";
        let f = "date,confirmed,deaths,recovered\n2020-03-01,99,9,9\n2020-03-02,20,2,2\n";
        let (m, _) = read_case_table(m.as_bytes(), CaseSource::Ministry).unwrap();
        let (f, _) = read_case_table(f.as_bytes(), CaseSource::Fallback).unwrap();
        let merged = merge_case_counts(m, f).unwrap();
        assert_eq!(merged[0].confirmed, 10);
        assert_eq!(merged[0].source, CaseSource::Ministry);
        assert_eq!(merged[1].source, CaseSource::Fallback);
    }
}
