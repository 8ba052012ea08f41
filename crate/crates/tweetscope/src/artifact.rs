//! On-disk artifact formats. JSON files carry a small envelope, JSON-lines
//! files a header line and CSV files a leading `# config_hash:` comment, so
//! every artifact names the configuration that produced it.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub artifact: String,
    pub format_version: u32,
    pub config_hash: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Envelope<T> {
    #[serde(flatten)]
    pub header: Header,
    pub data: T,
}

fn header(artifact: &str, config_hash: &str) -> Header {
    Header { artifact: artifact.into(), format_version: FORMAT_VERSION, config_hash: config_hash.into() }
}

/// Writes through a sibling temp file and renames it into place.
fn write_atomic(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> anyhow::Result<()>) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let tmp = path.with_extension("tmp");
    let mut w = BufWriter::new(File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?);
    body(&mut w)?;
    w.flush()?;
    drop(w);
    std::fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, artifact: &str, config_hash: &str, data: &T) -> anyhow::Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, &Envelope { header: header(artifact, config_hash), data })?;
        w.write_all(b"\n")?;
        Ok(())
    })
}

fn check(h: &Header, artifact: &str, path: &Path) -> anyhow::Result<()> {
    if h.artifact != artifact {
        bail!("{} holds a {} artifact, expected {artifact}", path.display(), h.artifact);
    }
    if h.format_version != FORMAT_VERSION {
        bail!("{} has format version {}, expected {FORMAT_VERSION}", path.display(), h.format_version);
    }
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path, artifact: &str) -> anyhow::Result<Envelope<T>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let env: Envelope<T> =
        serde_json::from_reader(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))?;
    check(&env.header, artifact, path)?;
    Ok(env)
}

pub fn write_jsonl<'a, T: Serialize + 'a>(
    path: &Path,
    artifact: &str,
    config_hash: &str,
    items: impl IntoIterator<Item = &'a T>,
) -> anyhow::Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer(&mut *w, &header(artifact, config_hash))?;
        w.write_all(b"\n")?;
        for item in items {
            serde_json::to_writer(&mut *w, item)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path, artifact: &str) -> anyhow::Result<(Header, Vec<T>)> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut lines = BufReader::new(f).lines();
    let first = lines.next().transpose()?.with_context(|| format!("{} is empty", path.display()))?;
    let h: Header = serde_json::from_str(&first).with_context(|| format!("bad header in {}", path.display()))?;
    check(&h, artifact, path)?;
    let mut items = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        items.push(serde_json::from_str(&line).with_context(|| format!("{} line {}", path.display(), i + 2))?);
    }
    Ok((h, items))
}

/// Writes a CSV whose first line is `# config_hash: <hash>`.
pub fn write_csv<R: AsRef<[u8]>>(
    path: &Path,
    config_hash: &str,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<R>>,
) -> anyhow::Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "# config_hash: {config_hash}")?;
        let mut c = csv::Writer::from_writer(w);
        c.write_record(header)?;
        for row in rows {
            c.write_record(&row)?;
        }
        c.flush()?;
        Ok(())
    })
}

pub fn csv_reader(path: &Path) -> anyhow::Result<csv::Reader<File>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(f))
}

/// Standard artifact locations inside the output directory.
pub struct Layout {
    pub dir: PathBuf,
}

impl Layout {
    pub fn corpus(&self) -> PathBuf {
        self.dir.join("corpus.jsonl")
    }
    pub fn manifest(&self) -> PathBuf {
        self.dir.join("manifest.json")
    }
    pub fn docs(&self) -> PathBuf {
        self.dir.join("docs.jsonl")
    }
    pub fn preprocess_report(&self) -> PathBuf {
        self.dir.join("preprocess.json")
    }
    pub fn lda_model(&self) -> PathBuf {
        self.dir.join("lda_model.json")
    }
    pub fn cluster_model(&self) -> PathBuf {
        self.dir.join("cluster_model.json")
    }
    pub fn clusters_csv(&self) -> PathBuf {
        self.dir.join("clusters.csv")
    }
    pub fn elbow_csv(&self) -> PathBuf {
        self.dir.join("elbow.csv")
    }
    pub fn sample_csv(&self) -> PathBuf {
        self.dir.join("sample.csv")
    }
    pub fn timeseries_csv(&self) -> PathBuf {
        self.dir.join("timeseries.csv")
    }
    pub fn correlation(&self) -> PathBuf {
        self.dir.join("correlation.json")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.json");
        write_json(&p, "thing", "abc", &vec![1, 2, 3]).unwrap();
        let env: Envelope<Vec<i32>> = read_json(&p, "thing").unwrap();
        assert_eq!(env.data, vec![1, 2, 3]);
        assert_eq!(env.header.config_hash, "abc");
        assert!(read_json::<Vec<i32>>(&p, "other").is_err());

        let p = dir.path().join("x.jsonl");
        write_jsonl(&p, "lines", "h", &["a".to_string(), "b".to_string()]).unwrap();
        let (h, items): (Header, Vec<String>) = read_jsonl(&p, "lines").unwrap();
        assert_eq!((h.config_hash.as_str(), items.len()), ("h", 2));

        let p = dir.path().join("x.csv");
        write_csv(&p, "h", &["a", "b"], vec![vec!["1", "2"]]).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("# config_hash: h\na,b\n1,2\n"));
        let mut r = csv_reader(&p).unwrap();
        assert_eq!(r.records().count(), 1);
    }
}
