//! Append-only JSON-lines logs, one file per annotation session.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use tweetscope_core::annotate::{AnnotateError, AnnotationSession, SessionEvent};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error(transparent)]
    Annotate(#[from] AnnotateError),
    #[error("session {0:?} not found")]
    NotFound(String),
    #[error("session {0:?} already exists")]
    Exists(String),
    #[error("invalid session id {0:?}; use letters, digits, '-' and '_'")]
    BadId(String),
    #[error("session log {path} line {line}: {message}")]
    Corrupt { path: String, line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoggedEvent {
    pub at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    #[serde(flatten)]
    pub event: SessionEvent,
}

#[derive(Debug, Clone)]
pub struct SessionStore {
    dir: PathBuf,
}

impl SessionStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        SessionStore { dir: dir.into() }
    }

    fn path(&self, id: &str) -> Result<PathBuf, StoreError> {
        let ok =
            !id.is_empty() && id.len() <= 128 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
        if !ok {
            return Err(StoreError::BadId(id.into()));
        }
        Ok(self.dir.join(format!("{id}.jsonl")))
    }

    pub fn exists(&self, id: &str) -> bool {
        self.path(id).is_ok_and(|p| p.exists())
    }

    /// Validates the create event, then starts a new log with it.
    pub fn create(&self, event: SessionEvent, config_hash: Option<&str>) -> Result<AnnotationSession, StoreError> {
        let SessionEvent::Create { session_id, .. } = &event else {
            return Err(AnnotateError::MissingCreate.into());
        };
        let path = self.path(session_id)?;
        let session = AnnotationSession::replay([&event])?;
        std::fs::create_dir_all(&self.dir)?;
        let mut f = match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                return Err(StoreError::Exists(session_id.clone()));
            }
            Err(e) => return Err(e.into()),
        };
        write_line(&mut f, &event, config_hash)?;
        Ok(session)
    }

    pub fn events(&self, id: &str) -> Result<Vec<LoggedEvent>, StoreError> {
        let path = self.path(id)?;
        let f = match File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(StoreError::NotFound(id.into())),
            Err(e) => return Err(e.into()),
        };
        let mut out = Vec::new();
        for (i, line) in BufReader::new(f).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let ev = serde_json::from_str(&line).map_err(|e| StoreError::Corrupt {
                path: path.display().to_string(),
                line: i + 1,
                message: e.to_string(),
            })?;
            out.push(ev);
        }
        Ok(out)
    }

    pub fn load(&self, id: &str) -> Result<AnnotationSession, StoreError> {
        let events = self.events(id)?;
        Ok(AnnotationSession::replay(events.iter().map(|e| &e.event))?)
    }

    /// Applies `event` to `session` and appends it to the log. The session
    /// is left untouched when either step fails.
    pub fn commit(&self, session: &mut AnnotationSession, event: SessionEvent) -> Result<(), StoreError> {
        let mut next = session.clone();
        next.apply(&event)?;
        let path = self.path(next.session_id())?;
        let mut f = OpenOptions::new().append(true).open(&path)?;
        write_line(&mut f, &event, None)?;
        *session = next;
        Ok(())
    }
}

fn write_line(f: &mut File, event: &SessionEvent, config_hash: Option<&str>) -> Result<(), StoreError> {
    let logged = LoggedEvent { at: Utc::now(), config_hash: config_hash.map(str::to_string), event: event.clone() };
    let mut line = serde_json::to_vec(&logged).map_err(std::io::Error::other)?;
    line.push(b'\n');
    f.write_all(&line)?;
    f.sync_data()?;
    Ok(())
}
