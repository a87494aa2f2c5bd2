use std::fs::{File, OpenOptions};
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use hairstep::annotate::AnnotationAnswer;

use crate::exit;

/// Append-only JSON-lines answer log. A record counts once its line,
/// including the newline, has been synced to disk.
#[derive(Debug)]
pub struct AnswerLog {
    file: File,
    path: PathBuf,
}

impl AnswerLog {
    /// Opens (or creates) the log and returns the records already in it.
    /// An unterminated last line is an answer that was never acknowledged;
    /// it is dropped and truncated away.
    pub fn open(path: &Path) -> anyhow::Result<(Self, Vec<AnnotationAnswer>)> {
        let bytes = match std::fs::read(path) {
            Ok(b) => b,
            Err(e) if e.kind() == ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(e).with_context(|| format!("cannot read {}", path.display())),
        };
        let complete = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
        if complete < bytes.len() {
            log::warn!(
                "{}: dropping {} bytes of an unfinished record",
                path.display(),
                bytes.len() - complete
            );
        }
        let mut answers = Vec::new();
        for (i, line) in bytes[..complete].split(|&b| b == b'\n').enumerate() {
            if line.iter().all(u8::is_ascii_whitespace) {
                continue;
            }
            let a = serde_json::from_slice(line)
                .map_err(|e| exit::invalid(format!("{}:{}: {e}", path.display(), i + 1)))?;
            answers.push(a);
        }

        let existed = path.exists();
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .with_context(|| format!("cannot open {}", path.display()))?;
        if complete < bytes.len() {
            file.set_len(complete as u64)?;
            file.sync_all()?;
        }
        if !existed {
            sync_parent(path);
        }
        Ok((
            Self {
                file,
                path: path.to_path_buf(),
            },
            answers,
        ))
    }

    pub fn append(&mut self, answer: &AnnotationAnswer) -> anyhow::Result<()> {
        let mut line = serde_json::to_vec(answer)?;
        line.push(b'\n');
        self.file
            .write_all(&line)
            .and_then(|_| self.file.sync_data())
            .with_context(|| format!("cannot append to {}", self.path.display()))
    }
}

fn sync_parent(path: &Path) {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if let Ok(dir) = File::open(parent) {
        let _ = dir.sync_all();
    }
}
