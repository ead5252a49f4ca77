//! Stage checkpoint files.
//!
//! Layout under the checkpoint directory:
//!
//! ```text
//! 00-ingest/sentences.jsonl
//! 01-detect/<domain>.jsonl      ... 06-rank/<domain>.jsonl
//! <NN-stage>/_SUCCESS           written last, lists the files of the stage
//! ```

use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Ingest,
    Detect,
    Genfilter,
    Facetclf,
    Cluster,
    Concepts,
    Rank,
}

impl Stage {
    pub const ALL: [Stage; 7] =
        [Stage::Ingest, Stage::Detect, Stage::Genfilter, Stage::Facetclf, Stage::Cluster, Stage::Concepts, Stage::Rank];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Detect => "detect",
            Stage::Genfilter => "genfilter",
            Stage::Facetclf => "facetclf",
            Stage::Cluster => "cluster",
            Stage::Concepts => "concepts",
            Stage::Rank => "rank",
        }
    }

    pub fn dir_name(self) -> String {
        format!("{:02}-{}", self as usize, self.name())
    }

    pub fn previous(self) -> Option<Stage> {
        (self as usize).checked_sub(1).map(|i| Stage::ALL[i])
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_lowercase();
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| format!("unknown stage `{s}` (expected one of {})", Stage::ALL.map(Stage::name).join(", ")))
    }
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path} line {line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CheckpointError + '_ {
    move |source| CheckpointError::Io { path: path.to_path_buf(), source }
}

/// Writes `bytes` to a temporary sibling, syncs it and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    if let Ok(d) = File::open(dir) {
        let _ = d.sync_all();
    }
    Ok(())
}

pub fn encode_jsonl<'a, T: Serialize + 'a>(items: impl IntoIterator<Item = &'a T>) -> Vec<u8> {
    let mut out = Vec::new();
    for it in items {
        serde_json::to_writer(&mut out, it).expect("checkpoint records serialize");
        out.push(b'\n');
    }
    out
}

pub fn write_jsonl<'a, T: Serialize + 'a>(path: &Path, items: impl IntoIterator<Item = &'a T>) -> Result<(), CheckpointError> {
    write_atomic(path, &encode_jsonl(items)).map_err(io_err(path))
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CheckpointError> {
    let f = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.is_empty() {
            continue;
        }
        let v = serde_json::from_str(&line)
            .map_err(|e| CheckpointError::Parse { path: path.to_path_buf(), line: i + 1, message: e.to_string() })?;
        out.push(v);
    }
    Ok(out)
}

pub const SUCCESS_MARKER: &str = "_SUCCESS";

/// Paths of one checkpoint directory.
#[derive(Clone, Debug)]
pub struct CheckpointDir {
    root: PathBuf,
}

impl CheckpointDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        CheckpointDir { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn stage_dir(&self, stage: Stage) -> PathBuf {
        self.root.join(stage.dir_name())
    }

    pub fn sentences(&self) -> PathBuf {
        self.stage_dir(Stage::Ingest).join("sentences.jsonl")
    }

    pub fn domain_file(&self, stage: Stage, domain: &str) -> PathBuf {
        self.stage_dir(stage).join(format!("{domain}.jsonl"))
    }

    pub fn is_complete(&self, stage: Stage) -> bool {
        self.stage_dir(stage).join(SUCCESS_MARKER).is_file()
    }

    /// Removes the stage's completion marker before it is rewritten.
    pub fn begin(&self, stage: Stage) -> Result<(), CheckpointError> {
        let dir = self.stage_dir(stage);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let marker = dir.join(SUCCESS_MARKER);
        match fs::remove_file(&marker) {
            Err(e) if e.kind() != io::ErrorKind::NotFound => Err(io_err(&marker)(e)),
            _ => Ok(()),
        }
    }

    pub fn finish(&self, stage: Stage, files: &[String]) -> Result<(), CheckpointError> {
        let marker = self.stage_dir(stage).join(SUCCESS_MARKER);
        let mut body = files.join("\n");
        body.push('\n');
        write_atomic(&marker, body.as_bytes()).map_err(io_err(&marker))
    }

    pub fn report_path(&self) -> PathBuf {
        self.root.join("report.json")
    }
}
