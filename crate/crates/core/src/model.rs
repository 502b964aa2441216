//! Event logs, commit histories and the top-fraction developer filter.
//!
//! Developer ids are interned into [`DevId`]s. Interning sorts names
//! lexicographically, so comparing two `DevId`s gives the same answer as
//! comparing the underlying names; every deterministic tie rule in the crate
//! leans on this.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const COMMITS_HEADER: [&str; 4] = ["commit_id", "author", "timestamp", "repo"];
pub const COEDITS_HEADER: [&str; 5] = ["editor", "edited", "timestamp", "weight", "file"];

/// Interned developer id. Ordering matches the lexicographic order of names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DevId(pub u32);

impl DevId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for DevId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A commit row as it appears on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub commit_id: String,
    pub author: String,
    pub timestamp: i64,
    pub repo: String,
}

/// A co-edit row as it appears on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoEditRecord {
    pub editor: String,
    pub edited: String,
    pub timestamp: i64,
    pub weight: u32,
    pub file: Option<String>,
}

impl CommitRecord {
    pub fn new(commit_id: &str, author: &str, timestamp: i64, repo: &str) -> Self {
        Self {
            commit_id: commit_id.to_string(),
            author: author.to_string(),
            timestamp,
            repo: repo.to_string(),
        }
    }
}

impl CoEditRecord {
    pub fn new(editor: &str, edited: &str, timestamp: i64, weight: u32) -> Self {
        Self {
            editor: editor.to_string(),
            edited: edited.to_string(),
            timestamp,
            weight,
            file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitEvent {
    pub commit_id: String,
    pub author: DevId,
    /// Seconds since the epoch, UTC.
    pub timestamp: i64,
}

/// Directed co-edit: `editor` changed lines previously owned by `edited`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoEditEvent {
    pub editor: DevId,
    pub edited: DevId,
    pub timestamp: i64,
    pub weight: u32,
    pub file: Option<String>,
    /// Position in the canonical order; the last component of the tie key.
    pub seq: u32,
}

impl CoEditEvent {
    pub fn is_self_edit(&self) -> bool {
        self.editor == self.edited
    }

    /// Canonical ordering key: (timestamp, editor, edited, input order).
    pub fn order_key(&self) -> (i64, DevId, DevId, u32) {
        (self.timestamp, self.editor, self.edited, self.seq)
    }
}

/// Validated, time-sorted activity of one repository.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventLog {
    repo_id: String,
    developers: Vec<String>,
    commits: Vec<CommitEvent>,
    coedits: Vec<CoEditEvent>,
}

impl EventLog {
    /// Builds a log from raw rows. Rows may be in any order.
    pub fn from_records(
        repo_id: &str,
        commits: Vec<CommitRecord>,
        coedits: Vec<CoEditRecord>,
    ) -> Result<Self> {
        let mut names = BTreeSet::new();
        for (i, c) in commits.iter().enumerate() {
            if c.commit_id.is_empty() || c.author.is_empty() {
                return Err(Error::Input(format!("commit row {i}: empty commit_id or author")));
            }
            if c.timestamp < 0 {
                return Err(Error::Input(format!("commit row {i}: negative timestamp")));
            }
            names.insert(c.author.as_str());
        }
        for (i, e) in coedits.iter().enumerate() {
            if e.editor.is_empty() || e.edited.is_empty() {
                return Err(Error::Input(format!("co-edit row {i}: empty editor or edited")));
            }
            if e.weight < 1 {
                return Err(Error::Input(format!("co-edit row {i}: weight must be >= 1")));
            }
            if e.timestamp < 0 {
                return Err(Error::Input(format!("co-edit row {i}: negative timestamp")));
            }
            names.insert(e.editor.as_str());
            names.insert(e.edited.as_str());
        }
        let developers: Vec<String> = names.into_iter().map(str::to_string).collect();
        let lookup = |name: &str| -> DevId {
            let i = developers
                .binary_search_by(|probe| probe.as_str().cmp(name))
                .expect("interned");
            DevId(i as u32)
        };
        let commit_events = commits
            .iter()
            .map(|c| CommitEvent {
                commit_id: c.commit_id.clone(),
                author: lookup(&c.author),
                timestamp: c.timestamp,
            })
            .collect();
        let coedit_events = coedits
            .iter()
            .enumerate()
            .map(|(i, e)| CoEditEvent {
                editor: lookup(&e.editor),
                edited: lookup(&e.edited),
                timestamp: e.timestamp,
                weight: e.weight,
                file: e.file.clone().filter(|f| !f.is_empty()),
                seq: i as u32,
            })
            .collect();
        Ok(Self::from_parts(repo_id.to_string(), developers, commit_events, coedit_events))
    }

    /// Reassembles a log, restoring the canonical sort of both event lists.
    pub(crate) fn from_parts(
        repo_id: String,
        developers: Vec<String>,
        mut commits: Vec<CommitEvent>,
        mut coedits: Vec<CoEditEvent>,
    ) -> Self {
        commits.sort_by_key(|c| c.timestamp);
        sort_coedits(&mut coedits);
        Self {
            repo_id,
            developers,
            commits,
            coedits,
        }
    }

    pub fn repo_id(&self) -> &str {
        &self.repo_id
    }

    pub fn developers(&self) -> &[String] {
        &self.developers
    }

    pub fn name(&self, dev: DevId) -> &str {
        &self.developers[dev.index()]
    }

    pub fn dev_id(&self, name: &str) -> Option<DevId> {
        self.developers
            .binary_search_by(|probe| probe.as_str().cmp(name))
            .ok()
            .map(|i| DevId(i as u32))
    }

    pub fn commits(&self) -> &[CommitEvent] {
        &self.commits
    }

    pub fn coedits(&self) -> &[CoEditEvent] {
        &self.coedits
    }

    /// `[t_min, t_max]` over all commits and co-edits, `None` for an empty log.
    pub fn span(&self) -> Option<(i64, i64)> {
        let times = self
            .commits
            .iter()
            .map(|c| c.timestamp)
            .chain(self.coedits.iter().map(|e| e.timestamp));
        times.fold(None, |acc, t| match acc {
            None => Some((t, t)),
            Some((lo, hi)) => Some((lo.min(t), hi.max(t))),
        })
    }

    pub fn with_commits(&self, commits: Vec<CommitEvent>) -> Self {
        Self::from_parts(
            self.repo_id.clone(),
            self.developers.clone(),
            commits,
            self.coedits.clone(),
        )
    }

    pub fn with_coedits(&self, coedits: Vec<CoEditEvent>) -> Self {
        Self::from_parts(
            self.repo_id.clone(),
            self.developers.clone(),
            self.commits.clone(),
            coedits,
        )
    }

    pub fn commit_records(&self) -> Vec<CommitRecord> {
        self.commits
            .iter()
            .map(|c| CommitRecord {
                commit_id: c.commit_id.clone(),
                author: self.name(c.author).to_string(),
                timestamp: c.timestamp,
                repo: self.repo_id.clone(),
            })
            .collect()
    }

    pub fn coedit_records(&self) -> Vec<CoEditRecord> {
        self.coedits
            .iter()
            .map(|e| CoEditRecord {
                editor: self.name(e.editor).to_string(),
                edited: self.name(e.edited).to_string(),
                timestamp: e.timestamp,
                weight: e.weight,
                file: e.file.clone(),
            })
            .collect()
    }
}

/// Sorts by (timestamp, editor, edited, seq) and renumbers `seq` to the
/// resulting positions.
pub(crate) fn sort_coedits(coedits: &mut [CoEditEvent]) {
    coedits.sort_by_key(CoEditEvent::order_key);
    for (i, e) in coedits.iter_mut().enumerate() {
        e.seq = i as u32;
    }
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(reader)
}

fn check_header(file: &Path, headers: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let got: Vec<&str> = headers.iter().map(str::trim).collect();
    if got != expected {
        return Err(Error::Parse {
            file: file.to_path_buf(),
            line: 1,
            column: "header".into(),
            message: format!("expected `{}`, found `{}`", expected.join(","), got.join(",")),
        });
    }
    Ok(())
}

fn parse_timestamp(file: &Path, line: u64, raw: &str) -> Result<i64> {
    let err = |message: String| Error::Parse {
        file: file.to_path_buf(),
        line,
        column: "timestamp".into(),
        message,
    };
    let t: i64 = raw
        .trim()
        .parse()
        .map_err(|_| err(format!("not an integer: `{raw}`")))?;
    if t < 0 {
        return Err(err(format!("negative timestamp {t}")));
    }
    Ok(t)
}

fn row_error(file: &Path, line: u64, column: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        file: file.to_path_buf(),
        line,
        column: column.to_string(),
        message: message.into(),
    }
}

/// Parses a commits CSV. `name` is used in error messages only.
pub fn read_commit_records<R: Read>(reader: R, name: &Path) -> Result<Vec<CommitRecord>> {
    let mut rdr = csv_reader(reader);
    check_header(name, rdr.headers()?, &COMMITS_HEADER)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != COMMITS_HEADER.len() {
            return Err(row_error(
                name,
                line,
                "*",
                format!("expected {} columns, found {}", COMMITS_HEADER.len(), rec.len()),
            ));
        }
        let commit_id = rec[0].to_string();
        let author = rec[1].to_string();
        if commit_id.is_empty() {
            return Err(row_error(name, line, "commit_id", "empty"));
        }
        if author.is_empty() {
            return Err(row_error(name, line, "author", "empty"));
        }
        let timestamp = parse_timestamp(name, line, &rec[2])?;
        out.push(CommitRecord {
            commit_id,
            author,
            timestamp,
            repo: rec[3].to_string(),
        });
    }
    Ok(out)
}

/// Parses a co-edits CSV. `name` is used in error messages only.
pub fn read_coedit_records<R: Read>(reader: R, name: &Path) -> Result<Vec<CoEditRecord>> {
    let mut rdr = csv_reader(reader);
    check_header(name, rdr.headers()?, &COEDITS_HEADER)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != COEDITS_HEADER.len() {
            return Err(row_error(
                name,
                line,
                "*",
                format!("expected {} columns, found {}", COEDITS_HEADER.len(), rec.len()),
            ));
        }
        let editor = rec[0].to_string();
        let edited = rec[1].to_string();
        if editor.is_empty() {
            return Err(row_error(name, line, "editor", "empty"));
        }
        if edited.is_empty() {
            return Err(row_error(name, line, "edited", "empty"));
        }
        let timestamp = parse_timestamp(name, line, &rec[2])?;
        let weight: u32 = rec[3]
            .trim()
            .parse()
            .map_err(|_| row_error(name, line, "weight", format!("not an integer: `{}`", &rec[3])))?;
        if weight < 1 {
            return Err(row_error(name, line, "weight", "weight must be >= 1"));
        }
        let file = Some(rec[4].to_string()).filter(|f| !f.is_empty());
        out.push(CoEditRecord {
            editor,
            edited,
            timestamp,
            weight,
            file,
        });
    }
    Ok(out)
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Loads and validates a commits/co-edits CSV pair.
pub fn load_event_log(commits_path: &Path, coedits_path: &Path) -> Result<EventLog> {
    load_event_log_opt(commits_path, Some(coedits_path))
}

/// As [`load_event_log`]; without a co-edit file the log has no co-edits.
pub fn load_event_log_opt(commits_path: &Path, coedits_path: Option<&Path>) -> Result<EventLog> {
    let commits = read_commit_records(open(commits_path)?, commits_path)?;
    if commits.is_empty() {
        return Err(Error::NoCommits {
            file: commits_path.to_path_buf(),
        });
    }
    let coedits = match coedits_path {
        Some(p) => read_coedit_records(open(p)?, p)?,
        None => Vec::new(),
    };
    let repo = commits[0].repo.clone();
    if let Some(other) = commits.iter().find(|c| c.repo != repo) {
        return Err(Error::Input(format!(
            "{}: mixes repositories `{}` and `{}`",
            commits_path.display(),
            repo,
            other.repo
        )));
    }
    EventLog::from_records(&repo, commits, coedits)
}

pub fn write_commits_csv<W: Write>(log: &EventLog, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(COMMITS_HEADER)?;
    for c in log.commit_records() {
        w.write_record([
            c.commit_id.as_str(),
            c.author.as_str(),
            &c.timestamp.to_string(),
            c.repo.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_coedits_csv<W: Write>(log: &EventLog, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(COEDITS_HEADER)?;
    for e in log.coedit_records() {
        w.write_record([
            e.editor.as_str(),
            e.edited.as_str(),
            &e.timestamp.to_string(),
            &e.weight.to_string(),
            e.file.as_deref().unwrap_or(""),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-developer sorted commit timestamps, indexed by [`DevId`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitHistory {
    names: Vec<String>,
    times: Vec<Vec<i64>>,
}

impl CommitHistory {
    pub fn times(&self, dev: DevId) -> &[i64] {
        &self.times[dev.index()]
    }

    pub fn count(&self, dev: DevId) -> usize {
        self.times[dev.index()].len()
    }

    pub fn first_commit(&self, dev: DevId) -> Option<i64> {
        self.times[dev.index()].first().copied()
    }

    pub fn n_developers(&self) -> usize {
        self.times.len()
    }

    pub fn name(&self, dev: DevId) -> &str {
        &self.names[dev.index()]
    }

    pub fn dev_id(&self, name: &str) -> Option<DevId> {
        self.names
            .binary_search_by(|probe| probe.as_str().cmp(name))
            .ok()
            .map(|i| DevId(i as u32))
    }

    /// Looks a developer up by name; unknown names have an empty history.
    pub fn times_of(&self, name: &str) -> &[i64] {
        self.dev_id(name).map_or(&[], |d| self.times(d))
    }

    pub fn total_commits(&self) -> usize {
        self.times.iter().map(Vec::len).sum()
    }

    /// Developers with at least one commit, in id order.
    pub fn committers(&self) -> impl Iterator<Item = DevId> + '_ {
        self.times
            .iter()
            .enumerate()
            .filter(|(_, t)| !t.is_empty())
            .map(|(i, _)| DevId(i as u32))
    }

    pub fn all_developers(&self) -> impl Iterator<Item = DevId> {
        (0..self.times.len() as u32).map(DevId)
    }
}

pub fn build_commit_history(log: &EventLog) -> CommitHistory {
    let mut times = vec![Vec::new(); log.developers().len()];
    for c in log.commits() {
        times[c.author.index()].push(c.timestamp);
    }
    for t in &mut times {
        t.sort_unstable();
    }
    CommitHistory {
        names: log.developers().to_vec(),
        times,
    }
}

/// Which developers form the denominator of the top-fraction cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopBase {
    /// Developers with at least one commit.
    #[default]
    Committers,
    /// Every developer in the index, including pure co-edit participants.
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopDevelopers {
    /// Ranked by commit count, descending.
    pub members: Vec<DevId>,
    /// Size of the population the fraction was applied to.
    pub base_size: usize,
    pub top_commits: usize,
    pub total_commits: usize,
    /// Share of all commits made by `members`, in percent.
    pub commit_share_pct: f64,
}

impl TopDevelopers {
    pub fn contains(&self, dev: DevId) -> bool {
        self.members.contains(&dev)
    }

    pub fn as_mask(&self, n_developers: usize) -> Vec<bool> {
        let mut mask = vec![false; n_developers];
        for d in &self.members {
            mask[d.index()] = true;
        }
        mask
    }
}

/// `⌈fraction·n⌉`, guarded against floating-point noise such as `0.7·10`.
pub fn top_k(fraction: f64, n: usize) -> usize {
    let raw = fraction * n as f64;
    ((raw - 1e-9).ceil().max(0.0) as usize).min(n)
}

/// The `⌈fraction·D⌉` most active committers.
pub fn top_fraction_developers(history: &CommitHistory, fraction: f64) -> Result<TopDevelopers> {
    top_developers(history, fraction, TopBase::Committers)
}

/// Ranks by commit count (descending), then earlier first commit, then id.
pub fn top_developers(history: &CommitHistory, fraction: f64, base: TopBase) -> Result<TopDevelopers> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Argument(format!("fraction must be in (0, 1], got {fraction}")));
    }
    let mut pool: Vec<DevId> = match base {
        TopBase::Committers => history.committers().collect(),
        TopBase::All => history.all_developers().collect(),
    };
    if pool.is_empty() {
        return Err(Error::Argument("empty commit history".into()));
    }
    pool.sort_by(|&a, &b| {
        history
            .count(b)
            .cmp(&history.count(a))
            .then(
                history
                    .first_commit(a)
                    .unwrap_or(i64::MAX)
                    .cmp(&history.first_commit(b).unwrap_or(i64::MAX)),
            )
            .then(a.cmp(&b))
    });
    let base_size = pool.len();
    pool.truncate(top_k(fraction, base_size).max(1));
    let top_commits: usize = pool.iter().map(|&d| history.count(d)).sum();
    let total_commits = history.total_commits();
    let commit_share_pct = if total_commits == 0 {
        0.0
    } else {
        100.0 * top_commits as f64 / total_commits as f64
    };
    Ok(TopDevelopers {
        members: pool,
        base_size,
        top_commits,
        total_commits,
        commit_share_pct,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn log(commits: &[(&str, i64)], coedits: &[(&str, &str, i64)]) -> EventLog {
        let commits = commits
            .iter()
            .enumerate()
            .map(|(i, (a, t))| CommitRecord::new(&format!("c{i}"), a, *t, "r"))
            .collect();
        let coedits = coedits
            .iter()
            .map(|(a, b, t)| CoEditRecord::new(a, b, *t, 1))
            .collect();
        EventLog::from_records("r", commits, coedits).unwrap()
    }

    fn write_tmp(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        std::fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
        p
    }

    #[test]
    fn loads_small_log() {
        let dir = tempfile::tempdir().unwrap();
        let c = write_tmp(
            &dir,
            "c.csv",
            "commit_id,author,timestamp,repo\nx,A,30,r\ny,B,10,r\nz,A,20,r\n",
        );
        let e = write_tmp(&dir, "e.csv", "editor,edited,timestamp,weight,file\nB,A,25,2,src/a.rs\n");
        let log = load_event_log(&c, &e).unwrap();
        assert_eq!(log.commits().len(), 3);
        assert_eq!(log.coedits().len(), 1);
        assert_eq!(log.span(), Some((10, 30)));
        let ts: Vec<i64> = log.commits().iter().map(|c| c.timestamp).collect();
        assert_eq!(ts, vec![10, 20, 30]);
        assert_eq!(log.coedits()[0].file.as_deref(), Some("src/a.rs"));
    }

    #[test]
    fn zero_weight_is_a_parse_error_at_its_line() {
        let dir = tempfile::tempdir().unwrap();
        let c = write_tmp(&dir, "c.csv", "commit_id,author,timestamp,repo\nx,A,1,r\n");
        let e = write_tmp(
            &dir,
            "e.csv",
            "editor,edited,timestamp,weight,file\nB,A,2,1,\nB,A,3,0,\n",
        );
        match load_event_log(&c, &e) {
            Err(Error::Parse { line, column, file, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(column, "weight");
                assert!(file.ends_with("e.csv"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_rows_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let e = write_tmp(&dir, "e.csv", "editor,edited,timestamp,weight,file\n");
        let c = write_tmp(&dir, "c1.csv", "commit_id,author,timestamp,repo\nx,A,1.5,r\n");
        assert!(matches!(load_event_log(&c, &e), Err(Error::Parse { ref column, .. }) if column == "timestamp"));
        let c = write_tmp(&dir, "c2.csv", "commit_id,author,timestamp,repo\nx,A,1\n");
        assert!(matches!(load_event_log(&c, &e), Err(Error::Parse { line: 2, .. })));
        let c = write_tmp(&dir, "c3.csv", "commit_id,author,timestamp,repo\n");
        assert!(matches!(load_event_log(&c, &e), Err(Error::NoCommits { .. })));
        let c = write_tmp(&dir, "c4.csv", "id,author,timestamp,repo\nx,A,1,r\n");
        assert!(matches!(load_event_log(&c, &e), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn quoted_fields_and_comments() {
        let dir = tempfile::tempdir().unwrap();
        let c = write_tmp(
            &dir,
            "c.csv",
            "# cascade-lens header\ncommit_id,author,timestamp,repo\nx,\"Doe, Jane\",1,r\n",
        );
        let e = write_tmp(&dir, "e.csv", "editor,edited,timestamp,weight,file\n");
        let log = load_event_log(&c, &e).unwrap();
        assert_eq!(log.developers(), ["Doe, Jane"]);
    }

    #[test]
    fn duplicate_coedits_are_kept() {
        let l = log(&[("A", 1)], &[("A", "B", 5), ("A", "B", 5)]);
        assert_eq!(l.coedits().len(), 2);
    }

    #[test]
    fn history_sorts_and_includes_edited_only_developers() {
        let l = log(&[("A", 10), ("A", 5), ("B", 7)], &[("A", "C", 8)]);
        let h = build_commit_history(&l);
        assert_eq!(h.times_of("A"), [5, 10]);
        assert_eq!(h.times_of("B"), [7]);
        assert_eq!(h.times_of("C"), [] as [i64; 0]);
        assert!(h.dev_id("C").is_some());
    }

    fn counts_log(counts: &[(&str, usize)]) -> EventLog {
        let mut commits = Vec::new();
        let mut t = 0;
        for (name, n) in counts {
            for _ in 0..*n {
                commits.push((*name, t));
                t += 1;
            }
        }
        log(&commits, &[])
    }

    #[test]
    fn top_fraction_uses_ceiling() {
        let names: Vec<String> = (0..10).map(|i| format!("d{i}")).collect();
        let counts: Vec<(&str, usize)> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i + 1)).collect();
        let h = build_commit_history(&counts_log(&counts));
        assert_eq!(top_fraction_developers(&h, 0.2).unwrap().members.len(), 2);
        let h6 = build_commit_history(&counts_log(&counts[..6]));
        assert_eq!(top_fraction_developers(&h6, 0.2).unwrap().members.len(), 2);
        assert_eq!(top_k(0.7, 10), 7);
    }

    #[test]
    fn top_fraction_share() {
        let h = build_commit_history(&counts_log(&[("A", 50), ("B", 30), ("C", 20)]));
        let top = top_fraction_developers(&h, 0.34).unwrap();
        let names: Vec<&str> = top.members.iter().map(|&d| h.name(d)).collect();
        assert_eq!(names, ["A", "B"]);
        assert!((top.commit_share_pct - 80.0).abs() < 1e-12);
    }

    #[test]
    fn top_fraction_ties_break_on_first_commit_then_name() {
        // B and C tie on count; C committed first. D and E tie on both.
        let l = log(
            &[("C", 1), ("B", 2), ("C", 3), ("B", 4), ("E", 5), ("D", 5)],
            &[],
        );
        let h = build_commit_history(&l);
        let top = top_fraction_developers(&h, 1.0).unwrap();
        let names: Vec<&str> = top.members.iter().map(|&d| h.name(d)).collect();
        assert_eq!(names, ["C", "B", "D", "E"]);
    }

    #[test]
    fn top_fraction_rejects_bad_fraction() {
        let h = build_commit_history(&counts_log(&[("A", 1)]));
        assert!(matches!(top_fraction_developers(&h, 0.0), Err(Error::Argument(_))));
        assert!(matches!(top_fraction_developers(&h, 1.5), Err(Error::Argument(_))));
    }

    #[test]
    fn top_base_all_counts_non_committers() {
        let l = log(&[("A", 1), ("B", 2)], &[("A", "C", 3), ("A", "D", 3)]);
        let h = build_commit_history(&l);
        assert_eq!(top_developers(&h, 0.5, TopBase::Committers).unwrap().members.len(), 1);
        assert_eq!(top_developers(&h, 0.5, TopBase::All).unwrap().members.len(), 2);
    }

    fn arb_log() -> impl Strategy<Value = EventLog> {
        let name = prop::sample::select(vec!["a", "b", "c", "d, e", "\"q\""]);
        let commits = prop::collection::vec((name.clone(), 0i64..1000), 1..20);
        let coedits = prop::collection::vec(
            (name.clone(), name, 0i64..1000, 1u32..5, prop::option::of("[a-z/]{1,6}")),
            0..20,
        );
        (commits, coedits).prop_map(|(c, e)| {
            let c = c
                .into_iter()
                .enumerate()
                .map(|(i, (a, t))| CommitRecord::new(&format!("h{i}"), a, t, "repo"))
                .collect();
            let e = e
                .into_iter()
                .map(|(a, b, t, w, f)| CoEditRecord {
                    editor: a.to_string(),
                    edited: b.to_string(),
                    timestamp: t,
                    weight: w,
                    file: f,
                })
                .collect();
            EventLog::from_records("repo", c, e).unwrap()
        })
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_stable(l in arb_log()) {
            let mut c = Vec::new();
            let mut e = Vec::new();
            write_commits_csv(&l, &mut c).unwrap();
            write_coedits_csv(&l, &mut e).unwrap();
            let commits = read_commit_records(c.as_slice(), Path::new("c")).unwrap();
            let coedits = read_coedit_records(e.as_slice(), Path::new("e")).unwrap();
            let again = EventLog::from_records("repo", commits, coedits).unwrap();
            // Developers only referenced by the original records survive too.
            prop_assert_eq!(again, l);
        }

        #[test]
        fn commit_share_is_monotone_in_fraction(l in arb_log(), a in 0.01f64..1.0, b in 0.01f64..1.0) {
            let h = build_commit_history(&l);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let s_lo = top_fraction_developers(&h, lo).unwrap().commit_share_pct;
            let s_hi = top_fraction_developers(&h, hi).unwrap().commit_share_pct;
            prop_assert!(s_lo <= s_hi + 1e-12);
        }
    }
}
