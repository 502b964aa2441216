//! Line-ownership miner over a git repository.
//!
//! Walks the first-parent history of a branch, oldest first, and diffs every
//! commit against its first parent with zero context lines. Each removed line
//! produces a co-edit from the commit author to the line's previous owner;
//! each added line becomes owned by the commit author. Lines are matched by
//! position within each hunk. File renames are followed when git detects them.
//!
//! Requires the `git` executable on `PATH`.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;
use std::process::Command;

use crate::error::{Error, Result};
use crate::model::{CoEditRecord, CommitRecord, EventLog};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LineOwner {
    /// Index into [`LineOwnershipMap::authors`].
    pub owner: u32,
    /// Time of the commit that last wrote the line.
    pub timestamp: i64,
}

/// Current owner of every line of every tracked text file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LineOwnershipMap {
    pub files: BTreeMap<String, Vec<LineOwner>>,
    pub authors: Vec<String>,
}

impl LineOwnershipMap {
    pub fn owner_name(&self, line: &LineOwner) -> &str {
        &self.authors[line.owner as usize]
    }

    pub fn line_count(&self, path: &str) -> Option<usize> {
        self.files.get(path).map(Vec::len)
    }

    fn author_index(&mut self, name: &str) -> u32 {
        match self.authors.iter().position(|a| a == name) {
            Some(i) => i as u32,
            None => {
                self.authors.push(name.to_string());
                (self.authors.len() - 1) as u32
            }
        }
    }
}

/// `@@ -old_start,old_len +new_start,new_len @@`
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Hunk {
    old_start: usize,
    old_len: usize,
    new_len: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct FileDiff {
    old_path: Option<String>,
    new_path: Option<String>,
    binary: bool,
    hunks: Vec<Hunk>,
}

#[derive(Debug, Clone)]
struct WalkedCommit {
    id: String,
    parent: Option<String>,
    timestamp: i64,
    author: String,
}

fn git(repo: &Path, args: &[&str]) -> Result<String> {
    let out = Command::new("git")
        .arg("-C")
        .arg(repo)
        .args(["-c", "core.quotePath=false", "-c", "log.showSignature=false"])
        .args(args)
        .env("LC_ALL", "C")
        .env("GIT_CONFIG_NOSYSTEM", "1")
        .output()?;
    if !out.status.success() {
        return Err(Error::Git(format!(
            "`git {}` failed: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr).trim()
        )));
    }
    String::from_utf8(out.stdout).map_err(|e| Error::Git(format!("non-UTF-8 output: {e}")))
}

fn walk(repo: &Path, branch: &str) -> Result<Vec<WalkedCommit>> {
    let text = git(
        repo,
        &["log", "--first-parent", "--reverse", "--format=%H%x09%P%x09%at%x09%an", branch, "--"],
    )?;
    text.lines()
        .map(|line| {
            let mut parts = line.splitn(4, '\t');
            let (Some(id), Some(parents), Some(ts), Some(author)) =
                (parts.next(), parts.next(), parts.next(), parts.next())
            else {
                return Err(Error::Git(format!("unexpected log line `{line}`")));
            };
            Ok(WalkedCommit {
                id: id.to_string(),
                parent: parents.split(' ').next().filter(|p| !p.is_empty()).map(str::to_string),
                timestamp: ts.parse().map_err(|_| Error::Git(format!("bad timestamp in `{line}`")))?,
                author: author.to_string(),
            })
        })
        .collect()
}

fn diff(repo: &Path, commit: &WalkedCommit) -> Result<Vec<FileDiff>> {
    let mut args = vec![
        "diff-tree",
        "-r",
        "-p",
        "-U0",
        "-M",
        "--no-color",
        "--no-ext-diff",
        "--no-textconv",
        "--no-commit-id",
        "--src-prefix=a/",
        "--dst-prefix=b/",
    ];
    match &commit.parent {
        Some(p) => {
            args.push(p);
            args.push(&commit.id);
        }
        None => {
            args.push("--root");
            args.push(&commit.id);
        }
    }
    parse_diff(&git(repo, &args)?)
}

fn strip_path(raw: &str, prefix: &str) -> Option<String> {
    let raw = raw.trim_end_matches('\t');
    if raw == "/dev/null" {
        return None;
    }
    let unquoted = if raw.starts_with('"') && raw.ends_with('"') && raw.len() >= 2 {
        unquote(&raw[1..raw.len() - 1])
    } else {
        raw.to_string()
    };
    Some(unquoted.strip_prefix(prefix).map(str::to_string).unwrap_or(unquoted))
}

/// Undoes git's C-style path quoting.
fn unquote(s: &str) -> String {
    let mut bytes = Vec::with_capacity(s.len());
    let mut it = s.bytes().peekable();
    while let Some(b) = it.next() {
        if b != b'\\' {
            bytes.push(b);
            continue;
        }
        match it.next() {
            Some(b'n') => bytes.push(b'\n'),
            Some(b't') => bytes.push(b'\t'),
            Some(d @ b'0'..=b'7') => {
                let mut v = u32::from(d - b'0');
                for _ in 0..2 {
                    if let Some(&n @ b'0'..=b'7') = it.peek() {
                        v = v * 8 + u32::from(n - b'0');
                        it.next();
                    }
                }
                bytes.push(v as u8);
            }
            Some(other) => bytes.push(other),
            None => bytes.push(b'\\'),
        }
    }
    String::from_utf8_lossy(&bytes).into_owned()
}

fn parse_range(s: &str) -> Option<(usize, usize)> {
    match s.split_once(',') {
        Some((a, b)) => Some((a.parse().ok()?, b.parse().ok()?)),
        None => Some((s.parse().ok()?, 1)),
    }
}

fn parse_hunk_header(line: &str) -> Option<Hunk> {
    let rest = line.strip_prefix("@@ -")?;
    let (old, rest) = rest.split_once(" +")?;
    let (new, _) = rest.split_once(" @@")?;
    let (old_start, old_len) = parse_range(old)?;
    let (_, new_len) = parse_range(new)?;
    Some(Hunk {
        old_start,
        old_len,
        new_len,
    })
}

fn parse_diff(text: &str) -> Result<Vec<FileDiff>> {
    let mut files: Vec<FileDiff> = Vec::new();
    let mut lines = text.lines();
    while let Some(line) = lines.next() {
        if line.starts_with("diff --git ") {
            files.push(FileDiff::default());
            continue;
        }
        let Some(file) = files.last_mut() else {
            continue;
        };
        if let Some(h) = line.strip_prefix("@@ ").map(|_| line) {
            let hunk = parse_hunk_header(h).ok_or_else(|| Error::Git(format!("bad hunk header `{h}`")))?;
            // Body: old_len '-' lines, new_len '+' lines, optional "\ No newline" markers.
            let mut remaining = hunk.old_len + hunk.new_len;
            while remaining > 0 {
                match lines.next() {
                    Some(l) if l.starts_with('\\') => {}
                    Some(_) => remaining -= 1,
                    None => return Err(Error::Git("truncated hunk".into())),
                }
            }
            file.hunks.push(hunk);
        } else if let Some(p) = line.strip_prefix("--- ") {
            file.old_path = strip_path(p, "a/");
        } else if let Some(p) = line.strip_prefix("+++ ") {
            file.new_path = strip_path(p, "b/");
        } else if let Some(p) = line.strip_prefix("rename from ") {
            file.old_path = strip_path(p, "");
        } else if let Some(p) = line.strip_prefix("rename to ") {
            file.new_path = strip_path(p, "");
        } else if line.starts_with("Binary files ") || line == "GIT binary patch" {
            file.binary = true;
        }
    }
    Ok(files)
}

/// Applies one file's hunks; returns the previous owners of removed lines.
fn apply_hunks(lines: &[LineOwner], hunks: &[Hunk], author: LineOwner) -> Result<(Vec<LineOwner>, Vec<LineOwner>)> {
    let mut out = Vec::with_capacity(lines.len());
    let mut removed = Vec::new();
    let mut cursor = 0usize;
    for h in hunks {
        // A pure insertion `-a,0` goes after old line a; otherwise old lines start at a.
        let keep_until = if h.old_len == 0 { h.old_start } else { h.old_start - 1 };
        if keep_until < cursor || keep_until + h.old_len > lines.len() {
            return Err(Error::Invariant(format!(
                "hunk -{},{} does not fit a {}-line file",
                h.old_start,
                h.old_len,
                lines.len()
            )));
        }
        out.extend_from_slice(&lines[cursor..keep_until]);
        removed.extend_from_slice(&lines[keep_until..keep_until + h.old_len]);
        out.extend(std::iter::repeat_n(author, h.new_len));
        cursor = keep_until + h.old_len;
    }
    out.extend_from_slice(&lines[cursor..]);
    Ok((out, removed))
}

fn repo_name(path: &Path) -> String {
    path.canonicalize()
        .ok()
        .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .unwrap_or_else(|| path.display().to_string())
}

pub fn mine_repository(repo_path: &Path, branch: &str) -> Result<EventLog> {
    mine_repository_with_ownership(repo_path, branch).map(|(log, _)| log)
}

/// Like [`mine_repository`], also returning line ownership at the branch tip.
pub fn mine_repository_with_ownership(repo_path: &Path, branch: &str) -> Result<(EventLog, LineOwnershipMap)> {
    if !repo_path.is_dir() {
        return Err(Error::Io(io::Error::new(
            io::ErrorKind::NotFound,
            format!("{}: not a directory", repo_path.display()),
        )));
    }
    if let Err(e) = git(repo_path, &["rev-parse", "--git-dir"]) {
        return Err(Error::Io(io::Error::other(format!(
            "{}: not a readable git repository ({e})",
            repo_path.display()
        ))));
    }
    let spec = format!("{branch}^{{commit}}");
    if git(repo_path, &["rev-parse", "--verify", "--quiet", &spec]).is_err() {
        return Err(Error::Argument(format!("unknown branch `{branch}`")));
    }

    let repo = repo_name(repo_path);
    let mut ownership = LineOwnershipMap::default();
    let mut commits = Vec::new();
    let mut coedits = Vec::new();
    for c in walk(repo_path, branch)? {
        commits.push(CommitRecord::new(&c.id, &c.author, c.timestamp, &repo));
        let author = LineOwner {
            owner: ownership.author_index(&c.author),
            timestamp: c.timestamp,
        };
        // (editor, edited) -> (weight, files touched)
        let mut pairs: BTreeMap<u32, (u32, Vec<String>)> = BTreeMap::new();
        let diffs = diff(repo_path, &c)?;
        // Renames read from the pre-commit state, so detach old entries first.
        let mut detached: BTreeMap<String, Vec<LineOwner>> = BTreeMap::new();
        for d in &diffs {
            if let Some(old) = &d.old_path {
                if let Some(lines) = ownership.files.remove(old) {
                    detached.insert(old.clone(), lines);
                }
            }
        }
        for d in diffs {
            if d.binary {
                tracing::info!(commit = c.id, path = ?d.new_path.as_ref().or(d.old_path.as_ref()), "binary file skipped");
                continue;
            }
            let before = d.old_path.as_ref().and_then(|p| detached.remove(p)).unwrap_or_default();
            let (after, removed) = apply_hunks(&before, &d.hunks, author)?;
            let path = d.new_path.clone().or(d.old_path.clone()).unwrap_or_default();
            for line in removed {
                let entry = pairs.entry(line.owner).or_default();
                entry.0 += 1;
                if !entry.1.contains(&path) {
                    entry.1.push(path.clone());
                }
            }
            if let Some(new) = d.new_path {
                ownership.files.insert(new, after);
            }
        }
        // Anything left in `detached` belonged to a file that turned binary.
        for (edited, (weight, files)) in pairs {
            let mut rec = CoEditRecord::new(&c.author, &ownership.authors[edited as usize], c.timestamp, weight);
            if files.len() == 1 {
                rec.file = Some(files[0].clone());
            }
            coedits.push(rec);
        }
    }
    let log = EventLog::from_records(&repo, commits, coedits)?;
    Ok((log, ownership))
}
