//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::path::Path;
use std::process::Command;

use cascade_lens::churn::{DeveloperWindowRecord, RepoRecords, YEAR_SECONDS};
use cascade_lens::model::{CoEditRecord, CommitRecord};
use cascade_lens::EventLog;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Trigger decision recomputed from first principles: sort the commits,
/// split at the edit, rank the response among the earlier gaps.
/// `None` when the event cannot be evaluated.
pub fn brute_trigger(commits: &[i64], edit: i64, threshold: f64, strict: bool) -> Option<(i64, f64, bool)> {
    let mut before: Vec<i64> = commits.iter().copied().filter(|&t| t < edit).collect();
    let after = commits.iter().copied().filter(|&t| t > edit).min()?;
    before.sort_unstable();
    if before.len() < 2 {
        return None;
    }
    let gaps: Vec<i64> = before.windows(2).map(|w| w[1] - w[0]).collect();
    let x = after - edit;
    let less = gaps.iter().filter(|&&g| g < x).count() as f64;
    let equal = gaps.iter().filter(|&&g| g == x).count() as f64;
    let rank = if strict {
        100.0 * less / gaps.len() as f64
    } else {
        100.0 * (less + 0.5 * equal) / gaps.len() as f64
    };
    Some((x, rank, rank <= threshold))
}

/// Event as the oracle sees it.
#[derive(Debug, Clone, Copy)]
pub struct RawEvent {
    pub editor: usize,
    pub edited: usize,
    pub ts: i64,
}

/// Greedy chain extension by direct simulation: for each qualifying seed, walk
/// to the earliest later event by the current edited developer while each
/// step is a trigger. Events are in canonical order and self-edits are never
/// part of the sequence. Returns chains as lists of event indices.
pub fn brute_chains(
    commits: &[Vec<i64>],
    events: &[RawEvent],
    initiators: &[usize],
    threshold: f64,
) -> Vec<Vec<usize>> {
    let trig = |e: &RawEvent| e.editor != e.edited && brute_trigger(&commits[e.edited], e.ts, threshold, false).is_some_and(|t| t.2);
    let mut out = Vec::new();
    for (i, seed) in events.iter().enumerate() {
        if seed.editor == seed.edited || !initiators.contains(&seed.editor) || !trig(seed) {
            continue;
        }
        let mut chain = vec![i];
        let mut cur = *seed;
        loop {
            // Earliest by (ts, then position); positions already encode the tie key.
            let next = events
                .iter()
                .enumerate()
                .filter(|(_, f)| f.editor != f.edited && f.editor == cur.edited && f.ts > cur.ts)
                .min_by_key(|(j, f)| (f.ts, *j));
            match next {
                Some((j, f)) if trig(f) => {
                    chain.push(j);
                    cur = *f;
                }
                _ => break,
            }
        }
        if chain.len() >= 2 {
            out.push(chain);
        }
    }
    out
}

pub fn dev(i: usize) -> String {
    format!("d{i}")
}

/// Log whose developer `i` is named `d{i}`; names sort like indices for `i < 10`.
pub fn make_log(commits: &[Vec<i64>], events: &[(usize, usize, i64)]) -> EventLog {
    let mut c = Vec::new();
    for (d, ts) in commits.iter().enumerate() {
        for (k, &t) in ts.iter().enumerate() {
            c.push(CommitRecord::new(&format!("{d}-{k}"), &dev(d), t, "r"));
        }
    }
    let e = events
        .iter()
        .map(|&(a, b, t)| CoEditRecord::new(&dev(a), &dev(b), t, 1))
        .collect();
    EventLog::from_records("r", c, e).unwrap()
}

/// Per-developer streams of tight bursts separated by long pauses.
pub fn bursty_log(seed: u64, n_devs: usize, bursts: usize) -> EventLog {
    let mut r = rng(seed);
    let mut commits = Vec::new();
    for d in 0..n_devs {
        let mut t: i64 = r.gen_range(0..10_000);
        for b in 0..bursts {
            for k in 0..r.gen_range(3..8) {
                commits.push(CommitRecord::new(&format!("{d}-{b}-{k}"), &dev(d), t, "bursty"));
                t += r.gen_range(10..120);
            }
            t += r.gen_range(50_000..500_000);
        }
    }
    EventLog::from_records("bursty", commits, vec![]).unwrap()
}

fn git(dir: &Path, args: &[&str], author: Option<(&str, i64)>) {
    let mut cmd = Command::new("git");
    cmd.current_dir(dir)
        .args(["-c", "commit.gpgsign=false", "-c", "init.defaultBranch=main"])
        .args(args)
        .env("GIT_CONFIG_GLOBAL", "/dev/null")
        .env("GIT_CONFIG_NOSYSTEM", "1");
    if let Some((name, ts)) = author {
        let date = format!("@{ts} +0000");
        cmd.env("GIT_AUTHOR_NAME", name)
            .env("GIT_AUTHOR_EMAIL", format!("{name}@example.org"))
            .env("GIT_AUTHOR_DATE", &date)
            .env("GIT_COMMITTER_NAME", name)
            .env("GIT_COMMITTER_EMAIL", format!("{name}@example.org"))
            .env("GIT_COMMITTER_DATE", &date);
    }
    let out = cmd.output().expect("git runs");
    assert!(out.status.success(), "git {args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn commit_all(dir: &Path, author: &str, ts: i64) {
    git(dir, &["add", "-A"], None);
    git(dir, &["commit", "-q", "-m", &format!("{author} at {ts}")], Some((author, ts)));
}

/// Six scripted commits on `main`:
///
/// 1. A (t=1000) creates f.txt with three lines.
/// 2. B (t=2000) rewrites f.txt line 2.
/// 3. A (t=3000) rewrites its own f.txt line 1 and adds g.txt (4 lines).
/// 4. C (t=4000) rewrites f.txt lines 2-3 and g.txt line 1.
/// 5. B (t=5000) renames g.txt to h.txt and rewrites its line 4.
/// 6. C (t=6000) deletes f.txt.
pub fn scripted_repo(dir: &Path) {
    let w = |name: &str, body: &str| std::fs::write(dir.join(name), body).unwrap();
    git(dir, &["init", "-q"], None);
    w("f.txt", "a1\na2\na3\n");
    commit_all(dir, "A", 1000);
    w("f.txt", "a1\nb2\na3\n");
    commit_all(dir, "B", 2000);
    w("f.txt", "a1x\nb2\na3\n");
    w("g.txt", "g1\ng2\ng3\ng4\n");
    commit_all(dir, "A", 3000);
    w("f.txt", "a1x\nc2\nc3\n");
    w("g.txt", "c1\ng2\ng3\ng4\n");
    commit_all(dir, "C", 4000);
    std::fs::remove_file(dir.join("g.txt")).unwrap();
    w("h.txt", "c1\ng2\ng3\nb4\n");
    commit_all(dir, "B", 5000);
    std::fs::remove_file(dir.join("f.txt")).unwrap();
    commit_all(dir, "C", 6000);
}

/// Hand-traced co-edits of [`scripted_repo`], in time order.
pub const SCRIPTED_COEDITS: &str = "\
editor,edited,timestamp,weight,file
B,A,2000,1,f.txt
A,A,3000,1,f.txt
C,A,4000,2,
C,B,4000,1,f.txt
B,A,5000,1,h.txt
C,A,6000,1,f.txt
C,C,6000,2,f.txt
";

/// Churn corpus: one event log per pseudo-repository.
///
/// Every developer is active in exactly one of windows 0-2. Churners stop
/// early in their window and never return, so their maximum inactivity is
/// drawn from a longer range; stayers commit throughout the window and once
/// more shortly after it ends. That single follow-up commit makes them appear
/// in the next window with a long silence and no later activity, so those
/// records are churners too.
pub fn churn_corpus(seed: u64, n_repos: usize, devs_per_window: usize) -> Vec<EventLog> {
    let y = YEAR_SECONDS;
    let day = 86_400;
    (0..n_repos)
        .map(|repo| {
            let mut r = rng(seed.wrapping_mul(1000).wrapping_add(repo as u64));
            let name = format!("repo{repo}");
            let mut commits = Vec::new();
            let mut coedits = Vec::new();
            let push = |who: &str, t: i64, commits: &mut Vec<CommitRecord>| {
                let id = format!("{who}-{}", commits.len());
                commits.push(CommitRecord::new(&id, who, t, &name));
            };
            push("founder", 0, &mut commits);
            push("founder", 4 * y, &mut commits);
            for w in 0..3i64 {
                let start = w * y;
                let mut cohort = Vec::new();
                for d in 0..devs_per_window {
                    let who = format!("w{w}d{d:02}");
                    let churner = r.gen_bool(0.35);
                    let n = r.gen_range(6..14);
                    let active_until = if churner {
                        start + (r.gen_range(0.2..0.55) * y as f64) as i64
                    } else {
                        start + y - r.gen_range(1..30) * day
                    };
                    let first = start + r.gen_range(1..20) * day;
                    let mut ts: Vec<i64> = (0..n).map(|_| r.gen_range(first..=active_until)).collect();
                    ts.push(first);
                    ts.push(active_until);
                    if !churner {
                        // Evenly spread: at least one commit per ~2 months.
                        let mut t = first;
                        while t < active_until {
                            ts.push(t);
                            t += r.gen_range(20..60) * day;
                        }
                        ts.push(start + y + r.gen_range(1..40) * day);
                    }
                    for t in ts {
                        push(&who, t, &mut commits);
                    }
                    cohort.push(who);
                }
                for _ in 0..devs_per_window * 2 {
                    let a = cohort.choose(&mut r).unwrap();
                    let b = cohort.choose(&mut r).unwrap();
                    if a != b {
                        let t = start + r.gen_range(0..y / 2);
                        coedits.push(CoEditRecord::new(a, b, t, r.gen_range(1..5)));
                    }
                }
            }
            EventLog::from_records(&name, commits, coedits).unwrap()
        })
        .collect()
}

/// Shuffles labels within each (repo, window), keeping class counts.
pub fn permute_labels(repos: &mut [RepoRecords], seed: u64) {
    let mut r = rng(seed);
    for repo in repos.iter_mut() {
        let mut windows: Vec<usize> = repo.records.iter().map(|x| x.window.index).collect();
        windows.sort_unstable();
        windows.dedup();
        for w in windows {
            let idx: Vec<usize> = (0..repo.records.len()).filter(|&i| repo.records[i].window.index == w).collect();
            let mut labels: Vec<Option<bool>> = idx.iter().map(|&i| repo.records[i].churned).collect();
            labels.shuffle(&mut r);
            for (&i, l) in idx.iter().zip(labels) {
                repo.records[i].churned = l;
            }
        }
    }
}

pub fn record_count(records: &[DeveloperWindowRecord], churned: bool) -> usize {
    records.iter().filter(|r| r.churned == Some(churned)).count()
}
