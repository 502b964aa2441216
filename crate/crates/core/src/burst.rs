//! Inter-event times and the burstiness coefficient
//! `B = (σ − μ) / (σ + μ)` over a subject's inter-event times.
//!
//! `B` is −1 for a perfectly periodic series, close to 0 for a Poisson process
//! and tends to 1 for highly bursty activity. It is computed at two levels:
//! the pooled project stream and each developer's own commit stream. The
//! commit-timestamp shuffle null keeps the pooled stream intact while
//! reassigning timestamps across developers, which destroys individual
//! burstiness but keeps per-developer commit counts.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{build_commit_history, CommitHistory, DevId, EventLog};
use crate::rng;

/// Standard deviation convention used for σ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StdConvention {
    /// Divide by n.
    #[default]
    Population,
    /// Divide by n − 1.
    Sample,
}

/// Outcome of a burstiness computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Burstiness {
    Value(f64),
    /// μ = σ = 0: every event happened at the same instant.
    Undefined,
    /// Fewer than two inter-event times.
    Insufficient,
}

impl Burstiness {
    pub fn value(self) -> Option<f64> {
        match self {
            Burstiness::Value(b) => Some(b),
            _ => None,
        }
    }
}

/// Sorted event times of one subject (a project or a developer).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterEventSeries {
    pub subject: String,
    timestamps: Vec<i64>,
}

impl InterEventSeries {
    pub fn new(subject: impl Into<String>, mut timestamps: Vec<i64>) -> Self {
        timestamps.sort_unstable();
        Self {
            subject: subject.into(),
            timestamps,
        }
    }

    pub fn timestamps(&self) -> &[i64] {
        &self.timestamps
    }

    /// Consecutive differences; zero gaps (same-second events) are kept.
    pub fn inter_event_times(&self) -> Vec<f64> {
        self.timestamps
            .windows(2)
            .map(|w| (w[1] - w[0]) as f64)
            .collect()
    }

    pub fn burstiness(&self) -> Burstiness {
        burstiness(&self.inter_event_times())
    }
}

/// Burstiness with the population standard deviation.
pub fn burstiness(tau: &[f64]) -> Burstiness {
    burstiness_with(tau, StdConvention::Population)
}

pub fn burstiness_with(tau: &[f64], convention: StdConvention) -> Burstiness {
    if tau.len() < 2 {
        return Burstiness::Insufficient;
    }
    let n = tau.len() as f64;
    let mean = tau.iter().sum::<f64>() / n;
    let ss: f64 = tau.iter().map(|t| (t - mean) * (t - mean)).sum();
    let denom = match convention {
        StdConvention::Population => n,
        StdConvention::Sample => n - 1.0,
    };
    let sigma = (ss / denom).sqrt();
    if sigma + mean == 0.0 {
        return Burstiness::Undefined;
    }
    Burstiness::Value((sigma - mean) / (sigma + mean))
}

fn times_burstiness(times: &[i64], convention: StdConvention) -> Burstiness {
    let tau: Vec<f64> = times.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
    burstiness_with(&tau, convention)
}

/// Burstiness of all commits pooled into one author-agnostic series.
pub fn project_burstiness(log: &EventLog) -> Burstiness {
    project_burstiness_with(log, StdConvention::Population)
}

pub fn project_burstiness_with(log: &EventLog, convention: StdConvention) -> Burstiness {
    // Commits are already time-sorted.
    let times: Vec<i64> = log.commits().iter().map(|c| c.timestamp).collect();
    times_burstiness(&times, convention)
}

/// Per-developer burstiness with the subjects that could not be scored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IndividualBurstiness {
    pub values: BTreeMap<DevId, f64>,
    /// Fewer than `min_commits` commits.
    pub skipped: Vec<DevId>,
    /// All commits at the same instant.
    pub undefined: Vec<DevId>,
}

impl IndividualBurstiness {
    pub fn mean(&self) -> Option<f64> {
        if self.values.is_empty() {
            None
        } else {
            Some(self.values.values().sum::<f64>() / self.values.len() as f64)
        }
    }
}

/// Burstiness of each developer's own commit stream.
///
/// `subjects` restricts the analysis (e.g. to the top-20% committers); `None`
/// scores every developer with commits. `min_commits` below 3 is raised to 3,
/// the smallest count that yields two inter-event times.
pub fn individual_burstiness(
    history: &CommitHistory,
    min_commits: usize,
    subjects: Option<&[DevId]>,
) -> IndividualBurstiness {
    individual_burstiness_with(history, min_commits, subjects, StdConvention::Population)
}

pub fn individual_burstiness_with(
    history: &CommitHistory,
    min_commits: usize,
    subjects: Option<&[DevId]>,
    convention: StdConvention,
) -> IndividualBurstiness {
    let min_commits = min_commits.max(3);
    let devs: Vec<DevId> = match subjects {
        Some(s) => {
            let mut s = s.to_vec();
            s.sort_unstable();
            s.dedup();
            s
        }
        None => history.committers().collect(),
    };
    let mut out = IndividualBurstiness::default();
    for dev in devs {
        let times = history.times(dev);
        if times.len() < min_commits {
            out.skipped.push(dev);
            continue;
        }
        match times_burstiness(times, convention) {
            Burstiness::Value(b) => {
                out.values.insert(dev, b);
            }
            Burstiness::Undefined => out.undefined.push(dev),
            Burstiness::Insufficient => out.skipped.push(dev),
        }
    }
    out
}

/// Reassigns commit timestamps by `perm`: commit `i` (in the log's sorted
/// order) receives the timestamp of commit `perm[i]`.
pub fn permute_commit_timestamps(log: &EventLog, perm: &[usize]) -> EventLog {
    assert_eq!(perm.len(), log.commits().len(), "permutation length");
    let commits = log
        .commits()
        .iter()
        .zip(perm)
        .map(|(c, &j)| {
            let mut c = c.clone();
            c.timestamp = log.commits()[j].timestamp;
            c
        })
        .collect();
    log.with_commits(commits)
}

/// Uniformly permutes commit timestamps across all commits of the project.
///
/// Preserves the timestamp multiset (hence project-level inter-event times)
/// and each developer's commit count.
pub fn shuffle_commit_timestamps(log: &EventLog, seed: u64) -> EventLog {
    let mut perm: Vec<usize> = (0..log.commits().len()).collect();
    perm.shuffle(&mut rng::seeded(seed));
    permute_commit_timestamps(log, &perm)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BurstinessConfig {
    pub min_commits: usize,
    pub n_shuffles: usize,
    pub seed: u64,
    pub std_convention: StdConvention,
}

impl Default for BurstinessConfig {
    fn default() -> Self {
        Self {
            min_commits: 3,
            n_shuffles: 100,
            seed: 42,
            std_convention: StdConvention::Population,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubjectBurstiness {
    pub subject: String,
    pub b: f64,
    pub n_events: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BurstinessReport {
    pub repo: String,
    pub project: Option<f64>,
    pub n_commits: usize,
    pub individual: Vec<SubjectBurstiness>,
    /// Mean over shuffles of each developer's B under the commit shuffle.
    pub shuffled: Vec<SubjectBurstiness>,
    pub n_shuffles: usize,
    pub seed: u64,
    pub n_skipped: usize,
    pub n_undefined: usize,
}

impl BurstinessReport {
    pub fn mean_individual(&self) -> Option<f64> {
        mean_b(&self.individual)
    }

    pub fn mean_shuffled(&self) -> Option<f64> {
        mean_b(&self.shuffled)
    }
}

fn mean_b(rows: &[SubjectBurstiness]) -> Option<f64> {
    if rows.is_empty() {
        None
    } else {
        Some(rows.iter().map(|r| r.b).sum::<f64>() / rows.len() as f64)
    }
}

/// Project and individual burstiness plus the shuffled individual baseline.
///
/// Shuffle `i` uses seed `cfg.seed + i`; iterations run in parallel and are
/// folded in index order.
pub fn burstiness_report(
    log: &EventLog,
    subjects: Option<&[DevId]>,
    cfg: &BurstinessConfig,
) -> BurstinessReport {
    let history = build_commit_history(log);
    let observed = individual_burstiness_with(&history, cfg.min_commits, subjects, cfg.std_convention);

    let per_shuffle: Vec<IndividualBurstiness> = (0..cfg.n_shuffles)
        .into_par_iter()
        .map(|i| {
            let shuffled = shuffle_commit_timestamps(log, rng::iteration_seed(cfg.seed, i));
            let h = build_commit_history(&shuffled);
            individual_burstiness_with(&h, cfg.min_commits, subjects, cfg.std_convention)
        })
        .collect();

    let mut sums: BTreeMap<DevId, (f64, usize)> = BTreeMap::new();
    for run in &per_shuffle {
        for (&dev, &b) in &run.values {
            let e = sums.entry(dev).or_insert((0.0, 0));
            e.0 += b;
            e.1 += 1;
        }
    }

    let individual = observed
        .values
        .iter()
        .map(|(&dev, &b)| SubjectBurstiness {
            subject: history.name(dev).to_string(),
            b,
            n_events: history.count(dev),
        })
        .collect();
    let shuffled = sums
        .iter()
        .map(|(&dev, &(sum, n))| SubjectBurstiness {
            subject: history.name(dev).to_string(),
            b: sum / n as f64,
            n_events: history.count(dev),
        })
        .collect();

    BurstinessReport {
        repo: log.repo_id().to_string(),
        project: project_burstiness_with(log, cfg.std_convention).value(),
        n_commits: log.commits().len(),
        individual,
        shuffled,
        n_shuffles: cfg.n_shuffles,
        seed: cfg.seed,
        n_skipped: observed.skipped.len(),
        n_undefined: observed.undefined.len(),
    }
}
