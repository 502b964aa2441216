//! Ground-truth networks for checking the cascade detector.
//!
//! * The random network is a negative control: uniform commit times and
//!   co-edits between random ordered pairs at random times.
//! * In the cascade network every developer commits in short work sessions
//!   at a regular period. Chains are planted by placing each co-edit
//!   `lead_time` seconds before the edited developer's next commit, which
//!   makes every planted link a trigger. Background noise co-edits are
//!   added on top.
//!
//! Planting reserves, per editor, the interval between consecutive links of a
//! chain. No other co-edit by that editor is placed inside a reserved
//! interval, so greedy chain extension follows the planted path.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cascade::CascadeChain;
use crate::error::{Error, Result};
use crate::model::{top_k, CoEditRecord, CommitRecord, EventLog};
use crate::rng;

const MAX_PLANT_ATTEMPTS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_developers: usize,
    /// Timestamps lie in `[0, horizon]`.
    pub horizon: i64,
    /// Commits per developer in the random network.
    pub commits_per_dev: usize,
    /// Random co-edits: the whole edge set of the random network, background
    /// noise in the cascade network.
    pub n_random_coedits: usize,
    pub n_planted_chains: usize,
    /// Links per planted chain.
    pub chain_length: usize,
    /// Spacing of work sessions in the cascade network.
    pub base_period: f64,
    pub period_jitter: f64,
    /// Commits per work session.
    pub session_commits: usize,
    /// Gaps between commits of one session are uniform in
    /// `[session_gap / 2, session_gap]`.
    pub session_gap: i64,
    /// Seconds between a planted co-edit and the edited developer's next commit.
    pub lead_time: i64,
    /// Fraction of developers that may initiate planted chains; they commit
    /// faster than everyone else so they form the top set.
    pub initiator_fraction: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_developers: 20,
            horizon: 10_000_000,
            commits_per_dev: 100,
            n_random_coedits: 100,
            n_planted_chains: 10,
            chain_length: 6,
            base_period: 100_000.0,
            period_jitter: 0.1,
            session_commits: 3,
            session_gap: 1800,
            lead_time: 10,
            initiator_fraction: 0.2,
            seed: 42,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Argument(format!("synth config: {m}")));
        if self.n_developers < 2 {
            return bad("n_developers must be >= 2");
        }
        if self.horizon <= 0 {
            return bad("horizon must be positive");
        }
        if self.chain_length < 2 {
            return bad("chain_length must be >= 2");
        }
        if !(0.0..1.0).contains(&self.period_jitter) {
            return bad("period_jitter must be in [0, 1)");
        }
        if self.base_period <= 0.0 {
            return bad("base_period must be positive");
        }
        if self.session_commits < 1 {
            return bad("session_commits must be >= 1");
        }
        if self.session_gap < 2 || (self.session_commits as i64 - 1) * self.session_gap >= self.min_period() as i64 {
            return bad("session_gap must be >= 2 and sessions must not overlap");
        }
        if self.lead_time < 1 || (self.lead_time as f64) >= self.min_period() {
            return bad("lead_time must be >= 1 and below the shortest commit period");
        }
        if self.session_commits > 1 && self.lead_time >= self.session_gap / 2 {
            return bad("lead_time must be below the shortest in-session gap");
        }
        if !(self.initiator_fraction > 0.0 && self.initiator_fraction <= 1.0) {
            return bad("initiator_fraction must be in (0, 1]");
        }
        Ok(())
    }

    /// Period multiplier for initiators: strictly faster than any jittered
    /// non-initiator period.
    fn initiator_speedup(&self) -> f64 {
        0.9 * (1.0 - self.period_jitter) / (1.0 + self.period_jitter)
    }

    fn min_period(&self) -> f64 {
        self.base_period * (1.0 - self.period_jitter) * self.initiator_speedup()
    }

    fn max_period(&self) -> f64 {
        self.base_period * (1.0 + self.period_jitter)
    }

    fn n_initiators(&self) -> usize {
        top_k(self.initiator_fraction, self.n_developers).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkKind {
    Random,
    Cascade,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedLink {
    pub editor: String,
    pub edited: String,
    pub timestamp: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedChain {
    /// Indices into the generated log's sorted co-edit list.
    pub events: Vec<usize>,
    pub links: Vec<PlantedLink>,
}

/// Content of `ground_truth.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub kind: NetworkKind,
    pub config: SynthConfig,
    pub initiators: Vec<String>,
    pub planted: Vec<PlantedChain>,
    /// Chains that could not be placed (past the horizon or no conflict-free slot).
    pub skipped_chains: usize,
}

#[derive(Debug, Clone)]
pub struct SynthNetwork {
    pub log: EventLog,
    pub truth: GroundTruth,
}

fn dev_name(i: usize, n: usize) -> String {
    let width = n.saturating_sub(1).to_string().len().max(2);
    format!("dev{i:0width$}")
}

fn repo_name(kind: NetworkKind, seed: u64) -> String {
    match kind {
        NetworkKind::Random => format!("random-network-{seed}"),
        NetworkKind::Cascade => format!("cascade-network-{seed}"),
    }
}

fn commit_records(names: &[String], times: &[Vec<i64>], repo: &str) -> Vec<CommitRecord> {
    let mut out = Vec::new();
    for (d, ts) in times.iter().enumerate() {
        for (k, &t) in ts.iter().enumerate() {
            out.push(CommitRecord::new(&format!("{}-{k:05}", names[d]), &names[d], t, repo));
        }
    }
    out
}

fn random_pair(r: &mut rng::Rng, n: usize) -> (usize, usize) {
    let a = r.gen_range(0..n);
    let mut b = r.gen_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    (a, b)
}

/// Negative control: no structure beyond chance.
pub fn generate_random_network(cfg: &SynthConfig) -> Result<SynthNetwork> {
    cfg.validate()?;
    let mut r = rng::seeded(cfg.seed);
    let n = cfg.n_developers;
    let names: Vec<String> = (0..n).map(|i| dev_name(i, n)).collect();
    let times: Vec<Vec<i64>> = (0..n)
        .map(|_| {
            let mut ts: Vec<i64> = (0..cfg.commits_per_dev).map(|_| r.gen_range(0..=cfg.horizon)).collect();
            ts.sort_unstable();
            ts
        })
        .collect();
    let coedits = (0..cfg.n_random_coedits)
        .map(|_| {
            let (a, b) = random_pair(&mut r, n);
            CoEditRecord::new(&names[a], &names[b], r.gen_range(0..=cfg.horizon), 1)
        })
        .collect();
    let repo = repo_name(NetworkKind::Random, cfg.seed);
    let log = EventLog::from_records(&repo, commit_records(&names, &times, &repo), coedits)?;
    Ok(SynthNetwork {
        log,
        truth: GroundTruth {
            kind: NetworkKind::Random,
            config: cfg.clone(),
            initiators: Vec::new(),
            planted: Vec::new(),
            skipped_chains: 0,
        },
    })
}

/// Co-edit slot reserved for a planted path: `editor` must not act in
/// `(after, until]` except through the planted link at `until`.
#[derive(Debug, Clone, Copy)]
struct Reservation {
    editor: usize,
    after: i64,
    until: i64,
}

impl Reservation {
    fn blocks(&self, editor: usize, t: i64) -> bool {
        self.editor == editor && t > self.after && t <= self.until
    }
}

/// Rhythmic work sessions plus planted cascades.
///
/// Each developer opens a session every `period` seconds (random phase) and
/// commits `session_commits` times in quick succession. Short in-session gaps
/// set the low end of every developer's interval distribution, so a co-edit
/// at a random moment is rarely a trigger while a planted one always is.
pub fn generate_cascade_network(cfg: &SynthConfig) -> Result<SynthNetwork> {
    cfg.validate()?;
    let mut r = rng::seeded(cfg.seed);
    let n = cfg.n_developers;
    let n_init = cfg.n_initiators();
    let names: Vec<String> = (0..n).map(|i| dev_name(i, n)).collect();

    let times: Vec<Vec<i64>> = (0..n)
        .map(|d| {
            let u = r.gen_range(-cfg.period_jitter..=cfg.period_jitter);
            let mut period = cfg.base_period * (1.0 + u);
            if d < n_init {
                period *= cfg.initiator_speedup();
            }
            let phase = r.gen_range(0.0..period);
            let mut ts = Vec::new();
            let mut k = 0.0;
            'sessions: loop {
                let mut t = (phase + k * period).round() as i64;
                for c in 0..cfg.session_commits {
                    if c > 0 {
                        t += r.gen_range(cfg.session_gap / 2..=cfg.session_gap);
                    }
                    if t > cfg.horizon {
                        break 'sessions;
                    }
                    ts.push(t);
                }
                k += 1.0;
            }
            ts
        })
        .collect();

    // Planted links as (editor, edited, time).
    let mut planted: Vec<Vec<(usize, usize, i64)>> = Vec::new();
    let mut reserved: Vec<Reservation> = Vec::new();
    let mut skipped = 0;
    let warmup = 3.0 * cfg.max_period();
    let latest_start = cfg.horizon as f64 - (cfg.chain_length as f64 + 1.0) * cfg.max_period();

    for _ in 0..cfg.n_planted_chains {
        let mut placed = None;
        for _ in 0..MAX_PLANT_ATTEMPTS {
            let start = if latest_start > warmup {
                r.gen_range(warmup..latest_start) as i64
            } else {
                warmup as i64
            };
            let Some(links) = draw_chain(cfg, &times, n_init, start, &mut r) else {
                continue;
            };
            let new_res = chain_reservations(&links);
            let clashes_existing = links
                .iter()
                .any(|&(e, _, t)| reserved.iter().any(|res| res.blocks(e, t)));
            let clashes_new = planted
                .iter()
                .flatten()
                .any(|&(e, _, t)| new_res.iter().any(|res| res.blocks(e, t)));
            if !clashes_existing && !clashes_new {
                placed = Some((links, new_res));
                break;
            }
        }
        match placed {
            Some((links, res)) => {
                planted.push(links);
                reserved.extend(res);
            }
            None => skipped += 1,
        }
    }

    let mut coedits: Vec<CoEditRecord> = planted
        .iter()
        .flatten()
        .map(|&(a, b, t)| CoEditRecord::new(&names[a], &names[b], t, 1))
        .collect();
    let mut added = 0;
    while added < cfg.n_random_coedits {
        let (a, b) = random_pair(&mut r, n);
        let t = r.gen_range(0..=cfg.horizon);
        if reserved.iter().any(|res| res.blocks(a, t)) {
            continue;
        }
        coedits.push(CoEditRecord::new(&names[a], &names[b], t, 1));
        added += 1;
    }

    let repo = repo_name(NetworkKind::Cascade, cfg.seed);
    let log = EventLog::from_records(&repo, commit_records(&names, &times, &repo), coedits)?;

    let mut used = vec![false; log.coedits().len()];
    let planted = planted
        .iter()
        .map(|links| {
            let mut events = Vec::new();
            for &(a, b, t) in links {
                let (ea, eb) = (log.dev_id(&names[a]), log.dev_id(&names[b]));
                let i = log
                    .coedits()
                    .iter()
                    .enumerate()
                    .position(|(i, e)| !used[i] && Some(e.editor) == ea && Some(e.edited) == eb && e.timestamp == t)
                    .expect("planted event present");
                used[i] = true;
                events.push(i);
            }
            PlantedChain {
                events,
                links: links
                    .iter()
                    .map(|&(a, b, t)| PlantedLink {
                        editor: names[a].clone(),
                        edited: names[b].clone(),
                        timestamp: t,
                    })
                    .collect(),
            }
        })
        .collect();

    Ok(SynthNetwork {
        log,
        truth: GroundTruth {
            kind: NetworkKind::Cascade,
            config: cfg.clone(),
            initiators: names[..n_init].to_vec(),
            planted,
            skipped_chains: skipped,
        },
    })
}

/// Draws one chain starting after `start`, or `None` if it runs past the horizon.
fn draw_chain(
    cfg: &SynthConfig,
    times: &[Vec<i64>],
    n_init: usize,
    start: i64,
    r: &mut rng::Rng,
) -> Option<Vec<(usize, usize, i64)>> {
    let n = cfg.n_developers;
    let mut editor = r.gen_range(0..n_init);
    let mut prev = start;
    let mut links = Vec::with_capacity(cfg.chain_length);
    for _ in 0..cfg.chain_length {
        let others: Vec<usize> = (0..n).filter(|&d| d != editor).collect();
        let edited = *others.choose(r)?;
        let ts = &times[edited];
        // First commit that leaves room for the lead time after the previous link.
        let k = ts.partition_point(|&t| t <= prev + cfg.lead_time);
        let commit = *ts.get(k)?;
        let at = commit - cfg.lead_time;
        if ts.partition_point(|&t| t < at) < 2 {
            return None;
        }
        links.push((editor, edited, at));
        prev = at;
        editor = edited;
    }
    Some(links)
}

/// Continuation slots only; the seed link needs no reservation.
fn chain_reservations(links: &[(usize, usize, i64)]) -> Vec<Reservation> {
    links
        .windows(2)
        .map(|w| Reservation {
            editor: w[1].0,
            after: w[0].2,
            until: w[1].2,
        })
        .collect()
}

/// Fraction of planted chains whose events form the prefix of a detected chain.
/// Returns 1.0 when nothing was planted.
pub fn planted_recall(truth: &GroundTruth, detected: &[CascadeChain]) -> f64 {
    if truth.planted.is_empty() {
        return 1.0;
    }
    let found = truth
        .planted
        .iter()
        .filter(|p| {
            detected.iter().any(|c| {
                let idx = c.event_indices();
                idx.len() >= p.events.len() && idx[..p.events.len()] == p.events[..]
            })
        })
        .count();
    found as f64 / truth.planted.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::{detect_cascades, is_trigger, TriggerParams};
    use crate::model::{build_commit_history, top_fraction_developers};

    #[test]
    fn random_network_counts() {
        let cfg = SynthConfig {
            n_developers: 20,
            commits_per_dev: 50,
            n_random_coedits: 200,
            ..Default::default()
        };
        let net = generate_random_network(&cfg).unwrap();
        assert_eq!(net.log.commits().len(), 1000);
        assert_eq!(net.log.coedits().len(), 200);
        assert!(net.log.coedits().iter().all(|e| e.editor != e.edited));
        assert!(net.truth.planted.is_empty());
    }

    #[test]
    fn generation_is_reproducible_and_in_range() {
        let cfg = SynthConfig::default();
        for gen in [generate_random_network, generate_cascade_network] {
            let a = gen(&cfg).unwrap();
            let b = gen(&cfg).unwrap();
            assert_eq!(a.log, b.log);
            assert_eq!(a.truth, b.truth);
            let (lo, hi) = a.log.span().unwrap();
            assert!(lo >= 0 && hi <= cfg.horizon);
        }
    }

    #[test]
    fn rejects_slow_lead_time() {
        let cfg = SynthConfig {
            lead_time: 100_000,
            ..Default::default()
        };
        assert!(generate_cascade_network(&cfg).is_err());
        let cfg = SynthConfig {
            chain_length: 1,
            ..Default::default()
        };
        assert!(generate_cascade_network(&cfg).is_err());
    }

    #[test]
    fn planted_links_are_triggers_and_chains_are_recovered() {
        let net = generate_cascade_network(&SynthConfig::default()).unwrap();
        let log = &net.log;
        let h = build_commit_history(log);
        for p in &net.truth.planted {
            for &i in &p.events {
                assert!(is_trigger(&h, &log.coedits()[i], 25.0).is_trigger());
            }
        }
        let top = top_fraction_developers(&h, 0.2).unwrap();
        let top_names: Vec<&str> = top.members.iter().map(|&d| h.name(d)).collect();
        let mut expected: Vec<&str> = net.truth.initiators.iter().map(String::as_str).collect();
        let mut got = top_names.clone();
        expected.sort_unstable();
        got.sort_unstable();
        assert_eq!(got, expected);
        let chains = detect_cascades(&h, log.coedits(), &top.members, TriggerParams::default());
        assert_eq!(planted_recall(&net.truth, &chains), 1.0);
    }
}
