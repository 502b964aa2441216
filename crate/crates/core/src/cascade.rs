//! Trigger events and activity cascades.
//!
//! A co-edit `A -> B` at time `t` is a *trigger* when `B`'s next commit after
//! `t` arrives unusually fast compared with `B`'s own inter-commit intervals
//! before `t`: the percentile rank of the response time among those intervals
//! is at most the threshold (25 by default).
//!
//! A *cascade* starts at a trigger whose editor is an initiator (normally a
//! top-20% committer) and is extended greedily: the next link is the earliest
//! co-edit made by the current edited developer strictly after the current
//! link, provided that co-edit is itself a trigger. Chains of two or more
//! links are reported, one per qualifying seed event.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::{CoEditEvent, CommitHistory, DevId};

pub const DEFAULT_THRESHOLD: f64 = 25.0;

/// How ties between the response time and historical intervals are ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankConvention {
    /// `100·(less + ½·equal) / n`.
    #[default]
    MidRank,
    /// `100·less / n`.
    StrictLess,
}

impl RankConvention {
    pub fn rank(self, less: usize, equal: usize, n: usize) -> f64 {
        match self {
            RankConvention::MidRank => 100.0 * (less as f64 + 0.5 * equal as f64) / n as f64,
            RankConvention::StrictLess => 100.0 * less as f64 / n as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriggerParams {
    /// Percentile threshold in (0, 100).
    pub threshold: f64,
    pub rank: RankConvention,
}

impl Default for TriggerParams {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            rank: RankConvention::MidRank,
        }
    }
}

impl TriggerParams {
    pub fn with_threshold(threshold: f64) -> Self {
        Self {
            threshold,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TriggerOutcome {
    /// Editor and edited are the same developer; never evaluated.
    SelfEdit,
    /// Fewer than two commits before the edit or none after it.
    InsufficientHistory,
    Evaluated {
        /// Seconds from the edit to the edited developer's next commit.
        response: i64,
        rank: f64,
        trigger: bool,
    },
}

impl TriggerOutcome {
    pub fn is_trigger(&self) -> bool {
        matches!(self, TriggerOutcome::Evaluated { trigger: true, .. })
    }
}

/// Classifies one co-edit against the edited developer's commit times.
///
/// Commits exactly at `edit_time` are neither before nor after the edit.
pub fn evaluate_trigger(commit_times: &[i64], edit_time: i64, params: TriggerParams) -> TriggerOutcome {
    let before = commit_times.partition_point(|&t| t < edit_time);
    let after = commit_times.partition_point(|&t| t <= edit_time);
    if before < 2 || after >= commit_times.len() {
        return TriggerOutcome::InsufficientHistory;
    }
    let response = commit_times[after] - edit_time;
    let intervals = &commit_times[..before];
    let (mut less, mut equal) = (0usize, 0usize);
    for w in intervals.windows(2) {
        let gap = w[1] - w[0];
        if gap < response {
            less += 1;
        } else if gap == response {
            equal += 1;
        }
    }
    let rank = params.rank.rank(less, equal, before - 1);
    TriggerOutcome::Evaluated {
        response,
        rank,
        trigger: rank <= params.threshold,
    }
}

/// Trigger test for a single co-edit event with the given threshold
/// (mid-rank ties).
pub fn is_trigger(history: &CommitHistory, event: &CoEditEvent, threshold: f64) -> TriggerOutcome {
    is_trigger_with(history, event, TriggerParams::with_threshold(threshold))
}

pub fn is_trigger_with(history: &CommitHistory, event: &CoEditEvent, params: TriggerParams) -> TriggerOutcome {
    if event.is_self_edit() {
        return TriggerOutcome::SelfEdit;
    }
    evaluate_trigger(history.times(event.edited), event.timestamp, params)
}

/// Fenwick tree over compressed interval values.
struct CountTree {
    tree: Vec<u32>,
}

impl CountTree {
    fn new(n: usize) -> Self {
        Self { tree: vec![0; n + 1] }
    }

    fn add(&mut self, i: usize) {
        let mut i = i + 1;
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Number of inserted items with index < `i`.
    fn prefix(&self, mut i: usize) -> usize {
        let mut s = 0usize;
        while i > 0 {
            s += self.tree[i] as usize;
            i &= i - 1;
        }
        s
    }
}

/// Classifies every event at once.
///
/// Equivalent to calling [`is_trigger_with`] per event, but ranks are counted
/// with one offline sweep per edited developer, so the cost is
/// `O((commits + events) · log)` rather than `O(events · commits)`.
pub fn classify_events(
    history: &CommitHistory,
    events: &[CoEditEvent],
    params: TriggerParams,
) -> Vec<TriggerOutcome> {
    let mut out = vec![TriggerOutcome::InsufficientHistory; events.len()];
    // (edited, prefix interval count, response, event index)
    let mut queries: Vec<(DevId, usize, i64, usize)> = Vec::new();
    for (j, e) in events.iter().enumerate() {
        if e.is_self_edit() {
            out[j] = TriggerOutcome::SelfEdit;
            continue;
        }
        let times = history.times(e.edited);
        let before = times.partition_point(|&t| t < e.timestamp);
        let after = times.partition_point(|&t| t <= e.timestamp);
        if before < 2 || after >= times.len() {
            continue;
        }
        queries.push((e.edited, before - 1, times[after] - e.timestamp, j));
    }
    queries.sort_unstable_by_key(|q| (q.0, q.1, q.3));

    let mut start = 0;
    while start < queries.len() {
        let dev = queries[start].0;
        let end = start + queries[start..].partition_point(|q| q.0 == dev);
        let times = history.times(dev);
        let intervals: Vec<i64> = times.windows(2).map(|w| w[1] - w[0]).collect();
        let mut values = intervals.clone();
        values.sort_unstable();
        values.dedup();
        let slot = |v: i64| values.partition_point(|&u| u < v);
        let mut tree = CountTree::new(values.len());
        let mut inserted = 0;
        for &(_, m, response, j) in &queries[start..end] {
            while inserted < m {
                tree.add(slot(intervals[inserted]));
                inserted += 1;
            }
            let lo = slot(response);
            let less = tree.prefix(lo);
            let equal = if values.get(lo) == Some(&response) {
                tree.prefix(lo + 1) - less
            } else {
                0
            };
            let rank = params.rank.rank(less, equal, m);
            out[j] = TriggerOutcome::Evaluated {
                response,
                rank,
                trigger: rank <= params.threshold,
            };
        }
        start = end;
    }
    out
}

/// Counts of trigger outcomes, kept for diagnostics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriggerTally {
    pub events: usize,
    pub self_edits: usize,
    pub insufficient_history: usize,
    pub evaluated: usize,
    pub triggers: usize,
}

pub fn tally(outcomes: &[TriggerOutcome]) -> TriggerTally {
    let mut t = TriggerTally {
        events: outcomes.len(),
        ..Default::default()
    };
    for o in outcomes {
        match o {
            TriggerOutcome::SelfEdit => t.self_edits += 1,
            TriggerOutcome::InsufficientHistory => t.insufficient_history += 1,
            TriggerOutcome::Evaluated { trigger, .. } => {
                t.evaluated += 1;
                if *trigger {
                    t.triggers += 1;
                }
            }
        }
    }
    t
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainLink {
    /// Index into the event slice passed to [`detect_cascades`].
    pub event: usize,
    pub editor: DevId,
    pub edited: DevId,
    pub timestamp: i64,
    pub response_interval: i64,
    pub rank: f64,
}

/// Linked sequence of trigger events: each link's editor is the previous
/// link's edited developer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeChain {
    pub links: Vec<ChainLink>,
}

impl CascadeChain {
    pub fn depth(&self) -> usize {
        self.links.len()
    }

    /// Number of distinct developers appearing as editor or edited.
    pub fn devs(&self) -> usize {
        self.links
            .iter()
            .flat_map(|l| [l.editor, l.edited])
            .collect::<BTreeSet<_>>()
            .len()
    }

    pub fn event_indices(&self) -> Vec<usize> {
        self.links.iter().map(|l| l.event).collect()
    }

    /// Checks depth ≥ 2, strictly increasing times and editor/edited linkage.
    pub fn check(&self) -> Result<(), String> {
        if self.links.len() < 2 {
            return Err(format!("chain depth {} < 2", self.links.len()));
        }
        for w in self.links.windows(2) {
            if w[1].timestamp <= w[0].timestamp {
                return Err(format!("non-increasing times {} -> {}", w[0].timestamp, w[1].timestamp));
            }
            if w[1].editor != w[0].edited {
                return Err(format!("broken link at event {}", w[1].event));
            }
        }
        Ok(())
    }
}

/// Greedy chain tracing from every initiator-made trigger.
///
/// `events` must be sorted by [`CoEditEvent::order_key`] (an [`crate::EventLog`]
/// keeps them that way). Self-edits are ignored both as seeds and as
/// continuations. Chains come back ordered by seed position.
pub fn detect_cascades(
    history: &CommitHistory,
    events: &[CoEditEvent],
    initiators: &[DevId],
    params: TriggerParams,
) -> Vec<CascadeChain> {
    let outcomes = classify_events(history, events, params);
    trace_chains(history.n_developers(), events, &outcomes, initiators)
}

/// Chain tracing over precomputed trigger outcomes.
pub fn trace_chains(
    n_developers: usize,
    events: &[CoEditEvent],
    outcomes: &[TriggerOutcome],
    initiators: &[DevId],
) -> Vec<CascadeChain> {
    debug_assert!(events.windows(2).all(|w| w[0].order_key() <= w[1].order_key()));
    let mut is_initiator = vec![false; n_developers];
    for d in initiators {
        is_initiator[d.index()] = true;
    }
    // Positions of non-self events per editor, in time order.
    let mut by_editor: Vec<Vec<usize>> = vec![Vec::new(); n_developers];
    for (i, e) in events.iter().enumerate() {
        if !e.is_self_edit() {
            by_editor[e.editor.index()].push(i);
        }
    }
    let link = |i: usize| -> ChainLink {
        let e = &events[i];
        let (response_interval, rank) = match outcomes[i] {
            TriggerOutcome::Evaluated { response, rank, .. } => (response, rank),
            _ => unreachable!("links are triggers"),
        };
        ChainLink {
            event: i,
            editor: e.editor,
            edited: e.edited,
            timestamp: e.timestamp,
            response_interval,
            rank,
        }
    };

    let mut chains = Vec::new();
    for (seed, e) in events.iter().enumerate() {
        if e.is_self_edit() || !is_initiator[e.editor.index()] || !outcomes[seed].is_trigger() {
            continue;
        }
        let mut links = vec![link(seed)];
        let mut cur = seed;
        loop {
            let candidates = &by_editor[events[cur].edited.index()];
            let t = events[cur].timestamp;
            let k = candidates.partition_point(|&q| events[q].timestamp <= t);
            match candidates.get(k) {
                Some(&next) if outcomes[next].is_trigger() => {
                    links.push(link(next));
                    cur = next;
                }
                _ => break,
            }
        }
        if links.len() > 1 {
            chains.push(CascadeChain { links });
        }
    }
    chains
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeStats {
    pub n_cascades: usize,
    pub avg_depth: f64,
    pub avg_devs: f64,
}

pub fn cascade_stats(chains: &[CascadeChain]) -> CascadeStats {
    if chains.is_empty() {
        return CascadeStats {
            n_cascades: 0,
            avg_depth: 0.0,
            avg_devs: 0.0,
        };
    }
    let n = chains.len() as f64;
    CascadeStats {
        n_cascades: chains.len(),
        avg_depth: chains.iter().map(|c| c.depth() as f64).sum::<f64>() / n,
        avg_devs: chains.iter().map(|c| c.devs() as f64).sum::<f64>() / n,
    }
}
