use std::collections::{BTreeMap, BTreeSet};

use super::graph::Graph;
use super::{DeveloperWindowRecord, Feature, Projection, TimeWindow};
use crate::model::{build_commit_history, DevId, EventLog};

/// Longest gap between consecutive commits, counting the window boundaries
/// as virtual endpoints. A developer without commits gets the window length.
pub(crate) fn max_inactivity(sorted_times: &[i64], window: &TimeWindow) -> f64 {
    let mut prev = window.start;
    let mut best = 0;
    for &t in sorted_times {
        best = best.max(t - prev);
        prev = t;
    }
    best.max(window.end - prev) as f64
}

/// Unlabelled records for every developer with a commit in `window`.
///
/// The window graph holds this window's committers, the endpoints of its
/// non-self co-edits and the repository's first contributor (author of the
/// earliest commit). Neighbor features use the undirected view in both
/// projections; degree- and path-type features follow `projection`.
pub fn extract_features(log: &EventLog, window: &TimeWindow, projection: Projection) -> Vec<DeveloperWindowRecord> {
    let history = build_commit_history(log);
    let founder = log.commits().first().map(|c| c.author);

    let mut in_window: BTreeMap<DevId, (Vec<i64>, BTreeSet<&str>)> = BTreeMap::new();
    for c in log.commits().iter().filter(|c| window.contains(c.timestamp)) {
        let e = in_window.entry(c.author).or_default();
        e.0.push(c.timestamp);
        e.1.insert(c.commit_id.as_str());
    }
    let coedits: Vec<_> = log
        .coedits()
        .iter()
        .filter(|e| window.contains(e.timestamp) && !e.is_self_edit())
        .collect();

    let mut nodes: BTreeSet<DevId> = in_window.keys().copied().collect();
    for e in &coedits {
        nodes.insert(e.editor);
        nodes.insert(e.edited);
    }
    nodes.extend(founder);
    let nodes: Vec<DevId> = nodes.into_iter().collect();
    let local = |d: DevId| nodes.binary_search(&d).expect("node registered");
    let n = nodes.len();

    let mut directed = Graph::new(n);
    let mut undirected = Graph::new(n);
    let mut weight: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for e in &coedits {
        let (u, v) = (local(e.editor), local(e.edited));
        directed.add_arc(u, v);
        undirected.add_edge(u, v);
        *weight.entry((u, v)).or_default() += u64::from(e.weight);
    }

    let inactivity: Vec<f64> = nodes
        .iter()
        .map(|d| {
            let times = in_window.get(d).map_or(&[][..], |(t, _)| t.as_slice());
            max_inactivity(times, window)
        })
        .collect();

    let path_graph = match projection {
        Projection::Directed => &directed,
        Projection::Undirected => &undirected,
    };
    let incoming = directed.reversed();
    let closeness = path_graph.closeness();
    let betweenness = path_graph.betweenness();
    let founder_local = founder.map(local);
    // Distances *to* the founder: BFS from the founder on the reversed graph.
    let to_founder = founder_local.map(|f| path_graph.reversed().bfs(f));

    let mut out = Vec::with_capacity(in_window.len());
    for (&dev, (times, ids)) in &in_window {
        let u = local(dev);
        let mut values = [0.0; 13];
        let mut set = |f: Feature, v: f64| values[f.index()] = v;

        set(Feature::MaxInactivity, max_inactivity(times, window));
        let nb: Vec<f64> = undirected.successors(u).iter().map(|&v| inactivity[v]).collect();
        if !nb.is_empty() {
            set(Feature::NeighborMaxInactivity, nb.iter().copied().fold(f64::MIN, f64::max));
            set(Feature::NeighborMinInactivity, nb.iter().copied().fold(f64::MAX, f64::min));
            set(Feature::NeighborMeanInactivity, nb.iter().sum::<f64>() / nb.len() as f64);
        }
        let first = history.first_commit(dev).unwrap_or(window.end);
        set(Feature::DeveloperAge, (window.end - first) as f64);
        set(Feature::UniqueCommits, ids.len() as f64);
        set(Feature::OutDegree, directed.successors(u).len() as f64);
        set(Feature::InDegree, incoming.successors(u).len() as f64);
        set(Feature::Degree, undirected.successors(u).len() as f64);

        let distance = to_founder
            .as_ref()
            .and_then(|d| d[u])
            .map_or(n as f64, |d| d as f64);
        set(Feature::DistanceToFirstContributor, distance);
        let strength = founder_local.map_or(0, |f| {
            if f == u {
                0
            } else {
                weight.get(&(u, f)).copied().unwrap_or(0) + weight.get(&(f, u)).copied().unwrap_or(0)
            }
        });
        set(Feature::StrengthToFirstContributor, strength as f64);
        set(Feature::Closeness, closeness[u]);
        set(Feature::Betweenness, betweenness[u]);

        out.push(DeveloperWindowRecord {
            repo: log.repo_id().to_string(),
            developer: log.name(dev).to_string(),
            window: *window,
            projection,
            values,
            churned: None,
        });
    }
    out
}
