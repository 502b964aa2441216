//! Developer churn prediction from windowed co-editing activity.
//!
//! Each repository is cut into non-overlapping windows (12 months by default)
//! starting at its first commit. Every developer who commits inside a window
//! yields one [`DeveloperWindowRecord`]: temporal activity features, features
//! of their collaborators' inactivity, and positional features of the window's
//! co-editing graph. A record is labelled churned when the developer makes no
//! commit within the horizon following the window end. Windows whose horizon
//! runs past the observed history are dropped.
//!
//! Models are balanced logistic regressions trained on SMOTE-oversampled,
//! standardized features and evaluated leave-one-repository-out with
//! balanced accuracy.

mod eval;
mod features;
pub mod graph;
mod logistic;
mod smote;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{build_commit_history, EventLog};

pub use eval::{
    balanced_accuracy, evaluate_loo, feature_importance, importance_of, train_full_model, ChurnModel, Confusion, EvalOptions,
    EvaluationResult, FeatureImportance, RepoRecords, RepoScore,
};
pub use features::extract_features;
pub use logistic::{train_logistic, LogisticModel, LogisticOptions, Standardizer};
pub use smote::{smote_oversample, SmoteOutput};

/// 365 days.
pub const YEAR_SECONDS: i64 = 365 * 24 * 3600;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    MaxInactivity,
    NeighborMaxInactivity,
    NeighborMeanInactivity,
    NeighborMinInactivity,
    DeveloperAge,
    UniqueCommits,
    OutDegree,
    InDegree,
    Degree,
    DistanceToFirstContributor,
    StrengthToFirstContributor,
    Closeness,
    Betweenness,
}

impl Feature {
    pub const ALL: [Feature; 13] = [
        Feature::MaxInactivity,
        Feature::NeighborMaxInactivity,
        Feature::NeighborMeanInactivity,
        Feature::NeighborMinInactivity,
        Feature::DeveloperAge,
        Feature::UniqueCommits,
        Feature::OutDegree,
        Feature::InDegree,
        Feature::Degree,
        Feature::DistanceToFirstContributor,
        Feature::StrengthToFirstContributor,
        Feature::Closeness,
        Feature::Betweenness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::MaxInactivity => "max_inactivity",
            Feature::NeighborMaxInactivity => "neighbor_max_inactivity",
            Feature::NeighborMeanInactivity => "neighbor_mean_inactivity",
            Feature::NeighborMinInactivity => "neighbor_min_inactivity",
            Feature::DeveloperAge => "developer_age",
            Feature::UniqueCommits => "unique_commits",
            Feature::OutDegree => "out_degree",
            Feature::InDegree => "in_degree",
            Feature::Degree => "degree",
            Feature::DistanceToFirstContributor => "distance_to_first_contributor",
            Feature::StrengthToFirstContributor => "strength_to_first_contributor",
            Feature::Closeness => "closeness",
            Feature::Betweenness => "betweenness",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Directed or undirected view of the co-editing graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Projection {
    Directed,
    Undirected,
}

impl Projection {
    /// Model inputs for this projection, in a fixed order.
    pub fn features(self) -> &'static [Feature] {
        use Feature::*;
        match self {
            Projection::Directed => &[
                MaxInactivity,
                NeighborMaxInactivity,
                NeighborMeanInactivity,
                NeighborMinInactivity,
                DeveloperAge,
                UniqueCommits,
                OutDegree,
                InDegree,
                DistanceToFirstContributor,
                StrengthToFirstContributor,
                Closeness,
                Betweenness,
            ],
            Projection::Undirected => &[
                MaxInactivity,
                NeighborMaxInactivity,
                NeighborMeanInactivity,
                NeighborMinInactivity,
                DeveloperAge,
                UniqueCommits,
                Degree,
                DistanceToFirstContributor,
                StrengthToFirstContributor,
                Closeness,
                Betweenness,
            ],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Projection::Directed => "directed",
            Projection::Undirected => "undirected",
        }
    }
}

/// Half-open interval `[start, end)` of one repository's history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub index: usize,
    pub start: i64,
    pub end: i64,
}

impl TimeWindow {
    pub fn contains(&self, t: i64) -> bool {
        t >= self.start && t < self.end
    }

    pub fn len(&self) -> i64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeveloperWindowRecord {
    pub repo: String,
    pub developer: String,
    pub window: TimeWindow,
    pub projection: Projection,
    /// Indexed by [`Feature::index`].
    pub values: [f64; 13],
    /// `None` until labelled.
    pub churned: Option<bool>,
}

impl DeveloperWindowRecord {
    pub fn get(&self, f: Feature) -> f64 {
        self.values[f.index()]
    }

    pub fn set(&mut self, f: Feature, v: f64) {
        self.values[f.index()] = v;
    }

    /// Model input vector in [`Projection::features`] order.
    pub fn vector(&self) -> Vec<f64> {
        self.projection.features().iter().map(|&f| self.get(f)).collect()
    }
}

/// Consecutive full windows from the first commit; a trailing partial window
/// is dropped.
pub fn make_windows(log: &EventLog, window_seconds: i64) -> Result<Vec<TimeWindow>> {
    if window_seconds <= 0 {
        return Err(crate::Error::Argument("window length must be positive".into()));
    }
    let (Some(first), Some(last)) = (log.commits().first(), log.commits().last()) else {
        return Ok(Vec::new());
    };
    let n = ((last.timestamp - first.timestamp) / window_seconds) as usize;
    if n == 0 {
        tracing::warn!(repo = log.repo_id(), "history shorter than one window");
    }
    Ok((0..n)
        .map(|k| {
            let start = first.timestamp + k as i64 * window_seconds;
            TimeWindow {
                index: k,
                start,
                end: start + window_seconds,
            }
        })
        .collect())
}

/// Whether `window` can be labelled: its horizon must end by the last commit.
pub fn is_labelable(log: &EventLog, window: &TimeWindow, horizon_seconds: i64) -> bool {
    log.commits()
        .last()
        .is_some_and(|c| window.end + horizon_seconds <= c.timestamp)
}

/// Labels records of labelable windows and drops the rest.
///
/// A developer churned when they have no commit in `(end, end + horizon]`.
pub fn label_churn(
    log: &EventLog,
    records: Vec<DeveloperWindowRecord>,
    horizon_seconds: i64,
) -> Vec<DeveloperWindowRecord> {
    let history = build_commit_history(log);
    records
        .into_iter()
        .filter(|r| is_labelable(log, &r.window, horizon_seconds))
        .map(|mut r| {
            let end = r.window.end;
            let active = log.dev_id(&r.developer).is_some_and(|d| {
                let ts = history.times(d);
                let i = ts.partition_point(|&t| t <= end);
                ts.get(i).is_some_and(|&t| t <= end + horizon_seconds)
            });
            r.churned = Some(!active);
            r
        })
        .collect()
}

/// Windows, features and labels for one repository.
pub fn build_repo_records(
    log: &EventLog,
    projection: Projection,
    window_seconds: i64,
    horizon_seconds: i64,
) -> Result<Vec<DeveloperWindowRecord>> {
    let mut out = Vec::new();
    for w in make_windows(log, window_seconds)? {
        if !is_labelable(log, &w, horizon_seconds) {
            continue;
        }
        let records = extract_features(log, &w, projection);
        out.extend(label_churn(log, records, horizon_seconds));
    }
    Ok(out)
}

/// `repo,developer,window,window_start,window_end,projection,<features...>,churned`
pub fn write_records_csv<W: Write>(records: &[DeveloperWindowRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["repo", "developer", "window", "window_start", "window_end", "projection"];
    header.extend(Feature::ALL.iter().map(|f| f.name()));
    header.push("churned");
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.repo.clone(),
            r.developer.clone(),
            r.window.index.to_string(),
            r.window.start.to_string(),
            r.window.end.to_string(),
            r.projection.name().to_string(),
        ];
        row.extend(r.values.iter().map(|v| v.to_string()));
        row.push(match r.churned {
            Some(true) => "1".into(),
            Some(false) => "0".into(),
            None => String::new(),
        });
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
