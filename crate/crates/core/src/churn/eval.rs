use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::logistic::{train_logistic, LogisticModel, LogisticOptions};
use super::smote::smote_oversample;
use super::{DeveloperWindowRecord, Feature, Projection};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fn_: usize,
    pub tn: usize,
    pub fp: usize,
}

impl Confusion {
    pub fn from_predictions(truth: &[bool], predicted: &[bool]) -> Self {
        let mut c = Confusion::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            match (t, p) {
                (true, true) => c.tp += 1,
                (true, false) => c.fn_ += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fp += 1,
            }
        }
        c
    }

    /// Both classes present.
    pub fn is_scorable(&self) -> bool {
        self.tp + self.fn_ > 0 && self.tn + self.fp > 0
    }
}

/// `(TPR + TNR) / 2`; `None` when either class is absent.
pub fn balanced_accuracy(c: &Confusion) -> Option<f64> {
    c.is_scorable().then(|| {
        let tpr = c.tp as f64 / (c.tp + c.fn_) as f64;
        let tnr = c.tn as f64 / (c.tn + c.fp) as f64;
        (tpr + tnr) / 2.0
    })
}

/// Labelled records of one repository.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepoRecords {
    pub repo: String,
    pub records: Vec<DeveloperWindowRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub n_seeds: usize,
    pub k_neighbors: usize,
    pub l2: f64,
    /// Run `s` oversamples with `base_seed + s`.
    pub base_seed: u64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            n_seeds: 5,
            k_neighbors: 5,
            l2: 1.0,
            base_seed: 42,
        }
    }
}

impl EvalOptions {
    fn logistic(&self) -> LogisticOptions {
        LogisticOptions {
            l2: self.l2,
            ..LogisticOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepoScore {
    pub repo: String,
    /// Population mean and std of `per_seed`.
    pub mean: f64,
    pub std: f64,
    /// Mean balanced accuracy over the valid windows, one per seed.
    pub per_seed: Vec<f64>,
    pub valid_windows: Vec<usize>,
    /// Single-class windows.
    pub excluded_windows: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResult {
    pub projection: Projection,
    /// Input order; repos without a scorable window are omitted.
    pub per_repo: Vec<RepoScore>,
}

impl EvaluationResult {
    pub fn mean_balanced_accuracy(&self) -> Option<f64> {
        (!self.per_repo.is_empty())
            .then(|| self.per_repo.iter().map(|r| r.mean).sum::<f64>() / self.per_repo.len() as f64)
    }
}

fn labelled(records: &[DeveloperWindowRecord], projection: Projection) -> impl Iterator<Item = (Vec<f64>, bool)> + '_ {
    records
        .iter()
        .filter(move |r| r.projection == projection)
        .filter_map(|r| r.churned.map(|c| (r.vector(), c)))
}

fn fit(x: Vec<Vec<f64>>, y: Vec<bool>, opts: &EvalOptions, seed: u64) -> Result<LogisticModel> {
    let balanced = smote_oversample(&x, &y, opts.k_neighbors, seed);
    train_logistic(&balanced.x, &balanced.y, &opts.logistic())
}

/// Leave-one-repository-out evaluation.
///
/// For each held-out repo the model is trained on the pooled labelled records
/// of every other repo, oversampled with SMOTE once per seed, then each
/// held-out window is scored on its own.
pub fn evaluate_loo(repos: &[RepoRecords], projection: Projection, opts: &EvalOptions) -> Result<EvaluationResult> {
    if opts.n_seeds == 0 {
        return Err(Error::Argument("at least one seed is required".into()));
    }
    let scores: Vec<Option<RepoScore>> = repos
        .par_iter()
        .enumerate()
        .map(|(held, target)| -> Result<Option<RepoScore>> {
            let mut x = Vec::new();
            let mut y = Vec::new();
            for (i, other) in repos.iter().enumerate() {
                if i == held {
                    continue;
                }
                if other.records.iter().any(|r| r.repo == target.repo) {
                    return Err(Error::Invariant(format!("row of held-out repo {} in training data", target.repo)));
                }
                for (v, c) in labelled(&other.records, projection) {
                    x.push(v);
                    y.push(c);
                }
            }

            let mut windows: Vec<usize> = target
                .records
                .iter()
                .filter(|r| r.projection == projection && r.churned.is_some())
                .map(|r| r.window.index)
                .collect();
            windows.sort_unstable();
            windows.dedup();
            let (mut valid, mut excluded) = (Vec::new(), Vec::new());
            for &w in &windows {
                let labels: Vec<bool> = target
                    .records
                    .iter()
                    .filter(|r| r.projection == projection && r.window.index == w)
                    .filter_map(|r| r.churned)
                    .collect();
                if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
                    excluded.push(w);
                } else {
                    valid.push(w);
                }
            }
            if valid.is_empty() {
                tracing::warn!(repo = target.repo, "no scorable window; repo skipped");
                return Ok(None);
            }

            let mut per_seed = Vec::with_capacity(opts.n_seeds);
            for s in 0..opts.n_seeds {
                let model = fit(x.clone(), y.clone(), opts, opts.base_seed.wrapping_add(s as u64))?;
                let mut total = 0.0;
                for &w in &valid {
                    let (truth, predicted): (Vec<bool>, Vec<bool>) = target
                        .records
                        .iter()
                        .filter(|r| r.projection == projection && r.window.index == w)
                        .filter_map(|r| r.churned.map(|c| (c, model.predict(&r.vector()))))
                        .unzip();
                    total += balanced_accuracy(&Confusion::from_predictions(&truth, &predicted))
                        .ok_or_else(|| Error::Invariant("valid window became unscorable".into()))?;
                }
                per_seed.push(total / valid.len() as f64);
            }
            let n = per_seed.len() as f64;
            let mean = per_seed.iter().sum::<f64>() / n;
            let std = (per_seed.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
            Ok(Some(RepoScore {
                repo: target.repo.clone(),
                mean,
                std,
                per_seed,
                valid_windows: valid,
                excluded_windows: excluded,
            }))
        })
        .collect::<Result<_>>()?;
    Ok(EvaluationResult {
        projection,
        per_repo: scores.into_iter().flatten().collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChurnModel {
    pub projection: Projection,
    pub features: Vec<Feature>,
    pub seed: u64,
    pub model: LogisticModel,
}

impl ChurnModel {
    pub fn coefficient(&self, f: Feature) -> Option<f64> {
        self.features.iter().position(|&g| g == f).map(|i| self.model.coefficients[i])
    }
}

/// One model on every labelled record of every repo, oversampled with `base_seed`.
pub fn train_full_model(repos: &[RepoRecords], projection: Projection, opts: &EvalOptions) -> Result<ChurnModel> {
    let (x, y): (Vec<Vec<f64>>, Vec<bool>) = repos.iter().flat_map(|r| labelled(&r.records, projection)).unzip();
    Ok(ChurnModel {
        projection,
        features: projection.features().to_vec(),
        seed: opts.base_seed,
        model: fit(x, y, opts, opts.base_seed)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub feature: Feature,
    pub importance: f64,
    pub directed: Option<f64>,
    pub undirected: Option<f64>,
}

/// Mean absolute standardized coefficient across the two projections, sorted
/// descending. A feature present in one projection only uses that value.
pub fn feature_importance(directed: &ChurnModel, undirected: &ChurnModel) -> Vec<FeatureImportance> {
    importance_of(&[directed, undirected])
}

/// [`feature_importance`] over any subset of projections; the first model of
/// each projection is used.
pub fn importance_of(models: &[&ChurnModel]) -> Vec<FeatureImportance> {
    let coef = |p: Projection, f: Feature| {
        models.iter().find(|m| m.projection == p).and_then(|m| m.coefficient(f))
    };
    let mut out: Vec<FeatureImportance> = Feature::ALL
        .iter()
        .filter_map(|&f| {
            let d = coef(Projection::Directed, f);
            let u = coef(Projection::Undirected, f);
            let abs: Vec<f64> = d.iter().chain(u.iter()).map(|c| c.abs()).collect();
            (!abs.is_empty()).then(|| FeatureImportance {
                feature: f,
                importance: abs.iter().sum::<f64>() / abs.len() as f64,
                directed: d,
                undirected: u,
            })
        })
        .collect();
    out.sort_by(|a, b| b.importance.total_cmp(&a.importance).then(a.feature.cmp(&b.feature)));
    out
}
