//! Temporal-shuffling permutation test for cascade counts.
//!
//! The null model permutes co-edit timestamps while keeping every
//! `(editor, edited, weight, file)` tuple and all commit histories fixed, so
//! trigger baselines are unchanged and only the timing of interactions is
//! randomised.

use std::io::Write;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cascade::{cascade_stats, detect_cascades, CascadeStats, TriggerParams};
use crate::error::{Error, Result};
use crate::model::{build_commit_history, sort_coedits, CoEditEvent, DevId, EventLog};
use crate::rng;

/// Event `i` receives the timestamp of event `perm[i]`; output is re-sorted
/// with the canonical tie key.
pub fn permute_coedit_timestamps(events: &[CoEditEvent], perm: &[usize]) -> Vec<CoEditEvent> {
    assert_eq!(perm.len(), events.len(), "permutation length");
    let mut out: Vec<CoEditEvent> = events
        .iter()
        .zip(perm)
        .map(|(e, &j)| CoEditEvent {
            timestamp: events[j].timestamp,
            ..e.clone()
        })
        .collect();
    sort_coedits(&mut out);
    out
}

pub fn shuffle_coedit_timestamps(events: &[CoEditEvent], seed: u64) -> Vec<CoEditEvent> {
    let mut perm: Vec<usize> = (0..events.len()).collect();
    perm.shuffle(&mut rng::seeded(seed));
    permute_coedit_timestamps(events, &perm)
}

/// Add-one empirical p-value `(1 + k) / (1 + n)`.
pub fn empirical_p(exceedances: usize, n_shuffles: usize) -> f64 {
    (1 + exceedances) as f64 / (1 + n_shuffles) as f64
}

/// `(observed − mean) / std`. A zero std gives ±∞ by the sign of the
/// difference and +∞ when observed equals the mean.
pub fn cohens_d(observed: f64, null_mean: f64, null_std: f64) -> f64 {
    let diff = observed - null_mean;
    if null_std > 0.0 {
        diff / null_std
    } else if diff < 0.0 {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    }
}

/// Serializes non-finite floats as the strings `inf` / `-inf` / `nan`.
pub mod float_or_inf {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_str(&super::format_float(*x, 2))
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("bad float `{other}`"))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PermutationConfig {
    pub n_shuffles: usize,
    pub base_seed: u64,
    pub trigger: TriggerParams,
}

impl Default for PermutationConfig {
    fn default() -> Self {
        Self {
            n_shuffles: 100,
            base_seed: 42,
            trigger: TriggerParams::default(),
        }
    }
}

/// Per-shuffle cascade statistics, in iteration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullDistribution {
    pub counts: Vec<usize>,
    pub avg_depths: Vec<f64>,
    pub avg_devs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationResult {
    pub observed: CascadeStats,
    pub null_mean_count: f64,
    /// Population standard deviation of the shuffle counts.
    pub null_std_count: f64,
    pub null_mean_depth: f64,
    pub null_mean_devs: f64,
    /// Shuffles whose count was at least the observed count.
    pub exceedances: usize,
    pub p_value: f64,
    #[serde(with = "float_or_inf")]
    pub cohens_d: f64,
    pub n_shuffles: usize,
    pub base_seed: u64,
    pub null: NullDistribution,
}

fn mean(xs: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = xs.len();
    if n == 0 {
        return 0.0;
    }
    xs.sum::<f64>() / n as f64
}

/// Compares observed cascades against `n_shuffles` co-edit timestamp shuffles.
///
/// Shuffle `i` uses seed `base_seed + i`. Shuffles run in parallel and are
/// reduced in index order, so the result does not depend on scheduling.
pub fn permutation_test(log: &EventLog, initiators: &[DevId], cfg: &PermutationConfig) -> Result<PermutationResult> {
    if cfg.n_shuffles < 1 {
        return Err(Error::Argument("n_shuffles must be >= 1".into()));
    }
    let history = build_commit_history(log);
    let observed = cascade_stats(&detect_cascades(&history, log.coedits(), initiators, cfg.trigger));

    let null: Vec<CascadeStats> = (0..cfg.n_shuffles)
        .into_par_iter()
        .map(|i| {
            let events = shuffle_coedit_timestamps(log.coedits(), rng::iteration_seed(cfg.base_seed, i));
            cascade_stats(&detect_cascades(&history, &events, initiators, cfg.trigger))
        })
        .collect();

    let counts: Vec<usize> = null.iter().map(|s| s.n_cascades).collect();
    let null_mean_count = mean(counts.iter().map(|&c| c as f64));
    let null_std_count = mean(counts.iter().map(|&c| {
        let d = c as f64 - null_mean_count;
        d * d
    }))
    .sqrt();
    let exceedances = counts.iter().filter(|&&c| c >= observed.n_cascades).count();

    Ok(PermutationResult {
        observed,
        null_mean_count,
        null_std_count,
        null_mean_depth: mean(null.iter().map(|s| s.avg_depth)),
        null_mean_devs: mean(null.iter().map(|s| s.avg_devs)),
        exceedances,
        p_value: empirical_p(exceedances, cfg.n_shuffles),
        cohens_d: cohens_d(observed.n_cascades as f64, null_mean_count, null_std_count),
        n_shuffles: cfg.n_shuffles,
        base_seed: cfg.base_seed,
        null: NullDistribution {
            counts,
            avg_depths: null.iter().map(|s| s.avg_depth).collect(),
            avg_devs: null.iter().map(|s| s.avg_devs).collect(),
        },
    })
}

/// One repository's validation outcome; the content of `validation.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepoValidation {
    pub repo: String,
    /// Size of the initiator set, `None` for synthetic controls.
    pub top_k: Option<usize>,
    pub commit_share_pct: Option<f64>,
    pub result: PermutationResult,
}

/// Significance marker for a raw p-value.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

pub fn round_half_up(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    // Nudge decimal halves that sit just below .5 in binary.
    (x * scale + 1e-9).round() / scale
}

pub fn format_float(x: f64, decimals: usize) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{:.*}", decimals, round_half_up(x, decimals as i32))
    }
}

pub const REPORT_HEADER: [&str; 12] = [
    "dataset",
    "top_k",
    "commit_pct",
    "n_cascades",
    "avg_depth",
    "avg_devs",
    "null_mean",
    "p_value",
    "cohens_d",
    "null_avg_depth",
    "null_avg_devs",
    "significance",
];

/// A formatted row of the cascade validation table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportRow {
    pub dataset: String,
    pub top_k: String,
    pub commit_pct: String,
    pub n_cascades: String,
    pub avg_depth: String,
    pub avg_devs: String,
    pub null_mean: String,
    pub p_value: String,
    pub cohens_d: String,
    pub null_avg_depth: String,
    pub null_avg_devs: String,
    pub significance: String,
}

impl ReportRow {
    pub fn fields(&self) -> [&str; 12] {
        [
            &self.dataset,
            &self.top_k,
            &self.commit_pct,
            &self.n_cascades,
            &self.avg_depth,
            &self.avg_devs,
            &self.null_mean,
            &self.p_value,
            &self.cohens_d,
            &self.null_avg_depth,
            &self.null_avg_devs,
            &self.significance,
        ]
    }
}

/// One row per repository, in input order. Stars use the unrounded p-value.
pub fn assemble_report(results: &[RepoValidation]) -> Vec<ReportRow> {
    results
        .iter()
        .map(|v| {
            let r = &v.result;
            ReportRow {
                dataset: v.repo.clone(),
                top_k: v.top_k.map_or("-".into(), |k| k.to_string()),
                commit_pct: v.commit_share_pct.map_or("-".into(), |s| format_float(s, 1)),
                n_cascades: r.observed.n_cascades.to_string(),
                avg_depth: format_float(r.observed.avg_depth, 2),
                avg_devs: format_float(r.observed.avg_devs, 2),
                null_mean: format_float(r.null_mean_count, 2),
                p_value: format_float(r.p_value, 3),
                cohens_d: format_float(r.cohens_d, 2),
                null_avg_depth: format_float(r.null_mean_depth, 2),
                null_avg_devs: format_float(r.null_mean_devs, 2),
                significance: significance_stars(r.p_value).into(),
            }
        })
        .collect()
}

pub fn write_report_csv<W: Write>(rows: &[ReportRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(REPORT_HEADER)?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}
