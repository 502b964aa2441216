mod support;

use cascade_lens::churn::{
    build_repo_records, evaluate_loo, feature_importance, smote_oversample, train_full_model, EvalOptions, Feature,
    Projection, RepoRecords, Standardizer, YEAR_SECONDS,
};
use support::{churn_corpus, permute_labels, record_count};

fn records(projection: Projection) -> Vec<RepoRecords> {
    churn_corpus(11, 6, 40)
        .iter()
        .map(|log| RepoRecords {
            repo: log.repo_id().to_string(),
            records: build_repo_records(log, projection, YEAR_SECONDS, YEAR_SECONDS).unwrap(),
        })
        .collect()
}

fn mean_ba(repos: &[RepoRecords], projection: Projection) -> f64 {
    evaluate_loo(repos, projection, &EvalOptions::default())
        .unwrap()
        .mean_balanced_accuracy()
        .unwrap()
}

#[test]
fn corpus_has_both_classes_in_every_repo() {
    for r in records(Projection::Directed) {
        assert!(record_count(&r.records, true) > 20, "{}", r.repo);
        assert!(record_count(&r.records, false) > 20, "{}", r.repo);
    }
}

#[test]
fn inactivity_signal_is_learned() {
    for projection in [Projection::Directed, Projection::Undirected] {
        let ba = mean_ba(&records(projection), projection);
        assert!(ba >= 0.70, "{projection:?}: {ba}");
    }
}

#[test]
fn permuted_labels_score_at_chance() {
    let mut repos = records(Projection::Directed);
    permute_labels(&mut repos, 3);
    let ba = mean_ba(&repos, Projection::Directed);
    assert!((ba - 0.5).abs() <= 0.05, "{ba}");
}

#[test]
fn max_inactivity_ranks_first() {
    let opts = EvalOptions::default();
    let d = train_full_model(&records(Projection::Directed), Projection::Directed, &opts).unwrap();
    let u = train_full_model(&records(Projection::Undirected), Projection::Undirected, &opts).unwrap();
    let ranked = feature_importance(&d, &u);
    assert_eq!(ranked[0].feature, Feature::MaxInactivity, "{ranked:?}");
}

#[test]
fn evaluation_is_deterministic() {
    let repos = records(Projection::Undirected);
    let a = evaluate_loo(&repos, Projection::Undirected, &EvalOptions::default()).unwrap();
    let b = evaluate_loo(&repos, Projection::Undirected, &EvalOptions::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn oversampled_corpus_is_balanced_convex_and_standardizable() {
    let repos = records(Projection::Directed);
    let (x, y): (Vec<Vec<f64>>, Vec<bool>) = repos
        .iter()
        .flat_map(|r| r.records.iter())
        .map(|r| (r.vector(), r.churned.unwrap()))
        .unzip();
    let out = smote_oversample(&x, &y, 5, 8);
    let pos = out.y.iter().filter(|&&c| c).count();
    assert_eq!(pos * 2, out.y.len());

    let minority = y.iter().filter(|&&c| c).count() * 2 < y.len();
    let originals: Vec<&Vec<f64>> = x.iter().zip(&y).filter(|(_, &c)| c == minority).map(|(r, _)| r).collect();
    for row in &out.x[x.len()..] {
        // Some pair of minority rows brackets every coordinate at one common mixing weight.
        let on_segment = originals.iter().any(|a| {
            originals.iter().any(|b| {
                let lam = row.iter().zip(a.iter().zip(b.iter())).find_map(|(&v, (&p, &q))| {
                    ((q - p).abs() > 1e-12).then(|| (v - p) / (q - p))
                });
                match lam {
                    None => row == *a,
                    Some(l) => {
                        (-1e-9..=1.0 + 1e-9).contains(&l)
                            && row.iter().zip(a.iter().zip(b.iter())).all(|(&v, (&p, &q))| {
                                (v - (p + l * (q - p))).abs() <= 1e-6 * (1.0 + v.abs())
                            })
                    }
                }
            })
        });
        assert!(on_segment, "synthetic row off every minority segment: {row:?}");
    }

    let s = Standardizer::fit(&out.x);
    let z: Vec<Vec<f64>> = out.x.iter().map(|r| s.transform(r)).collect();
    for j in 0..z[0].len() {
        let n = z.len() as f64;
        let mean = z.iter().map(|r| r[j]).sum::<f64>() / n;
        let var = z.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 1e-9, "feature {j} mean {mean}");
        assert!((var.sqrt() - 1.0).abs() < 1e-9, "feature {j} std {}", var.sqrt());
    }
}
