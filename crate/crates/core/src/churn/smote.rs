use rand::Rng;

use super::logistic::Standardizer;
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SmoteOutput {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<bool>,
    /// Rows appended after the originals.
    pub n_synthetic: usize,
    pub warning: Option<String>,
}

/// Synthetic Minority Oversampling.
///
/// Appends `x_i + u·(x_nn − x_i)` rows (u uniform in [0, 1], `x_nn` one of the
/// `k` nearest minority neighbors of a uniformly drawn minority row `x_i`)
/// until both classes have the same size. Distances are Euclidean on
/// z-scored features; interpolation happens in the original space, so every
/// synthetic row is a convex combination of two minority rows either way.
pub fn smote_oversample(x: &[Vec<f64>], y: &[bool], k_neighbors: usize, seed: u64) -> SmoteOutput {
    assert_eq!(x.len(), y.len(), "row/label length mismatch");
    let mut out = SmoteOutput {
        x: x.to_vec(),
        y: y.to_vec(),
        n_synthetic: 0,
        warning: None,
    };
    let n_pos = y.iter().filter(|&&v| v).count();
    let n_neg = y.len() - n_pos;
    if n_pos == n_neg {
        return out;
    }
    let minority_label = n_pos < n_neg;
    let minority: Vec<usize> = (0..y.len()).filter(|&i| y[i] == minority_label).collect();
    if minority.len() < 2 {
        let msg = format!("minority class has {} row(s); SMOTE skipped", minority.len());
        tracing::warn!("{msg}");
        out.warning = Some(msg);
        return out;
    }
    let k = k_neighbors.clamp(1, minority.len() - 1);
    let scaler = Standardizer::fit(x);
    let z: Vec<Vec<f64>> = minority.iter().map(|&i| scaler.transform_full(&x[i])).collect();

    // k nearest minority neighbors of each minority row, ties by index.
    let neighbors: Vec<Vec<usize>> = (0..minority.len())
        .map(|a| {
            let mut d: Vec<(f64, usize)> = (0..minority.len())
                .filter(|&b| b != a)
                .map(|b| {
                    let dist: f64 = z[a].iter().zip(&z[b]).map(|(p, q)| (p - q) * (p - q)).sum();
                    (dist, b)
                })
                .collect();
            d.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));
            d.into_iter().take(k).map(|(_, b)| b).collect()
        })
        .collect();

    let mut r = rng::seeded(seed);
    let needed = n_pos.max(n_neg) - minority.len();
    for _ in 0..needed {
        let a = r.gen_range(0..minority.len());
        let b = neighbors[a][r.gen_range(0..neighbors[a].len())];
        let u: f64 = r.gen_range(0.0..=1.0);
        let (xa, xb) = (&x[minority[a]], &x[minority[b]]);
        out.x.push(xa.iter().zip(xb).map(|(p, q)| p + u * (q - p)).collect());
        out.y.push(minority_label);
    }
    out.n_synthetic = needed;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn synthetic_points_on_segment() {
        let mut x = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let mut y = vec![true, true];
        for i in 0..10 {
            x.push(vec![i as f64, -(i as f64)]);
            y.push(false);
        }
        let out = smote_oversample(&x, &y, 1, 7);
        assert_eq!(out.n_synthetic, 8);
        for row in &out.x[12..] {
            assert_eq!(row[0], row[1]);
            assert!((0.0..=1.0).contains(&row[0]));
        }
    }

    #[test]
    fn balances_classes() {
        let x: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64, (i * i % 17) as f64]).collect();
        let y: Vec<bool> = (0..100).map(|i| i < 10).collect();
        let out = smote_oversample(&x, &y, 5, 1);
        let pos = out.y.iter().filter(|&&v| v).count();
        assert_eq!((pos, out.y.len() - pos), (90, 90));
    }

    #[test]
    fn single_minority_row_is_left_alone() {
        let x = vec![vec![0.0], vec![1.0], vec![2.0]];
        let y = vec![true, false, false];
        let out = smote_oversample(&x, &y, 5, 1);
        assert_eq!(out.x, x);
        assert!(out.warning.is_some());
    }

    proptest! {
        #[test]
        fn rows_are_convex_combinations(
            rows in prop::collection::vec((prop::collection::vec(-50.0f64..50.0, 3), any::<bool>()), 4..40),
            k in 1usize..6,
            seed in any::<u64>(),
        ) {
            let x: Vec<Vec<f64>> = rows.iter().map(|r| r.0.clone()).collect();
            let y: Vec<bool> = rows.iter().map(|r| r.1).collect();
            let out = smote_oversample(&x, &y, k, seed);
            let pos = out.y.iter().filter(|&&v| v).count();
            if out.warning.is_none() {
                prop_assert_eq!(pos * 2, out.y.len());
            }
            let minority_label = out.y.last().copied().unwrap_or(true);
            let minority: Vec<&Vec<f64>> = x.iter().zip(&y).filter(|(_, &l)| l == minority_label).map(|(r, _)| r).collect();
            for row in &out.x[x.len()..] {
                // Some pair (a, b) with row = a + u (b - a) coordinate-wise for one u in [0, 1].
                let ok = minority.iter().any(|a| minority.iter().any(|b| {
                    let mut u = None;
                    row.iter().zip(a.iter()).zip(b.iter()).all(|((&r, &p), &q)| {
                        if (q - p).abs() < 1e-12 {
                            return (r - p).abs() < 1e-9;
                        }
                        let t = (r - p) / (q - p);
                        if !(-1e-9..=1.0 + 1e-9).contains(&t) {
                            return false;
                        }
                        match u {
                            None => { u = Some(t); true }
                            Some(s) => (s - t).abs() < 1e-6,
                        }
                    })
                }));
                prop_assert!(ok);
            }
        }
    }
}
