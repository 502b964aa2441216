use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Columns with a population std below this are treated as constant.
const MIN_STD: f64 = 1e-12;

/// Per-column z-scoring with population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    /// Columns with non-zero variance, ascending.
    pub kept: Vec<usize>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let n = x.len().max(1) as f64;
        let mut means = vec![0.0; d];
        for row in x {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut stds = vec![0.0; d];
        for row in x {
            for ((s, v), m) in stds.iter_mut().zip(row).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        stds.iter_mut().for_each(|s| *s = (*s / n).sqrt());
        let kept = (0..d).filter(|&j| stds[j] > MIN_STD * (1.0 + means[j].abs())).collect();
        Self { means, stds, kept }
    }

    /// Kept columns only.
    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        self.kept.iter().map(|&j| (row[j] - self.means[j]) / self.stds[j]).collect()
    }

    /// Every column; constant columns map to 0.
    pub fn transform_full(&self, row: &[f64]) -> Vec<f64> {
        (0..self.means.len())
            .map(|j| {
                if self.kept.binary_search(&j).is_ok() {
                    (row[j] - self.means[j]) / self.stds[j]
                } else {
                    0.0
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticOptions {
    /// Strength of the `(λ/2)‖β‖²` penalty on the mean loss; the intercept is free.
    pub l2: f64,
    pub max_iter: usize,
    /// Stop when the gradient's max-norm falls below this.
    pub tol: f64,
    /// Reweight classes to `n / (2 n_c)`.
    pub balanced: bool,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        Self {
            l2: 1.0,
            max_iter: 100,
            tol: 1e-8,
            balanced: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    /// One per input column, on the standardized scale; 0 for dropped columns.
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub scaler: Standardizer,
    /// Input columns dropped for zero variance.
    pub dropped: Vec<usize>,
    /// `[negative, positive]`.
    pub class_weights: [f64; 2],
    pub iterations: usize,
    pub converged: bool,
}

impl LogisticModel {
    pub fn decision(&self, row: &[f64]) -> f64 {
        let z = self.scaler.transform_full(row);
        self.intercept + z.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        sigmoid(self.decision(row))
    }

    pub fn predict(&self, row: &[f64]) -> bool {
        self.predict_proba(row) >= 0.5
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// L2-regularized logistic regression on standardized inputs, fit by damped Newton.
pub fn train_logistic(x: &[Vec<f64>], y: &[bool], opts: &LogisticOptions) -> Result<LogisticModel> {
    if x.len() != y.len() {
        return Err(Error::Argument(format!("{} rows but {} labels", x.len(), y.len())));
    }
    let d = x.first().map_or(0, Vec::len);
    for (i, row) in x.iter().enumerate() {
        if row.len() != d {
            return Err(Error::Input(format!("row {i} has {} features, expected {d}", row.len())));
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!("row {i}, feature {j}: non-finite value {}", row[j])));
        }
    }
    let n_pos = y.iter().filter(|&&v| v).count();
    let n = y.len();
    if n_pos == 0 || n_pos == n {
        return Err(Error::Input("training data has a single class".into()));
    }
    let class_weights = if opts.balanced {
        [n as f64 / (2.0 * (n - n_pos) as f64), n as f64 / (2.0 * n_pos as f64)]
    } else {
        [1.0, 1.0]
    };

    let scaler = Standardizer::fit(x);
    let p = scaler.kept.len();
    // Column 0 is the intercept.
    let mut design = DMatrix::<f64>::zeros(n, p + 1);
    for (i, row) in x.iter().enumerate() {
        design[(i, 0)] = 1.0;
        for (j, v) in scaler.transform(row).into_iter().enumerate() {
            design[(i, j + 1)] = v;
        }
    }
    let target = DVector::from_iterator(n, y.iter().map(|&v| if v { 1.0 } else { 0.0 }));
    let weight = DVector::from_iterator(n, y.iter().map(|&v| class_weights[v as usize]));
    let nf = n as f64;

    let loss = |beta: &DVector<f64>| -> f64 {
        let z = &design * beta;
        let data: f64 = (0..n)
            .map(|i| weight[i] * (softplus(z[i]) - target[i] * z[i]))
            .sum::<f64>()
            / nf;
        data + 0.5 * opts.l2 * beta.rows(1, p).norm_squared()
    };

    let mut beta = DVector::<f64>::zeros(p + 1);
    let mut current = loss(&beta);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let z = &design * &beta;
        let prob = z.map(sigmoid);
        let resid = DVector::from_iterator(n, (0..n).map(|i| weight[i] * (prob[i] - target[i]) / nf));
        let mut grad = design.transpose() * &resid;
        for j in 1..=p {
            grad[j] += opts.l2 * beta[j];
        }
        if grad.amax() < opts.tol {
            converged = true;
            break;
        }
        iterations += 1;
        let curvature = DVector::from_iterator(n, (0..n).map(|i| weight[i] * prob[i] * (1.0 - prob[i]) / nf));
        let mut scaled = design.clone();
        for (i, mut row) in scaled.row_iter_mut().enumerate() {
            row *= curvature[i];
        }
        let mut hess = design.transpose() * scaled;
        for j in 1..=p {
            hess[(j, j)] += opts.l2;
        }
        // Tiny ridge on the diagonal keeps the unpenalized intercept solvable.
        for j in 0..=p {
            hess[(j, j)] += 1e-12;
        }
        let step = match hess.clone().cholesky() {
            Some(c) => c.solve(&grad),
            None => hess
                .lu()
                .solve(&grad)
                .ok_or_else(|| Error::Invariant("singular Hessian in logistic fit".into()))?,
        };
        let slope = -grad.dot(&step);
        let mut t = 1.0;
        loop {
            let candidate = &beta - t * &step;
            let value = loss(&candidate);
            if value <= current + 1e-4 * t * slope || t < 1e-10 {
                beta = candidate;
                current = value;
                break;
            }
            t *= 0.5;
        }
    }

    let mut coefficients = vec![0.0; d];
    for (k, &j) in scaler.kept.iter().enumerate() {
        coefficients[j] = beta[k + 1];
    }
    let dropped = (0..d).filter(|j| scaler.kept.binary_search(j).is_err()).collect();
    Ok(LogisticModel {
        coefficients,
        intercept: beta[0],
        scaler,
        dropped,
        class_weights,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn opts() -> LogisticOptions {
        LogisticOptions::default()
    }

    #[test]
    fn positive_feature_gets_positive_weight() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let y: Vec<bool> = (0..20).map(|i| i >= 10).collect();
        let m = train_logistic(&x, &y, &opts()).unwrap();
        assert!(m.converged);
        assert!(m.coefficients[0] > 0.0);
        assert!(m.predict(&[19.0]));
        assert!(!m.predict(&[0.0]));
    }

    #[test]
    fn constant_feature_is_dropped() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![3.0, i as f64]).collect();
        let y: Vec<bool> = (0..10).map(|i| i % 3 == 0).collect();
        let m = train_logistic(&x, &y, &opts()).unwrap();
        assert_eq!(m.dropped, vec![0]);
        assert_eq!(m.coefficients[0], 0.0);
    }

    #[test]
    fn rejects_single_class_and_non_finite() {
        let x = vec![vec![1.0], vec![2.0]];
        assert!(train_logistic(&x, &[true, true], &opts()).is_err());
        let bad = vec![vec![1.0], vec![f64::NAN]];
        let err = train_logistic(&bad, &[true, false], &opts()).unwrap_err();
        assert!(err.to_string().contains("row 1"));
    }

    #[test]
    fn first_order_conditions_hold() {
        // Regularized optimum: mean weighted residual is zero for the intercept.
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![(i % 7) as f64, (i * i % 11) as f64]).collect();
        let y: Vec<bool> = (0..30).map(|i| (i * 5) % 9 < 3).collect();
        let m = train_logistic(&x, &y, &opts()).unwrap();
        let r: f64 = x
            .iter()
            .zip(&y)
            .map(|(row, &l)| m.class_weights[l as usize] * (m.predict_proba(row) - l as u8 as f64))
            .sum();
        assert!(r.abs() < 1e-6, "{r}");
    }

    proptest! {
        #[test]
        fn standardized_columns_are_unit(rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 4), 2..50)) {
            let s = Standardizer::fit(&rows);
            let z: Vec<Vec<f64>> = rows.iter().map(|r| s.transform(r)).collect();
            for k in 0..s.kept.len() {
                let n = z.len() as f64;
                let mean = z.iter().map(|r| r[k]).sum::<f64>() / n;
                let var = z.iter().map(|r| (r[k] - mean).powi(2)).sum::<f64>() / n;
                prop_assert!(mean.abs() < 1e-9);
                prop_assert!((var.sqrt() - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn duplicating_data_keeps_the_fit(seed in 0u64..1000) {
            use rand::Rng;
            let mut r = crate::rng::seeded(seed);
            let x: Vec<Vec<f64>> = (0..25).map(|_| vec![r.gen_range(-3.0..3.0), r.gen_range(0.0..10.0)]).collect();
            let mut y: Vec<bool> = x.iter().map(|row| row[0] + r.gen_range(-1.0..1.0) > 0.0).collect();
            y[0] = true;
            y[1] = false;
            let a = train_logistic(&x, &y, &opts()).unwrap();
            let x2: Vec<Vec<f64>> = x.iter().chain(&x).cloned().collect();
            let y2: Vec<bool> = y.iter().chain(&y).copied().collect();
            let b = train_logistic(&x2, &y2, &opts()).unwrap();
            for (p, q) in a.coefficients.iter().zip(&b.coefficients) {
                prop_assert!((p - q).abs() < 1e-6);
            }
        }
    }
}
