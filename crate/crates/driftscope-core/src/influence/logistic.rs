//! ℓ2-regularized logistic regression solved by damped Newton iterations.
//!
//! The objective is mean log-loss + (l2/2)‖θ‖² over θ = (weights, intercept).
//! Newton steps use a direct Cholesky factorization of the regularized
//! Hessian; a halving line search keeps the objective strictly decreasing,
//! so the solve is deterministic and monotone.

use super::InfluenceError;
use crate::linalg::{cholesky, cholesky_solve, SymMatrix};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub l2: f64,
    /// Gradient norm of the regularized objective at the returned parameters.
    pub final_grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl LogisticModel {
    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.intercept
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        sigmoid(self.decision(x))
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        f64::from(self.predict_proba(x) > 0.5)
    }

    /// Fraction of examples classified correctly at the 0.5 threshold.
    pub fn accuracy(&self, features: &[Vec<f64>], labels: &[f64]) -> f64 {
        if features.is_empty() {
            return f64::NAN;
        }
        let correct = features
            .iter()
            .zip(labels)
            .filter(|(x, &y)| self.predict(x) == y)
            .count();
        correct as f64 / features.len() as f64
    }

    /// θ = (weights…, intercept) as one vector.
    pub fn theta(&self) -> Vec<f64> {
        let mut t = self.weights.clone();
        t.push(self.intercept);
        t
    }
}

#[inline]
pub fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable log-loss: max(s,0) − s·y + ln(1 + e^{−|s|}).
#[inline]
pub fn log_loss(s: f64, y: f64) -> f64 {
    s.max(0.0) - s * y + (-s.abs()).exp().ln_1p()
}

fn decision_theta(theta: &[f64], x: &[f64]) -> f64 {
    let m = x.len();
    theta[..m].iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + theta[m]
}

/// Weighted regularized objective: (1/n)Σ wᵢ·ℓᵢ + (l2/2)‖θ‖². The divisor is
/// the full example count regardless of weights, which is what leave-one-out
/// refits (weight 0 on the held-out row) require.
fn objective(
    theta: &[f64],
    features: &[Vec<f64>],
    labels: &[f64],
    weights: &[f64],
    l2: f64,
) -> f64 {
    let n = features.len() as f64;
    let data_term: f64 = features
        .iter()
        .zip(labels)
        .zip(weights)
        .map(|((x, &y), &w)| w * log_loss(decision_theta(theta, x), y))
        .sum::<f64>()
        / n;
    let reg: f64 = theta.iter().map(|t| t * t).sum::<f64>() * l2 / 2.0;
    data_term + reg
}

fn gradient(
    theta: &[f64],
    features: &[Vec<f64>],
    labels: &[f64],
    weights: &[f64],
    l2: f64,
) -> Vec<f64> {
    let m = theta.len() - 1;
    let n = features.len() as f64;
    let mut g = vec![0.0; m + 1];
    for ((x, &y), &w) in features.iter().zip(labels).zip(weights) {
        let r = w * (sigmoid(decision_theta(theta, x)) - y);
        for j in 0..m {
            g[j] += r * x[j];
        }
        g[m] += r;
    }
    for (j, gj) in g.iter_mut().enumerate() {
        *gj = *gj / n + l2 * theta[j];
    }
    g
}

#[allow(clippy::needless_range_loop)]
fn hessian(theta: &[f64], features: &[Vec<f64>], weights: &[f64], l2: f64) -> SymMatrix {
    let m = theta.len() - 1;
    let n = features.len() as f64;
    let mut h = SymMatrix::zeros(m + 1);
    for (x, &w) in features.iter().zip(weights) {
        let p = sigmoid(decision_theta(theta, x));
        let s = w * p * (1.0 - p) / n;
        for i in 0..=m {
            let xi = if i == m { 1.0 } else { x[i] };
            for j in 0..=m {
                let xj = if j == m { 1.0 } else { x[j] };
                h.add(i, j, s * xi * xj);
            }
        }
    }
    for i in 0..=m {
        h.add(i, i, l2);
    }
    h
}

/// Fits the discriminator by Newton iterations from θ = 0.
///
/// Requires at least one example of each class and l2 > 0 (the regularized
/// Hessian must stay invertible). Non-convergence within `max_iter` is not
/// an error; the returned diagnostics record it.
pub fn fit_logistic(
    features: &[Vec<f64>],
    labels: &[f64],
    l2: f64,
    tol: f64,
    max_iter: usize,
) -> Result<LogisticModel, InfluenceError> {
    fit_logistic_weighted(features, labels, None, l2, tol, max_iter)
}

/// [`fit_logistic`] with optional per-example weights. Weights scale each
/// example's loss term; the 1/n divisor stays at the full count.
pub fn fit_logistic_weighted(
    features: &[Vec<f64>],
    labels: &[f64],
    sample_weights: Option<&[f64]>,
    l2: f64,
    tol: f64,
    max_iter: usize,
) -> Result<LogisticModel, InfluenceError> {
    if features.is_empty() {
        return Err(InfluenceError::SingleClass);
    }
    assert!(l2 > 0.0, "l2 must be positive for an invertible Hessian");
    let owned_weights;
    let weights: &[f64] = match sample_weights {
        Some(w) => {
            assert_eq!(w.len(), labels.len());
            w
        }
        None => {
            owned_weights = vec![1.0; labels.len()];
            &owned_weights
        }
    };
    let effective = |class: f64| {
        labels
            .iter()
            .zip(weights)
            .any(|(&y, &w)| y == class && w > 0.0)
    };
    if !effective(0.0) || !effective(1.0) {
        return Err(InfluenceError::SingleClass);
    }

    let m = features[0].len();
    let mut theta = vec![0.0; m + 1];
    let mut obj = objective(&theta, features, labels, weights, l2);
    let mut grad = gradient(&theta, features, labels, weights, l2);
    let mut iterations = 0;
    let mut converged = grad_norm(&grad) <= tol;

    while !converged && iterations < max_iter {
        let h = hessian(&theta, features, weights, l2);
        let l = cholesky(&h).ok_or(InfluenceError::SingularHessian)?;
        let step = cholesky_solve(&l, &grad);
        // Halving line search; only strictly improving steps are accepted,
        // so the objective decreases monotonically.
        let mut t = 1.0;
        let mut improved = false;
        while t >= 1e-12 {
            let candidate: Vec<f64> = theta.iter().zip(&step).map(|(a, s)| a - t * s).collect();
            let cand_obj = objective(&candidate, features, labels, weights, l2);
            if cand_obj < obj {
                theta = candidate;
                obj = cand_obj;
                improved = true;
                break;
            }
            t /= 2.0;
        }
        if !improved {
            // Numerical floor: no representable step improves the strictly
            // convex objective, so this is the achievable optimum.
            break;
        }
        grad = gradient(&theta, features, labels, weights, l2);
        iterations += 1;
        converged = grad_norm(&grad) <= tol;
    }

    let intercept = theta[m];
    theta.truncate(m);
    Ok(LogisticModel {
        weights: theta,
        intercept,
        l2,
        final_grad_norm: grad_norm(&grad),
        iterations,
        converged,
    })
}

fn grad_norm(g: &[f64]) -> f64 {
    g.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Per-example log-loss gradient ∇L(z, θ̂) = (p − y)·(x, 1), without the
/// regularizer.
pub fn example_gradient(model: &LogisticModel, x: &[f64], y: f64) -> Vec<f64> {
    let r = model.predict_proba(x) - y;
    let mut g: Vec<f64> = x.iter().map(|v| r * v).collect();
    g.push(r);
    g
}

/// Hessian of the regularized objective at the fitted parameters.
pub fn regularized_hessian(model: &LogisticModel, features: &[Vec<f64>]) -> SymMatrix {
    let theta = model.theta();
    let weights = vec![1.0; features.len()];
    hessian(&theta, features, &weights, model.l2)
}

/// Mean log-loss of the model over a test set (no regularizer).
pub fn mean_test_loss(model: &LogisticModel, features: &[Vec<f64>], labels: &[f64]) -> f64 {
    features
        .iter()
        .zip(labels)
        .map(|(x, &y)| log_loss(model.decision(x), y))
        .sum::<f64>()
        / features.len() as f64
}

/// Objective value at the model's parameters; exposed for the monotonicity
/// and optimality checks.
pub fn regularized_objective(model: &LogisticModel, features: &[Vec<f64>], labels: &[f64]) -> f64 {
    let weights = vec![1.0; features.len()];
    objective(&model.theta(), features, labels, &weights, model.l2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intercept_only_balanced_gives_half() {
        let features = vec![vec![]; 4];
        let labels = [0.0, 1.0, 0.0, 1.0];
        let model = fit_logistic(&features, &labels, 1e-2, 1e-10, 50).unwrap();
        assert!(model.converged);
        assert_eq!(model.intercept, 0.0);
        assert_eq!(model.predict_proba(&[]), 0.5);
    }

    #[test]
    fn separable_data_stays_finite() {
        let features: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 - 4.5]).collect();
        let labels: Vec<f64> = (0..10).map(|i| f64::from(i >= 5)).collect();
        let model = fit_logistic(&features, &labels, 1.0, 1e-8, 100).unwrap();
        assert!(model.converged);
        assert!(model.weights[0].is_finite());
        assert!(model.final_grad_norm <= 1e-8);
    }

    #[test]
    fn single_class_rejected() {
        let features = vec![vec![1.0], vec![2.0]];
        assert!(matches!(
            fit_logistic(&features, &[1.0, 1.0], 1e-2, 1e-8, 50),
            Err(InfluenceError::SingleClass)
        ));
    }

    #[test]
    fn optimum_passes_finite_difference_check() {
        let features = vec![
            vec![0.2, 1.0],
            vec![1.5, -0.5],
            vec![-0.7, 0.3],
            vec![2.0, 2.0],
            vec![-1.0, -1.5],
            vec![0.4, -2.0],
        ];
        let labels = [0.0, 1.0, 0.0, 1.0, 0.0, 1.0];
        let model = fit_logistic(&features, &labels, 1e-2, 1e-10, 100).unwrap();
        assert!(model.converged);
        // Central differences of the objective at θ̂ vanish to 1e-6.
        let theta = model.theta();
        let weights = vec![1.0; features.len()];
        let eps = 1e-5;
        for j in 0..theta.len() {
            let mut plus = theta.clone();
            plus[j] += eps;
            let mut minus = theta.clone();
            minus[j] -= eps;
            let fd = (objective(&plus, &features, &labels, &weights, 1e-2)
                - objective(&minus, &features, &labels, &weights, 1e-2))
                / (2.0 * eps);
            assert!(fd.abs() < 1e-6, "coordinate {j}: fd {fd}");
        }
    }

    #[test]
    fn newton_objective_decreases_monotonically() {
        let features: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![(i as f64) / 3.0 - 3.0, ((i * 7) % 5) as f64 - 2.0])
            .collect();
        let labels: Vec<f64> = (0..20).map(|i| f64::from((i % 3) == 0)).collect();
        let weights = vec![1.0; 20];
        // Re-run the iteration manually, tracking the objective.
        let mut theta = vec![0.0; 3];
        let mut prev = objective(&theta, &features, &labels, &weights, 1e-2);
        for _ in 0..8 {
            let g = gradient(&theta, &features, &labels, &weights, 1e-2);
            let h = hessian(&theta, &features, &weights, 1e-2);
            let l = cholesky(&h).unwrap();
            let step = cholesky_solve(&l, &g);
            let mut t = 1.0;
            loop {
                let cand: Vec<f64> = theta.iter().zip(&step).map(|(a, s)| a - t * s).collect();
                let obj = objective(&cand, &features, &labels, &weights, 1e-2);
                if obj < prev || t < 1e-12 {
                    assert!(obj <= prev, "objective rose: {prev} -> {obj}");
                    theta = cand;
                    prev = obj;
                    break;
                }
                t /= 2.0;
            }
        }
    }

    #[test]
    fn zero_weight_examples_are_ignored() {
        let features = vec![vec![0.0], vec![1.0], vec![50.0]];
        let labels = [0.0, 1.0, 0.0];
        let weights = [1.0, 1.0, 0.0];
        let with =
            fit_logistic_weighted(&features, &labels, Some(&weights), 1e-2, 1e-10, 100).unwrap();
        let without = fit_logistic(&features[..2], &labels[..2], 1e-2, 1e-10, 100);
        // Not identical (divisor differs) but the outlier must not dominate.
        assert!(with.weights[0] > 0.0);
        assert!(without.is_ok());
    }
}
