use std::collections::BTreeMap;

use super::stats::MatchStats;
use super::{Diagnostics, Ranker, Scores};

/// Bound on fitted team values. Teams that won (or lost) every match have no
/// finite fit; clamping keeps them ranked first (or last) without diverging.
pub const VALUE_CLAMP: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialConfig {
    pub learning_rate: f64,
    pub max_iterations: usize,
    /// Target for the largest win-total residual.
    pub tolerance: f64,
}

impl Default for ExponentialConfig {
    fn default() -> Self {
        ExponentialConfig {
            learning_rate: 0.1,
            max_iterations: 5000,
            tolerance: 1e-8,
        }
    }
}

/// Fitted team values and the resulting win probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialFit {
    pub values: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl ExponentialFit {
    /// Probability that team `i` beats team `j`.
    pub fn win_probability(&self, i: usize, j: usize) -> f64 {
        logistic(self.values[i] - self.values[j])
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `ln(logistic(x))` without overflow.
fn log_logistic(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Fits team values `v` so that each team's observed win total matches
/// `sum_j m_ij / (1 + exp(v_j - v_i))`, by gradient descent on the squared
/// residual. Values start at zero and are re-centered to sum zero after
/// every step.
///
/// The learning rate is scaled by the curvature bound `(m_max / 2)^2`, where
/// `m_max` is the largest number of real matches played by one team, so the
/// same rate is stable for unit and count-weighted tournaments alike.
pub fn fit_exponential(stats: &MatchStats, cfg: &ExponentialConfig) -> ExponentialFit {
    let n = stats.len();
    let observed: Vec<f64> = (0..n).map(|i| stats.total_wins(i)).collect();
    let played: Vec<f64> = (0..n).map(|i| stats.total_matches(i) - 1.0).collect();
    let m_max = played.iter().fold(0.0f64, |m, &x| m.max(x));
    let step = cfg.learning_rate / (m_max / 2.0).powi(2).max(1.0);

    let mut values = vec![0.0; n];
    let mut residuals = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;

    let residual = loop {
        for i in 0..n {
            let predicted: f64 = stats
                .opponents(i)
                .map(|(j, w, l)| (w + l) * logistic(values[i] - values[j]))
                .sum();
            residuals[i] = observed[i] - predicted;
        }
        let residual = residuals.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        if residual < cfg.tolerance {
            converged = true;
            break residual;
        }
        if iterations == cfg.max_iterations {
            break residual;
        }
        iterations += 1;

        // d/dv_k sum_i e_i^2 = -2 sum_j m_kj p_kj (1 - p_kj) (e_k - e_j)
        let gradient: Vec<f64> = (0..n)
            .map(|k| {
                -2.0 * stats
                    .opponents(k)
                    .map(|(j, w, l)| {
                        let p = logistic(values[k] - values[j]);
                        (w + l) * p * (1.0 - p) * (residuals[k] - residuals[j])
                    })
                    .sum::<f64>()
            })
            .collect();
        let mut moved = 0.0f64;
        for (v, g) in values.iter_mut().zip(&gradient) {
            let next = (*v - step * g).clamp(-VALUE_CLAMP, VALUE_CLAMP);
            moved = moved.max((next - *v).abs());
            *v = next;
        }
        recenter(&mut values);
        if moved == 0.0 {
            break residual;
        }
    };

    ExponentialFit {
        values,
        diagnostics: Diagnostics {
            iterations,
            residual,
            converged,
        },
    }
}

fn recenter(values: &mut [f64]) {
    if values.is_empty() {
        return;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    for v in values.iter_mut() {
        *v -= mean;
    }
}

/// Scores each team by `sum_{j != i} ln p_ij`, the log-probability that it
/// beats every other team under the fitted model.
pub fn exponential_tournament(stats: &MatchStats, cfg: &ExponentialConfig) -> Scores {
    let fit = fit_exponential(stats, cfg);
    let n = stats.len();
    let values: BTreeMap<String, f64> = (0..n)
        .map(|i| {
            let log_p: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| log_logistic(fit.values[i] - fit.values[j]))
                .sum();
            (stats.teams[i].clone(), log_p)
        })
        .collect();
    Scores::new(Ranker::Exponential, values, fit.diagnostics)
}
