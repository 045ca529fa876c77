use std::collections::BTreeMap;

use super::stats::MatchStats;
use super::{Diagnostics, Ranker, Scores};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearConfig {
    pub max_terms: usize,
    pub tolerance: f64,
}

impl Default for LinearConfig {
    fn default() -> Self {
        LinearConfig {
            max_terms: 100,
            tolerance: 1e-9,
        }
    }
}

/// Linear tournament scores: the partial sums of `sum_t Mbar^t dbar`,
/// where `Mbar` is the match matrix with rows normalized to one and `dbar`
/// the mean dominance.
///
/// The series stops once a term's largest entry drops below the tolerance.
/// If `max_terms` is reached first the last partial sum is returned with
/// `converged = false`.
pub fn linear_tournament(stats: &MatchStats, cfg: &LinearConfig) -> Scores {
    let n = stats.len();
    let totals: Vec<f64> = (0..n).map(|i| stats.total_matches(i)).collect();
    let mut term = stats.mean_dominance();
    let mut sum = term.clone();
    let mut residual = term.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut terms = 0;
    let mut converged = residual < cfg.tolerance;

    while !converged && terms < cfg.max_terms {
        let next: Vec<f64> = (0..n)
            .map(|i| {
                let off: f64 = stats.opponents(i).map(|(j, w, l)| (w + l) * term[j]).sum();
                (term[i] + off) / totals[i]
            })
            .collect();
        terms += 1;
        residual = next.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (s, t) in sum.iter_mut().zip(&next) {
            *s += t;
        }
        term = next;
        converged = residual < cfg.tolerance;
    }

    let values: BTreeMap<String, f64> = stats.teams.iter().cloned().zip(sum).collect();
    Scores::new(
        Ranker::Linear,
        values,
        Diagnostics {
            iterations: terms,
            residual,
            converged,
        },
    )
}
