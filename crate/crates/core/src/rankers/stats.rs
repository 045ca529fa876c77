use std::collections::BTreeMap;

use crate::sanitize::WeightedDigraph;

/// Win/match statistics of an incomplete tournament.
///
/// Teams are indexed in id order. Off-diagonal results are kept sparsely;
/// every team additionally plays one dummy match against itself with no
/// winner, so `m_ii = 1` and `r_ii = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchStats {
    pub teams: Vec<String>,
    /// `results[i][j] = (r_ij, r_ji)` for every opponent `j != i`.
    results: Vec<BTreeMap<usize, (f64, f64)>>,
}

impl MatchStats {
    pub fn new(teams: Vec<String>) -> Self {
        let n = teams.len();
        MatchStats {
            teams,
            results: vec![BTreeMap::new(); n],
        }
    }

    /// Records `wins` victories of `winner` over `loser`.
    pub fn add_wins(&mut self, winner: usize, loser: usize, wins: f64) {
        assert_ne!(winner, loser, "a team cannot beat itself");
        self.results[winner].entry(loser).or_default().0 += wins;
        self.results[loser].entry(winner).or_default().1 += wins;
    }

    pub fn len(&self) -> usize {
        self.teams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.teams.is_empty()
    }

    pub fn index_of(&self, team: &str) -> Option<usize> {
        self.teams.binary_search_by(|t| t.as_str().cmp(team)).ok()
    }

    /// `m_ij`, including the self match on the diagonal.
    pub fn matches(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 1.0;
        }
        self.results[i].get(&j).map_or(0.0, |&(a, b)| a + b)
    }

    /// `r_ij`, wins of `i` over `j`.
    pub fn wins(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        self.results[i].get(&j).map_or(0.0, |&(won, _)| won)
    }

    /// `d_ij = r_ij - r_ji`.
    pub fn dominance(&self, i: usize, j: usize) -> f64 {
        self.wins(i, j) - self.wins(j, i)
    }

    /// Opponents of `i` with `(j, r_ij, r_ji)`, in index order.
    pub fn opponents(&self, i: usize) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.results[i]
            .iter()
            .map(|(&j, &(won, lost))| (j, won, lost))
    }

    /// `m_i = sum_j m_ij`, counting the self match.
    pub fn total_matches(&self, i: usize) -> f64 {
        1.0 + self.opponents(i).map(|(_, w, l)| w + l).sum::<f64>()
    }

    /// `rho_i = sum_j r_ij`.
    pub fn total_wins(&self, i: usize) -> f64 {
        self.opponents(i).map(|(_, w, _)| w).sum()
    }

    /// `dbar_i = (sum_j d_ij) / m_i`.
    pub fn mean_dominance(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let d: f64 = self.opponents(i).map(|(_, w, l)| w - l).sum();
                d / self.total_matches(i)
            })
            .collect()
    }
}

/// Reads a weighted digraph as match outcomes: an edge `u -> v` of weight
/// `w` means `v` beat `u` `w` times.
pub fn to_match_stats(graph: &WeightedDigraph) -> MatchStats {
    let mut stats = MatchStats::new(graph.nodes.iter().cloned().collect());
    for ((worse, better), &w) in &graph.edges {
        let loser = stats.index_of(worse).expect("edge endpoint is a node");
        let winner = stats.index_of(better).expect("edge endpoint is a node");
        stats.add_wins(winner, loser, w);
    }
    stats
}
