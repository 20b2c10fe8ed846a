//! Shapley value estimators over abstract cooperative games.
//!
//! The Shapley value of player `i` is
//!
//! ```text
//! phi_i = sum over S not containing i of |S|! (n - |S| - 1)! / n! * (v(S + i) - v(S))
//! ```
//!
//! [`shapley_exact`] enumerates all `2^n` coalitions. [`shapley_permutation`]
//! averages marginal contributions over uniformly random player orderings;
//! because every ordering's marginals telescope to `v(N) - v({})`, its
//! estimates satisfy efficiency up to rounding regardless of sample count.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Coalition, ExplainError};

pub const DEFAULT_EXACT_LIMIT: usize = 12;
pub const DEFAULT_SAMPLES: usize = 2000;

/// Efficiency tolerance of the exact estimator.
pub const EXACT_TOLERANCE: f64 = 1e-9;

/// Coalition values are requested in batches so text games can dispatch
/// them through one classifier batch.
pub trait ValueFunction: Sync {
    fn players(&self) -> usize;

    fn evaluate(&self, coalitions: &[Coalition]) -> Result<Vec<f64>, ExplainError>;
}

/// A game given by a plain function of the coalition.
pub struct GameFn<F> {
    n: usize,
    f: F,
}

impl<F: Fn(&Coalition) -> f64 + Sync> GameFn<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F: Fn(&Coalition) -> f64 + Sync> ValueFunction for GameFn<F> {
    fn players(&self) -> usize {
        self.n
    }

    fn evaluate(&self, coalitions: &[Coalition]) -> Result<Vec<f64>, ExplainError> {
        Ok(coalitions.iter().map(&self.f).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Exact,
    Permutation,
    Hierarchical,
}

impl Estimator {
    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::Exact => "exact",
            Estimator::Permutation => "permutation",
            Estimator::Hierarchical => "hierarchical",
        }
    }
}

impl std::str::FromStr for Estimator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Estimator::Exact),
            "permutation" => Ok(Estimator::Permutation),
            "hierarchical" => Ok(Estimator::Hierarchical),
            other => Err(format!("unknown estimator {other:?}")),
        }
    }
}

/// Per-player Shapley estimates for one game.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapleyValues {
    /// v of the empty coalition.
    pub base_value: f64,
    /// v of the grand coalition.
    pub full_value: f64,
    pub phi: Vec<f64>,
    /// Standard error of each estimate; zero for exact values.
    pub stderr: Vec<f64>,
    pub estimator: Estimator,
    /// Number of sampled permutations (0 for exact enumeration).
    pub sample_count: usize,
    pub seed: Option<u64>,
}

impl ShapleyValues {
    /// `|base + sum(phi) - v(N)|`
    pub fn efficiency_gap(&self) -> f64 {
        (self.base_value + self.phi.iter().sum::<f64>() - self.full_value).abs()
    }
}

/// Shapley weights `s! (n-s-1)! / n!` for `s = 0..n`, computed as
/// `1 / (n * C(n-1, s))`.
fn shapley_weights(n: usize) -> Vec<f64> {
    let mut weights = Vec::with_capacity(n);
    let mut binom = 1.0f64; // C(n-1, s)
    for s in 0..n {
        weights.push(1.0 / (n as f64 * binom));
        binom = binom * (n - 1 - s) as f64 / (s + 1) as f64;
    }
    weights
}

/// Exact Shapley values by enumerating every coalition.
pub fn shapley_exact(game: &dyn ValueFunction, exact_limit: usize) -> Result<ShapleyValues, ExplainError> {
    let n = game.players();
    if n > exact_limit || n >= 64 {
        return Err(ExplainError::TooManyPlayers {
            players: n,
            limit: exact_limit.min(63),
        });
    }
    let coalitions: Vec<Coalition> = (0..1u64 << n).map(|m| Coalition::from_mask(n, m)).collect();
    let values = game.evaluate(&coalitions)?;
    check_len(&values, coalitions.len())?;

    let weights = shapley_weights(n);
    let mut phi = vec![0.0; n];
    for (i, phi_i) in phi.iter_mut().enumerate() {
        let bit = 1usize << i;
        let mut acc = 0.0;
        for mask in 0..values.len() {
            if mask & bit == 0 {
                let size = mask.count_ones() as usize;
                acc += weights[size] * (values[mask | bit] - values[mask]);
            }
        }
        *phi_i = acc;
    }
    Ok(ShapleyValues {
        base_value: values[0],
        full_value: values[values.len() - 1],
        phi,
        stderr: vec![0.0; n],
        estimator: Estimator::Exact,
        sample_count: 0,
        seed: None,
    })
}

fn check_len(values: &[f64], expected: usize) -> Result<(), ExplainError> {
    if values.len() != expected {
        return Err(ExplainError::Game(format!(
            "value function returned {} values for {expected} coalitions",
            values.len()
        )));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(ExplainError::Game(format!("value function returned {bad}")));
    }
    Ok(())
}

/// Draws `samples` orderings of `n` players from one seeded stream.
pub fn sample_permutations(n: usize, samples: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(&mut rng);
            p
        })
        .collect()
}

/// Orderings evaluated per dispatch; bounds the size of one coalition batch.
const PERMUTATIONS_PER_BLOCK: usize = 256;

/// Monte Carlo Shapley estimates from `samples` random orderings.
///
/// All orderings are drawn from the seeded generator before any evaluation;
/// coalition values are memoized, so each distinct coalition is evaluated once.
pub fn shapley_permutation(
    game: &dyn ValueFunction,
    samples: usize,
    seed: u64,
) -> Result<ShapleyValues, ExplainError> {
    if samples == 0 {
        return Err(ExplainError::InvalidSamples);
    }
    let n = game.players();
    let permutations = sample_permutations(n, samples, seed);

    let mut memo: HashMap<Coalition, f64> = HashMap::new();
    let mut sum = vec![0.0; n];
    let mut sum_sq = vec![0.0; n];

    for block in permutations.chunks(PERMUTATIONS_PER_BLOCK) {
        let mut pending: Vec<Coalition> = Vec::new();
        let mut queued: std::collections::HashSet<Coalition> = std::collections::HashSet::new();
        for perm in block {
            let mut c = Coalition::empty(n);
            for k in 0..=n {
                if !memo.contains_key(&c) && !queued.contains(&c) {
                    queued.insert(c.clone());
                    pending.push(c.clone());
                }
                if k < n {
                    c.insert(perm[k]);
                }
            }
        }
        if !pending.is_empty() {
            let values = game.evaluate(&pending)?;
            check_len(&values, pending.len())?;
            memo.extend(pending.into_iter().zip(values));
        }

        for perm in block {
            let mut c = Coalition::empty(n);
            let mut prev = memo[&c];
            for &player in perm {
                c.insert(player);
                let next = memo[&c];
                let marginal = next - prev;
                sum[player] += marginal;
                sum_sq[player] += marginal * marginal;
                prev = next;
            }
        }
    }

    let m = samples as f64;
    let phi: Vec<f64> = sum.iter().map(|s| s / m).collect();
    let stderr = sum
        .iter()
        .zip(&sum_sq)
        .map(|(s, sq)| {
            if samples < 2 {
                return 0.0;
            }
            let mean = s / m;
            let var = ((sq - m * mean * mean) / (m - 1.0)).max(0.0);
            (var / m).sqrt()
        })
        .collect();

    Ok(ShapleyValues {
        base_value: memo[&Coalition::empty(n)],
        full_value: memo[&Coalition::full(n)],
        phi,
        stderr,
        estimator: Estimator::Permutation,
        sample_count: samples,
        seed: Some(seed),
    })
}

/// Exact when `n <= exact_limit`, otherwise permutation sampling.
pub fn shapley_auto(
    game: &dyn ValueFunction,
    exact_limit: usize,
    samples: usize,
    seed: u64,
) -> Result<ShapleyValues, ExplainError> {
    if game.players() <= exact_limit {
        shapley_exact(game, exact_limit)
    } else {
        shapley_permutation(game, samples, seed)
    }
}
