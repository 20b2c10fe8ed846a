//! Two-stage Shapley attribution for long documents.
//!
//! Stage one treats each sentence as a player. Stage two re-explains the
//! `top_k` sentences with the largest `|phi|` word by word, holding every
//! other sentence present, then shifts the word values by an equal share of
//! the residual so they sum to that sentence's stage-one value. Document
//! efficiency therefore carries over from stage one.

use std::ops::Range;

use super::{shapley_auto, Coalition, ExplainError, ShapleyValues, ValueFunction};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HierarchyParams {
    pub top_k: usize,
    pub exact_limit: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for HierarchyParams {
    fn default() -> Self {
        Self {
            top_k: 3,
            exact_limit: super::DEFAULT_EXACT_LIMIT,
            samples: super::DEFAULT_SAMPLES,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinedSentence {
    pub sentence: usize,
    /// Word-feature indices belonging to the sentence.
    pub words: Range<usize>,
    /// Word values after the residual shift.
    pub values: ShapleyValues,
    /// Sum of the word values before the shift.
    pub raw_sum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HierarchicalValues {
    pub sentences: ShapleyValues,
    /// Refined sentences in document order.
    pub refined: Vec<RefinedSentence>,
}

/// Sentence-level view of a word-level game.
struct GroupGame<'a> {
    inner: &'a dyn ValueFunction,
    groups: &'a [Range<usize>],
}

impl ValueFunction for GroupGame<'_> {
    fn players(&self) -> usize {
        self.groups.len()
    }

    fn evaluate(&self, coalitions: &[Coalition]) -> Result<Vec<f64>, ExplainError> {
        let n = self.inner.players();
        let expanded: Vec<Coalition> = coalitions
            .iter()
            .map(|c| Coalition::from_members(n, c.members().flat_map(|g| self.groups[g].clone())))
            .collect();
        self.inner.evaluate(&expanded)
    }
}

/// Words of one sentence varied, everything else present.
struct SubGame<'a> {
    inner: &'a dyn ValueFunction,
    words: Range<usize>,
}

impl ValueFunction for SubGame<'_> {
    fn players(&self) -> usize {
        self.words.len()
    }

    fn evaluate(&self, coalitions: &[Coalition]) -> Result<Vec<f64>, ExplainError> {
        let n = self.inner.players();
        let expanded: Vec<Coalition> = coalitions
            .iter()
            .map(|c| {
                let mut full = Coalition::full(n);
                for (k, w) in self.words.clone().enumerate() {
                    if !c.contains(k) {
                        full.remove(w);
                    }
                }
                full
            })
            .collect();
        self.inner.evaluate(&expanded)
    }
}

fn check_groups(n: usize, groups: &[Range<usize>]) -> Result<(), ExplainError> {
    if groups.is_empty() {
        return Err(ExplainError::EmptyDocument);
    }
    let mut cursor = 0;
    for g in groups {
        if g.start != cursor || g.end < g.start {
            return Err(ExplainError::Misaligned(format!(
                "sentence groups must tile the word features; saw {g:?} at {cursor}"
            )));
        }
        cursor = g.end;
    }
    if cursor != n {
        return Err(ExplainError::Misaligned(format!(
            "sentence groups cover {cursor} of {n} word features"
        )));
    }
    Ok(())
}

/// Runs both stages. `groups[j]` is the range of word features in sentence `j`.
pub fn shapley_hierarchical(
    word_game: &dyn ValueFunction,
    groups: &[Range<usize>],
    params: &HierarchyParams,
) -> Result<HierarchicalValues, ExplainError> {
    check_groups(word_game.players(), groups)?;
    let sentence_game = GroupGame {
        inner: word_game,
        groups,
    };
    let sentences = shapley_auto(&sentence_game, params.exact_limit, params.samples, params.seed)?;

    let mut order: Vec<usize> = (0..groups.len()).filter(|&j| !groups[j].is_empty()).collect();
    order.sort_by(|&a, &b| sentences.phi[b].abs().total_cmp(&sentences.phi[a].abs()).then(a.cmp(&b)));
    order.truncate(params.top_k);
    order.sort_unstable();

    let mut refined = Vec::with_capacity(order.len());
    for j in order {
        let sub = SubGame {
            inner: word_game,
            words: groups[j].clone(),
        };
        let seed = params.seed.wrapping_add(j as u64);
        let mut values = shapley_auto(&sub, params.exact_limit, params.samples, seed)?;
        let raw_sum: f64 = values.phi.iter().sum();
        let shift = (sentences.phi[j] - raw_sum) / values.phi.len() as f64;
        for p in &mut values.phi {
            *p += shift;
        }
        refined.push(RefinedSentence {
            sentence: j,
            words: groups[j].clone(),
            values,
            raw_sum,
        });
    }
    Ok(HierarchicalValues { sentences, refined })
}
