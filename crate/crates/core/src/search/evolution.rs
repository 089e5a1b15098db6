use std::collections::VecDeque;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};

use super::{Candidate, EvalOptions, RewardFn, SearchOutcome, SearchSpace, Tracker};

/// Uniform sampling baseline: `budget` independent candidates.
pub fn random_search<R: Rng + ?Sized>(
    space: &SearchSpace,
    reward: &dyn RewardFn,
    budget: usize,
    opts: EvalOptions,
    rng: &mut R,
) -> Result<SearchOutcome> {
    if budget == 0 {
        return Err(Error::invalid("search budget must be >= 1"));
    }
    let batch: Vec<Candidate> = (0..budget).map(|_| space.random_candidate(rng)).collect();
    let mut tracker = Tracker::new(reward, opts);
    tracker.evaluate(&batch);
    Ok(tracker.finish())
}

/// Changes one uniformly chosen token to a different, uniformly chosen
/// value of its vocabulary.
pub fn mutate<R: Rng + ?Sized>(c: &Candidate, space: &SearchSpace, rng: &mut R) -> Candidate {
    let mut child = c.clone();
    let pos = rng.gen_range(0..child.tokens.len());
    let vocab = space.vocab(pos);
    let mut v = rng.gen_range(0..vocab - 1);
    if v >= child.tokens[pos] {
        v += 1;
    }
    child.tokens[pos] = v;
    child
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvolutionConfig {
    pub population: usize,
    /// Tournament size.
    pub sample: usize,
    /// Total reward evaluations, initial population included.
    pub budget: usize,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            population: 64,
            sample: 16,
            budget: 5000,
        }
    }
}

/// Regularized (aging) evolution: the population is a queue; each cycle a
/// tournament picks a parent, its mutated child joins at the back and the
/// oldest member leaves.
pub fn evolution_search<R: Rng + ?Sized>(
    space: &SearchSpace,
    reward: &dyn RewardFn,
    cfg: EvolutionConfig,
    opts: EvalOptions,
    rng: &mut R,
) -> Result<SearchOutcome> {
    if cfg.sample == 0 || cfg.sample > cfg.population {
        return Err(Error::invalid(format!(
            "need population >= sample >= 1, got population {} sample {}",
            cfg.population, cfg.sample
        )));
    }
    if cfg.budget == 0 {
        return Err(Error::invalid("search budget must be >= 1"));
    }
    let mut tracker = Tracker::new(reward, opts);
    let init: Vec<Candidate> = (0..cfg.population.min(cfg.budget))
        .map(|_| space.random_candidate(rng))
        .collect();
    let scores = tracker.evaluate(&init);
    let mut population: VecDeque<(Candidate, f64)> = init.into_iter().zip(scores).collect();

    while tracker.len() < cfg.budget {
        let picks = index::sample(rng, population.len(), cfg.sample.min(population.len()));
        let mut winner = picks.index(0);
        for i in picks.iter() {
            if population[i].1 > population[winner].1 {
                winner = i;
            }
        }
        let child = mutate(&population[winner].0, space, rng);
        let score = tracker.evaluate(std::slice::from_ref(&child))[0];
        population.push_back((child, score));
        population.pop_front();
    }
    Ok(tracker.finish())
}
