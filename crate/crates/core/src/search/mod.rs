//! Discrete policy search.
//!
//! A policy of `K` sub-policies with `N` operations each is flattened into
//! `K * N * 3` tokens: for every operation the kind index, the probability
//! level and the magnitude level, in that order. Optimizers only ever see
//! tokens; [`decode`] turns the best one back into a [`Policy`].

mod evolution;
mod ppo;
mod reward;

use std::io::Write;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::{LevelConfig, OpKind, OpSpec, Policy, SubPolicy};

pub use evolution::{evolution_search, mutate, random_search, EvolutionConfig};
pub use ppo::{policy_gradient, ppo_search, surrogate, surrogate_gradient, Controller, PpoConfig, PpoOutcome};
pub use reward::{ExternalReward, RewardFn, TokenMatchReward, POLICY_PLACEHOLDER};

/// Shape of the token space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchSpace {
    pub levels: LevelConfig,
    pub sub_policies: usize,
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace {
            levels: LevelConfig::default(),
            sub_policies: 5,
        }
    }
}

impl SearchSpace {
    pub fn num_kinds(&self) -> usize {
        OpKind::SEARCHABLE.len()
    }

    /// Number of tokens per candidate (30 for the default space).
    pub fn len(&self) -> usize {
        self.sub_policies * self.levels.ops_per_sub_policy * 3
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Vocabulary size of token position `pos`.
    pub fn vocab(&self, pos: usize) -> usize {
        match pos % 3 {
            0 => self.num_kinds(),
            1 => self.levels.probability_levels,
            _ => self.levels.magnitude_levels,
        }
    }

    pub fn random_candidate<R: Rng + ?Sized>(&self, rng: &mut R) -> Candidate {
        Candidate {
            tokens: (0..self.len()).map(|p| rng.gen_range(0..self.vocab(p))).collect(),
        }
    }

    pub fn is_valid(&self, c: &Candidate) -> bool {
        c.tokens.len() == self.len() && c.tokens.iter().enumerate().all(|(p, &t)| t < self.vocab(p))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Candidate {
    pub tokens: Vec<usize>,
}

impl Candidate {
    pub fn new(tokens: Vec<usize>, space: &SearchSpace) -> Result<Self> {
        let c = Candidate { tokens };
        if !space.is_valid(&c) {
            return Err(Error::invalid(format!(
                "candidate {:?} does not fit a space of {} tokens",
                c.tokens,
                space.len()
            )));
        }
        Ok(c)
    }
}

pub fn decode(c: &Candidate, space: &SearchSpace) -> Result<Policy> {
    if !space.is_valid(c) {
        return Err(Error::invalid(format!("invalid candidate {:?}", c.tokens)));
    }
    let n = space.levels.ops_per_sub_policy;
    let ops: Vec<OpSpec> = c
        .tokens
        .chunks_exact(3)
        .map(|t| OpSpec::new(OpKind::SEARCHABLE[t[0]], t[1], t[2]))
        .collect();
    Policy::new(ops.chunks_exact(n).map(|o| SubPolicy { ops: o.to_vec() }).collect())
}

/// Fails on `NoOp`, on levels outside the grid, or when the policy shape
/// differs from the space.
pub fn encode(p: &Policy, space: &SearchSpace) -> Result<Candidate> {
    if p.sub_policies.len() != space.sub_policies {
        return Err(Error::invalid(format!(
            "policy has {} sub-policies, search space expects {}",
            p.sub_policies.len(),
            space.sub_policies
        )));
    }
    p.validate(&space.levels)?;
    let mut tokens = Vec::with_capacity(space.len());
    for op in p.sub_policies.iter().flat_map(|sp| &sp.ops) {
        let kind = op
            .kind
            .token()
            .ok_or_else(|| Error::invalid(format!("{} cannot be encoded as a search token", op.kind)))?;
        tokens.extend([kind, op.prob_level, op.mag_level]);
    }
    Candidate::new(tokens, space)
}

/// One evaluated candidate, as written to the run log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub index: usize,
    pub tokens: Vec<usize>,
    pub reward: f64,
    pub best_so_far: f64,
    pub wall_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalOptions {
    /// Evaluations averaged per candidate, for stochastic rewards.
    pub repeats: usize,
    /// Measure wall time per evaluation. Off by default so run logs are
    /// byte-reproducible.
    pub record_timing: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            repeats: 1,
            record_timing: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub best: Candidate,
    pub best_reward: f64,
    pub history: Vec<Evaluation>,
}

struct Scored {
    reward: f64,
    error: Option<String>,
    wall_ms: u64,
}

fn score_one(reward: &dyn RewardFn, c: &Candidate, opts: &EvalOptions) -> Scored {
    let start = opts.record_timing.then(Instant::now);
    let repeats = if reward.is_deterministic() { 1 } else { opts.repeats.max(1) };
    let mut total = 0.0;
    let mut error = None;
    for _ in 0..repeats {
        match reward.evaluate(c) {
            Ok(r) if (0.0..=1.0).contains(&r) => total += r,
            Ok(r) => {
                error = Some(format!("reward {r} outside [0, 1]"));
                break;
            }
            Err(e) => {
                error = Some(e.to_string());
                break;
            }
        }
    }
    Scored {
        reward: if error.is_some() { 0.0 } else { total / repeats as f64 },
        error,
        wall_ms: start.map_or(0, |s| s.elapsed().as_millis() as u64),
    }
}

/// Keeps the ordered history and the best candidate seen so far.
pub(crate) struct Tracker<'a> {
    reward: &'a dyn RewardFn,
    opts: EvalOptions,
    history: Vec<Evaluation>,
    best: Option<(Candidate, f64)>,
}

impl<'a> Tracker<'a> {
    pub(crate) fn new(reward: &'a dyn RewardFn, opts: EvalOptions) -> Self {
        Tracker {
            reward,
            opts,
            history: Vec::new(),
            best: None,
        }
    }

    /// Scores a batch in parallel and records it in submission order.
    pub(crate) fn evaluate(&mut self, batch: &[Candidate]) -> Vec<f64> {
        let scored: Vec<Scored> = batch.par_iter().map(|c| score_one(self.reward, c, &self.opts)).collect();
        batch
            .iter()
            .zip(scored)
            .map(|(c, s)| {
                if self.best.as_ref().is_none_or(|(_, b)| s.reward > *b) {
                    self.best = Some((c.clone(), s.reward));
                }
                self.history.push(Evaluation {
                    index: self.history.len(),
                    tokens: c.tokens.clone(),
                    reward: s.reward,
                    best_so_far: self.best.as_ref().map_or(s.reward, |b| b.1),
                    wall_ms: s.wall_ms,
                    error: s.error,
                });
                s.reward
            })
            .collect()
    }

    pub(crate) fn len(&self) -> usize {
        self.history.len()
    }

    pub(crate) fn finish(self) -> SearchOutcome {
        let (best, best_reward) = self.best.expect("at least one evaluation");
        SearchOutcome {
            best,
            best_reward,
            history: self.history,
        }
    }
}

/// Line-delimited JSON, one record per evaluation.
pub fn write_history_jsonl<W: Write>(history: &[Evaluation], mut out: W) -> Result<()> {
    for e in history {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n").map_err(|err| Error::io("<search log>", err))?;
    }
    Ok(())
}
