//! PPO over a factorized controller: one independent categorical per token
//! position. The clipped surrogate and its gradient are computed in closed
//! form; parameters are updated with Adam.

use rand::Rng;

use crate::error::{Error, Result};

use super::{Candidate, EvalOptions, RewardFn, SearchOutcome, SearchSpace, Tracker};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PpoConfig {
    pub iterations: usize,
    pub batch: usize,
    pub clip_eps: f64,
    pub lr: f64,
    /// Gradient steps per sampled batch.
    pub epochs: usize,
    /// Decay of the exponential-moving-average reward baseline.
    pub ema_decay: f64,
}

impl Default for PpoConfig {
    fn default() -> Self {
        PpoConfig {
            iterations: 300,
            batch: 64,
            clip_eps: 0.2,
            lr: 0.05,
            epochs: 4,
            ema_decay: 0.9,
        }
    }
}

/// Per-step logits and the reward baseline.
#[derive(Clone, Debug, PartialEq)]
pub struct Controller {
    pub logits: Vec<Vec<f64>>,
    /// `None` until the first batch has been scored.
    pub baseline: Option<f64>,
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

impl Controller {
    /// Uniform controller for `space`.
    pub fn new(space: &SearchSpace) -> Self {
        Controller {
            logits: (0..space.len()).map(|p| vec![0.0; space.vocab(p)]).collect(),
            baseline: None,
        }
    }

    pub fn probs(&self) -> Vec<Vec<f64>> {
        self.logits.iter().map(|l| softmax(l)).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Candidate {
        let tokens = self
            .probs()
            .iter()
            .map(|p| {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for (i, &pi) in p.iter().enumerate() {
                    acc += pi;
                    if u < acc {
                        return i;
                    }
                }
                p.len() - 1
            })
            .collect();
        Candidate { tokens }
    }

    /// Most likely token at every step.
    pub fn mode(&self) -> Candidate {
        let tokens = self
            .logits
            .iter()
            .map(|l| {
                l.iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
                    .0
            })
            .collect();
        Candidate { tokens }
    }
}

/// Per-step probability ratio and whether the unclipped branch is the one
/// selected by the min (only then does the term carry gradient).
fn ratio_and_active(new_p: f64, old_p: f64, adv: f64, clip_eps: f64) -> (f64, bool) {
    let rho = new_p / old_p;
    let active = if adv >= 0.0 { rho <= 1.0 + clip_eps } else { rho >= 1.0 - clip_eps };
    (rho, active)
}

/// Clipped surrogate objective
/// `1/B * sum_b sum_s min(rho A_b, clip(rho, 1-eps, 1+eps) A_b)`.
pub fn surrogate(
    logits: &[Vec<f64>],
    old_probs: &[Vec<f64>],
    actions: &[Candidate],
    advantages: &[f64],
    clip_eps: f64,
) -> f64 {
    let probs: Vec<Vec<f64>> = logits.iter().map(|l| softmax(l)).collect();
    let mut total = 0.0;
    for (c, &adv) in actions.iter().zip(advantages) {
        for (s, &a) in c.tokens.iter().enumerate() {
            let rho = probs[s][a] / old_probs[s][a];
            let clipped = rho.clamp(1.0 - clip_eps, 1.0 + clip_eps);
            total += (rho * adv).min(clipped * adv);
        }
    }
    total / actions.len() as f64
}

/// Gradient of [`surrogate`] with respect to the logits.
pub fn surrogate_gradient(
    logits: &[Vec<f64>],
    old_probs: &[Vec<f64>],
    actions: &[Candidate],
    advantages: &[f64],
    clip_eps: f64,
) -> Vec<Vec<f64>> {
    let probs: Vec<Vec<f64>> = logits.iter().map(|l| softmax(l)).collect();
    let mut grad: Vec<Vec<f64>> = logits.iter().map(|l| vec![0.0; l.len()]).collect();
    let scale = 1.0 / actions.len() as f64;
    for (c, &adv) in actions.iter().zip(advantages) {
        for (s, &a) in c.tokens.iter().enumerate() {
            let (rho, active) = ratio_and_active(probs[s][a], old_probs[s][a], adv, clip_eps);
            if !active || adv == 0.0 {
                continue;
            }
            // d rho / d logit_j = rho * (1[j == a] - p_j)
            let w = scale * adv * rho;
            for (j, g) in grad[s].iter_mut().enumerate() {
                *g -= w * probs[s][j];
            }
            grad[s][a] += w;
        }
    }
    grad
}

/// REINFORCE gradient `1/B * sum_b A_b * grad log pi(a_b)`.
pub fn policy_gradient(logits: &[Vec<f64>], actions: &[Candidate], advantages: &[f64]) -> Vec<Vec<f64>> {
    let probs: Vec<Vec<f64>> = logits.iter().map(|l| softmax(l)).collect();
    let mut grad: Vec<Vec<f64>> = logits.iter().map(|l| vec![0.0; l.len()]).collect();
    let scale = 1.0 / actions.len() as f64;
    for (c, &adv) in actions.iter().zip(advantages) {
        for (s, &a) in c.tokens.iter().enumerate() {
            for (j, g) in grad[s].iter_mut().enumerate() {
                let indicator = if j == a { 1.0 } else { 0.0 };
                *g += scale * adv * (indicator - probs[s][j]);
            }
        }
    }
    grad
}

struct Adam {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: i32,
}

impl Adam {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(shape: &[Vec<f64>]) -> Self {
        Adam {
            m: shape.iter().map(|l| vec![0.0; l.len()]).collect(),
            v: shape.iter().map(|l| vec![0.0; l.len()]).collect(),
            t: 0,
        }
    }

    /// Gradient ascent step.
    fn step(&mut self, params: &mut [Vec<f64>], grad: &[Vec<f64>], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::B1.powi(self.t);
        let c2 = 1.0 - Self::B2.powi(self.t);
        for s in 0..params.len() {
            for j in 0..params[s].len() {
                let g = grad[s][j];
                self.m[s][j] = Self::B1 * self.m[s][j] + (1.0 - Self::B1) * g;
                self.v[s][j] = Self::B2 * self.v[s][j] + (1.0 - Self::B2) * g * g;
                let mhat = self.m[s][j] / c1;
                let vhat = self.v[s][j] / c2;
                params[s][j] += lr * mhat / (vhat.sqrt() + Self::EPS);
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct PpoOutcome {
    pub search: SearchOutcome,
    pub controller: Controller,
    /// Mean sampled reward of each iteration's batch.
    pub mean_rewards: Vec<f64>,
}

pub fn ppo_search<R: Rng + ?Sized>(
    space: &SearchSpace,
    reward: &dyn RewardFn,
    cfg: PpoConfig,
    opts: EvalOptions,
    rng: &mut R,
) -> Result<PpoOutcome> {
    if cfg.batch < 2 {
        return Err(Error::invalid(format!("PPO batch must be >= 2, got {}", cfg.batch)));
    }
    if cfg.clip_eps.is_nan() || cfg.clip_eps <= 0.0 {
        return Err(Error::invalid(format!("clip_eps must be > 0, got {}", cfg.clip_eps)));
    }
    if cfg.iterations == 0 || cfg.epochs == 0 {
        return Err(Error::invalid("iterations and epochs must be >= 1"));
    }
    let mut ctl = Controller::new(space);
    let mut adam = Adam::new(&ctl.logits);
    let mut tracker = Tracker::new(reward, opts);
    let mut mean_rewards = Vec::with_capacity(cfg.iterations);

    for iter in 0..cfg.iterations {
        let old_probs = ctl.probs();
        let batch: Vec<Candidate> = (0..cfg.batch).map(|_| ctl.sample(rng)).collect();
        let rewards = tracker.evaluate(&batch);
        let mean = rewards.iter().sum::<f64>() / rewards.len() as f64;
        mean_rewards.push(mean);

        let baseline = *ctl.baseline.get_or_insert(mean);
        let advantages: Vec<f64> = rewards.iter().map(|r| r - baseline).collect();
        for _ in 0..cfg.epochs {
            let grad = surrogate_gradient(&ctl.logits, &old_probs, &batch, &advantages, cfg.clip_eps);
            adam.step(&mut ctl.logits, &grad, cfg.lr);
        }
        if let Some((s, j)) = ctl
            .logits
            .iter()
            .enumerate()
            .find_map(|(s, l)| l.iter().position(|v| !v.is_finite()).map(|j| (s, j)))
        {
            return Err(Error::Numerical(format!(
                "controller logit [{s}][{j}] = {} after iteration {iter}",
                ctl.logits[s][j]
            )));
        }
        ctl.baseline = Some(cfg.ema_decay * baseline + (1.0 - cfg.ema_decay) * mean);
    }
    Ok(PpoOutcome {
        search: tracker.finish(),
        controller: ctl,
        mean_rewards,
    })
}
