use std::io::Write;
use std::process::Command;

use crate::error::{Error, Result};
use crate::policy::serialize_policy;

use super::{decode, Candidate, SearchSpace};

/// Maps a candidate to a reward in `[0, 1]`. Values outside that range are
/// treated as evaluation errors by the optimizers.
pub trait RewardFn: Send + Sync {
    fn evaluate(&self, candidate: &Candidate) -> Result<f64>;

    /// Stochastic rewards are averaged over repeated evaluations.
    fn is_deterministic(&self) -> bool {
        true
    }
}

impl<F> RewardFn for F
where
    F: Fn(&Candidate) -> Result<f64> + Send + Sync,
{
    fn evaluate(&self, candidate: &Candidate) -> Result<f64> {
        self(candidate)
    }
}

/// Fraction of tokens equal to a fixed target. Separable, with its unique
/// maximum 1.0 at the target; used to exercise the optimizers.
#[derive(Clone, Debug)]
pub struct TokenMatchReward {
    target: Candidate,
}

impl TokenMatchReward {
    pub fn new(target: Candidate, space: &SearchSpace) -> Result<Self> {
        if !space.is_valid(&target) {
            return Err(Error::invalid(format!("target {:?} is not a valid candidate", target.tokens)));
        }
        Ok(TokenMatchReward { target })
    }

    pub fn target(&self) -> &Candidate {
        &self.target
    }

    /// Expected reward of a uniformly random candidate.
    pub fn expected_uniform(space: &SearchSpace) -> f64 {
        (0..space.len()).map(|p| 1.0 / space.vocab(p) as f64).sum::<f64>() / space.len() as f64
    }
}

impl RewardFn for TokenMatchReward {
    fn evaluate(&self, c: &Candidate) -> Result<f64> {
        if c.tokens.len() != self.target.tokens.len() {
            return Err(Error::Reward(format!(
                "candidate has {} tokens, target {}",
                c.tokens.len(),
                self.target.tokens.len()
            )));
        }
        let hits = c.tokens.iter().zip(&self.target.tokens).filter(|(a, b)| a == b).count();
        Ok(hits as f64 / c.tokens.len() as f64)
    }
}

pub const POLICY_PLACEHOLDER: &str = "{policy}";

/// Runs a shell command per candidate. The decoded policy is written to a
/// temporary JSON file whose path replaces `{policy}` in the template; the
/// last non-empty stdout line must hold a single number in `[0, 1]`.
#[derive(Clone, Debug)]
pub struct ExternalReward {
    template: String,
    space: SearchSpace,
    deterministic: bool,
}

impl ExternalReward {
    pub fn new(template: impl Into<String>, space: SearchSpace) -> Result<Self> {
        let template = template.into();
        if template.trim().is_empty() {
            return Err(Error::invalid("reward command is empty"));
        }
        Ok(ExternalReward {
            template,
            space,
            deterministic: false,
        })
    }

    /// Declares the command deterministic so repeats are skipped.
    pub fn deterministic(mut self, yes: bool) -> Self {
        self.deterministic = yes;
        self
    }

    fn run(&self, c: &Candidate) -> Result<f64> {
        let policy = decode(c, &self.space)?;
        let mut file = tempfile::Builder::new()
            .prefix("policy-")
            .suffix(".json")
            .tempfile()
            .map_err(|e| Error::io(std::env::temp_dir(), e))?;
        file.write_all(serialize_policy(&policy, &self.space.levels).as_bytes())
            .map_err(|e| Error::io(file.path(), e))?;
        let path = file.path().to_string_lossy().into_owned();
        let cmd = self.template.replace(POLICY_PLACEHOLDER, &path);
        let output = Command::new("sh")
            .arg("-c")
            .arg(&cmd)
            .output()
            .map_err(|e| Error::Reward(format!("failed to spawn `{cmd}`: {e}")))?;
        if !output.status.success() {
            return Err(Error::Reward(format!(
                "`{cmd}` exited with {}: {}",
                output.status,
                String::from_utf8_lossy(&output.stderr).trim()
            )));
        }
        let stdout = String::from_utf8_lossy(&output.stdout);
        let line = stdout
            .lines()
            .rev()
            .map(str::trim)
            .find(|l| !l.is_empty())
            .ok_or_else(|| Error::Reward(format!("`{cmd}` printed nothing")))?;
        let value: f64 = line
            .parse()
            .map_err(|_| Error::Reward(format!("cannot parse reward from \"{line}\"")))?;
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::Reward(format!("reward {value} outside [0, 1]")));
        }
        Ok(value)
    }
}

impl RewardFn for ExternalReward {
    fn evaluate(&self, c: &Candidate) -> Result<f64> {
        self.run(c)
    }

    fn is_deterministic(&self) -> bool {
        self.deterministic
    }
}
