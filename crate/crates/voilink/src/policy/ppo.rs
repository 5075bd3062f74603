//! Proximal policy optimization over the discrete rate menu.
//!
//! An actor network maps the normalized observation to a categorical
//! distribution over menu indices; a critic of the same body estimates the
//! discounted return. Rollouts accumulate in a fixed-capacity buffer;
//! each [`PpoAgent::ppo_update`] runs generalized advantage estimation
//! backward over the buffer, normalizes the advantages, and takes several
//! epochs of clipped-surrogate minibatch steps with Adam on both heads.
//!
//! Gradients are computed in logit space (the closed forms are short and
//! avoid dividing by vanishing probabilities) and flow through
//! [`Mlp::backward_from_logits`]; every step is deterministic given the
//! caller-supplied RNG, so identical seeds reproduce identical parameter
//! trajectories bit for bit.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::nn::{
    self, log_softmax, AdamState, Gradients, Head, Mlp,
};
use crate::policy::{ActionSpace, MdpState, StateNormalizer, STATE_DIM};
use crate::seeds;

/// Width of the two hidden layers in both actor and critic.
pub const HIDDEN_WIDTH: usize = 64;

/// Learner hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PpoConfig {
    /// Clipping radius of the surrogate ratio.
    pub clip: f64,
    /// Discount applied between decisions.
    pub discount: f64,
    /// Generalized-advantage-estimation mixing factor.
    pub gae_lambda: f64,
    /// Optimization epochs per full buffer.
    pub epochs: usize,
    pub minibatch_size: usize,
    /// Transitions collected per update.
    pub rollout_capacity: usize,
    pub value_loss_weight: f64,
    pub entropy_weight: f64,
    pub learning_rate: f64,
}

impl Default for PpoConfig {
    fn default() -> Self {
        PpoConfig {
            clip: 0.2,
            discount: 0.99,
            gae_lambda: 0.95,
            epochs: 4,
            minibatch_size: 64,
            rollout_capacity: 2048,
            value_loss_weight: 0.5,
            entropy_weight: 0.01,
            learning_rate: 1e-4,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<()> {
        let checks: [(&'static str, f64, bool); 7] = [
            ("clip", self.clip, self.clip > 0.0 && self.clip < 1.0),
            ("discount", self.discount, (0.0..=1.0).contains(&self.discount)),
            ("gae_lambda", self.gae_lambda, (0.0..=1.0).contains(&self.gae_lambda)),
            (
                "value_loss_weight",
                self.value_loss_weight,
                self.value_loss_weight >= 0.0 && self.value_loss_weight.is_finite(),
            ),
            (
                "entropy_weight",
                self.entropy_weight,
                self.entropy_weight >= 0.0 && self.entropy_weight.is_finite(),
            ),
            (
                "learning_rate",
                self.learning_rate,
                self.learning_rate >= 0.0 && self.learning_rate.is_finite(),
            ),
            (
                "minibatch_size",
                self.minibatch_size as f64,
                self.minibatch_size >= 1 && self.minibatch_size <= self.rollout_capacity,
            ),
        ];
        for (name, value, ok) in checks {
            if !ok {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    constraint: "see PpoConfig field ranges",
                });
            }
        }
        if self.rollout_capacity == 0 {
            return Err(Error::InvalidParameter {
                name: "rollout_capacity",
                value: 0.0,
                constraint: "at least one transition",
            });
        }
        Ok(())
    }
}

/// Fixed-capacity on-policy transition store.
#[derive(Debug, Clone, Default)]
pub struct RolloutBuffer {
    capacity: usize,
    pub obs: Vec<[f64; STATE_DIM]>,
    pub actions: Vec<usize>,
    pub log_probs: Vec<f64>,
    pub values: Vec<f64>,
    pub rewards: Vec<f64>,
    pub dones: Vec<bool>,
}

impl RolloutBuffer {
    pub fn new(capacity: usize) -> Self {
        RolloutBuffer {
            capacity,
            obs: Vec::with_capacity(capacity),
            actions: Vec::with_capacity(capacity),
            log_probs: Vec::with_capacity(capacity),
            values: Vec::with_capacity(capacity),
            rewards: Vec::with_capacity(capacity),
            dones: Vec::with_capacity(capacity),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.obs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obs.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.len() >= self.capacity
    }

    pub fn push(
        &mut self,
        obs: [f64; STATE_DIM],
        action: usize,
        log_prob: f64,
        value: f64,
        reward: f64,
        done: bool,
    ) {
        debug_assert!(!self.is_full(), "rollout buffer overfilled");
        self.obs.push(obs);
        self.actions.push(action);
        self.log_probs.push(log_prob);
        self.values.push(value);
        self.rewards.push(reward);
        self.dones.push(done);
    }

    pub fn clear(&mut self) {
        self.obs.clear();
        self.actions.clear();
        self.log_probs.clear();
        self.values.clear();
        self.rewards.clear();
        self.dones.clear();
    }
}

/// Generalized advantage estimation by backward recursion.
///
/// `bootstrap_value` is the critic's estimate for the state following the
/// final entry; it is ignored wherever a boundary flag ends the episode.
/// Returns `(advantages, returns)` with `returns = advantages + values`.
pub fn gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    discount: f64,
    lambda: f64,
    bootstrap_value: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if rewards.len() != values.len() || rewards.len() != dones.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("rewards/values/dones of equal length {}", rewards.len()),
            actual: format!("{}/{}/{}", rewards.len(), values.len(), dones.len()),
        });
    }
    let n = rewards.len();
    let mut advantages = vec![0.0; n];
    let mut carry = 0.0;
    for t in (0..n).rev() {
        let not_done = if dones[t] { 0.0 } else { 1.0 };
        let next_value = if t + 1 < n { values[t + 1] } else { bootstrap_value };
        let delta = rewards[t] + discount * next_value * not_done - values[t];
        carry = delta + discount * lambda * not_done * carry;
        advantages[t] = carry;
    }
    let returns = advantages.iter().zip(values).map(|(a, v)| a + v).collect();
    Ok((advantages, returns))
}

/// Shift and scale to zero mean, unit standard deviation (in place);
/// returns the original `(mean, std)`.
pub fn normalize_advantages(advantages: &mut [f64]) -> (f64, f64) {
    if advantages.is_empty() {
        return (0.0, 0.0);
    }
    let n = advantages.len() as f64;
    let mean = advantages.iter().sum::<f64>() / n;
    let var = advantages.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    for a in advantages.iter_mut() {
        *a = (*a - mean) / (std + 1e-8);
    }
    (mean, std)
}

/// How [`PpoAgent::act`] turns the actor distribution into an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActMode {
    /// Draw from the categorical distribution (training).
    Sample,
    /// Highest-probability action, lowest index on ties (deployment).
    Greedy,
}

/// Everything a single decision produces.
#[derive(Debug, Clone, Copy)]
pub struct ActionDecision {
    pub action: usize,
    /// Log-probability of `action` under the actor at decision time.
    pub log_prob: f64,
    /// Critic estimate for the observed state.
    pub value: f64,
    /// The normalized observation the networks actually saw.
    pub obs: [f64; STATE_DIM],
}

/// Diagnostics averaged over every minibatch of one update.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    /// Fraction of samples whose ratio left the clip interval.
    pub clip_fraction: f64,
    /// Mean of `log_prob_old - log_prob_new`, a cheap KL proxy.
    pub approx_kl: f64,
    pub minibatches: usize,
}

struct MinibatchStats {
    policy_loss: f64,
    entropy: f64,
    clip_fraction: f64,
    approx_kl: f64,
}

/// Actor-critic learner with clipped-surrogate updates.
#[derive(Debug, Clone)]
pub struct PpoAgent {
    pub actor: Mlp,
    pub critic: Mlp,
    actor_opt: AdamState,
    critic_opt: AdamState,
    pub normalizer: StateNormalizer,
    pub actions: ActionSpace,
    pub config: PpoConfig,
    update_count: u64,
    rng_seed: u64,
}

/// Sidecar stored next to the two network checkpoints.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentSidecar {
    actions: ActionSpace,
    config: PpoConfig,
    normalizer: StateNormalizer,
    update_count: u64,
    rng_seed: u64,
}

impl PpoAgent {
    /// Fresh agent: actor `STATE_DIM -> 64 -> 64 -> M` with a softmax head,
    /// critic `STATE_DIM -> 64 -> 64 -> 1` linear, both initialized from
    /// streams derived from `seed`.
    pub fn new(actions: ActionSpace, config: PpoConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let actor_sizes = [STATE_DIM, HIDDEN_WIDTH, HIDDEN_WIDTH, actions.len()];
        let critic_sizes = [STATE_DIM, HIDDEN_WIDTH, HIDDEN_WIDTH, 1];
        let actor = Mlp::new(
            &actor_sizes,
            Head::Softmax,
            &mut seeds::stream(seed, "ppo-actor-init", 0),
        )?;
        let critic = Mlp::new(
            &critic_sizes,
            Head::Linear,
            &mut seeds::stream(seed, "ppo-critic-init", 0),
        )?;
        let actor_opt = AdamState::new(config.learning_rate, actor.param_count());
        let critic_opt = AdamState::new(config.learning_rate, critic.param_count());
        Ok(PpoAgent {
            actor,
            critic,
            actor_opt,
            critic_opt,
            normalizer: StateNormalizer::new(),
            actions,
            config,
            update_count: 0,
            rng_seed: seed,
        })
    }

    pub fn update_count(&self) -> u64 {
        self.update_count
    }

    pub fn seed(&self) -> u64 {
        self.rng_seed
    }

    /// Actor probabilities for a state under the current normalization
    /// statistics, without recording the observation.
    pub fn action_probabilities(&self, state: &MdpState) -> Result<Vec<f64>> {
        let obs = self.normalizer.normalize(&state.as_array());
        self.actor.forward(&obs)
    }

    /// One decision. Unless the normalizer is frozen, the raw observation
    /// is folded into its running statistics first.
    pub fn act(
        &mut self,
        state: &MdpState,
        rng: &mut ChaCha8Rng,
        mode: ActMode,
    ) -> Result<ActionDecision> {
        if !state.is_finite() {
            return Err(Error::NonFinite {
                context: "decision state",
                detail: format!("{state:?}"),
            });
        }
        let raw = state.as_array();
        self.normalizer.update(&raw);
        let obs = self.normalizer.normalize(&raw);
        let (probs, cache) = self.actor.forward_cached(&obs)?;
        let log_probs = log_softmax(cache.logits());
        let action = match mode {
            ActMode::Greedy => {
                let mut best = 0;
                for (i, p) in probs.iter().enumerate() {
                    if *p > probs[best] {
                        best = i;
                    }
                }
                best
            }
            ActMode::Sample => {
                let u: f64 = rng.gen();
                let mut cumulative = 0.0;
                let mut chosen = probs.len() - 1;
                for (i, p) in probs.iter().enumerate() {
                    cumulative += p;
                    if u < cumulative {
                        chosen = i;
                        break;
                    }
                }
                chosen
            }
        };
        let value = self.critic.forward(&obs)?[0];
        Ok(ActionDecision {
            action,
            log_prob: log_probs[action],
            value,
            obs,
        })
    }

    /// Actor gradient of the clipped surrogate plus entropy bonus over one
    /// minibatch, averaged over the batch.
    fn actor_minibatch(
        &self,
        buffer: &RolloutBuffer,
        advantages: &[f64],
        batch: &[usize],
        clip: f64,
        entropy_weight: f64,
    ) -> Result<(Gradients, MinibatchStats)> {
        let m = batch.len() as f64;
        let mut grads = Gradients::zeros_like(&self.actor);
        let mut policy_loss = 0.0;
        let mut entropy_sum = 0.0;
        let mut clipped = 0usize;
        let mut kl_sum = 0.0;
        for &i in batch {
            let (probs, cache) = self.actor.forward_cached(&buffer.obs[i])?;
            let lsm = log_softmax(cache.logits());
            let action = buffer.actions[i];
            let log_prob_new = lsm[action];
            let ratio = (log_prob_new - buffer.log_probs[i]).exp();
            let adv = advantages[i];
            let unclipped = ratio * adv;
            let clamped = ratio.clamp(1.0 - clip, 1.0 + clip) * adv;
            policy_loss -= unclipped.min(clamped);
            if (ratio - 1.0).abs() > clip {
                clipped += 1;
            }
            kl_sum += buffer.log_probs[i] - log_prob_new;
            let mut entropy = 0.0;
            for (p, lp) in probs.iter().zip(&lsm) {
                if *p > 0.0 {
                    entropy -= p * lp;
                }
            }
            entropy_sum += entropy;

            let mut d_logits = vec![0.0; probs.len()];
            // The min() selects the unclipped branch when it is no larger;
            // the clamped branch is constant in the parameters wherever it
            // actually clips, so only the unclipped branch carries gradient.
            if unclipped <= clamped {
                for (j, d) in d_logits.iter_mut().enumerate() {
                    let indicator = if j == action { 1.0 } else { 0.0 };
                    *d -= adv * ratio * (indicator - probs[j]);
                }
            }
            if entropy_weight != 0.0 {
                for (j, d) in d_logits.iter_mut().enumerate() {
                    if probs[j] > 0.0 {
                        *d += entropy_weight * probs[j] * (lsm[j] + entropy);
                    }
                }
            }
            let sample_grads = self.actor.backward_from_logits(&cache, &d_logits)?;
            grads.accumulate(&sample_grads, 1.0 / m);
        }
        if !policy_loss.is_finite() {
            return Err(Error::Diverged {
                detail: format!("actor loss became {policy_loss} on a minibatch"),
            });
        }
        Ok((
            grads,
            MinibatchStats {
                policy_loss: policy_loss / m,
                entropy: entropy_sum / m,
                clip_fraction: clipped as f64 / m,
                approx_kl: kl_sum / m,
            },
        ))
    }

    /// Plain likelihood-ratio policy gradient (no ratio, no clipping) over
    /// the same batch layout, for equivalence checks against the clipped
    /// surrogate at the first step.
    #[cfg(test)]
    fn actor_minibatch_vanilla(
        &self,
        buffer: &RolloutBuffer,
        advantages: &[f64],
        batch: &[usize],
    ) -> Result<Gradients> {
        let m = batch.len() as f64;
        let mut grads = Gradients::zeros_like(&self.actor);
        for &i in batch {
            let (probs, cache) = self.actor.forward_cached(&buffer.obs[i])?;
            let action = buffer.actions[i];
            let adv = advantages[i];
            let mut d_logits = vec![0.0; probs.len()];
            for (j, d) in d_logits.iter_mut().enumerate() {
                let indicator = if j == action { 1.0 } else { 0.0 };
                *d = -adv * (indicator - probs[j]);
            }
            let sample_grads = self.actor.backward_from_logits(&cache, &d_logits)?;
            grads.accumulate(&sample_grads, 1.0 / m);
        }
        Ok(grads)
    }

    /// Critic gradient of the weighted squared error against the returns.
    fn critic_minibatch(
        &self,
        buffer: &RolloutBuffer,
        returns: &[f64],
        batch: &[usize],
    ) -> Result<(Gradients, f64)> {
        let m = batch.len() as f64;
        let weight = self.config.value_loss_weight;
        let mut grads = Gradients::zeros_like(&self.critic);
        let mut loss = 0.0;
        for &i in batch {
            let (out, cache) = self.critic.forward_cached(&buffer.obs[i])?;
            let err = out[0] - returns[i];
            loss += weight * err * err;
            let sample_grads = self.critic.backward(&cache, &[2.0 * weight * err])?;
            grads.accumulate(&sample_grads, 1.0 / m);
        }
        if !loss.is_finite() {
            return Err(Error::Diverged {
                detail: format!("critic loss became {loss} on a minibatch"),
            });
        }
        Ok((grads, loss / m))
    }

    /// One full optimization pass over a filled buffer. Advantages are
    /// normalized once per update; every epoch reshuffles the minibatch
    /// partition with `rng`. The buffer is cleared before returning.
    pub fn ppo_update(
        &mut self,
        buffer: &mut RolloutBuffer,
        bootstrap_value: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<UpdateStats> {
        if !buffer.is_full() {
            return Err(Error::InvalidParameter {
                name: "rollout_buffer",
                value: buffer.len() as f64,
                constraint: "updates consume only a full buffer",
            });
        }
        let (mut advantages, returns) = gae(
            &buffer.rewards,
            &buffer.values,
            &buffer.dones,
            self.config.discount,
            self.config.gae_lambda,
            bootstrap_value,
        )?;
        normalize_advantages(&mut advantages);

        let mut stats = UpdateStats::default();
        let mut indices: Vec<usize> = (0..buffer.len()).collect();
        for _ in 0..self.config.epochs {
            indices.shuffle(rng);
            for batch in indices.chunks(self.config.minibatch_size) {
                let (actor_grads, mb) = self.actor_minibatch(
                    buffer,
                    &advantages,
                    batch,
                    self.config.clip,
                    self.config.entropy_weight,
                )?;
                let (critic_grads, value_loss) =
                    self.critic_minibatch(buffer, &returns, batch)?;
                self.actor_opt.step(&mut self.actor, &actor_grads)?;
                self.critic_opt.step(&mut self.critic, &critic_grads)?;
                stats.policy_loss += mb.policy_loss;
                stats.value_loss += value_loss;
                stats.entropy += mb.entropy;
                stats.clip_fraction += mb.clip_fraction;
                stats.approx_kl += mb.approx_kl;
                stats.minibatches += 1;
            }
        }
        if stats.minibatches > 0 {
            let n = stats.minibatches as f64;
            stats.policy_loss /= n;
            stats.value_loss /= n;
            stats.entropy /= n;
            stats.clip_fraction /= n;
            stats.approx_kl /= n;
        }
        self.update_count += 1;
        buffer.clear();
        Ok(stats)
    }

    /// Write `actor.ckpt`, `critic.ckpt`, and `agent.json` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        nn::save_checkpoint(
            &dir.join("actor.ckpt"),
            &self.actor,
            self.update_count,
            self.rng_seed,
        )?;
        nn::save_checkpoint(
            &dir.join("critic.ckpt"),
            &self.critic,
            self.update_count,
            self.rng_seed,
        )?;
        let sidecar = AgentSidecar {
            actions: self.actions.clone(),
            config: self.config.clone(),
            normalizer: self.normalizer.clone(),
            update_count: self.update_count,
            rng_seed: self.rng_seed,
        };
        let mut json = serde_json::to_string_pretty(&sidecar)?;
        json.push('\n');
        let path = dir.join("agent.json");
        std::fs::write(&path, json).map_err(|e| Error::io(path.display().to_string(), e))
    }

    /// Restore an agent saved by [`PpoAgent::save`]. Optimizer moments are
    /// not persisted; a loaded agent resumes with fresh Adam state.
    pub fn load(dir: &Path) -> Result<Self> {
        let sidecar_path = dir.join("agent.json");
        let bytes = std::fs::read(&sidecar_path)
            .map_err(|e| Error::io(sidecar_path.display().to_string(), e))?;
        let sidecar: AgentSidecar = serde_json::from_slice(&bytes)?;
        sidecar.config.validate()?;
        let (actor, actor_header) = nn::load_checkpoint(&dir.join("actor.ckpt"))?;
        let (critic, _) = nn::load_checkpoint(&dir.join("critic.ckpt"))?;
        if actor.output_dim() != sidecar.actions.len() || actor.input_dim() != STATE_DIM {
            return Err(Error::Checkpoint {
                detail: format!(
                    "actor is {:?} but the sidecar menu has {} levels",
                    actor.sizes(),
                    sidecar.actions.len()
                ),
            });
        }
        if actor_header.step_count != sidecar.update_count {
            return Err(Error::Checkpoint {
                detail: format!(
                    "actor records step {} but the sidecar records {}",
                    actor_header.step_count, sidecar.update_count
                ),
            });
        }
        let actor_opt = AdamState::new(sidecar.config.learning_rate, actor.param_count());
        let critic_opt = AdamState::new(sidecar.config.learning_rate, critic.param_count());
        Ok(PpoAgent {
            actor,
            critic,
            actor_opt,
            critic_opt,
            normalizer: sidecar.normalizer,
            actions: sidecar.actions,
            config: sidecar.config,
            update_count: sidecar.update_count,
            rng_seed: sidecar.rng_seed,
        })
    }
}
