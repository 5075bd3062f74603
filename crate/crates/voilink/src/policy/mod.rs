//! Code-length allocation policies.
//!
//! The decision problem is small and discrete: each time a fresh image is
//! ready to send, pick one compression rate from a short menu. This module
//! holds everything that makes that choice — the observation fed to a
//! policy ([`MdpState`]), the menu itself ([`ActionSpace`]), running input
//! normalization, two non-learned baselines, and the PPO learner in
//! [`ppo`].

pub mod ppo;

pub use ppo::{gae, ActMode, ActionDecision, PpoAgent, PpoConfig, RolloutBuffer, UpdateStats};

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codec::RdProfile;
use crate::error::{Error, Result};

/// Number of observation components.
pub const STATE_DIM: usize = 4;

/// Observation at a decision point.
///
/// `gen_time` is the generation timestamp of the sample about to be sent;
/// the simulation loop wraps it to a bounded range before it gets here
/// (see the engine's time-encoding option), since a raw unbounded clock
/// makes a poor network input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MdpState {
    /// Current value of the information at the receiver, in nats.
    pub voi: f64,
    /// Quality of the most recently delivered image, in dB.
    pub psnr_prev_db: f64,
    /// Generation time of the pending sample, in seconds.
    pub gen_time: f64,
    /// Transmission coefficient of the pending sample's rate profile.
    pub mu: f64,
}

impl MdpState {
    pub fn as_array(&self) -> [f64; STATE_DIM] {
        [self.voi, self.psnr_prev_db, self.gen_time, self.mu]
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite())
    }
}

/// Discrete menu of compression rates, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ActionSpace {
    etas: Vec<f64>,
}

impl ActionSpace {
    pub fn new(etas: Vec<f64>) -> Result<Self> {
        if etas.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "action_etas",
                value: etas.len() as f64,
                constraint: "at least two rate levels",
            });
        }
        for pair in etas.windows(2) {
            if !(pair[0] < pair[1]) {
                return Err(Error::InvalidParameter {
                    name: "action_etas",
                    value: pair[1],
                    constraint: "strictly ascending levels",
                });
            }
        }
        for &eta in &etas {
            if !(eta > 0.0 && eta <= 1.0) || !eta.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "action_etas",
                    value: eta,
                    constraint: "each level in (0, 1]",
                });
            }
        }
        Ok(ActionSpace { etas })
    }

    pub fn len(&self) -> usize {
        self.etas.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least two levels
    }

    pub fn eta(&self, index: usize) -> f64 {
        self.etas[index]
    }

    pub fn etas(&self) -> &[f64] {
        &self.etas
    }
}

impl Default for ActionSpace {
    /// Six rates anchored on a 48-pixel tile: 1/48 through 8/48.
    fn default() -> Self {
        ActionSpace::new(vec![
            1.0 / 48.0,
            2.0 / 48.0,
            3.0 / 48.0,
            4.0 / 48.0,
            6.0 / 48.0,
            8.0 / 48.0,
        ])
        .unwrap()
    }
}

impl TryFrom<Vec<f64>> for ActionSpace {
    type Error = Error;
    fn try_from(etas: Vec<f64>) -> Result<Self> {
        ActionSpace::new(etas)
    }
}

impl From<ActionSpace> for Vec<f64> {
    fn from(a: ActionSpace) -> Vec<f64> {
        a.etas
    }
}

/// Per-component running mean/variance (Welford), used to whiten
/// observations before they reach the networks. Freeze it for evaluation
/// so deployed behavior stops drifting with the input stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateNormalizer {
    count: u64,
    mean: [f64; STATE_DIM],
    m2: [f64; STATE_DIM],
    frozen: bool,
}

/// Normalized components are clamped to this symmetric range.
pub const NORMALIZED_CLAMP: f64 = 10.0;

impl StateNormalizer {
    pub fn new() -> Self {
        StateNormalizer {
            count: 0,
            mean: [0.0; STATE_DIM],
            m2: [0.0; STATE_DIM],
            frozen: false,
        }
    }

    pub fn observations(&self) -> u64 {
        self.count
    }

    pub fn frozen(&self) -> bool {
        self.frozen
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn unfreeze(&mut self) {
        self.frozen = false;
    }

    /// Fold one raw observation into the running statistics (no-op when
    /// frozen).
    pub fn update(&mut self, raw: &[f64; STATE_DIM]) {
        if self.frozen {
            return;
        }
        self.count += 1;
        let n = self.count as f64;
        for i in 0..STATE_DIM {
            let delta = raw[i] - self.mean[i];
            self.mean[i] += delta / n;
            self.m2[i] += delta * (raw[i] - self.mean[i]);
        }
    }

    /// Whiten a raw observation with the current statistics and clamp each
    /// component to +/- [`NORMALIZED_CLAMP`].
    pub fn normalize(&self, raw: &[f64; STATE_DIM]) -> [f64; STATE_DIM] {
        let mut out = [0.0; STATE_DIM];
        for i in 0..STATE_DIM {
            let var = if self.count > 0 {
                self.m2[i] / self.count as f64
            } else {
                1.0
            };
            let z = (raw[i] - self.mean[i]) / (var + 1e-8).sqrt();
            out[i] = z.clamp(-NORMALIZED_CLAMP, NORMALIZED_CLAMP);
        }
        out
    }
}

impl Default for StateNormalizer {
    fn default() -> Self {
        StateNormalizer::new()
    }
}

/// Anything that can pick a rate level at a decision point.
///
/// `profile` is the rate-quality profile of the pending sample at the
/// current channel quality, indexed like the action menu; learned policies
/// ignore it, the threshold baseline reads it.
pub trait AllocationPolicy {
    fn choose(
        &mut self,
        state: &MdpState,
        profile: &RdProfile,
        rng: &mut ChaCha8Rng,
    ) -> Result<usize>;

    /// Short label for reports and summary files.
    fn label(&self) -> String;

    /// Switch the policy into deployment mode before an evaluation batch.
    /// Baselines have nothing to do; learned policies stop adapting here.
    fn prepare_for_evaluation(&mut self) {}
}

/// Always transmit at one fixed menu index.
#[derive(Debug, Clone)]
pub struct FixedPolicy {
    action: usize,
}

impl FixedPolicy {
    pub fn new(action: usize, actions: &ActionSpace) -> Result<Self> {
        if action >= actions.len() {
            return Err(Error::InvalidParameter {
                name: "fixed_action",
                value: action as f64,
                constraint: "an index into the action menu",
            });
        }
        Ok(FixedPolicy { action })
    }

    pub fn action(&self) -> usize {
        self.action
    }
}

impl AllocationPolicy for FixedPolicy {
    fn choose(&mut self, _: &MdpState, _: &RdProfile, _: &mut ChaCha8Rng) -> Result<usize> {
        Ok(self.action)
    }

    fn label(&self) -> String {
        format!("fixed-{}", self.action)
    }
}

/// Pick the cheapest rate whose profiled quality clears a floor; if none
/// does, spend the most.
#[derive(Debug, Clone)]
pub struct ThresholdPolicy {
    pub d_min_db: f64,
}

impl AllocationPolicy for ThresholdPolicy {
    fn choose(
        &mut self,
        _: &MdpState,
        profile: &RdProfile,
        _: &mut ChaCha8Rng,
    ) -> Result<usize> {
        for (i, &psnr) in profile.psnr_db.iter().enumerate() {
            if psnr >= self.d_min_db {
                return Ok(i);
            }
        }
        Ok(profile.psnr_db.len() - 1)
    }

    fn label(&self) -> String {
        "threshold".to_string()
    }
}

impl AllocationPolicy for PpoAgent {
    /// Greedy deployment of the learned actor. Freeze the normalizer
    /// before evaluating, or the statistics keep drifting.
    fn choose(
        &mut self,
        state: &MdpState,
        _: &RdProfile,
        rng: &mut ChaCha8Rng,
    ) -> Result<usize> {
        Ok(self.act(state, rng, ActMode::Greedy)?.action)
    }

    fn label(&self) -> String {
        "learned".to_string()
    }

    /// Deployment stops the input statistics from drifting with the
    /// evaluation stream.
    fn prepare_for_evaluation(&mut self) {
        self.normalizer.freeze();
    }
}
