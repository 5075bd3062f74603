//! Discrete-event simulation of the link, plus the training, evaluation,
//! and sweep drivers built on top of it.
//!
//! Physical picture: a camera emits an image every `Ts` seconds into a
//! single-slot buffer that always keeps only the freshest waiting sample.
//! Whenever the link is free, the waiting sample is profiled, a policy
//! picks a bandwidth ratio from the menu, and the codec turns the image
//! into `K` channel symbols that take `K / baud` seconds to arrive. At
//! reception the receiver's picture of the world refreshes: age resets,
//! value-of-information jumps, quality is measured, and the step reward
//! `VoI + lambda * (PSNR - d_min)` is booked. A sample already in flight
//! is never recalled — preemption only replaces the *waiting* sample.
//!
//! Event ordering at equal timestamps is fixed (reception, then arrivals,
//! then an availability check, then the decision), every random draw comes
//! from a tagged per-episode stream, and all bookkeeping is plain `f64`
//! arithmetic; two runs with the same config and seed produce identical
//! traces down to the last bit.

use std::collections::HashMap;
use std::path::PathBuf;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{self, Availability, AvailabilityModel, GammaSchedule};
use crate::codec::{profile_image, DctCodec, LinkCodec, RdProfile, SampleView, SurrogateRdModel};
use crate::error::{Error, Result};
use crate::image::{synthetic_corpus, Image};
use crate::metrics::{self, VoiParams};
use crate::pnm;
use crate::policy::{
    ActMode, ActionSpace, AllocationPolicy, FixedPolicy, MdpState, PpoAgent, PpoConfig,
    RolloutBuffer, ThresholdPolicy, UpdateStats,
};
use crate::seeds;
use crate::source::{PeriodicSource, SampleOrder, SingleSlotBuffer};

/// Step size of the trapezoidal quadrature used for time-averaged VoI.
pub const VOI_INTEGRATION_RESOLUTION: f64 = 0.01;

/// Per-step reward: timeliness plus the weighted quality margin.
pub fn reward(voi_now: f64, psnr_db: f64, lambda: f64, d_min_db: f64) -> f64 {
    voi_now + lambda * (psnr_db - d_min_db)
}

/// One multiplier update of the constrained-training outer loop:
/// `lambda <- max(0, lambda - rate * (avg_psnr - d_min))`. Quality above
/// the floor relaxes the penalty weight; quality below it tightens it.
pub fn dual_ascent_step(lambda: f64, rate: f64, avg_psnr_db: f64, d_min_db: f64) -> f64 {
    (lambda - rate * (avg_psnr_db - d_min_db)).max(0.0)
}

/// Abort conditions checked after every optimizer update during training.
pub fn check_divergence(
    mean_reward: f64,
    entropy: f64,
    env_steps: usize,
    total_steps: usize,
) -> Result<()> {
    if mean_reward.is_nan() {
        return Err(Error::Diverged {
            detail: format!("mean reward became NaN after {env_steps} steps"),
        });
    }
    if entropy < 1e-6 && env_steps < total_steps / 10 {
        return Err(Error::Diverged {
            detail: format!(
                "policy entropy collapsed to {entropy:.3e} after only {env_steps} of {total_steps} steps"
            ),
        });
    }
    Ok(())
}

/// When an episode ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Horizon {
    /// Simulated wall-clock span; transmissions unfinished at the boundary
    /// are dropped from the trace.
    Time { seconds: f64 },
    /// Fixed number of decisions, each running through its reception.
    Decisions { count: usize },
}

impl Default for Horizon {
    fn default() -> Self {
        Horizon::Time { seconds: 120.0 }
    }
}

/// How the pending sample's generation timestamp enters the policy state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeEncoding {
    /// Wrapped into one episode span — bounded, kind to small networks.
    #[default]
    Relative,
    /// The raw clock value.
    Absolute,
}

/// Which fidelity model the link runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CodecConfig {
    /// The measured block-DCT analog codec (needs pixel data).
    Dct,
    /// The deterministic rate–distortion surrogate.
    Surrogate { model: SurrogateRdModel },
}

impl Default for CodecConfig {
    fn default() -> Self {
        CodecConfig::Dct
    }
}

impl CodecConfig {
    pub fn build(&self) -> Result<LinkCodec> {
        Ok(match self {
            CodecConfig::Dct => LinkCodec::Dct(DctCodec),
            CodecConfig::Surrogate { model } => {
                model.validate()?;
                LinkCodec::Surrogate(model.clone())
            }
        })
    }
}

/// Where the image stream comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetConfig {
    /// Synthetic corpus size (ignored when `paths` is non-empty).
    pub count: usize,
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    /// Replay order of the dataset.
    pub order: SampleOrder,
    /// Explicit PGM/PPM files; when non-empty they replace the synthetic
    /// corpus entirely.
    pub paths: Vec<PathBuf>,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            count: 20,
            height: 48,
            width: 48,
            channels: 3,
            order: SampleOrder::default(),
            paths: Vec::new(),
        }
    }
}

/// Everything a simulation run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    /// Seconds between source samples (Ts).
    pub sample_interval: f64,
    pub horizon: Horizon,
    /// Channel symbols per second; `inf` means zero transmission delay.
    pub baud: f64,
    pub gamma: GammaSchedule,
    pub voi: VoiParams,
    /// Average-quality floor of the constraint, in dB.
    pub d_min_db: f64,
    /// Reward weight on the quality margin.
    pub lambda: f64,
    pub codec: CodecConfig,
    pub actions: ActionSpace,
    pub availability: AvailabilityModel,
    /// Seconds between availability checks; `None` means Ts/10.
    pub availability_interval: Option<f64>,
    pub time_encoding: TimeEncoding,
    /// Channel realizations averaged per profile level (measured codec
    /// only; the surrogate is exact with one).
    pub profile_trials: usize,
    pub dataset: DatasetConfig,
    /// Root seed; every stream in the run derives from it.
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            sample_interval: 0.5,
            horizon: Horizon::default(),
            baud: 1000.0,
            gamma: GammaSchedule::default(),
            voi: VoiParams::default(),
            d_min_db: 24.0,
            lambda: 0.05,
            codec: CodecConfig::default(),
            actions: ActionSpace::default(),
            availability: AvailabilityModel::default(),
            availability_interval: None,
            time_encoding: TimeEncoding::default(),
            profile_trials: 4,
            dataset: DatasetConfig::default(),
            seed: 0,
        }
    }
}

impl SimConfig {
    /// Reject impossible configurations; return human-readable warnings
    /// for legal-but-suspect ones.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        if !(self.sample_interval > 0.0) || !self.sample_interval.is_finite() {
            return Err(Error::InvalidParameter {
                name: "sample_interval",
                value: self.sample_interval,
                constraint: "finite and > 0",
            });
        }
        match self.horizon {
            Horizon::Time { seconds } => {
                if !(seconds > 0.0) || !seconds.is_finite() {
                    return Err(Error::InvalidParameter {
                        name: "horizon.seconds",
                        value: seconds,
                        constraint: "finite and > 0",
                    });
                }
            }
            Horizon::Decisions { count } => {
                if count == 0 {
                    return Err(Error::InvalidParameter {
                        name: "horizon.count",
                        value: 0.0,
                        constraint: ">= 1 decision",
                    });
                }
                if self.availability.p_idle_to_busy > 0.0 && self.availability.p_busy_to_idle == 0.0
                {
                    return Err(Error::InvalidParameter {
                        name: "availability.p_busy_to_idle",
                        value: 0.0,
                        constraint: "> 0 when busy is reachable under a decision-count horizon \
                                     (an absorbing busy link never reaches the next decision)",
                    });
                }
            }
        }
        if !(self.baud > 0.0) {
            return Err(Error::InvalidParameter {
                name: "baud",
                value: self.baud,
                constraint: "> 0 (infinity allowed)",
            });
        }
        self.gamma.validate()?;
        self.voi.validate()?;
        self.availability.validate()?;
        if let Some(interval) = self.availability_interval {
            if !(interval > 0.0) || !interval.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "availability_interval",
                    value: interval,
                    constraint: "finite and > 0",
                });
            }
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidParameter {
                name: "lambda",
                value: self.lambda,
                constraint: "finite and >= 0",
            });
        }
        if self.profile_trials == 0 {
            return Err(Error::InvalidParameter {
                name: "profile_trials",
                value: 0.0,
                constraint: ">= 1",
            });
        }
        if self.dataset.paths.is_empty()
            && (self.dataset.count == 0
                || self.dataset.height == 0
                || self.dataset.width == 0
                || self.dataset.channels == 0)
        {
            return Err(Error::EmptyInput {
                what: "synthetic dataset with a zero dimension",
            });
        }
        if !self.d_min_db.is_finite() {
            return Err(Error::InvalidParameter {
                name: "d_min_db",
                value: self.d_min_db,
                constraint: "finite",
            });
        }
        if self.d_min_db < 0.0 {
            warnings.push(format!(
                "d_min_db = {} is below 0 dB; the quality constraint is vacuous",
                self.d_min_db
            ));
        }
        if let CodecConfig::Surrogate { model } = &self.codec {
            let (lo, hi) = model.psnr_bounds();
            if self.d_min_db > hi || (self.d_min_db < lo && self.d_min_db >= 0.0) {
                warnings.push(format!(
                    "d_min_db = {} lies outside the surrogate's reachable range [{lo}, {hi}] dB",
                    self.d_min_db
                ));
            }
        }
        Ok(warnings)
    }

    fn availability_interval_or_default(&self) -> f64 {
        self.availability_interval
            .unwrap_or(self.sample_interval / 10.0)
    }

    /// Period the generation-time state feature wraps at under
    /// [`TimeEncoding::Relative`].
    pub fn time_wrap_period(&self) -> f64 {
        match self.horizon {
            Horizon::Time { seconds } => seconds,
            Horizon::Decisions { count } => self.sample_interval * count as f64,
        }
    }

    /// Materialize the image stream: load the listed files, or generate
    /// the synthetic corpus from the run seed.
    pub fn build_dataset(&self) -> Result<Vec<Image>> {
        if self.dataset.paths.is_empty() {
            synthetic_corpus(
                seeds::subseed(self.seed, "dataset", 0),
                self.dataset.count,
                self.dataset.height,
                self.dataset.width,
                self.dataset.channels,
            )
        } else {
            self.dataset.paths.iter().map(|p| pnm::load_image(p)).collect()
        }
    }
}

/// One completed transmission, as it lands in the episode trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    /// Decision ordinal within the episode, from 0.
    pub decision: usize,
    /// Generation time `u` of the transmitted sample.
    pub generation_time: f64,
    pub t_start: f64,
    pub t_recv: f64,
    /// Bandwidth ratio the policy chose.
    pub eta: f64,
    /// Code length in complex symbols.
    pub symbols: usize,
    /// Transmission delay `symbols / baud`.
    pub delay: f64,
    /// Age of the sample at reception, `t_recv - u`.
    pub aoi: f64,
    /// Value of information at the reception instant, in the configured
    /// log base.
    pub voi: f64,
    pub psnr_db: f64,
    pub reward: f64,
    /// Penalty weight in force when the reward was booked.
    pub lambda: f64,
    /// Menu index behind `eta` (kept in memory; not a trace-file column).
    pub action: usize,
    /// Link SNR of this transmission (kept in memory; not a trace-file
    /// column).
    pub gamma_db: f64,
}

/// Check every defining identity of a trace, bitwise: delay from the code
/// length and baud rate, reception from start plus delay, age from
/// reception minus generation, and the recorded VoI recomputed from the
/// recorded age and SNR (within `1e-9`).
pub fn validate_trace(trace: &[TraceRecord], baud: f64, voi_params: &VoiParams) -> Result<()> {
    for r in trace {
        let delay = channel::tx_delay(r.symbols, baud)?;
        if r.delay.to_bits() != delay.to_bits() {
            return Err(Error::Csv {
                path: "trace".to_string(),
                detail: format!(
                    "decision {}: delay {} != {} symbols / baud {}",
                    r.decision, r.delay, r.symbols, baud
                ),
            });
        }
        if r.t_recv.to_bits() != (r.t_start + r.delay).to_bits() {
            return Err(Error::Csv {
                path: "trace".to_string(),
                detail: format!("decision {}: t_recv != t_start + delay", r.decision),
            });
        }
        if r.aoi.to_bits() != (r.t_recv - r.generation_time).to_bits() {
            return Err(Error::Csv {
                path: "trace".to_string(),
                detail: format!("decision {}: aoi != t_recv - u", r.decision),
            });
        }
        if r.t_start < r.generation_time {
            return Err(Error::Csv {
                path: "trace".to_string(),
                detail: format!("decision {}: transmission precedes generation", r.decision),
            });
        }
        let expected_voi =
            metrics::voi(channel::db_to_linear(r.gamma_db), voi_params, r.aoi)?;
        if (r.voi - expected_voi).abs() > 1e-9 {
            return Err(Error::Csv {
                path: "trace".to_string(),
                detail: format!(
                    "decision {}: recorded VoI {} differs from recomputed {}",
                    r.decision, r.voi, expected_voi
                ),
            });
        }
    }
    Ok(())
}

/// Time-averaged VoI over `[0, end]` of a trace whose transmissions may
/// each carry their own SNR: zero before the first reception, then the
/// decaying value of the latest update, integrated by the same trapezoid
/// rule as the fixed-SNR metric.
pub fn trace_time_average_voi(
    trace: &[TraceRecord],
    end: f64,
    params: &VoiParams,
    resolution: f64,
) -> Result<f64> {
    if !(end > 0.0) || !end.is_finite() {
        return Err(Error::InvalidParameter {
            name: "end",
            value: end,
            constraint: "finite and > 0",
        });
    }
    let in_horizon: Vec<&TraceRecord> =
        trace.iter().filter(|r| r.t_recv <= end).collect();
    let mut integral = 0.0;
    for (i, record) in in_horizon.iter().enumerate() {
        let start = record.t_recv;
        let stop = in_horizon
            .get(i + 1)
            .map(|next| next.t_recv)
            .unwrap_or(end)
            .min(end);
        if stop <= start {
            continue;
        }
        let gamma = channel::db_to_linear(record.gamma_db);
        let span = stop - start;
        let steps = (span / resolution).ceil().max(1.0) as usize;
        let dt = span / steps as f64;
        let mut prev = metrics::voi(gamma, params, start - record.generation_time)?;
        for k in 1..=steps {
            let t = start + dt * k as f64;
            let next = metrics::voi(gamma, params, t - record.generation_time)?;
            integral += 0.5 * (prev + next) * dt;
            prev = next;
        }
    }
    Ok(integral / end)
}

#[derive(Debug, Clone, Copy)]
struct LastUpdate {
    generation_time: f64,
    gamma_db: f64,
}

#[derive(Debug, Clone)]
struct PendingDecision {
    sample: crate::source::SampleRecord,
    gamma_db: f64,
    profile: RdProfile,
    state: MdpState,
}

/// What one environment step produces.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub reward: f64,
    pub next_state: MdpState,
    /// True when the episode is over (horizon reached).
    pub done: bool,
    /// The completed transmission; `None` when it finished past a time
    /// horizon and was dropped from the books.
    pub record: Option<TraceRecord>,
    pub action: usize,
}

/// The simulated link as a reinforcement-learning environment.
///
/// Construct once (the dataset and profile cache persist), then
/// [`reset`](LinkEnv::reset) per episode and alternate
/// [`current_state`](LinkEnv::current_state) /
/// [`step`](LinkEnv::step) until `done`.
pub struct LinkEnv {
    cfg: SimConfig,
    codec: LinkCodec,
    dataset: Vec<Image>,
    profile_seed: u64,
    profile_cache: HashMap<(usize, u64), RdProfile>,
    lambda: f64,
    config_warnings: Vec<String>,
    // Per-episode state below.
    source: Option<PeriodicSource>,
    buffer: SingleSlotBuffer,
    now: f64,
    arrivals_emitted: u64,
    avail_checks: u64,
    avail_state: Availability,
    gamma_db: f64,
    psnr_prev_db: f64,
    last_update: Option<LastUpdate>,
    decision_count: usize,
    trace: Vec<TraceRecord>,
    episode_warnings: Vec<String>,
    pending: Option<PendingDecision>,
    finished: bool,
    gamma_rng: ChaCha8Rng,
    channel_rng: ChaCha8Rng,
    avail_rng: ChaCha8Rng,
}

impl LinkEnv {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        let config_warnings = cfg.validate()?;
        let codec = cfg.codec.build()?;
        let dataset = cfg.build_dataset()?;
        if dataset.is_empty() {
            return Err(Error::EmptyInput { what: "dataset" });
        }
        let profile_seed = seeds::subseed(cfg.seed, "profiles", 0);
        let lambda = cfg.lambda;
        Ok(LinkEnv {
            cfg,
            codec,
            dataset,
            profile_seed,
            profile_cache: HashMap::new(),
            lambda,
            config_warnings,
            source: None,
            buffer: SingleSlotBuffer::new(),
            now: 0.0,
            arrivals_emitted: 0,
            avail_checks: 0,
            avail_state: Availability::Idle,
            gamma_db: 0.0,
            psnr_prev_db: 0.0,
            last_update: None,
            decision_count: 0,
            trace: Vec::new(),
            episode_warnings: Vec::new(),
            pending: None,
            finished: true,
            gamma_rng: seeds::stream(0, "unset", 0),
            channel_rng: seeds::stream(0, "unset", 0),
            avail_rng: seeds::stream(0, "unset", 0),
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn config_warnings(&self) -> &[String] {
        &self.config_warnings
    }

    pub fn dataset(&self) -> &[Image] {
        &self.dataset
    }

    /// Penalty weight used for subsequent rewards (dual-ascent training
    /// adjusts it between rollouts).
    pub fn set_lambda(&mut self, lambda: f64) {
        self.lambda = lambda.max(0.0);
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    pub fn take_warnings(&mut self) -> Vec<String> {
        std::mem::take(&mut self.episode_warnings)
    }

    /// The state the pending decision will be made in.
    pub fn current_state(&self) -> Option<MdpState> {
        self.pending.as_ref().map(|p| p.state)
    }

    /// Rate profile of the pending sample (what a threshold policy reads).
    pub fn current_profile(&self) -> Option<&RdProfile> {
        self.pending.as_ref().map(|p| &p.profile)
    }

    /// Begin an episode; all per-episode randomness derives from
    /// `episode_seed`. Returns the first decision state, or `None` when
    /// the configuration admits no decision at all within the horizon.
    pub fn reset(&mut self, episode_seed: u64) -> Result<Option<MdpState>> {
        self.source = Some(PeriodicSource::new(
            self.cfg.sample_interval,
            self.dataset.len(),
            self.cfg.dataset.order,
            seeds::subseed(episode_seed, "sample-order", 0),
        )?);
        self.buffer = SingleSlotBuffer::new();
        self.now = 0.0;
        self.arrivals_emitted = 0;
        self.avail_checks = 0;
        self.avail_state = Availability::Idle;
        self.gamma_db = self.cfg.gamma.initial_db();
        self.psnr_prev_db = self.cfg.d_min_db;
        self.last_update = None;
        self.decision_count = 0;
        self.trace.clear();
        self.episode_warnings.clear();
        self.pending = None;
        self.finished = false;
        self.gamma_rng = seeds::stream(episode_seed, "gamma", 0);
        self.channel_rng = seeds::stream(episode_seed, "channel", 0);
        self.avail_rng = seeds::stream(episode_seed, "availability", 0);

        match self.advance_to_next_decision()? {
            Some(state) => Ok(Some(state)),
            None => {
                self.finished = true;
                self.episode_warnings.push(
                    "no transmission opportunity fits inside the horizon; trace is empty"
                        .to_string(),
                );
                Ok(None)
            }
        }
    }

    fn decisions_allowed_at(&self, t: f64) -> bool {
        match self.cfg.horizon {
            Horizon::Time { seconds } => t < seconds,
            Horizon::Decisions { .. } => true,
        }
    }

    /// Value of information at `t` given what the receiver has seen.
    fn voi_at(&self, t: f64) -> Result<f64> {
        match &self.last_update {
            None => Ok(0.0),
            Some(update) => metrics::voi(
                channel::db_to_linear(update.gamma_db),
                &self.cfg.voi,
                t - update.generation_time,
            ),
        }
    }

    fn profile_for(&mut self, image_id: usize, gamma_db: f64) -> Result<RdProfile> {
        let key = (image_id, gamma_db.to_bits());
        if let Some(hit) = self.profile_cache.get(&key) {
            return Ok(hit.clone());
        }
        // The stream index mixes the image and the SNR so each profile is
        // reproducible no matter when (or whether) the cache was warm.
        let stream_index =
            (image_id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ gamma_db.to_bits();
        let mut rng = seeds::stream(self.profile_seed, "profile-noise", stream_index);
        let view = SampleView::of_image(&self.dataset[image_id], image_id as u64);
        let profile = profile_image(
            &self.codec,
            &view,
            gamma_db,
            self.cfg.actions.etas(),
            self.cfg.profile_trials,
            &mut rng,
        )?;
        self.profile_cache.insert(key, profile.clone());
        Ok(profile)
    }

    /// Simulate arrivals and availability checks until the link can make a
    /// decision; build the decision state. `None` when the horizon closes
    /// first.
    fn advance_to_next_decision(&mut self) -> Result<Option<MdpState>> {
        let ts = self.cfg.sample_interval;
        let avail_active = self.cfg.availability.is_active();
        let avail_interval = self.cfg.availability_interval_or_default();
        loop {
            // Fold in everything due by now: arrivals first, then the
            // availability check — the fixed ordering for simultaneous
            // events.
            while self.arrivals_emitted as f64 * ts <= self.now {
                let sample = self
                    .source
                    .as_ref()
                    .expect("reset initializes the source")
                    .sample_at(self.arrivals_emitted);
                self.arrivals_emitted += 1;
                // A waiting sample displaced here is the preemption drop.
                self.buffer.offer(sample);
            }
            while avail_active && (self.avail_checks + 1) as f64 * avail_interval <= self.now {
                self.avail_state = self
                    .cfg
                    .availability
                    .step(self.avail_state, &mut self.avail_rng);
                self.avail_checks += 1;
            }

            if self.avail_state == Availability::Idle
                && self.buffer.is_occupied()
                && self.decisions_allowed_at(self.now)
            {
                let sample = self.buffer.take().expect("occupancy just checked");
                self.gamma_db = self.cfg.gamma.advance(self.gamma_db, &mut self.gamma_rng);
                let profile = self.profile_for(sample.image_id, self.gamma_db)?;
                let gen_feature = match self.cfg.time_encoding {
                    TimeEncoding::Relative => {
                        sample.generation_time % self.cfg.time_wrap_period()
                    }
                    TimeEncoding::Absolute => sample.generation_time,
                };
                let state = MdpState {
                    voi: self.voi_at(self.now)?,
                    psnr_prev_db: self.psnr_prev_db,
                    gen_time: gen_feature,
                    mu: profile.mu,
                };
                self.pending = Some(PendingDecision {
                    sample,
                    gamma_db: self.gamma_db,
                    profile,
                    state,
                });
                return Ok(Some(state));
            }

            // Jump to the next event strictly after `now`.
            let mut t_next = self.arrivals_emitted as f64 * ts;
            if avail_active {
                t_next = t_next.min((self.avail_checks + 1) as f64 * avail_interval);
            }
            if let Horizon::Time { seconds } = self.cfg.horizon {
                if t_next >= seconds {
                    return Ok(None);
                }
            }
            self.now = t_next;
        }
    }

    /// Transmit the pending sample at menu index `action`; simulate through
    /// its reception and on to the next decision point.
    pub fn step(&mut self, action: usize) -> Result<StepOutcome> {
        if self.finished {
            return Err(Error::EmptyInput {
                what: "an active episode (the horizon was already reached)",
            });
        }
        let pending = self.pending.take().ok_or(Error::EmptyInput {
            what: "a pending decision (call reset first)",
        })?;
        if action >= self.cfg.actions.len() {
            return Err(Error::InvalidParameter {
                name: "action",
                value: action as f64,
                constraint: "an index into the action menu",
            });
        }
        let eta = self.cfg.actions.eta(action);
        let image_id = pending.sample.image_id;
        let view = SampleView::of_image(&self.dataset[image_id], image_id as u64);
        let shot = self
            .codec
            .transmit_once(&view, eta, pending.gamma_db, &mut self.channel_rng)?;
        let delay = channel::tx_delay(shot.symbols, self.cfg.baud)?;
        let t_start = self.now;
        let t_recv = t_start + delay;
        self.now = t_recv;

        let u = pending.sample.generation_time;
        let aoi = t_recv - u;
        let voi_val = metrics::voi(
            channel::db_to_linear(pending.gamma_db),
            &self.cfg.voi,
            aoi,
        )?;
        let step_reward = reward(voi_val, shot.psnr_db, self.lambda, self.cfg.d_min_db);
        let record = TraceRecord {
            decision: self.decision_count,
            generation_time: u,
            t_start,
            t_recv,
            eta,
            symbols: shot.symbols,
            delay,
            aoi,
            voi: voi_val,
            psnr_db: shot.psnr_db,
            reward: step_reward,
            lambda: self.lambda,
            action,
            gamma_db: pending.gamma_db,
        };
        self.decision_count += 1;

        let within_books = match self.cfg.horizon {
            Horizon::Time { seconds } => t_recv <= seconds,
            Horizon::Decisions { .. } => true,
        };
        if within_books {
            self.trace.push(record);
            self.last_update = Some(LastUpdate {
                generation_time: u,
                gamma_db: pending.gamma_db,
            });
            self.psnr_prev_db = shot.psnr_db;
        } else {
            self.episode_warnings.push(format!(
                "decision {} completed at t={t_recv:.3}, past the horizon; dropped",
                record.decision
            ));
        }

        let horizon_hit = match self.cfg.horizon {
            Horizon::Decisions { count } => self.decision_count >= count,
            Horizon::Time { seconds } => t_recv >= seconds,
        };
        let (done, next_state) = if horizon_hit {
            self.finished = true;
            (true, pending.state)
        } else {
            match self.advance_to_next_decision()? {
                Some(state) => (false, state),
                None => {
                    self.finished = true;
                    (true, pending.state)
                }
            }
        };
        Ok(StepOutcome {
            reward: step_reward,
            next_state,
            done,
            record: within_books.then_some(record),
            action,
        })
    }

    /// End of the VoI averaging window for the episode just simulated.
    fn averaging_end(&self) -> f64 {
        match self.cfg.horizon {
            Horizon::Time { seconds } => seconds,
            Horizon::Decisions { .. } => self.now,
        }
    }

    /// Time-averaged VoI of the current episode's trace.
    pub fn episode_time_average_voi(&self) -> Result<f64> {
        let end = self.averaging_end();
        if !(end > 0.0) {
            return Ok(0.0);
        }
        trace_time_average_voi(&self.trace, end, &self.cfg.voi, VOI_INTEGRATION_RESOLUTION)
    }
}

/// Everything one simulated episode yields.
#[derive(Debug, Clone)]
pub struct EpisodeOutcome {
    pub trace: Vec<TraceRecord>,
    pub time_avg_voi: f64,
    /// Simulated time the episode covered.
    pub end_time: f64,
    pub warnings: Vec<String>,
}

/// Run one full episode of `policy` on a fresh environment.
pub fn run_episode(
    cfg: &SimConfig,
    policy: &mut dyn AllocationPolicy,
    episode_seed: u64,
) -> Result<EpisodeOutcome> {
    let mut env = LinkEnv::new(cfg.clone())?;
    run_episode_in(&mut env, policy, episode_seed)
}

/// Run one episode on an existing environment (reusing its dataset and
/// profile cache).
pub fn run_episode_in(
    env: &mut LinkEnv,
    policy: &mut dyn AllocationPolicy,
    episode_seed: u64,
) -> Result<EpisodeOutcome> {
    let mut policy_rng = seeds::stream(episode_seed, "policy-act", 0);
    let mut state = match env.reset(episode_seed)? {
        Some(state) => state,
        None => {
            return Ok(EpisodeOutcome {
                trace: Vec::new(),
                time_avg_voi: 0.0,
                end_time: env.averaging_end(),
                warnings: env.take_warnings(),
            })
        }
    };
    loop {
        let action = {
            let profile = env.current_profile().expect("pending decision has a profile");
            policy.choose(&state, profile, &mut policy_rng)?
        };
        let outcome = env.step(action)?;
        if outcome.done {
            break;
        }
        state = outcome.next_state;
    }
    Ok(EpisodeOutcome {
        time_avg_voi: env.episode_time_average_voi()?,
        end_time: env.averaging_end(),
        trace: std::mem::take(&mut env.trace),
        warnings: env.take_warnings(),
    })
}

/// Aggregates over a batch of seed-disjoint evaluation episodes.
#[derive(Debug, Clone, Serialize)]
pub struct EvaluationSummary {
    pub episodes: usize,
    pub decisions: usize,
    /// Mean over episodes of the time-averaged VoI.
    pub time_avg_voi: f64,
    /// Mean VoI at reception over all decisions.
    pub per_decision_voi: f64,
    pub avg_psnr_db: f64,
    pub mean_reward: f64,
    /// Whether the mean quality clears the configured floor.
    pub constraint_satisfied: bool,
    /// Decision counts per menu index.
    pub action_histogram: Vec<usize>,
    pub warnings: Vec<String>,
}

/// Evaluate a policy over `episodes` independent episodes with seeds
/// derived from `eval_seed`.
pub fn evaluate(
    cfg: &SimConfig,
    policy: &mut dyn AllocationPolicy,
    episodes: usize,
    eval_seed: u64,
) -> Result<EvaluationSummary> {
    if episodes == 0 {
        return Err(Error::InvalidParameter {
            name: "episodes",
            value: 0.0,
            constraint: ">= 1",
        });
    }
    policy.prepare_for_evaluation();
    let mut env = LinkEnv::new(cfg.clone())?;
    let mut voi_sum = 0.0;
    let mut decision_voi_sum = 0.0;
    let mut psnr_sum = 0.0;
    let mut reward_sum = 0.0;
    let mut decisions = 0usize;
    let mut histogram = vec![0usize; cfg.actions.len()];
    let mut warnings = Vec::new();
    for e in 0..episodes {
        let outcome = run_episode_in(
            &mut env,
            policy,
            seeds::subseed(eval_seed, "eval-episode", e as u64),
        )?;
        voi_sum += outcome.time_avg_voi;
        for r in &outcome.trace {
            decision_voi_sum += r.voi;
            psnr_sum += r.psnr_db;
            reward_sum += r.reward;
            histogram[r.action] += 1;
            decisions += 1;
        }
        warnings.extend(outcome.warnings);
    }
    if decisions == 0 {
        warnings.push("no decisions completed in any evaluation episode".to_string());
    }
    let per_decision = |sum: f64| if decisions > 0 { sum / decisions as f64 } else { 0.0 };
    let avg_psnr_db = per_decision(psnr_sum);
    Ok(EvaluationSummary {
        episodes,
        decisions,
        time_avg_voi: voi_sum / episodes as f64,
        per_decision_voi: per_decision(decision_voi_sum),
        avg_psnr_db,
        mean_reward: per_decision(reward_sum),
        constraint_satisfied: decisions > 0 && avg_psnr_db >= cfg.d_min_db,
        action_histogram: histogram,
        warnings,
    })
}

/// Knobs of the training driver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainOptions {
    /// Environment decisions to train over.
    pub total_steps: usize,
    /// Decisions per training episode.
    pub episode_decisions: usize,
    /// Multiplier step size for constrained training; `None` keeps the
    /// configured lambda fixed.
    pub dual_ascent_rate: Option<f64>,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            total_steps: 100_000,
            episode_decisions: 256,
            dual_ascent_rate: None,
        }
    }
}

/// One row of the learning curve, written after every optimizer update.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrainingPoint {
    pub update: u64,
    pub env_steps: usize,
    pub mean_reward: f64,
    pub mean_psnr_db: f64,
    pub lambda: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
    pub approx_kl: f64,
}

impl TrainingPoint {
    fn new(
        update: u64,
        env_steps: usize,
        mean_reward: f64,
        mean_psnr_db: f64,
        lambda: f64,
        stats: &UpdateStats,
    ) -> Self {
        TrainingPoint {
            update,
            env_steps,
            mean_reward,
            mean_psnr_db,
            lambda,
            policy_loss: stats.policy_loss,
            value_loss: stats.value_loss,
            entropy: stats.entropy,
            clip_fraction: stats.clip_fraction,
            approx_kl: stats.approx_kl,
        }
    }
}

/// A finished training run.
pub struct TrainResult {
    pub agent: PpoAgent,
    pub curves: Vec<TrainingPoint>,
    pub env_steps: usize,
    pub episodes: usize,
    pub final_lambda: f64,
    pub warnings: Vec<String>,
}

/// Train a fresh agent on the configured link.
///
/// Episodes run for a fixed number of decisions (rollout alignment);
/// whenever the buffer fills, one PPO update runs, the divergence
/// detector checks the window, and — in dual-ascent mode — the penalty
/// weight moves against the window's average quality margin.
pub fn train(cfg: &SimConfig, ppo: &PpoConfig, opts: &TrainOptions) -> Result<TrainResult> {
    if opts.episode_decisions == 0 {
        return Err(Error::InvalidParameter {
            name: "episode_decisions",
            value: 0.0,
            constraint: ">= 1",
        });
    }
    let mut env_cfg = cfg.clone();
    env_cfg.horizon = Horizon::Decisions {
        count: opts.episode_decisions,
    };
    let mut env = LinkEnv::new(env_cfg)?;
    let warnings = env.config_warnings().to_vec();
    let mut agent = PpoAgent::new(
        cfg.actions.clone(),
        ppo.clone(),
        seeds::subseed(cfg.seed, "agent-init", 0),
    )?;
    let mut act_rng = seeds::stream(cfg.seed, "train-act", 0);
    let mut update_rng = seeds::stream(cfg.seed, "train-update", 0);
    let mut buffer = RolloutBuffer::new(ppo.rollout_capacity);

    let mut lambda = cfg.lambda;
    let mut curves = Vec::new();
    let mut steps = 0usize;
    let mut episodes = 0usize;
    let mut window_reward = 0.0;
    let mut window_psnr = 0.0;
    let mut window_count = 0usize;

    'outer: while steps < opts.total_steps {
        env.set_lambda(lambda);
        let mut state = match env.reset(seeds::subseed(cfg.seed, "train-episode", episodes as u64))? {
            Some(state) => state,
            None => {
                return Err(Error::EmptyInput {
                    what: "a training episode with at least one decision",
                })
            }
        };
        episodes += 1;
        loop {
            let decision = agent.act(&state, &mut act_rng, ActMode::Sample)?;
            let outcome = env.step(decision.action)?;
            buffer.push(
                decision.obs,
                decision.action,
                decision.log_prob,
                decision.value,
                outcome.reward,
                outcome.done,
            );
            steps += 1;
            window_reward += outcome.reward;
            if let Some(record) = &outcome.record {
                window_psnr += record.psnr_db;
            }
            window_count += 1;

            if buffer.is_full() {
                let bootstrap = if outcome.done {
                    0.0
                } else {
                    let obs = agent.normalizer.normalize(&outcome.next_state.as_array());
                    agent.critic.forward(&obs)?[0]
                };
                let stats = agent.ppo_update(&mut buffer, bootstrap, &mut update_rng)?;
                let mean_reward = window_reward / window_count as f64;
                let mean_psnr = window_psnr / window_count as f64;
                check_divergence(mean_reward, stats.entropy, steps, opts.total_steps)?;
                if let Some(rate) = opts.dual_ascent_rate {
                    lambda = dual_ascent_step(lambda, rate, mean_psnr, cfg.d_min_db);
                    env.set_lambda(lambda);
                }
                curves.push(TrainingPoint::new(
                    agent.update_count(),
                    steps,
                    mean_reward,
                    mean_psnr,
                    lambda,
                    &stats,
                ));
                window_reward = 0.0;
                window_psnr = 0.0;
                window_count = 0;
            }

            if steps >= opts.total_steps {
                break 'outer;
            }
            if outcome.done {
                break;
            }
            state = outcome.next_state;
        }
    }
    Ok(TrainResult {
        agent,
        curves,
        env_steps: steps,
        episodes,
        final_lambda: lambda,
        warnings,
    })
}

/// Sweep driver knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepOptions {
    pub train: TrainOptions,
    pub eval_episodes: usize,
    /// Also evaluate every fixed policy and the threshold heuristic.
    pub include_baselines: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            train: TrainOptions {
                // Constrained training wants the multiplier to move with
                // the quality floor, so the sweep turns dual ascent on
                // unless explicitly configured otherwise.
                dual_ascent_rate: Some(0.01),
                total_steps: 20_000,
                ..TrainOptions::default()
            },
            eval_episodes: 4,
            include_baselines: true,
        }
    }
}

/// One `(d_min, policy)` cell of the trade-off table.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub d_min_db: f64,
    pub policy: String,
    pub avg_voi: f64,
    pub avg_psnr_db: f64,
    pub constraint_satisfied: bool,
}

/// Full sweep output: the table plus one example trace of the learned
/// policy per quality floor.
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub traces: Vec<(f64, Vec<TraceRecord>)>,
}

/// Train and evaluate across ascending quality floors, with baselines.
pub fn sweep_dmin(
    cfg: &SimConfig,
    ppo: &PpoConfig,
    d_mins: &[f64],
    opts: &SweepOptions,
) -> Result<SweepResult> {
    if d_mins.is_empty() {
        return Err(Error::EmptyInput { what: "d_min list" });
    }
    for pair in d_mins.windows(2) {
        if !(pair[0] < pair[1]) {
            return Err(Error::InvalidParameter {
                name: "d_mins",
                value: pair[1],
                constraint: "strictly ascending",
            });
        }
    }
    let mut rows = Vec::new();
    let mut traces = Vec::new();
    for (i, &d_min) in d_mins.iter().enumerate() {
        let mut cfg_d = cfg.clone();
        cfg_d.d_min_db = d_min;
        let eval_seed = seeds::subseed(cfg.seed, "sweep-eval", i as u64);

        let mut result = train(&cfg_d, ppo, &opts.train)?;
        let summary = evaluate(&cfg_d, &mut result.agent, opts.eval_episodes, eval_seed)?;
        rows.push(SweepRow {
            d_min_db: d_min,
            policy: "learned".to_string(),
            avg_voi: summary.time_avg_voi,
            avg_psnr_db: summary.avg_psnr_db,
            constraint_satisfied: summary.constraint_satisfied,
        });
        let example = run_episode(
            &cfg_d,
            &mut result.agent,
            seeds::subseed(cfg.seed, "sweep-trace", i as u64),
        )?;
        traces.push((d_min, example.trace));

        if opts.include_baselines {
            for level in 0..cfg.actions.len() {
                let mut fixed = FixedPolicy::new(level, &cfg.actions)?;
                let summary = evaluate(&cfg_d, &mut fixed, opts.eval_episodes, eval_seed)?;
                rows.push(SweepRow {
                    d_min_db: d_min,
                    policy: fixed.label(),
                    avg_voi: summary.time_avg_voi,
                    avg_psnr_db: summary.avg_psnr_db,
                    constraint_satisfied: summary.constraint_satisfied,
                });
            }
            let mut threshold = ThresholdPolicy { d_min_db: d_min };
            let summary = evaluate(&cfg_d, &mut threshold, opts.eval_episodes, eval_seed)?;
            rows.push(SweepRow {
                d_min_db: d_min,
                policy: threshold.label(),
                avg_voi: summary.time_avg_voi,
                avg_psnr_db: summary.avg_psnr_db,
                constraint_satisfied: summary.constraint_satisfied,
            });
        }
    }
    Ok(SweepResult { rows, traces })
}
