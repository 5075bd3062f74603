//! Freshness and fidelity metrics.
//!
//! Age of information measures how stale the receiver's newest picture is:
//! at time `t`, with `u(t)` the generation timestamp of the most recently
//! received update,
//!
//! ```text
//! A(t) = t - u(t)
//! ```
//!
//! Value of information converts that age into the usefulness of the
//! receiver's estimate of a stationary first-order Gauss-Markov source
//! observed across a link with linear SNR `gamma`:
//!
//! ```text
//! VoI(t) = -log(1 - (gamma / (1 + gamma)) * rho^A(t))
//! ```
//!
//! where `rho` in `[0, 1]` is the source's one-second autocorrelation. VoI
//! is largest at `A = 0` (fresh data, bounded by `log(1 + gamma)`), decays
//! monotonically with age, rises monotonically with SNR, and is always
//! nonnegative. `A` is real-valued; nothing quantizes ages to ticks.
//!
//! Fidelity is peak signal-to-noise ratio over all samples of an image
//! pair, capped so identical images compare and sort cleanly.

use crate::error::{Error, Result};
use crate::image::Image;
use serde::{Deserialize, Serialize};

/// PSNR assigned when the mean squared error vanishes (and an upper cap for
/// near-identical pairs), keeping the metric finite and sortable.
pub const PSNR_CAP_DB: f64 = 100.0;

/// Logarithm base used by [`voi`]; natural log (nats) is the default,
/// base-2 (bits) is available for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    #[default]
    Natural,
    Base2,
}

/// Source-model parameters entering the VoI formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VoiParams {
    /// One-second autocorrelation of the observed process, in `[0, 1]`.
    pub rho: f64,
    /// Log base of the score (nats or bits).
    pub log_base: LogBase,
}

impl Default for VoiParams {
    fn default() -> Self {
        VoiParams {
            rho: 0.1,
            log_base: LogBase::Natural,
        }
    }
}

impl VoiParams {
    /// Validate the parameter ranges.
    pub fn validate(&self) -> Result<()> {
        if !self.rho.is_finite() || !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::InvalidParameter {
                name: "rho",
                value: self.rho,
                constraint: "within [0, 1]",
            });
        }
        Ok(())
    }
}

/// Age of information at time `now` for an update generated at
/// `generation_time`. Errors when `now < generation_time`.
pub fn aoi(now: f64, generation_time: f64) -> Result<f64> {
    if !now.is_finite() || !generation_time.is_finite() {
        return Err(Error::InvalidParameter {
            name: "time",
            value: if now.is_finite() { generation_time } else { now },
            constraint: "finite",
        });
    }
    if now < generation_time {
        return Err(Error::TimeBeforeGeneration {
            now,
            generation_time,
        });
    }
    Ok(now - generation_time)
}

/// Value of information for linear SNR `gamma` and age `age`.
///
/// `gamma` must be finite and nonnegative; `age` finite and nonnegative.
/// `rho^0 = 1` for every `rho` including zero, so at `age = 0` the score is
/// `log(1 + gamma)` regardless of the source's memory.
pub fn voi(gamma: f64, params: &VoiParams, age: f64) -> Result<f64> {
    params.validate()?;
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::InvalidParameter {
            name: "gamma",
            value: gamma,
            constraint: "finite and >= 0",
        });
    }
    if !age.is_finite() || age < 0.0 {
        return Err(Error::InvalidParameter {
            name: "age",
            value: age,
            constraint: "finite and >= 0",
        });
    }
    // rho^age with the 0^0 = 1 convention; f64 powf already provides it.
    let decay = if age == 0.0 { 1.0 } else { params.rho.powf(age) };
    let x = gamma / (1.0 + gamma) * decay;
    // ln_1p keeps precision when x is tiny (old data or weak channels).
    let nats = -(-x).ln_1p();
    Ok(match params.log_base {
        LogBase::Natural => nats,
        LogBase::Base2 => nats / std::f64::consts::LN_2,
    })
}

/// Peak signal-to-noise ratio (dB) between two same-shape images, averaged
/// over every sample (all pixels and channels), peak `max_val`, capped at
/// [`PSNR_CAP_DB`].
pub fn psnr(a: &Image, b: &Image, max_val: f64) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(Error::ShapeMismatch {
            expected: a.shape_label(),
            actual: b.shape_label(),
        });
    }
    if !(max_val > 0.0) || !max_val.is_finite() {
        return Err(Error::InvalidParameter {
            name: "max_val",
            value: max_val,
            constraint: "finite and > 0",
        });
    }
    let n = a.len() as f64;
    let mse: f64 = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<f64>()
        / n;
    if mse == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * (max_val * max_val / mse).log10()).min(PSNR_CAP_DB))
}

/// One delivered update on the timeline: when it arrived and when its
/// content was generated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Update {
    pub reception_time: f64,
    pub generation_time: f64,
}

/// Time-averaged VoI over `[0, horizon]` for a sequence of received
/// updates, by trapezoidal quadrature at step `resolution`.
///
/// Between receptions the age grows linearly from the value it reset to, so
/// VoI is a smooth curve on each inter-reception segment; the integral is
/// evaluated segment by segment (segment edges land exactly on reception
/// instants, where the curve jumps). Before the first reception the
/// receiver has nothing, and the score is 0 by convention. Updates must be
/// ordered by reception time; updates received after `horizon` are ignored.
pub fn time_average_voi(
    updates: &[Update],
    horizon: f64,
    gamma: f64,
    params: &VoiParams,
    resolution: f64,
) -> Result<f64> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidParameter {
            name: "horizon",
            value: horizon,
            constraint: "finite and > 0",
        });
    }
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(Error::InvalidParameter {
            name: "resolution",
            value: resolution,
            constraint: "finite and > 0",
        });
    }
    for pair in updates.windows(2) {
        if pair[1].reception_time < pair[0].reception_time {
            return Err(Error::InvalidParameter {
                name: "updates",
                value: pair[1].reception_time,
                constraint: "sorted by reception time",
            });
        }
    }
    for u in updates {
        // Age at reception must be well defined.
        aoi(u.reception_time, u.generation_time)?;
    }

    let mut integral = 0.0;
    let in_horizon: Vec<&Update> = updates
        .iter()
        .filter(|u| u.reception_time <= horizon)
        .collect();
    for (i, update) in in_horizon.iter().enumerate() {
        let start = update.reception_time;
        let end = in_horizon
            .get(i + 1)
            .map(|next| next.reception_time)
            .unwrap_or(horizon)
            .min(horizon);
        if end <= start {
            continue;
        }
        let span = end - start;
        let steps = (span / resolution).ceil().max(1.0) as usize;
        let dt = span / steps as f64;
        let age_at = |t: f64| t - update.generation_time;
        let mut prev = voi(gamma, params, age_at(start))?;
        for k in 1..=steps {
            let t = start + dt * k as f64;
            let next = voi(gamma, params, age_at(t))?;
            integral += 0.5 * (prev + next) * dt;
            prev = next;
        }
    }
    Ok(integral / horizon)
}
