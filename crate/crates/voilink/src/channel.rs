//! Complex AWGN link with delay, SNR scheduling, and availability.
//!
//! The link carries unit-power complex symbol vectors at a fixed baud rate.
//! Receiving a `k`-symbol codeword therefore takes `k / baud` seconds —
//! spending more symbols on an image buys fidelity at the price of
//! freshness, which is the tension the rest of the crate exists to manage.
//!
//! Noise is circular complex Gaussian: total variance `sigma2` per symbol,
//! split evenly between the real and imaginary parts. Under the unit-power
//! convention, a link SNR of `g` dB corresponds to `sigma2 = 10^(-g/10)`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the unit-mean-power invariant of normalized codewords.
pub const POWER_TOLERANCE: f64 = 1e-9;

/// Noise variance for a link SNR given in dB, under unit signal power.
pub fn snr_to_sigma2(gamma_db: f64) -> f64 {
    10f64.powf(-gamma_db / 10.0)
}

/// dB → linear power ratio.
pub fn db_to_linear(gamma_db: f64) -> f64 {
    10f64.powf(gamma_db / 10.0)
}

/// Scale a symbol vector to unit average power.
///
/// Returns the normalized vector together with the scale factor that was
/// applied (`normalized = scale * input`), which receivers need to undo the
/// scaling. Empty and all-zero inputs have no defined scale and are
/// rejected.
pub fn power_normalize(symbols: &[Complex64]) -> Result<(Vec<Complex64>, f64)> {
    if symbols.is_empty() {
        return Err(Error::EmptyInput {
            what: "symbol vector",
        });
    }
    let energy: f64 = symbols.iter().map(|s| s.norm_sqr()).sum();
    if energy == 0.0 {
        return Err(Error::DegenerateCodeword);
    }
    let scale = (symbols.len() as f64 / energy).sqrt();
    Ok((symbols.iter().map(|s| s * scale).collect(), scale))
}

/// Mean per-symbol power of a vector.
pub fn mean_power(symbols: &[Complex64]) -> f64 {
    if symbols.is_empty() {
        return 0.0;
    }
    symbols.iter().map(|s| s.norm_sqr()).sum::<f64>() / symbols.len() as f64
}

/// Pass a codeword through the AWGN channel: `y = x + n`, with `n` drawn
/// i.i.d. circular complex Gaussian of total variance `sigma2` (i.e.
/// `sigma2 / 2` per real component). `sigma2 = 0` returns the input
/// unchanged.
pub fn transmit<R: Rng>(symbols: &[Complex64], sigma2: f64, rng: &mut R) -> Vec<Complex64> {
    if sigma2 == 0.0 {
        return symbols.to_vec();
    }
    let std = (sigma2 / 2.0).sqrt();
    symbols
        .iter()
        .map(|s| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            s + Complex64::new(std * re, std * im)
        })
        .collect()
}

/// Seconds needed to push `k` symbols through a `baud` symbols/second link.
///
/// `baud` may be `f64::INFINITY` to model a delay-free link.
pub fn tx_delay(k: usize, baud: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter {
            name: "k",
            value: 0.0,
            constraint: ">= 1 symbol",
        });
    }
    if !(baud > 0.0) {
        return Err(Error::InvalidParameter {
            name: "baud",
            value: baud,
            constraint: "> 0 symbols/s",
        });
    }
    Ok(k as f64 / baud)
}

/// Link occupancy from the transmitter's point of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Availability {
    Idle,
    Busy,
}

/// Two-state Markov availability process, advanced at a fixed check
/// interval by the simulation engine. With both probabilities zero (the
/// default) the link never leaves its initial state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AvailabilityModel {
    /// P(idle -> busy) per check.
    pub p_idle_to_busy: f64,
    /// P(busy -> idle) per check.
    pub p_busy_to_idle: f64,
}

impl Default for AvailabilityModel {
    fn default() -> Self {
        AvailabilityModel {
            p_idle_to_busy: 0.0,
            p_busy_to_idle: 0.0,
        }
    }
}

impl AvailabilityModel {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("p_idle_to_busy", self.p_idle_to_busy),
            ("p_busy_to_idle", self.p_busy_to_idle),
        ] {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter {
                    name,
                    value: p,
                    constraint: "within [0, 1]",
                });
            }
        }
        Ok(())
    }

    /// True when the chain can ever change state; lets the engine skip
    /// scheduling availability checks for the degenerate always-same chain.
    pub fn is_active(&self) -> bool {
        self.p_idle_to_busy > 0.0 || self.p_busy_to_idle > 0.0
    }

    /// One Markov transition.
    pub fn step<R: Rng>(&self, state: Availability, rng: &mut R) -> Availability {
        match state {
            Availability::Idle => {
                if rng.gen::<f64>() < self.p_idle_to_busy {
                    Availability::Busy
                } else {
                    Availability::Idle
                }
            }
            Availability::Busy => {
                if rng.gen::<f64>() < self.p_busy_to_idle {
                    Availability::Idle
                } else {
                    Availability::Busy
                }
            }
        }
    }
}

/// Per-transmission link SNR schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "schedule", rename_all = "snake_case", deny_unknown_fields)]
pub enum GammaSchedule {
    /// Constant SNR.
    Fixed { db: f64 },
    /// Seeded random walk: each transmission moves the SNR up or down by
    /// `step_db` (fair coin), clamped to `[min_db, max_db]`.
    RandomWalk {
        min_db: f64,
        max_db: f64,
        step_db: f64,
    },
}

impl Default for GammaSchedule {
    fn default() -> Self {
        GammaSchedule::Fixed { db: 7.0 }
    }
}

impl GammaSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            GammaSchedule::Fixed { db } => {
                if !db.is_finite() {
                    return Err(Error::InvalidParameter {
                        name: "gamma db",
                        value: db,
                        constraint: "finite",
                    });
                }
            }
            GammaSchedule::RandomWalk {
                min_db,
                max_db,
                step_db,
            } => {
                if !min_db.is_finite() || !max_db.is_finite() || min_db > max_db {
                    return Err(Error::InvalidParameter {
                        name: "gamma range",
                        value: min_db,
                        constraint: "finite with min_db <= max_db",
                    });
                }
                if !(step_db > 0.0) || !step_db.is_finite() {
                    return Err(Error::InvalidParameter {
                        name: "step_db",
                        value: step_db,
                        constraint: "finite and > 0",
                    });
                }
            }
        }
        Ok(())
    }

    /// SNR for the first transmission of a run.
    pub fn initial_db(&self) -> f64 {
        match *self {
            GammaSchedule::Fixed { db } => db,
            GammaSchedule::RandomWalk { min_db, max_db, .. } => 0.5 * (min_db + max_db),
        }
    }

    /// SNR for the next transmission, given the previous one.
    pub fn advance<R: Rng>(&self, current_db: f64, rng: &mut R) -> f64 {
        match *self {
            GammaSchedule::Fixed { db } => db,
            GammaSchedule::RandomWalk {
                min_db,
                max_db,
                step_db,
            } => {
                let step = if rng.gen::<bool>() { step_db } else { -step_db };
                (current_db + step).clamp(min_db, max_db)
            }
        }
    }
}
