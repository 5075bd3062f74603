//! Simulation and policy-learning toolkit for timely image delivery over a
//! noisy, rate-limited link.
//!
//! The crate models the full loop of a remote-monitoring transmitter:
//!
//! * a periodically sampled image source feeding a single-slot buffer in
//!   which only the freshest observation survives ([`source`]),
//! * an analog block-DCT codec that maps an image onto a configurable
//!   number of channel symbols, plus a cheap rate–distortion surrogate for
//!   experiments that do not need pixel-exact transmission ([`codec`]),
//! * a complex AWGN channel with per-transmission SNR scheduling and an
//!   optional two-state availability process ([`channel`]),
//! * freshness metrics — age of information and the value-of-information
//!   score derived from it — alongside PSNR fidelity ([`metrics`]),
//! * a from-scratch multilayer perceptron with analytic backpropagation and
//!   Adam ([`nn`]), driving a PPO-trained allocator that picks how many
//!   symbols each image deserves ([`policy`]),
//! * the discrete-event engine tying it together: episode simulation,
//!   training, evaluation against baselines, and constraint sweeps
//!   ([`engine`]),
//! * file plumbing: PGM/PPM ingestion, CSV traces, TOML configuration,
//!   checkpoints, and run manifests ([`pnm`], [`trace`], [`config`],
//!   [`manifest`]).
//!
//! Every random draw flows from caller-supplied seeds through counter-based
//! stream derivation ([`seeds`]), so identical configuration and seed yield
//! bitwise-identical traces, checkpoints, and learning curves.

pub mod channel;
pub mod cli;
pub mod codec;
pub mod config;
pub mod engine;
pub mod error;
pub mod image;
pub mod manifest;
pub mod metrics;
pub mod nn;
pub mod pnm;
pub mod policy;
pub mod seeds;
pub mod source;
pub mod trace;

pub use error::{Error, Result};
