//! Image-to-symbols codecs and per-image rate–distortion profiling.
//!
//! Two interchangeable fidelity models live here:
//!
//! * [`dct::DctCodec`] — a real analog codec: block-DCT transform,
//!   variance-ranked coefficient selection, unit-power symbol mapping, and
//!   per-coefficient linear MMSE estimation at the receiver. Fidelity is
//!   measured, not predicted.
//! * [`surrogate::SurrogateRdModel`] — a deterministic PSNR model (lookup
//!   table with bilinear interpolation, or a parametric saturating curve)
//!   for experiments that only need plausible rate–distortion numbers, fast.
//!
//! Both express code length through the bandwidth ratio `eta`: an image of
//! `H x W` pixels and `C` channels transmitted at ratio `eta` occupies
//! `K = round(eta * C * H * W)` complex channel symbols.

pub mod dct;
pub mod surrogate;

use rand_chacha::ChaCha8Rng;

use crate::channel;
use crate::error::{Error, Result};
use crate::image::Image;

pub use dct::{DctCodec, SideMetadata};
pub use surrogate::{ParametricRd, RdTable, SurrogateKind, SurrogateRdModel};

/// Number of complex symbols for bandwidth ratio `eta` on a `H x W x C`
/// image: `round(eta * C * H * W)`, at least 1.
pub fn symbol_budget(eta: f64, height: usize, width: usize, channels: usize) -> Result<usize> {
    if !eta.is_finite() || !(eta > 0.0) || eta > 1.0 {
        return Err(Error::InvalidParameter {
            name: "eta",
            value: eta,
            constraint: "within (0, 1]",
        });
    }
    let samples = (height * width * channels) as f64;
    let k = (eta * samples).round() as usize;
    if k < 1 {
        return Err(Error::RateTooLow { eta, symbols: k });
    }
    Ok(k)
}

/// The bandwidth ratio actually achieved by a `k`-symbol code on the same
/// image, for reporting alongside the requested ratio.
pub fn realized_eta(k: usize, height: usize, width: usize, channels: usize) -> f64 {
    k as f64 / (height * width * channels) as f64
}

/// Sensitivity of an image's fidelity to its code length:
///
/// ```text
/// mu = ((psnr_max - psnr_min) / (l_max - l_min)) * psnr_max
/// ```
///
/// where the PSNRs are measured at the longest and shortest available
/// codes and `l_max`, `l_min` are those code lengths in symbols. Images
/// whose quality saturates early score low; images that keep improving
/// with more symbols score high.
pub fn transmission_coefficient(
    psnr_max: f64,
    psnr_min: f64,
    l_max: f64,
    l_min: f64,
) -> Result<f64> {
    if !(l_max > l_min) {
        return Err(Error::InvalidParameter {
            name: "l_max",
            value: l_max,
            constraint: "> l_min",
        });
    }
    if psnr_max < psnr_min {
        return Err(Error::InvalidParameter {
            name: "psnr_max",
            value: psnr_max,
            constraint: ">= psnr_min",
        });
    }
    Ok((psnr_max - psnr_min) / (l_max - l_min) * psnr_max)
}

/// What a codec gets to see of one captured sample: its dimensions and
/// stable identity always, actual pixels only when the dataset carries
/// them. The surrogate model needs no pixels; the DCT codec does.
#[derive(Debug, Clone, Copy)]
pub struct SampleView<'a> {
    pub pixels: Option<&'a Image>,
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    /// Stable per-image seed; drives the surrogate's per-image offset.
    pub seed: u64,
}

impl<'a> SampleView<'a> {
    pub fn of_image(image: &'a Image, seed: u64) -> Self {
        SampleView {
            pixels: Some(image),
            height: image.height(),
            width: image.width(),
            channels: image.channels(),
            seed,
        }
    }

    pub fn virtual_dims(height: usize, width: usize, channels: usize, seed: u64) -> Self {
        SampleView {
            pixels: None,
            height,
            width,
            channels,
            seed,
        }
    }
}

/// Result of one end-to-end transmission attempt.
#[derive(Debug, Clone, Copy)]
pub struct Shot {
    /// Complex symbols put on the air.
    pub symbols: usize,
    /// Bandwidth ratio actually realized by that symbol count.
    pub realized_eta: f64,
    /// Received fidelity in dB.
    pub psnr_db: f64,
    /// True when the request exceeded the image's coefficient budget and
    /// was clipped to the maximum representable code.
    pub clipped: bool,
}

/// The codec the simulation engine drives: a real DCT pipeline or the
/// deterministic surrogate.
#[derive(Debug, Clone)]
pub enum LinkCodec {
    Dct(DctCodec),
    Surrogate(SurrogateRdModel),
}

impl LinkCodec {
    /// Send one sample at ratio `eta` across an AWGN link of SNR
    /// `gamma_db` and report symbols spent plus received fidelity.
    pub fn transmit_once(
        &self,
        sample: &SampleView,
        eta: f64,
        gamma_db: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<Shot> {
        match self {
            LinkCodec::Dct(codec) => {
                let image = sample.pixels.ok_or(Error::EmptyInput {
                    what: "pixel data (the DCT codec cannot run on a virtual dataset)",
                })?;
                let sigma2 = channel::snr_to_sigma2(gamma_db);
                let (symbols, meta) = codec.encode(image, eta)?;
                let received = channel::transmit(&symbols, sigma2, rng);
                let decoded = codec.decode(&received, &meta, sigma2)?;
                let psnr_db = crate::metrics::psnr(image, &decoded, image.max_val())?;
                Ok(Shot {
                    symbols: symbols.len(),
                    realized_eta: meta.realized_eta,
                    psnr_db,
                    clipped: meta.clipped,
                })
            }
            LinkCodec::Surrogate(model) => {
                let k = symbol_budget(eta, sample.height, sample.width, sample.channels)?;
                let psnr_db = model.psnr_db(eta, gamma_db, sample.seed)?;
                Ok(Shot {
                    symbols: k,
                    realized_eta: realized_eta(k, sample.height, sample.width, sample.channels),
                    psnr_db,
                    clipped: false,
                })
            }
        }
    }

    /// True when this codec needs real pixel data.
    pub fn needs_pixels(&self) -> bool {
        matches!(self, LinkCodec::Dct(_))
    }
}

/// Per-image rate–distortion profile over a menu of bandwidth ratios.
#[derive(Debug, Clone)]
pub struct RdProfile {
    /// The profiled bandwidth ratios, ascending.
    pub levels: Vec<f64>,
    /// Code length (complex symbols) per level.
    pub symbols: Vec<usize>,
    /// Mean received PSNR per level, in dB.
    pub psnr_db: Vec<f64>,
    /// PSNR at the shortest code.
    pub psnr_min: f64,
    /// PSNR at the longest code.
    pub psnr_max: f64,
    /// Transmission coefficient `mu` (code-length sensitivity), >= 0.
    pub mu: f64,
}

impl RdProfile {
    /// PSNR estimate for one level index.
    pub fn psnr_at(&self, level_index: usize) -> f64 {
        self.psnr_db[level_index]
    }
}

/// Profile one image: mean received PSNR at every ratio in `levels`
/// (ascending, at least two), averaged over `trials` independent channel
/// realizations, plus the transmission coefficient derived from the
/// extremes. The surrogate codec is noise-free, so its profile is exact
/// regardless of `trials`.
pub fn profile_image(
    codec: &LinkCodec,
    sample: &SampleView,
    gamma_db: f64,
    levels: &[f64],
    trials: usize,
    rng: &mut ChaCha8Rng,
) -> Result<RdProfile> {
    if levels.len() < 2 {
        return Err(Error::EmptyInput {
            what: "action set (need at least two bandwidth ratios to profile)",
        });
    }
    for pair in levels.windows(2) {
        if !(pair[1] > pair[0]) {
            return Err(Error::InvalidParameter {
                name: "levels",
                value: pair[1],
                constraint: "strictly ascending",
            });
        }
    }
    if trials == 0 {
        return Err(Error::InvalidParameter {
            name: "trials",
            value: 0.0,
            constraint: ">= 1",
        });
    }

    let mut symbols = Vec::with_capacity(levels.len());
    let mut psnr_db = Vec::with_capacity(levels.len());
    for &eta in levels {
        let mut mean = 0.0;
        let mut k = 0;
        let effective_trials = if codec.needs_pixels() { trials } else { 1 };
        for _ in 0..effective_trials {
            let shot = codec.transmit_once(sample, eta, gamma_db, rng)?;
            mean += shot.psnr_db;
            k = shot.symbols;
        }
        symbols.push(k);
        psnr_db.push(mean / effective_trials as f64);
    }

    let psnr_min = psnr_db[0];
    let psnr_max = *psnr_db.last().unwrap();
    let l_min = symbols[0] as f64;
    let l_max = *symbols.last().unwrap() as f64;
    // Monte Carlo noise can leave a saturated image marginally "worse" at
    // the long code; that is indistinguishable from insensitive, so mu
    // clamps at zero rather than failing the run.
    let mu = if psnr_max >= psnr_min {
        transmission_coefficient(psnr_max, psnr_min, l_max, l_min)?
    } else {
        0.0
    };
    Ok(RdProfile {
        levels: levels.to_vec(),
        symbols,
        psnr_db,
        psnr_min,
        psnr_max,
        mu,
    })
}
