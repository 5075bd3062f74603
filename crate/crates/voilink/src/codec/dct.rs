//! Analog block-DCT codec.
//!
//! Encoding maps an image straight onto complex channel symbols with no
//! quantization or entropy coding, so fidelity degrades gracefully with
//! channel noise instead of collapsing at a threshold:
//!
//! 1. Pad each channel to multiples of 8 by edge replication and remove
//!    the per-channel mean (the "DC offset"), so coefficient statistics
//!    are approximately zero-mean.
//! 2. Apply an orthonormal 8x8 2-D DCT to every block.
//! 3. Group coefficients by (channel, in-block position) and compute each
//!    group's empirical variance across blocks. Positions with high
//!    variance carry the image's structure.
//! 4. Keep the `2K` individual coefficients belonging to the
//!    highest-variance groups (ties and partial groups resolved in a fixed
//!    deterministic order), pair them into `K` complex symbols, and scale
//!    the whole vector to unit mean power.
//! 5. The receiver knows the retained positions, their group variances,
//!    the scale, and the DC offsets through [`SideMetadata`], which the
//!    link conveys error-free. Each received component is de-scaled and
//!    shrunk by the linear MMSE gain `P / (P + sigma2_eff)` before the
//!    inverse transform; unsent positions decode as zero.
//!
//! A request that exceeds the image's coefficient budget (possible once
//! `eta` approaches 1, since each complex symbol carries two real
//! coefficients) is clipped to the largest representable code and flagged.
//!
//! One genuinely featureless case: a constant image has zero energy in
//! every mean-removed coefficient, leaving nothing to normalize. The
//! encoder then emits the all-zero codeword with scale 1 — the receiver's
//! MMSE estimate of a zero-variance coefficient is 0 no matter what
//! arrives, and the DC offsets alone reproduce the image exactly.

use num_complex::Complex64;
use std::sync::OnceLock;

use crate::channel;
use crate::error::{Error, Result};
use crate::image::Image;

use super::{realized_eta, symbol_budget};

/// Receiver-side description of one encoded image, conveyed error-free.
#[derive(Debug, Clone, PartialEq)]
pub struct SideMetadata {
    /// Original image height in pixels.
    pub height: usize,
    /// Original image width in pixels.
    pub width: usize,
    /// Channel count.
    pub channels: usize,
    /// Padded height (next multiple of 8).
    pub padded_height: usize,
    /// Padded width (next multiple of 8).
    pub padded_width: usize,
    /// Peak sample value of the pixel scale.
    pub max_val: f64,
    /// Per-channel means removed before the transform.
    pub dc_offsets: Vec<f64>,
    /// Flat coefficient indices retained, ascending and unique; exactly
    /// two per transmitted complex symbol.
    pub positions: Vec<u32>,
    /// Group variance of each retained coefficient, aligned with
    /// `positions`; the MMSE prior power.
    pub variances: Vec<f64>,
    /// Scale applied to every retained coefficient during power
    /// normalization (1 for the degenerate zero-energy codeword).
    pub scale: f64,
    /// Ratio the caller asked for.
    pub requested_eta: f64,
    /// Ratio realized after rounding/clipping to the symbol grid.
    pub realized_eta: f64,
    /// True when the request exceeded the coefficient budget.
    pub clipped: bool,
}

/// Block size of the transform.
const BLOCK: usize = 8;

/// Orthonormal 8-point DCT-II basis, row `k` evaluated at sample `n`.
/// Forward: `Y = C X C^T`; inverse: `X = C^T Y C` (exact transpose pair).
fn basis() -> &'static [[f64; BLOCK]; BLOCK] {
    static BASIS: OnceLock<[[f64; BLOCK]; BLOCK]> = OnceLock::new();
    BASIS.get_or_init(|| {
        let mut c = [[0.0; BLOCK]; BLOCK];
        let n = BLOCK as f64;
        for k in 0..BLOCK {
            let scale = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
            for t in 0..BLOCK {
                c[k][t] =
                    scale * (std::f64::consts::PI * (2.0 * t as f64 + 1.0) * k as f64 / (2.0 * n)).cos();
            }
        }
        c
    })
}

/// `Y = C X C^T` for one 8x8 block (in place of allocation churn, plain
/// nested loops — blocks are tiny and the compiler does fine).
fn forward_block(block: &mut [f64; BLOCK * BLOCK]) {
    let c = basis();
    let mut tmp = [0.0; BLOCK * BLOCK];
    // tmp = C * X
    for k in 0..BLOCK {
        for j in 0..BLOCK {
            let mut acc = 0.0;
            for t in 0..BLOCK {
                acc += c[k][t] * block[t * BLOCK + j];
            }
            tmp[k * BLOCK + j] = acc;
        }
    }
    // Y = tmp * C^T
    for k in 0..BLOCK {
        for l in 0..BLOCK {
            let mut acc = 0.0;
            for t in 0..BLOCK {
                acc += tmp[k * BLOCK + t] * c[l][t];
            }
            block[k * BLOCK + l] = acc;
        }
    }
}

/// `X = C^T Y C`, the exact inverse of [`forward_block`].
fn inverse_block(block: &mut [f64; BLOCK * BLOCK]) {
    let c = basis();
    let mut tmp = [0.0; BLOCK * BLOCK];
    // tmp = C^T * Y
    for t in 0..BLOCK {
        for j in 0..BLOCK {
            let mut acc = 0.0;
            for k in 0..BLOCK {
                acc += c[k][t] * block[k * BLOCK + j];
            }
            tmp[t * BLOCK + j] = acc;
        }
    }
    // X = tmp * C
    for t in 0..BLOCK {
        for u in 0..BLOCK {
            let mut acc = 0.0;
            for k in 0..BLOCK {
                acc += tmp[t * BLOCK + k] * c[k][u];
            }
            block[t * BLOCK + u] = acc;
        }
    }
}

/// Stateless analog block-DCT codec.
#[derive(Debug, Clone, Default)]
pub struct DctCodec;

impl DctCodec {
    pub fn new() -> Self {
        DctCodec
    }

    /// Transform, select, and normalize: image in, unit-power complex
    /// symbol vector plus side metadata out.
    pub fn encode(&self, image: &Image, eta: f64) -> Result<(Vec<Complex64>, SideMetadata)> {
        let (h, w, ch) = (image.height(), image.width(), image.channels());
        let hp = h.div_ceil(BLOCK) * BLOCK;
        let wp = w.div_ceil(BLOCK) * BLOCK;
        let blocks_y = hp / BLOCK;
        let blocks_x = wp / BLOCK;
        let blocks_per_channel = blocks_y * blocks_x;
        let total_coeffs = ch * hp * wp;

        let requested_k = symbol_budget(eta, h, w, ch)?;
        let (k, clipped) = if 2 * requested_k > total_coeffs {
            (total_coeffs / 2, true)
        } else {
            (requested_k, false)
        };
        let needed = 2 * k;

        // Per-channel mean over the original (unpadded) pixels.
        let mut dc_offsets = vec![0.0; ch];
        for c in 0..ch {
            let mut sum = 0.0;
            for y in 0..h {
                for x in 0..w {
                    sum += image.get(y, x, c);
                }
            }
            dc_offsets[c] = sum / (h * w) as f64;
        }

        // Transform every block of every channel. Coefficients are stored
        // as coeffs[(c * blocks_per_channel + b) * 64 + p], the same flat
        // layout `positions` indexes into.
        let mut coeffs = vec![0.0; total_coeffs];
        for c in 0..ch {
            for by in 0..blocks_y {
                for bx in 0..blocks_x {
                    let mut block = [0.0; BLOCK * BLOCK];
                    for dy in 0..BLOCK {
                        for dx in 0..BLOCK {
                            // Edge replication keeps padding smooth.
                            let y = (by * BLOCK + dy).min(h - 1);
                            let x = (bx * BLOCK + dx).min(w - 1);
                            block[dy * BLOCK + dx] = image.get(y, x, c) - dc_offsets[c];
                        }
                    }
                    forward_block(&mut block);
                    let b = by * blocks_x + bx;
                    let base = (c * blocks_per_channel + b) * BLOCK * BLOCK;
                    coeffs[base..base + BLOCK * BLOCK].copy_from_slice(&block);
                }
            }
        }

        // Empirical variance of each (channel, in-block position) group
        // across that channel's blocks.
        let groups = ch * BLOCK * BLOCK;
        let mut group_var = vec![0.0; groups];
        for c in 0..ch {
            for p in 0..BLOCK * BLOCK {
                let mut mean = 0.0;
                for b in 0..blocks_per_channel {
                    mean += coeffs[(c * blocks_per_channel + b) * BLOCK * BLOCK + p];
                }
                mean /= blocks_per_channel as f64;
                let mut var = 0.0;
                for b in 0..blocks_per_channel {
                    let d = coeffs[(c * blocks_per_channel + b) * BLOCK * BLOCK + p] - mean;
                    var += d * d;
                }
                group_var[c * BLOCK * BLOCK + p] = var / blocks_per_channel as f64;
            }
        }

        // Rank groups by variance (descending), breaking ties by group
        // index so the selection is fully deterministic; then take whole
        // groups block-by-block until `needed` coefficients are collected
        // (the cut may land inside the last group).
        let mut order: Vec<usize> = (0..groups).collect();
        order.sort_by(|&a, &b| {
            group_var[b]
                .total_cmp(&group_var[a])
                .then_with(|| a.cmp(&b))
        });

        let mut selected: Vec<(u32, f64)> = Vec::with_capacity(needed);
        'outer: for &g in &order {
            let (c, p) = (g / (BLOCK * BLOCK), g % (BLOCK * BLOCK));
            for b in 0..blocks_per_channel {
                let flat = ((c * blocks_per_channel + b) * BLOCK * BLOCK + p) as u32;
                selected.push((flat, group_var[g]));
                if selected.len() == needed {
                    break 'outer;
                }
            }
        }
        selected.sort_unstable_by_key(|&(flat, _)| flat);
        let positions: Vec<u32> = selected.iter().map(|&(flat, _)| flat).collect();
        let variances: Vec<f64> = selected.iter().map(|&(_, var)| var).collect();

        // Pack retained coefficients pairwise into complex symbols and
        // bring the vector to unit mean power.
        let raw: Vec<Complex64> = positions
            .chunks_exact(2)
            .map(|pair| {
                Complex64::new(
                    coeffs[pair[0] as usize],
                    coeffs[pair[1] as usize],
                )
            })
            .collect();
        let energy: f64 = raw.iter().map(|s| s.norm_sqr()).sum();
        let (symbols, scale) = if energy == 0.0 {
            // Featureless image: nothing to normalize, see module docs.
            (raw, 1.0)
        } else {
            channel::power_normalize(&raw)?
        };

        let meta = SideMetadata {
            height: h,
            width: w,
            channels: ch,
            padded_height: hp,
            padded_width: wp,
            max_val: image.max_val(),
            dc_offsets,
            positions,
            variances,
            scale,
            requested_eta: eta,
            realized_eta: realized_eta(k, h, w, ch),
            clipped,
        };
        Ok((symbols, meta))
    }

    /// MMSE-estimate the retained coefficients from received symbols and
    /// rebuild the image.
    pub fn decode(
        &self,
        received: &[Complex64],
        meta: &SideMetadata,
        sigma2: f64,
    ) -> Result<Image> {
        if !sigma2.is_finite() || sigma2 < 0.0 {
            return Err(Error::InvalidParameter {
                name: "sigma2",
                value: sigma2,
                constraint: "finite and >= 0",
            });
        }
        if received.len() * 2 != meta.positions.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} symbols", meta.positions.len() / 2),
                actual: format!("{} symbols", received.len()),
            });
        }

        let (h, w, ch) = (meta.height, meta.width, meta.channels);
        let (hp, wp) = (meta.padded_height, meta.padded_width);
        let blocks_x = wp / BLOCK;
        let blocks_per_channel = (hp / BLOCK) * blocks_x;
        let total_coeffs = ch * hp * wp;

        // Noise seen by one real coefficient after undoing the power
        // scale: each complex symbol carries sigma2/2 per component.
        let sigma2_eff = sigma2 / (2.0 * meta.scale * meta.scale);

        let mut coeffs = vec![0.0; total_coeffs];
        for (i, symbol) in received.iter().enumerate() {
            for (j, value) in [symbol.re, symbol.im].into_iter().enumerate() {
                let idx = 2 * i + j;
                let flat = meta.positions[idx] as usize;
                if flat >= total_coeffs {
                    return Err(Error::ShapeMismatch {
                        expected: format!("coefficient indices < {total_coeffs}"),
                        actual: format!("index {flat}"),
                    });
                }
                let prior = meta.variances[idx];
                // A noiseless link passes coefficients through untouched;
                // otherwise shrink toward the zero prior mean. A retained
                // position with zero variance estimates to 0 regardless of
                // what arrived.
                let gain = if sigma2_eff == 0.0 {
                    1.0
                } else {
                    prior / (prior + sigma2_eff)
                };
                coeffs[flat] = gain * (value / meta.scale);
            }
        }

        let mut data = vec![0.0; h * w * ch];
        for c in 0..ch {
            for by in 0..hp / BLOCK {
                for bx in 0..blocks_x {
                    let b = by * blocks_x + bx;
                    let base = (c * blocks_per_channel + b) * BLOCK * BLOCK;
                    let mut block = [0.0; BLOCK * BLOCK];
                    block.copy_from_slice(&coeffs[base..base + BLOCK * BLOCK]);
                    inverse_block(&mut block);
                    for dy in 0..BLOCK {
                        for dx in 0..BLOCK {
                            let y = by * BLOCK + dy;
                            let x = bx * BLOCK + dx;
                            if y < h && x < w {
                                let v = (block[dy * BLOCK + dx] + meta.dc_offsets[c])
                                    .clamp(0.0, meta.max_val);
                                data[(y * w + x) * ch + c] = v;
                            }
                        }
                    }
                }
            }
        }
        Image::new(h, w, ch, meta.max_val, data)
    }
}
