//! In-memory image representation.
//!
//! Pixels are stored as `f64` in `[0, max_val]`, interleaved row-major
//! (`y`, then `x`, then channel) — the same order the PGM/PPM loaders read
//! them in. All downstream math (DCT, PSNR) runs in `f64`, so images are
//! kept in that type from the start; 8-bit files simply populate integral
//! values.

use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::seeds;

/// Dense H x W x C image with floating-point samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    channels: usize,
    max_val: f64,
    data: Vec<f64>,
}

impl Image {
    /// Build an image from raw interleaved samples.
    pub fn new(
        height: usize,
        width: usize,
        channels: usize,
        max_val: f64,
        data: Vec<f64>,
    ) -> Result<Self> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(Error::EmptyInput {
                what: "image with a zero dimension",
            });
        }
        if !(max_val > 0.0) || !max_val.is_finite() {
            return Err(Error::InvalidParameter {
                name: "max_val",
                value: max_val,
                constraint: "finite and > 0",
            });
        }
        let expected = height * width * channels;
        if data.len() != expected {
            return Err(Error::ShapeMismatch {
                expected: format!("{height}x{width}x{channels} = {expected} samples"),
                actual: format!("{} samples", data.len()),
            });
        }
        Ok(Image {
            height,
            width,
            channels,
            max_val,
            data,
        })
    }

    /// Constant-valued image (every sample equals `value`).
    pub fn constant(height: usize, width: usize, channels: usize, value: f64) -> Result<Self> {
        Image::new(
            height,
            width,
            channels,
            255.0,
            vec![value; height * width * channels],
        )
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Peak sample value the pixel scale is defined against (255 for 8-bit).
    pub fn max_val(&self) -> f64 {
        self.max_val
    }

    /// Total number of samples, `H * W * C`.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Sample at (`y`, `x`, channel `c`).
    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, c: usize, value: f64) {
        self.data[(y * self.width + x) * self.channels + c] = value;
    }

    /// Flat interleaved sample slice.
    pub fn samples(&self) -> &[f64] {
        &self.data
    }

    /// `"HxWxC"` label for error messages.
    pub fn shape_label(&self) -> String {
        format!("{}x{}x{}", self.height, self.width, self.channels)
    }

    /// True when both images have identical dimensions and channel count.
    pub fn same_shape(&self, other: &Image) -> bool {
        self.height == other.height
            && self.width == other.width
            && self.channels == other.channels
    }
}

/// Deterministic textured test image.
///
/// Layers a random linear ramp, a handful of low-frequency sinusoids, a
/// smooth coarse-grid field, and low-amplitude white noise, then rescales
/// into `[8, 247]`. The mix spreads energy over the whole spatial spectrum
/// so fidelity differences between symbol budgets stay visible, which is
/// what the codec trend tests need. Same `seed` (and shape) — same image.
pub fn synthetic_image(seed: u64, height: usize, width: usize, channels: usize) -> Result<Image> {
    if height == 0 || width == 0 || channels == 0 {
        return Err(Error::EmptyInput {
            what: "image with a zero dimension",
        });
    }
    let mut rng = seeds::stream(seed, "synthetic-image", 0);
    let mut data = vec![0.0; height * width * channels];

    for c in 0..channels {
        // Random ramp direction.
        let gx: f64 = rng.gen_range(-1.0..1.0);
        let gy: f64 = rng.gen_range(-1.0..1.0);

        // A few sinusoidal plaids at random low spatial frequencies.
        let mut waves = Vec::new();
        for _ in 0..3 {
            let fy: f64 = rng.gen_range(0.2..3.0) / height as f64;
            let fx: f64 = rng.gen_range(0.2..3.0) / width as f64;
            let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let amp: f64 = rng.gen_range(0.3..1.0);
            waves.push((fy, fx, phase, amp));
        }

        // Coarse random grid, bilinearly upsampled into a smooth field.
        let gh = (height / 8).max(2);
        let gw = (width / 8).max(2);
        let grid: Vec<f64> = (0..gh * gw).map(|_| rng.sample(StandardNormal)).collect();
        let grid_at = |gy: usize, gx: usize| grid[gy.min(gh - 1) * gw + gx.min(gw - 1)];

        let mut plane = vec![0.0; height * width];
        for y in 0..height {
            for x in 0..width {
                let mut v = gx * x as f64 / width as f64 + gy * y as f64 / height as f64;
                for &(fy, fx, phase, amp) in &waves {
                    v += amp * (std::f64::consts::TAU * (fy * y as f64 + fx * x as f64) + phase).sin();
                }
                let py = y as f64 / height as f64 * (gh - 1) as f64;
                let px = x as f64 / width as f64 * (gw - 1) as f64;
                let (y0, x0) = (py.floor() as usize, px.floor() as usize);
                let (ty, tx) = (py - y0 as f64, px - x0 as f64);
                let smooth = grid_at(y0, x0) * (1.0 - ty) * (1.0 - tx)
                    + grid_at(y0 + 1, x0) * ty * (1.0 - tx)
                    + grid_at(y0, x0 + 1) * (1.0 - ty) * tx
                    + grid_at(y0 + 1, x0 + 1) * ty * tx;
                v += 0.8 * smooth;
                let noise: f64 = rng.sample(StandardNormal);
                v += 0.05 * noise;
                plane[y * width + x] = v;
            }
        }

        let lo = plane.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = plane.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let span = if hi > lo { hi - lo } else { 1.0 };
        for y in 0..height {
            for x in 0..width {
                let v = 8.0 + (plane[y * width + x] - lo) / span * 239.0;
                data[(y * width + x) * channels + c] = v;
            }
        }
    }

    Image::new(height, width, channels, 255.0, data)
}

/// Convenience: a corpus of distinct synthetic images sharing one shape.
pub fn synthetic_corpus(
    seed: u64,
    count: usize,
    height: usize,
    width: usize,
    channels: usize,
) -> Result<Vec<Image>> {
    (0..count)
        .map(|i| synthetic_image(seeds::subseed(seed, "corpus-image", i as u64), height, width, channels))
        .collect()
}
