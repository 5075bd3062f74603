//! Deterministic rate–distortion stand-in.
//!
//! Training an allocation policy needs millions of "what PSNR would this
//! image get at ratio eta over an SNR-gamma link?" queries; running a real
//! codec for each would dominate the runtime without changing the decision
//! problem. This module answers those queries from either
//!
//! * a measured lookup table over a rectangular `(eta, gamma_db)` grid,
//!   bilinearly interpolated and never extrapolated, or
//! * a parametric saturating curve
//!   `clamp(p_floor + alpha * log2(1 + beta * eta * 10^(gamma_db/10)), p_min, p_max)`,
//!
//! plus a seeded per-image offset (bounded to ±1 dB) so different images
//! profile differently. Everything is a pure function of
//! `(model, eta, gamma_db, image_seed)` — no RNG state, no call-order
//! effects — which keeps simulations bitwise reproducible.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds;

/// Parametric saturating PSNR curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParametricRd {
    /// Quality at vanishing rate-SNR product, dB.
    pub p_floor: f64,
    /// dB gained per doubling of the effective rate-SNR product.
    pub alpha: f64,
    /// Coupling between `eta * linear SNR` and quality growth.
    pub beta: f64,
    /// Hard lower clamp, dB.
    pub p_min: f64,
    /// Hard upper clamp (saturation), dB.
    pub p_max: f64,
}

impl Default for ParametricRd {
    fn default() -> Self {
        ParametricRd {
            p_floor: 10.0,
            alpha: 4.0,
            beta: 40.0,
            p_min: 5.0,
            p_max: 45.0,
        }
    }
}

impl ParametricRd {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("p_floor", self.p_floor),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("p_min", self.p_min),
            ("p_max", self.p_max),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    constraint: "finite",
                });
            }
        }
        if self.alpha < 0.0 || self.beta < 0.0 {
            return Err(Error::InvalidParameter {
                name: "alpha/beta",
                value: self.alpha.min(self.beta),
                constraint: ">= 0",
            });
        }
        if self.p_min > self.p_max {
            return Err(Error::InvalidParameter {
                name: "p_min",
                value: self.p_min,
                constraint: "<= p_max",
            });
        }
        Ok(())
    }

    fn eval(&self, eta: f64, gamma_db: f64) -> f64 {
        let snr = 10f64.powf(gamma_db / 10.0);
        (self.p_floor + self.alpha * (1.0 + self.beta * eta * snr).log2())
            .clamp(self.p_min, self.p_max)
    }
}

/// Measured PSNR grid over ascending `etas` x ascending `gammas_db`,
/// bilinearly interpolated inside its hull.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdTable {
    etas: Vec<f64>,
    gammas_db: Vec<f64>,
    /// Row-major: `psnr_db[i * gammas_db.len() + j]` is the value at
    /// `(etas[i], gammas_db[j])`.
    psnr_db: Vec<f64>,
}

impl RdTable {
    /// Build a table from `(eta, gamma_db, psnr_db)` measurement rows.
    ///
    /// The rows must form a complete rectangular grid (every eta crossed
    /// with every gamma exactly once), and PSNR must be non-decreasing
    /// along both axes — a table violating either is a measurement error
    /// worth failing loudly on.
    pub fn from_rows(rows: &[(f64, f64, f64)]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::RdTable {
                detail: "no rows".to_string(),
            });
        }
        let mut etas: Vec<f64> = Vec::new();
        let mut gammas: Vec<f64> = Vec::new();
        for &(eta, gamma, psnr) in rows {
            if !eta.is_finite() || !gamma.is_finite() || !psnr.is_finite() {
                return Err(Error::RdTable {
                    detail: format!("non-finite row ({eta}, {gamma}, {psnr})"),
                });
            }
            if !etas.iter().any(|&e| e == eta) {
                etas.push(eta);
            }
            if !gammas.iter().any(|&g| g == gamma) {
                gammas.push(gamma);
            }
        }
        etas.sort_by(f64::total_cmp);
        gammas.sort_by(f64::total_cmp);
        if etas.len() * gammas.len() != rows.len() {
            return Err(Error::RdTable {
                detail: format!(
                    "{} rows do not fill a {} x {} grid",
                    rows.len(),
                    etas.len(),
                    gammas.len()
                ),
            });
        }
        let mut grid: Vec<Option<f64>> = vec![None; etas.len() * gammas.len()];
        for &(eta, gamma, psnr) in rows {
            let i = etas.iter().position(|&e| e == eta).unwrap();
            let j = gammas.iter().position(|&g| g == gamma).unwrap();
            let cell = &mut grid[i * gammas.len() + j];
            if cell.is_some() {
                return Err(Error::RdTable {
                    detail: format!("duplicate grid point ({eta}, {gamma})"),
                });
            }
            *cell = Some(psnr);
        }
        // Completeness is implied by the count check plus duplicate
        // rejection, so every cell is Some here.
        let psnr_db: Vec<f64> = grid.into_iter().map(Option::unwrap).collect();

        let table = RdTable {
            etas,
            gammas_db: gammas,
            psnr_db,
        };
        table.check_monotone()?;
        Ok(table)
    }

    fn check_monotone(&self) -> Result<()> {
        let (ne, ng) = (self.etas.len(), self.gammas_db.len());
        for i in 0..ne {
            for j in 0..ng {
                let v = self.psnr_db[i * ng + j];
                if i + 1 < ne && self.psnr_db[(i + 1) * ng + j] < v {
                    return Err(Error::RdTable {
                        detail: format!(
                            "PSNR decreases from eta {} to {} at gamma {}",
                            self.etas[i],
                            self.etas[i + 1],
                            self.gammas_db[j]
                        ),
                    });
                }
                if j + 1 < ng && self.psnr_db[i * ng + j + 1] < v {
                    return Err(Error::RdTable {
                        detail: format!(
                            "PSNR decreases from gamma {} to {} at eta {}",
                            self.gammas_db[j],
                            self.gammas_db[j + 1],
                            self.etas[i]
                        ),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn etas(&self) -> &[f64] {
        &self.etas
    }

    pub fn gammas_db(&self) -> &[f64] {
        &self.gammas_db
    }

    /// All grid points as `(eta, gamma_db, psnr_db)` rows, eta-major.
    pub fn rows(&self) -> Vec<(f64, f64, f64)> {
        let mut rows = Vec::with_capacity(self.psnr_db.len());
        for (i, &eta) in self.etas.iter().enumerate() {
            for (j, &gamma) in self.gammas_db.iter().enumerate() {
                rows.push((eta, gamma, self.psnr_db[i * self.gammas_db.len() + j]));
            }
        }
        rows
    }

    /// Bilinear interpolation; queries outside the grid hull are domain
    /// errors, not extrapolations.
    fn eval(&self, eta: f64, gamma_db: f64) -> Result<f64> {
        let (ne, ng) = (self.etas.len(), self.gammas_db.len());
        if eta < self.etas[0] || eta > self.etas[ne - 1] {
            return Err(Error::OutOfDomain {
                what: "eta",
                value: eta,
            });
        }
        if gamma_db < self.gammas_db[0] || gamma_db > self.gammas_db[ng - 1] {
            return Err(Error::OutOfDomain {
                what: "gamma_db",
                value: gamma_db,
            });
        }
        // Cell index: the last knot at or below the query (clamped so a
        // query on the top edge uses the final cell).
        let i = self
            .etas
            .partition_point(|&e| e <= eta)
            .saturating_sub(1)
            .min(ne.saturating_sub(2).max(0));
        let j = self
            .gammas_db
            .partition_point(|&g| g <= gamma_db)
            .saturating_sub(1)
            .min(ng.saturating_sub(2).max(0));
        if ne == 1 && ng == 1 {
            return Ok(self.psnr_db[0]);
        }
        let (e0, e1) = (self.etas[i], self.etas[(i + 1).min(ne - 1)]);
        let (g0, g1) = (self.gammas_db[j], self.gammas_db[(j + 1).min(ng - 1)]);
        let t = if e1 > e0 { (eta - e0) / (e1 - e0) } else { 0.0 };
        let u = if g1 > g0 { (gamma_db - g0) / (g1 - g0) } else { 0.0 };
        let at = |ii: usize, jj: usize| self.psnr_db[ii.min(ne - 1) * ng + jj.min(ng - 1)];
        Ok(at(i, j) * (1.0 - t) * (1.0 - u)
            + at(i + 1, j) * t * (1.0 - u)
            + at(i, j + 1) * (1.0 - t) * u
            + at(i + 1, j + 1) * t * u)
    }
}

/// Table or parametric backing curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurrogateKind {
    Parametric(ParametricRd),
    Table(RdTable),
}

/// The full surrogate: backing curve plus seeded per-image variation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateRdModel {
    pub kind: SurrogateKind,
    /// Amplitude of the per-image offset, dB, in `[0, 1]`.
    pub jitter_db: f64,
    /// Seed the per-image offsets are derived from.
    pub jitter_seed: u64,
}

impl Default for SurrogateRdModel {
    fn default() -> Self {
        SurrogateRdModel {
            kind: SurrogateKind::Parametric(ParametricRd::default()),
            jitter_db: 0.5,
            jitter_seed: 0,
        }
    }
}

impl SurrogateRdModel {
    pub fn validate(&self) -> Result<()> {
        if !self.jitter_db.is_finite() || !(0.0..=1.0).contains(&self.jitter_db) {
            return Err(Error::InvalidParameter {
                name: "jitter_db",
                value: self.jitter_db,
                constraint: "within [0, 1] dB",
            });
        }
        match &self.kind {
            SurrogateKind::Parametric(p) => p.validate(),
            // A constructed table is already structurally valid.
            SurrogateKind::Table(_) => Ok(()),
        }
    }

    /// The per-image quality offset: a fixed draw in
    /// `[-jitter_db, +jitter_db]`, independent of eta and gamma so each
    /// image keeps the backing curve's monotone shape.
    pub fn image_offset_db(&self, image_seed: u64) -> f64 {
        if self.jitter_db == 0.0 {
            return 0.0;
        }
        let mut rng = seeds::stream(self.jitter_seed, "rd-jitter", image_seed);
        (rng.gen::<f64>() * 2.0 - 1.0) * self.jitter_db
    }

    /// Attainable PSNR range in dB over all rates, channel qualities, and
    /// per-image offsets — a cheap sanity bound for quality floors.
    pub fn psnr_bounds(&self) -> (f64, f64) {
        let (lo, hi) = match &self.kind {
            SurrogateKind::Parametric(p) => (p.p_min, p.p_max),
            SurrogateKind::Table(t) => (
                t.psnr_db.iter().cloned().fold(f64::INFINITY, f64::min),
                t.psnr_db.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            ),
        };
        (lo - self.jitter_db, hi + self.jitter_db)
    }

    /// Predicted PSNR for one image at `(eta, gamma_db)`.
    pub fn psnr_db(&self, eta: f64, gamma_db: f64, image_seed: u64) -> Result<f64> {
        if !eta.is_finite() || !(eta > 0.0) || eta > 1.0 {
            return Err(Error::InvalidParameter {
                name: "eta",
                value: eta,
                constraint: "within (0, 1]",
            });
        }
        if !gamma_db.is_finite() {
            return Err(Error::InvalidParameter {
                name: "gamma_db",
                value: gamma_db,
                constraint: "finite",
            });
        }
        let base = match &self.kind {
            SurrogateKind::Parametric(p) => p.eval(eta, gamma_db),
            SurrogateKind::Table(t) => t.eval(eta, gamma_db)?,
        };
        Ok(base + self.image_offset_db(image_seed))
    }
}
