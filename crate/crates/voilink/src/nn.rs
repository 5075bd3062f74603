//! Minimal fully-connected network with analytic gradients.
//!
//! Everything the allocation policy learns runs through this module: a
//! plain multilayer perceptron in `f64`, tanh on the hidden layers, and
//! either a softmax distribution head (actor) or a raw linear head
//! (critic). There is no autograd — [`Mlp::backward`] applies the chain
//! rule by hand — so [`finite_diff_check`] exists as the independent
//! referee: central finite differences over every parameter, with the
//! worst relative error reported.
//!
//! Parameters flatten in one canonical order (per layer: weights row-major
//! `out x in`, then biases), which is also the checkpoint wire format: a
//! single-line JSON header followed by the flat little-endian `f64` array.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

/// Output-layer behavior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Head {
    /// Probabilities over a discrete menu: softmax of the final layer.
    Softmax,
    /// Raw affine outputs (used with one unit as a value estimate).
    Linear,
}

/// Fully-connected tanh network.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    head: Head,
    /// `weights[l]` is `sizes[l+1] x sizes[l]`, row-major.
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

/// Per-layer parameter gradients, same shapes as the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(mlp: &Mlp) -> Self {
        Gradients {
            weights: mlp.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: mlp.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    /// `self += scale * other`, for minibatch accumulation.
    pub fn accumulate(&mut self, other: &Gradients, scale: f64) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += scale * y;
            }
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += scale * y;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for w in &mut self.weights {
            for x in w {
                *x *= factor;
            }
        }
        for b in &mut self.biases {
            for x in b {
                *x *= factor;
            }
        }
    }

    fn flatten_into(&self, out: &mut Vec<f64>) {
        out.clear();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w);
            out.extend_from_slice(b);
        }
    }
}

/// Intermediate activations captured by [`Mlp::forward_cached`], needed to
/// run [`Mlp::backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `activations[0]` is the input; `activations[l]` for `l >= 1` is the
    /// post-tanh output of hidden layer `l`. The final layer's
    /// pre-activation is separate.
    activations: Vec<Vec<f64>>,
    /// Pre-head output of the last layer (the logits for a softmax head).
    logits: Vec<f64>,
    /// Post-head output (softmax probabilities, or the logits themselves).
    output: Vec<f64>,
}

impl ForwardCache {
    /// Pre-head values of the final layer.
    pub fn logits(&self) -> &[f64] {
        &self.logits
    }

    /// Post-head output (what `forward` returns).
    pub fn output(&self) -> &[f64] {
        &self.output
    }
}

impl Mlp {
    /// Initialize with uniform draws in `+/- sqrt(6 / (fan_in + fan_out))`
    /// per layer and zero biases.
    pub fn new<R: Rng>(sizes: &[usize], head: Head, rng: &mut R) -> Result<Self> {
        let mut mlp = Mlp::zeros(sizes, head)?;
        for l in 0..mlp.weights.len() {
            let bound = (6.0 / (sizes[l] + sizes[l + 1]) as f64).sqrt();
            for w in &mut mlp.weights[l] {
                *w = rng.gen_range(-bound..=bound);
            }
        }
        Ok(mlp)
    }

    /// All-zero parameters (useful as a deterministic fixture).
    pub fn zeros(sizes: &[usize], head: Head) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "sizes",
                value: sizes.len() as f64,
                constraint: "at least an input and an output layer",
            });
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(Error::InvalidParameter {
                name: "sizes",
                value: 0.0,
                constraint: "every layer width >= 1",
            });
        }
        let weights = (0..sizes.len() - 1)
            .map(|l| vec![0.0; sizes[l + 1] * sizes[l]])
            .collect();
        let biases = (0..sizes.len() - 1).map(|l| vec![0.0; sizes[l + 1]]).collect();
        Ok(Mlp {
            sizes: sizes.to_vec(),
            head,
            weights,
            biases,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn head(&self) -> Head {
        self.head
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// Copy all parameters out in canonical order.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w);
            out.extend_from_slice(b);
        }
        out
    }

    /// Overwrite all parameters from canonical order.
    pub fn set_params_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} parameters", self.param_count()),
                actual: format!("{} parameters", flat.len()),
            });
        }
        let mut offset = 0;
        for l in 0..self.weights.len() {
            let wn = self.weights[l].len();
            self.weights[l].copy_from_slice(&flat[offset..offset + wn]);
            offset += wn;
            let bn = self.biases[l].len();
            self.biases[l].copy_from_slice(&flat[offset..offset + bn]);
            offset += bn;
        }
        Ok(())
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.sizes[0] {
            return Err(Error::ShapeMismatch {
                expected: format!("input of {}", self.sizes[0]),
                actual: format!("input of {}", input.len()),
            });
        }
        Ok(())
    }

    /// Forward pass returning only the head output.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_cached(input)?.0)
    }

    /// Forward pass returning the output and the cache for [`backward`].
    ///
    /// [`backward`]: Mlp::backward
    pub fn forward_cached(&self, input: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        self.check_input(input)?;
        let last = self.weights.len() - 1;
        let mut activations = Vec::with_capacity(self.weights.len());
        activations.push(input.to_vec());
        let mut current = input.to_vec();
        for l in 0..self.weights.len() {
            let (n_out, n_in) = (self.sizes[l + 1], self.sizes[l]);
            let mut z = self.biases[l].clone();
            for o in 0..n_out {
                let row = &self.weights[l][o * n_in..(o + 1) * n_in];
                let mut acc = 0.0;
                for (wi, xi) in row.iter().zip(&current) {
                    acc += wi * xi;
                }
                z[o] += acc;
            }
            if l < last {
                for v in &mut z {
                    *v = v.tanh();
                }
                activations.push(z.clone());
                current = z;
            } else {
                let output = apply_head(self.head, &z);
                let cache = ForwardCache {
                    activations,
                    logits: z,
                    output: output.clone(),
                };
                return Ok((output, cache));
            }
        }
        unreachable!("network has at least one layer");
    }

    /// Exact gradient of a scalar loss with respect to every parameter,
    /// given the loss gradient at the head output (`d_output[i] =
    /// dL/d output[i]`). For a softmax head this includes the softmax
    /// Jacobian; use [`Mlp::backward_from_logits`] when the caller already
    /// has the gradient at the pre-head logits.
    pub fn backward(&self, cache: &ForwardCache, d_output: &[f64]) -> Result<Gradients> {
        let d_logits = match self.head {
            Head::Linear => d_output.to_vec(),
            Head::Softmax => {
                // dL/dz_j = p_j * (dL/dp_j - sum_i dL/dp_i * p_i)
                let p = &cache.output;
                let dot: f64 = d_output.iter().zip(p).map(|(g, pi)| g * pi).sum();
                p.iter().zip(d_output).map(|(pi, g)| pi * (g - dot)).collect()
            }
        };
        self.backward_from_logits(cache, &d_logits)
    }

    /// Backpropagation from a gradient already expressed at the pre-head
    /// logits. This is the numerically safe entry point for losses (like a
    /// policy-gradient surrogate) whose logit gradient has a closed form.
    pub fn backward_from_logits(
        &self,
        cache: &ForwardCache,
        d_logits: &[f64],
    ) -> Result<Gradients> {
        if d_logits.len() != self.output_dim() {
            return Err(Error::ShapeMismatch {
                expected: format!("gradient of {}", self.output_dim()),
                actual: format!("gradient of {}", d_logits.len()),
            });
        }
        let mut grads = Gradients::zeros_like(self);
        let mut dz = d_logits.to_vec();
        for l in (0..self.weights.len()).rev() {
            let (n_out, n_in) = (self.sizes[l + 1], self.sizes[l]);
            let a_prev = &cache.activations[l];
            for o in 0..n_out {
                grads.biases[l][o] = dz[o];
                let row = &mut grads.weights[l][o * n_in..(o + 1) * n_in];
                for (gi, ai) in row.iter_mut().zip(a_prev) {
                    *gi = dz[o] * ai;
                }
            }
            if l > 0 {
                // d a_{l-1}, then through tanh: dz = da * (1 - a^2).
                let mut da = vec![0.0; n_in];
                for o in 0..n_out {
                    let row = &self.weights[l][o * n_in..(o + 1) * n_in];
                    for (di, wi) in da.iter_mut().zip(row) {
                        *di += dz[o] * wi;
                    }
                }
                dz = da
                    .iter()
                    .zip(a_prev)
                    .map(|(di, ai)| di * (1.0 - ai * ai))
                    .collect();
            }
        }
        Ok(grads)
    }
}

fn apply_head(head: Head, z: &[f64]) -> Vec<f64> {
    match head {
        Head::Linear => z.to_vec(),
        Head::Softmax => {
            let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
            let sum: f64 = exps.iter().sum();
            exps.into_iter().map(|e| e / sum).collect()
        }
    }
}

/// Log-probabilities of a softmax head computed stably from the logits.
pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = logits.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
    logits.iter().map(|v| v - lse).collect()
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

/// Adam optimizer state over one network's flat parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
    #[serde(skip)]
    scratch: Vec<f64>,
}

impl AdamState {
    pub fn new(learning_rate: f64, param_count: usize) -> Self {
        AdamState {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
            scratch: Vec::new(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One bias-corrected update: `theta -= lr * m_hat / (sqrt(v_hat) + eps)`.
    ///
    /// Non-finite gradients abort with a diagnostic naming the offending
    /// component — silently folding a NaN into the moments would poison
    /// every later step.
    pub fn step(&mut self, mlp: &mut Mlp, grads: &Gradients) -> Result<()> {
        let mut flat_grads = std::mem::take(&mut self.scratch);
        grads.flatten_into(&mut flat_grads);
        if flat_grads.len() != self.m.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} gradient entries", self.m.len()),
                actual: format!("{}", flat_grads.len()),
            });
        }
        if let Some(bad) = flat_grads.iter().position(|g| !g.is_finite()) {
            let value = flat_grads[bad];
            self.scratch = flat_grads;
            return Err(Error::NonFinite {
                context: "gradient",
                detail: format!("component {bad} is {value}"),
            });
        }
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);
        let mut params = mlp.params_flat();
        for i in 0..params.len() {
            let g = flat_grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
        mlp.set_params_flat(&params)?;
        self.scratch = flat_grads;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Gradient verification
// ---------------------------------------------------------------------------

/// A scalar loss over the network output, with its analytic gradient.
pub trait ScalarLoss {
    fn value(&self, output: &[f64]) -> f64;
    fn grad(&self, output: &[f64]) -> Vec<f64>;
}

/// `L = 0.5 * sum (output - target)^2`.
pub struct QuadraticLoss {
    pub target: Vec<f64>,
}

impl ScalarLoss for QuadraticLoss {
    fn value(&self, output: &[f64]) -> f64 {
        0.5 * output
            .iter()
            .zip(&self.target)
            .map(|(o, t)| (o - t) * (o - t))
            .sum::<f64>()
    }

    fn grad(&self, output: &[f64]) -> Vec<f64> {
        output.iter().zip(&self.target).map(|(o, t)| o - t).collect()
    }
}

/// `L = -ln output[index]`, the likelihood loss over a softmax head.
pub struct NegLogProbLoss {
    pub index: usize,
}

impl ScalarLoss for NegLogProbLoss {
    fn value(&self, output: &[f64]) -> f64 {
        -output[self.index].ln()
    }

    fn grad(&self, output: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; output.len()];
        g[self.index] = -1.0 / output[self.index];
        g
    }
}

/// Step size of the central differences in [`finite_diff_check`].
pub const FINITE_DIFF_STEP: f64 = 1e-5;

/// Compare analytic and numeric gradients of `loss` composed with the
/// network at `input`, over every parameter, and return the worst relative
/// error `|a - n| / max(|a|, |n|, 1e-8)`.
pub fn finite_diff_check(mlp: &Mlp, input: &[f64], loss: &dyn ScalarLoss) -> Result<f64> {
    let (output, cache) = mlp.forward_cached(input)?;
    let analytic_grads = mlp.backward(&cache, &loss.grad(&output))?;
    let mut analytic = Vec::with_capacity(mlp.param_count());
    for (w, b) in analytic_grads.weights.iter().zip(&analytic_grads.biases) {
        analytic.extend_from_slice(w);
        analytic.extend_from_slice(b);
    }

    let mut probe = mlp.clone();
    let base = mlp.params_flat();
    let mut worst = 0.0f64;
    for i in 0..base.len() {
        let mut params = base.clone();
        params[i] = base[i] + FINITE_DIFF_STEP;
        probe.set_params_flat(&params)?;
        let up = loss.value(&probe.forward(input)?);
        params[i] = base[i] - FINITE_DIFF_STEP;
        probe.set_params_flat(&params)?;
        let down = loss.value(&probe.forward(input)?);
        let numeric = (up - down) / (2.0 * FINITE_DIFF_STEP);
        let err = (analytic[i] - numeric).abs() / analytic[i].abs().max(numeric.abs()).max(1e-8);
        worst = worst.max(err);
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

/// Metadata stored ahead of the flat parameter array in a checkpoint file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointHeader {
    pub architecture: Vec<usize>,
    pub head: Head,
    pub step_count: u64,
    pub rng_seed: u64,
    pub param_count: usize,
}

/// Write `mlp` to `path`: one line of JSON header, then the parameters as
/// a flat little-endian `f64` array in canonical order.
pub fn save_checkpoint(
    path: &Path,
    mlp: &Mlp,
    step_count: u64,
    rng_seed: u64,
) -> Result<()> {
    let header = CheckpointHeader {
        architecture: mlp.sizes().to_vec(),
        head: mlp.head(),
        step_count,
        rng_seed,
        param_count: mlp.param_count(),
    };
    let mut bytes = serde_json::to_string(&header)?.into_bytes();
    bytes.push(b'\n');
    for value in mlp.params_flat() {
        bytes.extend_from_slice(&value.to_le_bytes());
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Read a checkpoint back. The header must be self-consistent and the
/// payload exactly as long as it declares.
pub fn load_checkpoint(path: &Path) -> Result<(Mlp, CheckpointHeader)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut reader = std::io::BufReader::new(file);
    let mut header_line = Vec::new();
    {
        use std::io::BufRead;
        reader
            .read_until(b'\n', &mut header_line)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
    }
    if header_line.last() != Some(&b'\n') {
        return Err(Error::Checkpoint {
            detail: "missing header line".to_string(),
        });
    }
    let header: CheckpointHeader = serde_json::from_slice(&header_line)?;
    let mut mlp = Mlp::zeros(&header.architecture, header.head)?;
    if header.param_count != mlp.param_count() {
        return Err(Error::Checkpoint {
            detail: format!(
                "header claims {} parameters but architecture {:?} has {}",
                header.param_count,
                header.architecture,
                mlp.param_count()
            ),
        });
    }
    let mut payload = Vec::new();
    reader
        .read_to_end(&mut payload)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    if payload.len() != header.param_count * 8 {
        return Err(Error::Checkpoint {
            detail: format!(
                "payload holds {} bytes, expected {}",
                payload.len(),
                header.param_count * 8
            ),
        });
    }
    let params: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    mlp.set_params_flat(&params)?;
    Ok((mlp, header))
}

/// Serialize a checkpoint to bytes (same format as [`save_checkpoint`])
/// without touching the filesystem; used for determinism comparisons.
pub fn checkpoint_bytes(mlp: &Mlp, step_count: u64, rng_seed: u64) -> Result<Vec<u8>> {
    let header = CheckpointHeader {
        architecture: mlp.sizes().to_vec(),
        head: mlp.head(),
        step_count,
        rng_seed,
        param_count: mlp.param_count(),
    };
    let mut bytes = serde_json::to_string(&header)?.into_bytes();
    bytes.push(b'\n');
    for value in mlp.params_flat() {
        bytes.extend_from_slice(&value.to_le_bytes());
    }
    Ok(bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds;

    #[test]
    fn zero_softmax_net_is_uniform() {
        let mlp = Mlp::zeros(&[3, 8, 8, 5], Head::Softmax).unwrap();
        let out = mlp.forward(&[0.3, -1.0, 2.0]).unwrap();
        for p in &out {
            assert!((p - 0.2).abs() < 1e-15, "expected uniform 1/5, got {out:?}");
        }
    }

    #[test]
    fn identity_weight_chain_composes_tanh() {
        // Two 1-wide tanh layers with unit weight and zero bias, then a
        // unit linear head: f(x) = tanh(tanh(x)).
        let mut mlp = Mlp::zeros(&[1, 1, 1, 1], Head::Linear).unwrap();
        let ones = vec![1.0; mlp.param_count()];
        // weights are 1, biases 0: set explicitly.
        let mut params = ones;
        params[1] = 0.0; // layer 0 bias
        params[3] = 0.0; // layer 1 bias
        params[5] = 0.0; // layer 2 bias
        mlp.set_params_flat(&params).unwrap();
        let out = mlp.forward(&[0.5]).unwrap();
        let expected = 0.5f64.tanh().tanh();
        assert!(
            (out[0] - expected).abs() < 1e-15,
            "got {} want {expected}",
            out[0]
        );
    }

    #[test]
    fn softmax_sums_to_one_for_random_nets() {
        for seed in 0..20 {
            let mut rng = seeds::stream(seed, "nn-softmax", 0);
            let mlp = Mlp::new(&[4, 16, 16, 6], Head::Softmax, &mut rng).unwrap();
            let input: Vec<f64> = (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let out = mlp.forward(&input).unwrap();
            let total: f64 = out.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!(out.iter().all(|&p| p >= 0.0));
        }
    }

    #[test]
    fn forward_rejects_wrong_input_width() {
        let mlp = Mlp::zeros(&[3, 4, 2], Head::Linear).unwrap();
        assert!(mlp.forward(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn params_roundtrip_through_flat_vector() {
        let mut rng = seeds::stream(5, "nn-flat", 0);
        let mlp = Mlp::new(&[3, 7, 2], Head::Linear, &mut rng).unwrap();
        let flat = mlp.params_flat();
        assert_eq!(flat.len(), 3 * 7 + 7 + 7 * 2 + 2);
        let mut copy = Mlp::zeros(&[3, 7, 2], Head::Linear).unwrap();
        copy.set_params_flat(&flat).unwrap();
        assert_eq!(mlp, copy);
        assert!(copy.set_params_flat(&flat[1..]).is_err());
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        for seed in 0..20 {
            let mut rng = seeds::stream(seed, "nn-gradcheck", 0);
            let sizes = [
                rng.gen_range(1..5usize),
                rng.gen_range(3..10usize),
                rng.gen_range(3..10usize),
                rng.gen_range(1..5usize),
            ];
            let input: Vec<f64> = (0..sizes[0]).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let softmax = seed % 2 == 0;
            let (mlp, loss): (Mlp, Box<dyn ScalarLoss>) = if softmax {
                let mlp = Mlp::new(&sizes, Head::Softmax, &mut rng).unwrap();
                let index = rng.gen_range(0..sizes[3]);
                (mlp, Box::new(NegLogProbLoss { index }))
            } else {
                let mlp = Mlp::new(&sizes, Head::Linear, &mut rng).unwrap();
                let target: Vec<f64> = (0..sizes[3]).map(|_| rng.gen_range(-1.0..1.0)).collect();
                (mlp, Box::new(QuadraticLoss { target }))
            };
            let worst = finite_diff_check(&mlp, &input, loss.as_ref()).unwrap();
            assert!(
                worst < 1e-4,
                "seed {seed}: worst relative gradient error {worst}"
            );
        }
    }

    #[test]
    fn logit_backward_agrees_with_head_backward() {
        // Chain rule through the softmax Jacobian must equal the direct
        // logit-space gradient for the same loss.
        let mut rng = seeds::stream(77, "nn-logit", 0);
        let mlp = Mlp::new(&[3, 8, 4], Head::Softmax, &mut rng).unwrap();
        let input = [0.2, -0.4, 1.1];
        let (p, cache) = mlp.forward_cached(&input).unwrap();
        let taken = 2usize;
        // L = -ln p[taken] via the head route...
        let via_head = mlp
            .backward(&cache, &NegLogProbLoss { index: taken }.grad(&p))
            .unwrap();
        // ...and via the closed-form logit gradient p - onehot.
        let d_logits: Vec<f64> = p
            .iter()
            .enumerate()
            .map(|(j, pj)| pj - if j == taken { 1.0 } else { 0.0 })
            .collect();
        let via_logits = mlp.backward_from_logits(&cache, &d_logits).unwrap();
        for (a, b) in via_head.weights.iter().zip(&via_logits.weights) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gradients_are_deterministic() {
        let mut rng = seeds::stream(8, "nn-det", 0);
        let mlp = Mlp::new(&[4, 16, 16, 3], Head::Softmax, &mut rng).unwrap();
        let input = [0.1, 0.2, 0.3, 0.4];
        let run = || {
            let (out, cache) = mlp.forward_cached(&input).unwrap();
            let g = mlp.backward(&cache, &NegLogProbLoss { index: 1 }.grad(&out)).unwrap();
            g
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn adam_ignores_zero_gradients_and_honors_zero_lr() {
        let mut rng = seeds::stream(9, "nn-adam", 0);
        let mut mlp = Mlp::new(&[2, 4, 1], Head::Linear, &mut rng).unwrap();
        let before = mlp.params_flat();
        let zero = Gradients::zeros_like(&mlp);
        AdamState::new(1e-3, mlp.param_count())
            .step(&mut mlp, &zero)
            .unwrap();
        assert_eq!(mlp.params_flat(), before, "zero gradient must not move");

        let mut opt = AdamState::new(0.0, mlp.param_count());
        let mut bump = Gradients::zeros_like(&mlp);
        bump.weights[0][0] = 1.0;
        opt.step(&mut mlp, &bump).unwrap();
        assert_eq!(mlp.params_flat(), before, "zero learning rate must not move");
    }

    #[test]
    fn adam_first_step_is_signed_learning_rate() {
        // After one step from zero moments, m_hat = g and v_hat = g^2, so
        // the update is lr * g / (|g| + eps) ~= lr * sign(g).
        let mut mlp = Mlp::zeros(&[1, 1], Head::Linear).unwrap();
        let mut grads = Gradients::zeros_like(&mlp);
        grads.weights[0][0] = 0.5;
        grads.biases[0][0] = -0.25;
        let lr = 1e-3;
        let mut opt = AdamState::new(lr, mlp.param_count());
        opt.step(&mut mlp, &grads).unwrap();
        let params = mlp.params_flat();
        assert!((params[0] + lr).abs() < 1e-9, "weight moved by {}", params[0]);
        assert!((params[1] - lr).abs() < 1e-9, "bias moved by {}", params[1]);
        assert_eq!(opt.step_count(), 1);
    }

    #[test]
    fn adam_rejects_non_finite_gradients() {
        let mut mlp = Mlp::zeros(&[1, 1], Head::Linear).unwrap();
        let mut grads = Gradients::zeros_like(&mlp);
        grads.weights[0][0] = f64::NAN;
        let err = AdamState::new(1e-3, mlp.param_count())
            .step(&mut mlp, &grads)
            .unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn checkpoints_roundtrip_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.ckpt");
        let mut rng = seeds::stream(10, "nn-ckpt", 0);
        let mlp = Mlp::new(&[4, 64, 64, 6], Head::Softmax, &mut rng).unwrap();
        save_checkpoint(&path, &mlp, 1234, 42).unwrap();
        let (loaded, header) = load_checkpoint(&path).unwrap();
        assert_eq!(header.architecture, vec![4, 64, 64, 6]);
        assert_eq!(header.step_count, 1234);
        assert_eq!(header.rng_seed, 42);
        assert_eq!(loaded, mlp);
        // Same parameters, same file bytes.
        let a = checkpoint_bytes(&mlp, 1234, 42).unwrap();
        let b = std::fs::read(&path).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn corrupt_checkpoints_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.ckpt");
        let mlp = Mlp::zeros(&[2, 3, 2], Head::Linear).unwrap();
        save_checkpoint(&path, &mlp, 0, 0).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        // Truncate the payload.
        std::fs::write(&path, &bytes[..bytes.len() - 4]).unwrap();
        assert!(matches!(
            load_checkpoint(&path).unwrap_err(),
            Error::Checkpoint { .. }
        ));
        // Garbage header.
        std::fs::write(&path, b"not json\n\x00\x00").unwrap();
        assert!(load_checkpoint(&path).is_err());
    }

    #[test]
    fn log_softmax_matches_softmax_logs() {
        let logits = [0.5, -2.0, 3.0, 0.0];
        let p = apply_head(Head::Softmax, &logits);
        let lp = log_softmax(&logits);
        for (a, b) in p.iter().zip(&lp) {
            assert!((a.ln() - b).abs() < 1e-12);
        }
    }
}
