//! Benchmark generators: a noisy two-sine model and discretized FAR(1)
//! processes `f_n = A f_{n−1} + ε_n`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::csvio;
use crate::data::FunctionalDataset;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream, Stream};

/// Curves with their generating class.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub dataset: FunctionalDataset,
    pub labels: Vec<usize>,
}

impl LabeledDataset {
    /// Sidecar file with columns `id,label`.
    pub fn write_labels_csv(&self, path: &Path) -> Result<()> {
        write_labels_csv(&self.labels, path)
    }
}

pub fn write_labels_csv(labels: &[usize], path: &Path) -> Result<()> {
    let mut w = csvio::create(path)?;
    csvio::write_line(&mut w, &["id".to_string(), "label".to_string()], path)?;
    for (i, l) in labels.iter().enumerate() {
        csvio::write_line(&mut w, &[i.to_string(), l.to_string()], path)?;
    }
    csvio::finish(w, path)
}

pub fn read_labels_csv(path: &Path) -> Result<Vec<usize>> {
    let table = csvio::read_numeric_file(path)?;
    table
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let label = *row
                .last()
                .ok_or_else(|| Error::parse(path, format!("row {i} is empty")))?;
            if label < 0.0 || label.fract() != 0.0 {
                return Err(Error::parse(
                    path,
                    format!("row {i}: label {label} is not a class index"),
                ));
            }
            Ok(label as usize)
        })
        .collect()
}

fn normal(rng: &mut Stream, sigma: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    sigma * z
}

/// Noiseless sinus curve `sin(5πx/len) + sin(2πx/len)`, `x = 0..len−1`.
pub fn sinus_mean(length: usize) -> Vec<f64> {
    let len = length as f64;
    (0..length)
        .map(|x| {
            let x = x as f64;
            (5.0 * PI * x / len).sin() + (2.0 * PI * x / len).sin()
        })
        .collect()
}

/// `n_curves` noisy copies of [`sinus_mean`] with i.i.d. `N(0, σ²)` noise.
pub fn gen_sinus(n_curves: usize, length: usize, sigma: f64, seed: u64) -> Result<LabeledDataset> {
    if length < 8 {
        return Err(Error::invalid(format!(
            "length must be at least 8, got {length}"
        )));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!(
            "noise scale must be finite and nonnegative, got {sigma}"
        )));
    }
    let mean = sinus_mean(length);
    let curves: Vec<Vec<f64>> = (0..n_curves)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, "sinus", i as u64);
            mean.iter().map(|m| m + normal(&mut rng, sigma)).collect()
        })
        .collect();
    Ok(LabeledDataset {
        dataset: FunctionalDataset::new(curves)?,
        labels: vec![0; n_curves],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FarKernel {
    /// `B = diag(exp(−i/m))`.
    Diagonal,
    /// `B_ij = exp(−|i−j|/bandwidth)`.
    Full,
}

/// Discretized FAR(1) with operator `A = ρ·B/‖B‖₂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FarModel {
    pub kernel: FarKernel,
    /// Spectral norm of `A`, in `[0, 1)`.
    pub rho: f64,
    /// Grid size, also the curve length.
    pub m: usize,
    pub sigma: f64,
    pub burn_in: usize,
    /// Kernel bandwidth for [`FarKernel::Full`]; `m/10` when unset.
    pub bandwidth: Option<f64>,
    /// Draw each curve from its own chain instead of taking successive states.
    pub independent: bool,
}

impl Default for FarModel {
    fn default() -> Self {
        FarModel {
            kernel: FarKernel::Diagonal,
            rho: 0.8,
            m: 1024,
            sigma: 1.0,
            burn_in: 50,
            bandwidth: None,
            independent: false,
        }
    }
}

impl FarModel {
    pub fn new(kernel: FarKernel, rho: f64, m: usize) -> Self {
        FarModel {
            kernel,
            rho,
            m,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::invalid(format!(
                "operator norm must lie in [0, 1), got {}",
                self.rho
            )));
        }
        if self.m < 8 {
            return Err(Error::invalid(format!(
                "grid size must be at least 8, got {}",
                self.m
            )));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(format!(
                "noise scale must be finite and nonnegative, got {}",
                self.sigma
            )));
        }
        if let Some(bw) = self.bandwidth {
            if !(bw > 0.0 && bw.is_finite()) {
                return Err(Error::invalid(format!(
                    "bandwidth must be positive, got {bw}"
                )));
            }
        }
        Ok(())
    }

    pub fn effective_bandwidth(&self) -> f64 {
        self.bandwidth.unwrap_or(self.m as f64 / 10.0)
    }

    /// The operator `A`, row-major `m × m` (diagonal kernels included densely).
    pub fn operator(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let op = FarOperator::get(self);
        let m = self.m;
        let mut a = vec![0.0; m * m];
        match &*op {
            FarOperator::Diagonal(d) => (0..m).for_each(|i| a[i * m + i] = self.rho * d[i]),
            FarOperator::Dense(b) => a
                .iter_mut()
                .zip(b.iter())
                .for_each(|(x, v)| *x = self.rho * v),
        }
        Ok(a)
    }
}

/// `B/‖B‖₂`, cached per kernel shape since the dense case costs a power iteration.
enum FarOperator {
    Diagonal(Vec<f64>),
    Dense(Vec<f64>),
}

type OperatorKey = (FarKernel, usize, u64);

impl FarOperator {
    fn get(model: &FarModel) -> Arc<FarOperator> {
        static CACHE: OnceLock<Mutex<HashMap<OperatorKey, Arc<FarOperator>>>> = OnceLock::new();
        let bw = match model.kernel {
            FarKernel::Diagonal => 0.0,
            FarKernel::Full => model.effective_bandwidth(),
        };
        let key = (model.kernel, model.m, bw.to_bits());
        let cache = CACHE.get_or_init(Default::default);
        if let Some(op) = cache.lock().unwrap().get(&key) {
            return op.clone();
        }
        let op = Arc::new(FarOperator::build(model.kernel, model.m, bw));
        cache.lock().unwrap().insert(key, op.clone());
        op
    }

    fn build(kernel: FarKernel, m: usize, bw: f64) -> FarOperator {
        match kernel {
            // entries exp(−i/m) ≤ 1 with equality at i = 0, so ‖B‖₂ = 1
            FarKernel::Diagonal => {
                FarOperator::Diagonal((0..m).map(|i| (-(i as f64) / m as f64).exp()).collect())
            }
            FarKernel::Full => {
                let mut b: Vec<f64> = (0..m * m)
                    .map(|idx| {
                        let (i, j) = (idx / m, idx % m);
                        (-(i.abs_diff(j) as f64) / bw).exp()
                    })
                    .collect();
                let norm = symmetric_spectral_norm(&b, m);
                b.iter_mut().for_each(|v| *v /= norm);
                FarOperator::Dense(b)
            }
        }
    }

    fn apply(&self, rho: f64, x: &[f64], out: &mut [f64]) {
        let m = x.len();
        match self {
            FarOperator::Diagonal(d) => {
                for i in 0..m {
                    out[i] = rho * d[i] * x[i];
                }
            }
            FarOperator::Dense(b) => {
                out.par_iter_mut().enumerate().for_each(|(i, o)| {
                    let row = &b[i * m..(i + 1) * m];
                    *o = rho * row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>();
                });
            }
        }
    }
}

/// Largest eigenvalue of a symmetric matrix with positive entries, by power
/// iteration from the all-ones vector.
fn symmetric_spectral_norm(b: &[f64], m: usize) -> f64 {
    let mut v = vec![1.0 / (m as f64).sqrt(); m];
    let mut lambda = 0.0;
    for _ in 0..100_000 {
        let w: Vec<f64> = (0..m)
            .into_par_iter()
            .map(|i| {
                b[i * m..(i + 1) * m]
                    .iter()
                    .zip(&v)
                    .map(|(a, x)| a * x)
                    .sum()
            })
            .collect();
        let next: f64 = w.iter().zip(&v).map(|(a, x)| a * x).sum();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        v = w.into_iter().map(|x| x / norm).collect();
        if (next - lambda).abs() <= 1e-15 * next {
            return next;
        }
        lambda = next;
    }
    lambda
}

/// Runs the chain from zero through `burn_in` steps, then records states.
fn run_chain(
    model: &FarModel,
    op: &FarOperator,
    n_states: usize,
    rng: &mut Stream,
) -> Vec<Vec<f64>> {
    let m = model.m;
    let mut state = vec![0.0; m];
    let mut next = vec![0.0; m];
    let mut out = Vec::with_capacity(n_states);
    for step in 0..model.burn_in + n_states {
        op.apply(model.rho, &state, &mut next);
        for v in next.iter_mut() {
            *v += normal(rng, model.sigma);
        }
        std::mem::swap(&mut state, &mut next);
        if step >= model.burn_in {
            out.push(state.clone());
        }
    }
    out
}

/// `n_curves` FAR(1) curves of length `model.m`, labelled 0.
///
/// By default the curves are successive states of one chain after burn-in;
/// with `independent` each curve ends its own chain.
pub fn gen_far(n_curves: usize, model: &FarModel, seed: u64) -> Result<LabeledDataset> {
    model.validate()?;
    let op = FarOperator::get(model);
    let label = match model.kernel {
        FarKernel::Diagonal => "far-diagonal",
        FarKernel::Full => "far-full",
    };
    let curves = if model.independent {
        (0..n_curves)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream(seed, label, i as u64);
                run_chain(model, &op, 1, &mut rng).pop().unwrap()
            })
            .collect()
    } else {
        let mut rng = stream(seed, label, 0);
        run_chain(model, &op, n_curves, &mut rng)
    };
    Ok(LabeledDataset {
        dataset: FunctionalDataset::new(curves)?,
        labels: vec![0; n_curves],
    })
}

/// Settings of the three-class benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchmarkConfig {
    pub per_class: usize,
    pub length: usize,
    pub rho: f64,
    pub sigma: f64,
    pub burn_in: usize,
    pub independent: bool,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            per_class: 25,
            length: 1024,
            rho: 0.8,
            sigma: 1.0,
            burn_in: 50,
            independent: false,
        }
    }
}

/// Sinus (label 0), diagonal FAR (label 1) and full FAR (label 2) curves.
pub fn gen_benchmark(seed: u64) -> Result<LabeledDataset> {
    gen_benchmark_with(&BenchmarkConfig::default(), seed)
}

pub fn gen_benchmark_with(config: &BenchmarkConfig, seed: u64) -> Result<LabeledDataset> {
    let n = config.per_class;
    let sinus = gen_sinus(
        n,
        config.length,
        config.sigma,
        derive_seed(seed, "benchmark-sinus", 0),
    )?;
    let far = |kernel, label: &str| {
        let model = FarModel {
            kernel,
            rho: config.rho,
            m: config.length,
            sigma: config.sigma,
            burn_in: config.burn_in,
            bandwidth: None,
            independent: config.independent,
        };
        gen_far(n, &model, derive_seed(seed, label, 0))
    };
    let diag = far(FarKernel::Diagonal, "benchmark-far-diagonal")?;
    let full = far(FarKernel::Full, "benchmark-far-full")?;
    let dataset = sinus.dataset.concat(&diag.dataset)?.concat(&full.dataset)?;
    let labels = [0, 1, 2]
        .iter()
        .flat_map(|&l| std::iter::repeat_n(l, n))
        .collect();
    Ok(LabeledDataset { dataset, labels })
}
