use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lbfgs::{self, LbfgsConfig};
use super::report::{mse, FitReport};
use super::split::{split, SplitSpec};
use crate::error::{Error, Result};
use crate::estimators::{Model, NnParams, DEFAULT_HIDDEN};
use crate::exec::Execution;
use crate::pipeline::SyncedDataset;

pub const DEFAULT_RESTARTS: usize = 20;

/// Records per chunk when summing the loss and its gradient.
const CHUNK: usize = 2048;

#[derive(Debug, Clone, Copy)]
pub struct NnFitConfig {
    pub hidden: usize,
    pub restarts: usize,
    pub seed: u64,
    pub optimizer: LbfgsConfig,
    pub execution: Execution,
}

impl Default for NnFitConfig {
    fn default() -> Self {
        Self {
            hidden: DEFAULT_HIDDEN,
            restarts: DEFAULT_RESTARTS,
            seed: 0,
            optimizer: LbfgsConfig::default(),
            execution: Execution::default(),
        }
    }
}

/// Mean and population standard deviation of `(v, a)` over `ds`. A constant
/// input gets a standard deviation of 1.
pub fn standardization(ds: &SyncedDataset) -> ([f64; 2], [f64; 2]) {
    let n = ds.len().max(1) as f64;
    let mut mean = [0.0; 2];
    let mut std = [1.0; 2];
    for (k, col) in [&ds.v, &ds.a].into_iter().enumerate() {
        let m = col.iter().sum::<f64>() / n;
        let var = col.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
        mean[k] = m;
        let s = var.sqrt();
        if s > 1e-12 * (1.0 + m.abs()) {
            std[k] = s;
        }
    }
    (mean, std)
}

/// Mean squared error of the unclamped network output over a fixed set of
/// standardized inputs, as a function of the flattened weights
/// `[w1 (row-major), b1, w2, b2]`.
#[derive(Debug, Clone)]
pub struct NnObjective {
    z: Vec<[f64; 2]>,
    target: Vec<f64>,
    hidden: usize,
    execution: Execution,
}

impl NnObjective {
    pub fn new(ds: &SyncedDataset, mean: [f64; 2], std: [f64; 2], hidden: usize, execution: Execution) -> Self {
        let z = ds
            .v
            .iter()
            .zip(&ds.a)
            .map(|(v, a)| [(v - mean[0]) / std[0], (a - mean[1]) / std[1]])
            .collect();
        Self {
            z,
            target: ds.f.clone(),
            hidden,
            execution,
        }
    }

    pub fn n_params(&self) -> usize {
        4 * self.hidden + 1
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// Returns the loss and writes its gradient (exact backpropagation).
    pub fn loss_grad(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        let h = self.hidden;
        let n = self.z.len();
        let (w1, rest) = theta.split_at(2 * h);
        let (b1, rest) = rest.split_at(h);
        let (w2, b2) = rest.split_at(h);
        let b2 = b2[0];

        let parts = self.execution.map_chunks(n, CHUNK, |start, end| {
            let mut g = vec![0.0; 4 * h + 1];
            let mut act = vec![0.0; h];
            let mut sse = 0.0;
            for i in start..end {
                let [z0, z1] = self.z[i];
                let mut y = b2;
                for k in 0..h {
                    act[k] = (w1[2 * k] * z0 + w1[2 * k + 1] * z1 + b1[k]).tanh();
                    y += w2[k] * act[k];
                }
                let r = y - self.target[i];
                sse += r * r;
                for k in 0..h {
                    let dpre = r * w2[k] * (1.0 - act[k] * act[k]);
                    g[2 * k] += dpre * z0;
                    g[2 * k + 1] += dpre * z1;
                    g[2 * h + k] += dpre;
                    g[3 * h + k] += r * act[k];
                }
                g[4 * h] += r;
            }
            (sse, g)
        });

        grad.iter_mut().for_each(|x| *x = 0.0);
        let mut sse = 0.0;
        for (s, g) in parts {
            sse += s;
            grad.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
        }
        let scale = 2.0 / n as f64;
        grad.iter_mut().for_each(|x| *x *= scale);
        sse / n as f64
    }

    pub fn loss(&self, theta: &[f64]) -> f64 {
        let mut g = vec![0.0; theta.len()];
        self.loss_grad(theta, &mut g)
    }

    /// Initial weights: uniform in ±1/√fan_in, zero biases.
    pub fn initial_weights(&self, rng: &mut impl Rng) -> Vec<f64> {
        let h = self.hidden;
        let mut theta = vec![0.0; 4 * h + 1];
        let b1 = 1.0 / 2f64.sqrt();
        let b2 = 1.0 / (h as f64).sqrt();
        for w in &mut theta[..2 * h] {
            *w = rng.random_range(-b1..=b1);
        }
        for w in &mut theta[3 * h..4 * h] {
            *w = rng.random_range(-b2..=b2);
        }
        theta
    }

    pub fn unflatten(&self, theta: &[f64], mean: [f64; 2], std: [f64; 2]) -> NnParams {
        let h = self.hidden;
        NnParams {
            input_mean: mean,
            input_std: std,
            w1: theta[..2 * h].chunks(2).map(|r| [r[0], r[1]]).collect(),
            b1: theta[2 * h..3 * h].to_vec(),
            w2: theta[3 * h..4 * h].to_vec(),
            b2: theta[4 * h],
        }
    }
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

/// Trains the network from `restarts` seeded initializations and keeps the
/// one with the lowest training objective (ties go to the lower restart
/// index). Inputs are standardized with statistics of `train` only.
pub fn fit_nn(train: &SyncedDataset, test: &SyncedDataset, cfg: &NnFitConfig) -> Result<FitReport> {
    if train.is_empty() {
        return Err(Error::InsufficientData {
            rule: "NN needs a non-empty training set".into(),
        });
    }
    if cfg.hidden == 0 || cfg.restarts == 0 {
        return Err(Error::InvalidParameter(
            "hidden size and restart count must be at least 1".into(),
        ));
    }
    let (mean, std) = standardization(train);
    let objective = NnObjective::new(train, mean, std, cfg.hidden, cfg.execution);

    let runs = cfg.execution.map_range(cfg.restarts, |r| {
        let mut rng = restart_rng(cfg.seed, r);
        let theta0 = objective.initial_weights(&mut rng);
        let out = lbfgs::minimize(|x, g| objective.loss_grad(x, g), theta0, &cfg.optimizer).ok()?;
        out.f.is_finite().then_some(out)
    });

    let restarts_run = runs.iter().filter(|r| r.is_some()).count();
    let best = runs
        .into_iter()
        .flatten()
        .reduce(|best, r| if r.f < best.f { r } else { best })
        .ok_or(Error::NonFiniteLoss)?;

    let model = Model::Nn(objective.unflatten(&best.x, mean, std));
    let test_mse = if test.is_empty() {
        None
    } else {
        Some(mse(&model, test, cfg.execution)?)
    };
    Ok(FitReport {
        train_mse: mse(&model, train, cfg.execution)?,
        model,
        test_mse,
        n_train: train.len(),
        n_test: test.len(),
        n_excluded: 0,
        restarts_run: Some(restarts_run),
        condition_estimate: None,
    })
}

/// Splits once, fits one network per hidden size on that split, and returns
/// the size with the lowest test MSE (ties go to the smaller size).
pub fn sweep_hidden(
    ds: &SyncedDataset,
    sizes: &[usize],
    spec: &SplitSpec,
    cfg: &NnFitConfig,
) -> Result<(usize, Vec<FitReport>)> {
    if sizes.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (train, test) = split(ds, spec)?;
    let reports = cfg
        .execution
        .map_slice(sizes, |&hidden| {
            fit_nn(&train, &test, &NnFitConfig { hidden, ..*cfg })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let score = |r: &FitReport| r.test_mse.unwrap_or(r.train_mse);
    let best = sizes
        .iter()
        .zip(&reports)
        .min_by(|(sa, ra), (sb, rb)| score(ra).total_cmp(&score(rb)).then(sa.cmp(sb)))
        .map(|(s, _)| *s)
        .expect("non-empty sizes");
    Ok((best, reports))
}
