use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::pipeline::SyncedDataset;

/// How records are assigned to the train and test parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitMode {
    /// Each record independently.
    #[default]
    Record,
    /// Whole trips, where a trip ends at any timestamp gap longer than 1 s.
    Trip,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub mode: SplitMode,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.75,
            seed: 0,
            mode: SplitMode::Record,
        }
    }
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Self {
        Self {
            train_fraction,
            seed,
            ..Default::default()
        }
    }
}

const TRIP_GAP_S: f64 = 1.0;

/// Seeded random partition into `(train, test)`. Both parts keep the original
/// record order.
pub fn split(ds: &SyncedDataset, spec: &SplitSpec) -> Result<(SyncedDataset, SyncedDataset)> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train_fraction {} outside (0, 1)",
            spec.train_fraction
        )));
    }
    let n = ds.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let target = ((n as f64 * spec.train_fraction).round() as usize).clamp(1, n);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut in_train = vec![false; n];
    match spec.mode {
        SplitMode::Record => {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            for &i in &idx[..target] {
                in_train[i] = true;
            }
        }
        SplitMode::Trip => {
            let mut trips = Vec::new();
            let mut start = 0;
            for i in 1..=n {
                if i == n || ds.t[i] - ds.t[i - 1] > TRIP_GAP_S {
                    trips.push(start..i);
                    start = i;
                }
            }
            trips.shuffle(&mut rng);
            let mut count = 0;
            for trip in trips {
                if count >= target {
                    break;
                }
                count += trip.len();
                for i in trip {
                    in_train[i] = true;
                }
            }
        }
    }
    let train: Vec<usize> = (0..n).filter(|&i| in_train[i]).collect();
    let test: Vec<usize> = (0..n).filter(|&i| !in_train[i]).collect();
    Ok((ds.select(&train), ds.select(&test)))
}
