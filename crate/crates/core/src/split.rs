//! Five-way dataset partition with a 4:3:1:1:1 ratio.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative sizes of train-predict, train-correct, val-predict, val-correct, test.
pub const SPLIT_RATIO: [u64; 5] = [4, 3, 1, 1, 1];

pub const SPLIT_NAMES: [&str; 5] = ["train_predict", "train_correct", "val_predict", "val_correct", "test"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplits {
    pub train_predict: Vec<String>,
    pub train_correct: Vec<String>,
    pub val_predict: Vec<String>,
    pub val_correct: Vec<String>,
    pub test: Vec<String>,
}

impl DatasetSplits {
    pub fn parts(&self) -> [&Vec<String>; 5] {
        [&self.train_predict, &self.train_correct, &self.val_predict, &self.val_correct, &self.test]
    }

    pub fn sizes(&self) -> [usize; 5] {
        self.parts().map(|p| p.len())
    }

    pub fn by_name(&self, name: &str) -> Option<&Vec<String>> {
        SPLIT_NAMES.iter().position(|n| *n == name).map(|i| self.parts()[i])
    }
}

/// Largest-remainder apportionment of `n` items over [`SPLIT_RATIO`].
///
/// Ties between equal remainders go to the earlier part.
pub fn apportion(n: usize) -> [usize; 5] {
    let total: u64 = SPLIT_RATIO.iter().sum();
    let n = n as u64;
    let mut sizes = SPLIT_RATIO.map(|w| (n * w / total) as usize);
    let remainders = SPLIT_RATIO.map(|w| (n * w) % total);
    let assigned: usize = sizes.iter().sum();
    let mut order: Vec<usize> = (0..5).collect();
    order.sort_by(|&a, &b| remainders[b].cmp(&remainders[a]).then(a.cmp(&b)));
    for &i in order.iter().take(n as usize - assigned) {
        sizes[i] += 1;
    }
    sizes
}

/// Seeded shuffle followed by a 4:3:1:1:1 partition.
pub fn split_dataset(ids: &[String], seed: u64) -> Result<DatasetSplits> {
    if ids.len() < SPLIT_RATIO.len() {
        return Err(Error::validation(format!("need at least 5 scenes to split, got {}", ids.len())));
    }
    let mut shuffled = ids.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let sizes = apportion(ids.len());
    let mut rest = shuffled.into_iter();
    let mut take = |n: usize| rest.by_ref().take(n).collect::<Vec<_>>();
    Ok(DatasetSplits {
        train_predict: take(sizes[0]),
        train_correct: take(sizes[1]),
        val_predict: take(sizes[2]),
        val_correct: take(sizes[3]),
        test: take(sizes[4]),
    })
}
