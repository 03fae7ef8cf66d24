use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Partition shares in tenths.
const SHARES: [usize; 3] = [7, 2, 1];

/// Protein IDs assigned to each partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
    pub seed: u64,
}

impl SplitManifest {
    pub fn len(&self) -> usize {
        self.train.len() + self.validation.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// 70/20/10 partition sizes for `n` items by largest-remainder rounding.
/// Ties in the remainder go to the earlier partition.
pub fn split_sizes(n: usize) -> [usize; 3] {
    let mut sizes = SHARES.map(|s| s * n / 10);
    let remainders = SHARES.map(|s| s * n % 10);
    let mut leftover = n - sizes.iter().sum::<usize>();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| remainders[b].cmp(&remainders[a]).then(a.cmp(&b)));
    for &i in &order {
        if leftover == 0 {
            break;
        }
        sizes[i] += 1;
        leftover -= 1;
    }
    sizes
}

/// Shuffles the IDs deterministically under `seed` and cuts them 70/20/10.
pub fn split_proteins(ids: &[String], seed: u64) -> Result<SplitManifest> {
    if ids.is_empty() {
        return Err(Error::EmptyInput("protein id list"));
    }
    let mut seen = HashSet::with_capacity(ids.len());
    if let Some(dup) = ids.iter().find(|id| !seen.insert(id.as_str())) {
        return Err(Error::DuplicateId(dup.clone()));
    }

    let mut shuffled = ids.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let [n_train, n_val, _] = split_sizes(ids.len());
    let test = shuffled.split_off(n_train + n_val);
    let validation = shuffled.split_off(n_train);
    Ok(SplitManifest {
        train: shuffled,
        validation,
        test,
        seed,
    })
}
