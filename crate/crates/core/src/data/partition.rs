//! Held-out-test + ten-fold dataset partitioning.

use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::bytes;
use crate::error::{Error, Result};
use crate::seed;

pub const INDEX_FORMAT_VERSION: u32 = 1;
const N_FOLDS: usize = 10;

/// Record-to-split assignment: 10% held-out test, the rest in ten folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetIndex {
    pub format_version: u32,
    pub seed: u64,
    pub hot: Vec<String>,
    pub folds: Vec<Vec<String>>,
}

/// Train/validation/test record ids for one cross-validation iteration.
#[derive(Debug, Clone)]
pub struct FoldRoles {
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
}

/// Shuffles ids with the seeded stream, sets aside the first `ceil(10%)` as
/// the held-out test set, and splits the remainder into ten near-equal folds.
pub fn partition(ids: &[String], seed_value: u64) -> Result<DatasetIndex> {
    if ids.len() < 12 {
        return Err(Error::Partition(format!(
            "need at least 12 records, got {}",
            ids.len()
        )));
    }
    let unique: BTreeSet<&String> = ids.iter().collect();
    if unique.len() != ids.len() {
        return Err(Error::Partition("duplicate record ids".into()));
    }

    let mut shuffled = ids.to_vec();
    let mut rng = seed::rng(seed_value, "partition");
    shuffled.shuffle(&mut rng);

    let hot_len = ids.len().div_ceil(10);
    let hot = shuffled[..hot_len].to_vec();
    let pool = &shuffled[hot_len..];

    let base = pool.len() / N_FOLDS;
    let remainder = pool.len() % N_FOLDS;
    let mut folds = Vec::with_capacity(N_FOLDS);
    let mut offset = 0;
    for k in 0..N_FOLDS {
        let len = base + usize::from(k < remainder);
        folds.push(pool[offset..offset + len].to_vec());
        offset += len;
    }

    Ok(DatasetIndex {
        format_version: INDEX_FORMAT_VERSION,
        seed: seed_value,
        hot,
        folds,
    })
}

impl DatasetIndex {
    /// Roles for CV iteration `k`: test = fold k, validation = fold k+1
    /// (mod 10), train = the remaining eight folds.
    pub fn cv_roles(&self, k: usize) -> Result<FoldRoles> {
        if k >= self.folds.len() {
            return Err(Error::Partition(format!(
                "fold {k} out of range 0..{}",
                self.folds.len()
            )));
        }
        let val_idx = (k + 1) % self.folds.len();
        let train = self
            .folds
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != k && *i != val_idx)
            .flat_map(|(_, fold)| fold.iter().cloned())
            .collect();
        Ok(FoldRoles {
            train,
            val: self.folds[val_idx].clone(),
            test: self.folds[k].clone(),
        })
    }

    /// Every id in the cross-validation pool, fold order.
    pub fn cv_pool(&self) -> Vec<String> {
        self.folds.iter().flatten().cloned().collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        bytes::write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let index: DatasetIndex = bytes::read_json(path)?;
        if index.format_version != INDEX_FORMAT_VERSION {
            return Err(Error::format(
                path,
                format!("unsupported format_version {}", index.format_version),
            ));
        }
        Ok(index)
    }
}
