use serde::Serialize;

use super::Dataset;
use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Assignment of every instance to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub seed: u64,
    /// `fold_of[i]` is the fold of instance `i`.
    pub fold_of: Vec<usize>,
    /// Classes with fewer than `k` instances; some folds hold none of them.
    pub undersized_classes: Vec<String>,
}

impl FoldAssignment {
    pub fn fold_indices(&self, fold: usize) -> Vec<usize> {
        self.fold_of
            .iter()
            .enumerate()
            .filter_map(|(i, &f)| (f == fold).then_some(i))
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Stratified fold assignment.
///
/// Instances of each class (taken in declared class order) are shuffled with
/// one seeded stream and dealt round-robin. The dealing position carries over
/// from one class to the next, which keeps total fold sizes balanced as well.
pub fn stratified_folds(dataset: &Dataset, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::InvalidFolds(k));
    }
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let classes = dataset.class_indices()?;
    let schema = dataset.schema();

    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); schema.n_classes()];
    for (i, &c) in classes.iter().enumerate() {
        by_class[c].push(i);
    }
    if let Some(c) = by_class.iter().position(Vec::is_empty) {
        return Err(Error::EmptyClass(schema.class_labels()[c].clone()));
    }

    let mut rng = SeededRng::new(seed);
    let mut fold_of = vec![0; classes.len()];
    let mut undersized_classes = Vec::new();
    let mut next = 0;
    for (c, members) in by_class.iter_mut().enumerate() {
        if members.len() < k {
            undersized_classes.push(schema.class_labels()[c].clone());
        }
        rng.shuffle(members);
        for &i in members.iter() {
            fold_of[i] = next;
            next = (next + 1) % k;
        }
    }

    Ok(FoldAssignment {
        k,
        seed,
        fold_of,
        undersized_classes,
    })
}
