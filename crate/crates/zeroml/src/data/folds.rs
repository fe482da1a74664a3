//! Seeded k-fold construction, optionally stratified by class.
//!
//! Shuffling uses ChaCha8 seeded from the run seed, so fold assignment is a
//! pure function of (n, k, labels, seed). Plain folds differ in size by at
//! most one; stratified folds additionally keep per-class counts within one
//! of each other across folds. A singleton class degenerates stratification
//! to plain folds with a warning flag rather than failing.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::DataError;

#[derive(Debug, Clone)]
pub struct FoldPlan {
    /// Disjoint row-index sets covering 0..n-1; each sorted ascending.
    pub folds: Vec<Vec<usize>>,
    pub stratified: bool,
    /// Set when stratification was requested but degenerated to plain folds
    /// because some class had a single member.
    pub degenerate_warning: bool,
}

impl FoldPlan {
    /// All indices not in `fold` (the training portion), sorted ascending.
    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        let mut rows: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != fold)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        rows.sort_unstable();
        rows
    }
}

pub fn kfold(
    n: usize,
    k: usize,
    labels: Option<&[usize]>,
    seed: u64,
) -> Result<FoldPlan, DataError> {
    if k < 2 || k > n {
        return Err(DataError::Fold(format!(
            "need 2 <= k <= n, got k={k} with n={n}"
        )));
    }
    if let Some(labels) = labels {
        debug_assert_eq!(labels.len(), n);
        let n_classes = labels.iter().max().map(|&m| m + 1).unwrap_or(0);
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
        for (row, &class) in labels.iter().enumerate() {
            members[class].push(row);
        }
        let has_singleton = members.iter().any(|m| m.len() == 1);
        if has_singleton {
            let mut plan = plain_folds(n, k, seed);
            plan.degenerate_warning = true;
            return Ok(plan);
        }
        return Ok(stratified_folds(members, k, seed));
    }
    Ok(plain_folds(n, k, seed))
}

fn plain_folds(n: usize, k: usize, seed: u64) -> FoldPlan {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut rng);
    let base = n / k;
    let extras = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut cursor = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extras);
        let mut members: Vec<usize> = indices[cursor..cursor + size].to_vec();
        members.sort_unstable();
        folds.push(members);
        cursor += size;
    }
    FoldPlan { folds, stratified: false, degenerate_warning: false }
}

fn stratified_folds(mut members: Vec<Vec<usize>>, k: usize, seed: u64) -> FoldPlan {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    // Classes in ascending id order; within a class, members are dealt to
    // the currently least-loaded folds first, which keeps both per-class
    // and total fold sizes within one of each other.
    for class_members in members.iter_mut() {
        class_members.shuffle(&mut rng);
        let base = class_members.len() / k;
        let extras = class_members.len() % k;
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by_key(|&f| (folds[f].len(), f));
        let mut cursor = 0;
        for (rank, &fold) in order.iter().enumerate() {
            let take = base + usize::from(rank < extras);
            folds[fold].extend_from_slice(&class_members[cursor..cursor + take]);
            cursor += take;
        }
    }
    for fold in folds.iter_mut() {
        fold.sort_unstable();
    }
    FoldPlan { folds, stratified: true, degenerate_warning: false }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn check_partition(plan: &FoldPlan, n: usize) {
        let mut seen = HashSet::new();
        for fold in &plan.folds {
            for &row in fold {
                assert!(seen.insert(row), "row {row} appears twice");
            }
        }
        assert_eq!(seen.len(), n);
        let sizes: Vec<usize> = plan.folds.iter().map(|f| f.len()).collect();
        let max = *sizes.iter().max().unwrap();
        let min = *sizes.iter().min().unwrap();
        assert!(max - min <= 1, "sizes {sizes:?}");
    }

    #[test]
    fn ten_rows_five_folds() {
        let plan = kfold(10, 5, None, 7).unwrap();
        assert_eq!(plan.folds.len(), 5);
        for fold in &plan.folds {
            assert_eq!(fold.len(), 2);
        }
        check_partition(&plan, 10);
    }

    #[test]
    fn stratified_six_a_four_b_two_folds() {
        // 6 of class 0, 4 of class 1, k = 2: each fold gets 3 + 2.
        let labels: Vec<usize> = [vec![0; 6], vec![1; 4]].concat();
        let plan = kfold(10, 2, Some(&labels), 13).unwrap();
        check_partition(&plan, 10);
        for fold in &plan.folds {
            let a = fold.iter().filter(|&&r| labels[r] == 0).count();
            let b = fold.iter().filter(|&&r| labels[r] == 1).count();
            assert_eq!((a, b), (3, 2));
        }
    }

    #[test]
    fn same_inputs_give_identical_folds() {
        let labels: Vec<usize> = (0..20).map(|i| i % 3).collect();
        let a = kfold(20, 4, Some(&labels), 99).unwrap();
        let b = kfold(20, 4, Some(&labels), 99).unwrap();
        assert_eq!(a.folds, b.folds);
        let c = kfold(20, 4, Some(&labels), 100).unwrap();
        assert_ne!(a.folds, c.folds);
    }

    #[test]
    fn invalid_k_is_fold_error() {
        assert!(kfold(10, 1, None, 0).is_err());
        assert!(kfold(3, 4, None, 0).is_err());
        assert!(kfold(4, 4, None, 0).is_ok());
    }

    #[test]
    fn singleton_class_degenerates_with_warning() {
        let labels = vec![0, 0, 0, 0, 1];
        let plan = kfold(5, 2, Some(&labels), 1).unwrap();
        assert!(plan.degenerate_warning);
        assert!(!plan.stratified);
        check_partition(&plan, 5);
    }

    #[test]
    fn train_rows_complement_fold() {
        let plan = kfold(10, 5, None, 3).unwrap();
        let train = plan.train_rows(0);
        assert_eq!(train.len(), 8);
        for row in &plan.folds[0] {
            assert!(!train.contains(row));
        }
    }

    #[test]
    fn partition_properties_over_many_draws() {
        // 1000 random (n, k, labels, seed) draws; both plain and stratified.
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for trial in 0..1000 {
            let n = rng.gen_range(4..60);
            let k = rng.gen_range(2..=n.min(8));
            let seed = rng.gen::<u64>();
            let stratify: bool = rng.gen();
            if stratify {
                let n_classes = rng.gen_range(2..=3.min(n / 2));
                let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n_classes)).collect();
                // Guarantee no empty class by construction check.
                let mut counts = vec![0usize; n_classes];
                for &l in &labels {
                    counts[l] += 1;
                }
                if counts.iter().any(|&c| c == 0) {
                    continue;
                }
                let plan = kfold(n, k, Some(&labels), seed).unwrap();
                check_partition(&plan, n);
                if plan.stratified {
                    for class in 0..n_classes {
                        let per_fold: Vec<usize> = plan
                            .folds
                            .iter()
                            .map(|f| f.iter().filter(|&&r| labels[r] == class).count())
                            .collect();
                        let max = *per_fold.iter().max().unwrap();
                        let min = *per_fold.iter().min().unwrap();
                        assert!(
                            max - min <= 1,
                            "trial {trial}: class {class} spread {per_fold:?}"
                        );
                    }
                }
            } else {
                let plan = kfold(n, k, None, seed).unwrap();
                check_partition(&plan, n);
            }
        }
    }
}
