use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng};

/// Repeated k-fold partition of sample indices.
///
/// Each repeat shuffles `0..n_samples` with its own derived seed and cuts the
/// permutation into `n_folds` contiguous parts; the first `n % k` folds get
/// one extra sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub n_samples: usize,
    pub n_folds: usize,
    pub n_repeats: usize,
    pub seed: u64,
    /// `assignments[repeat][fold]` holds that fold's test indices (sorted).
    pub assignments: Vec<Vec<Vec<usize>>>,
}

/// One (repeat, fold) cell of a plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub repeat: usize,
    pub fold: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl FoldPlan {
    pub fn new(n_samples: usize, n_folds: usize, n_repeats: usize, seed: u64) -> Result<Self> {
        if n_folds < 2 || n_repeats == 0 {
            return Err(Error::invalid(format!(
                "need >= 2 folds and >= 1 repeat, got {n_folds} folds, {n_repeats} repeats"
            )));
        }
        if n_samples < n_folds {
            return Err(Error::invalid(format!(
                "{n_samples} samples cannot fill {n_folds} folds"
            )));
        }
        let assignments = (0..n_repeats)
            .map(|r| {
                let mut perm: Vec<usize> = (0..n_samples).collect();
                perm.shuffle(&mut rng(derive_seed(seed, &[r as u64])));
                split_sizes(n_samples, n_folds)
                    .scan(0, |start, size| {
                        let mut fold = perm[*start..*start + size].to_vec();
                        fold.sort_unstable();
                        *start += size;
                        Some(fold)
                    })
                    .collect()
            })
            .collect();
        Ok(FoldPlan {
            n_samples,
            n_folds,
            n_repeats,
            seed,
            assignments,
        })
    }

    /// Default 5 folds × 10 repeats.
    pub fn standard(n_samples: usize, seed: u64) -> Result<Self> {
        FoldPlan::new(n_samples, 5, 10, seed)
    }

    /// Like [`FoldPlan::new`], but keeps all samples of a group in the same fold.
    ///
    /// Groups are shuffled and dealt greedily to the currently smallest fold.
    pub fn grouped(groups: &[String], n_folds: usize, n_repeats: usize, seed: u64) -> Result<Self> {
        let mut unique: Vec<&String> = groups.iter().collect();
        unique.sort();
        unique.dedup();
        if unique.len() < n_folds {
            return Err(Error::invalid(format!(
                "{} groups cannot fill {n_folds} folds",
                unique.len()
            )));
        }
        if n_folds < 2 || n_repeats == 0 {
            return Err(Error::invalid("need >= 2 folds and >= 1 repeat"));
        }
        let assignments = (0..n_repeats)
            .map(|r| {
                let mut order = unique.clone();
                order.shuffle(&mut rng(derive_seed(seed, &[r as u64, 0x6752])));
                let mut folds: Vec<Vec<usize>> = vec![Vec::new(); n_folds];
                for g in order {
                    let members: Vec<usize> = groups
                        .iter()
                        .enumerate()
                        .filter(|(_, x)| *x == g)
                        .map(|(i, _)| i)
                        .collect();
                    let target = (0..n_folds).min_by_key(|&f| (folds[f].len(), f)).unwrap_or(0);
                    folds[target].extend(members);
                }
                folds.iter_mut().for_each(|f| f.sort_unstable());
                folds
            })
            .collect();
        Ok(FoldPlan {
            n_samples: groups.len(),
            n_folds,
            n_repeats,
            seed,
            assignments,
        })
    }

    pub fn n_iterations(&self) -> usize {
        self.n_folds * self.n_repeats
    }

    /// All (repeat, fold) cells in fixed order.
    pub fn splits(&self) -> Vec<FoldSplit> {
        let mut out = Vec::with_capacity(self.n_iterations());
        for (r, folds) in self.assignments.iter().enumerate() {
            for (f, test) in folds.iter().enumerate() {
                let mut in_test = vec![false; self.n_samples];
                test.iter().for_each(|&i| in_test[i] = true);
                let train = (0..self.n_samples).filter(|&i| !in_test[i]).collect();
                out.push(FoldSplit {
                    repeat: r,
                    fold: f,
                    train,
                    test: test.clone(),
                });
            }
        }
        out
    }
}

fn split_sizes(n: usize, k: usize) -> impl Iterator<Item = usize> {
    (0..k).map(move |f| n / k + usize::from(f < n % k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sixty_nine_samples() {
        let plan = FoldPlan::standard(69, 42).unwrap();
        assert_eq!(plan.n_iterations(), 50);
        for folds in &plan.assignments {
            let sizes: Vec<_> = folds.iter().map(|f| f.len()).collect();
            assert_eq!(sizes, vec![14, 14, 14, 14, 13]);
        }
        assert_eq!(plan.splits().len(), 50);
        assert_eq!(plan, FoldPlan::standard(69, 42).unwrap());
        assert_ne!(plan.assignments, FoldPlan::standard(69, 43).unwrap().assignments);
        // repeats reshuffle
        assert_ne!(plan.assignments[0], plan.assignments[1]);
    }

    #[test]
    fn grouped_keeps_groups_together() {
        let groups: Vec<String> = (0..30).map(|i| format!("p{}", i / 3)).collect();
        let plan = FoldPlan::grouped(&groups, 5, 2, 1).unwrap();
        for folds in &plan.assignments {
            for f in folds {
                for &i in f {
                    assert!(f.iter().filter(|&&j| groups[j] == groups[i]).count() == 3);
                }
            }
            assert_eq!(folds.iter().map(|f| f.len()).sum::<usize>(), 30);
        }
    }

    proptest! {
        #[test]
        fn folds_partition(n in 5usize..120, k in 2usize..6, seed in any::<u64>()) {
            prop_assume!(n >= k);
            let plan = FoldPlan::new(n, k, 3, seed).unwrap();
            for folds in &plan.assignments {
                let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
                all.sort_unstable();
                prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
                let sizes: Vec<usize> = folds.iter().map(|f| f.len()).collect();
                prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            }
            for s in plan.splits() {
                prop_assert_eq!(s.train.len() + s.test.len(), n);
                prop_assert!(s.test.iter().all(|i| !s.train.contains(i)));
            }
        }
    }
}
