//! Paragraph-level 80/10/10 split. Splitting by paragraph rather than by
//! question keeps every paragraph's questions inside one split.

use crate::corpus::dataset::{Dataset, QAExample, RawRecord};
use crate::error::{CoreError, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub struct DatasetSplit {
    pub train: Vec<QAExample>,
    pub dev: Vec<QAExample>,
    pub test: Vec<QAExample>,
    pub seed: u64,
}

/// Record-level view of the same split, for materializing files.
#[derive(Debug, Clone)]
pub struct SplitRecords {
    pub train: Vec<RawRecord>,
    pub dev: Vec<RawRecord>,
    pub test: Vec<RawRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub n_paragraphs: usize,
    pub train_paragraphs: usize,
    pub dev_paragraphs: usize,
    pub test_paragraphs: usize,
    pub train_examples: usize,
    pub dev_examples: usize,
    pub test_examples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bucket {
    Train,
    Dev,
    Test,
}

fn assign_paragraphs(
    keys: &[(String, String)],
    seed: u64,
) -> Result<BTreeMap<(String, String), Bucket>> {
    if keys.len() < 10 {
        return Err(CoreError::Validation(format!(
            "need at least 10 distinct paragraphs to split, got {}",
            keys.len()
        )));
    }
    let mut shuffled = keys.to_vec();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    shuffled.shuffle(&mut rng);

    let n = shuffled.len();
    let n_dev = n / 10;
    let n_test = n / 10;
    let n_train = n - n_dev - n_test; // remainders go to train

    let mut assignment = BTreeMap::new();
    for (i, key) in shuffled.into_iter().enumerate() {
        let bucket = if i < n_train {
            Bucket::Train
        } else if i < n_train + n_dev {
            Bucket::Dev
        } else {
            Bucket::Test
        };
        assignment.insert(key, bucket);
    }
    Ok(assignment)
}

/// Shuffle paragraphs with the seed, partition 80/10/10 by paragraph
/// count, and carry each paragraph's questions along with it.
pub fn split_dataset(dataset: &Dataset, seed: u64) -> Result<(DatasetSplit, SplitRecords)> {
    let keys: Vec<(String, String)> = dataset
        .paragraphs()
        .iter()
        .map(|p| p.key())
        .collect();
    let assignment = assign_paragraphs(&keys, seed)?;

    let mut split = DatasetSplit {
        train: Vec::new(),
        dev: Vec::new(),
        test: Vec::new(),
        seed,
    };
    let mut records = SplitRecords {
        train: Vec::new(),
        dev: Vec::new(),
        test: Vec::new(),
    };
    for (example, record) in dataset.examples.iter().zip(&dataset.records) {
        let bucket = assignment[&example.paragraph.key()];
        match bucket {
            Bucket::Train => {
                split.train.push(example.clone());
                records.train.push(record.clone());
            }
            Bucket::Dev => {
                split.dev.push(example.clone());
                records.dev.push(record.clone());
            }
            Bucket::Test => {
                split.test.push(example.clone());
                records.test.push(record.clone());
            }
        }
    }
    Ok((split, records))
}

impl DatasetSplit {
    pub fn manifest(&self) -> SplitManifest {
        let count = |xs: &[QAExample]| {
            xs.iter()
                .map(|e| e.paragraph.key())
                .collect::<std::collections::BTreeSet<_>>()
                .len()
        };
        SplitManifest {
            seed: self.seed,
            n_paragraphs: count(&self.train) + count(&self.dev) + count(&self.test),
            train_paragraphs: count(&self.train),
            dev_paragraphs: count(&self.dev),
            test_paragraphs: count(&self.test),
            train_examples: self.train.len(),
            dev_examples: self.dev.len(),
            test_examples: self.test.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::synthetic::generate_synthetic;
    use std::collections::BTreeSet;

    fn keys(xs: &[QAExample]) -> BTreeSet<(String, String)> {
        xs.iter().map(|e| e.paragraph.key()).collect()
    }

    #[test]
    fn ten_paragraphs_split_8_1_1() {
        let ds = Dataset::from_records(generate_synthetic(10, 1), "synthetic").unwrap();
        let (split, _) = split_dataset(&ds, 42).unwrap();
        let m = split.manifest();
        assert_eq!(
            (m.train_paragraphs, m.dev_paragraphs, m.test_paragraphs),
            (8, 1, 1)
        );
    }

    #[test]
    fn same_seed_gives_identical_split() {
        let ds = Dataset::from_records(generate_synthetic(13, 2), "synthetic").unwrap();
        let (a, _) = split_dataset(&ds, 7).unwrap();
        let (b, _) = split_dataset(&ds, 7).unwrap();
        assert_eq!(keys(&a.train), keys(&b.train));
        assert_eq!(keys(&a.dev), keys(&b.dev));
        assert_eq!(keys(&a.test), keys(&b.test));
    }

    #[test]
    fn splits_partition_paragraphs_over_many_seeds() {
        let ds = Dataset::from_records(generate_synthetic(17, 5), "synthetic").unwrap();
        let all: BTreeSet<_> = ds.paragraphs().iter().map(|p| p.key()).collect();
        for seed in 0..100u64 {
            let (s, _) = split_dataset(&ds, seed).unwrap();
            let (tr, dv, te) = (keys(&s.train), keys(&s.dev), keys(&s.test));
            assert!(tr.is_disjoint(&dv) && tr.is_disjoint(&te) && dv.is_disjoint(&te));
            let union: BTreeSet<_> = tr.union(&dv).cloned().collect();
            let union: BTreeSet<_> = union.union(&te).cloned().collect();
            assert_eq!(union, all, "seed {seed}");
        }
    }

    #[test]
    fn too_few_paragraphs_is_an_error() {
        let ds = Dataset::from_records(generate_synthetic(9, 1), "synthetic").unwrap();
        assert!(split_dataset(&ds, 1).is_err());
    }
}
