//! Class-proportion-preserving train/test splits, replicated under seeds.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

use super::data::Dataset;

/// Train size, either as a fraction of all rows or an absolute count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrainSize {
    Fraction(f64),
    Absolute(usize),
}

/// Split protocol: size, replication count, seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_size: TrainSize,
    pub n_reps: usize,
    pub seed: u64,
    pub stratified: bool,
}

impl SplitSpec {
    pub fn new(train_size: TrainSize, n_reps: usize, seed: u64) -> Result<Self> {
        if n_reps == 0 {
            return Err(Error::Config("need at least one replication".into()));
        }
        if let TrainSize::Fraction(f) = train_size {
            if !(f.is_finite() && 0.0 < f && f < 1.0) {
                return Err(Error::Config(format!(
                    "train fraction must lie in (0, 1), got {f}"
                )));
            }
        }
        Ok(Self {
            train_size,
            n_reps,
            seed,
            stratified: true,
        })
    }

    fn train_target(&self, n: usize) -> Result<usize> {
        let t = match self.train_size {
            TrainSize::Fraction(f) => (n as f64 * f).round() as usize,
            TrainSize::Absolute(t) => t,
        };
        if t == 0 || t >= n {
            return Err(Error::Config(format!(
                "train size {t} leaves no train or no test rows out of {n}"
            )));
        }
        Ok(t)
    }
}

/// Per-class train counts: round(count * fraction), then largest-remainder
/// adjustment so the total hits the global target. Deviation from exact
/// proportionality is at most one row per class.
fn per_class_counts(class_counts: &[usize], target: usize, n: usize) -> Vec<usize> {
    let f = target as f64 / n as f64;
    let mut counts: Vec<usize> = class_counts
        .iter()
        .map(|&c| ((c as f64 * f).round() as usize).min(c))
        .collect();
    let mut total: isize = counts.iter().sum::<usize>() as isize;
    while total != target as isize {
        if total < target as isize {
            // Add where the shortfall against the exact share is largest.
            let (best, _) = counts
                .iter()
                .enumerate()
                .filter(|&(j, &c)| c < class_counts[j])
                .map(|(j, &c)| (j, class_counts[j] as f64 * f - c as f64))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("target < n guarantees capacity");
            counts[best] += 1;
            total += 1;
        } else {
            let (best, _) = counts
                .iter()
                .enumerate()
                .filter(|&(_, &c)| c > 0)
                .map(|(j, &c)| (j, c as f64 - class_counts[j] as f64 * f))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("positive total guarantees a donor");
            counts[best] -= 1;
            total -= 1;
        }
    }
    counts
}

/// The (train, test) index partition for one replication; both sides are
/// sorted ascending. Identical spec and rep give identical output.
pub fn stratified_split(
    ds: &Dataset,
    spec: &SplitSpec,
    rep: usize,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = ds.n();
    let target = spec.train_target(n)?;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed ^ rep as u64);
    let mut train = Vec::with_capacity(target);
    let mut test = Vec::with_capacity(n - target);
    if spec.stratified {
        let class_counts: Vec<usize> =
            (0..ds.classes().len()).map(|c| ds.class_count(c)).collect();
        let takes = per_class_counts(&class_counts, target, n);
        for (class, &take) in takes.iter().enumerate() {
            let mut idx = ds.class_indices(class);
            idx.shuffle(&mut rng);
            train.extend_from_slice(&idx[..take]);
            test.extend_from_slice(&idx[take..]);
        }
    } else {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        train.extend_from_slice(&idx[..target]);
        test.extend_from_slice(&idx[target..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// All replications' splits.
pub fn stratified_splits(ds: &Dataset, spec: &SplitSpec) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    (0..spec.n_reps)
        .map(|rep| stratified_split(ds, spec, rep))
        .collect()
}
