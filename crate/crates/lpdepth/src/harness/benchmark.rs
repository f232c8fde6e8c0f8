//! Benchmark runs on real labeled datasets: replicated stratified splits,
//! classifier fits, misclassification rates and efficiencies.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::classify::{ClassData, DensityRatioClassifier, MaxDepthClassifier, PriorMode, TrainOptions};
use crate::error::{Error, ErrorClass, Result};
use crate::fit::{PGrid, TrimSpec};

use super::data::Dataset;
use super::metrics::{compute_metrics, replication_se};
use super::report::{EvalReport, ReportRow};
use super::simulate::ClassifierKind;
use super::split::{stratified_split, SplitSpec};

const FIT_STREAM_SALT: u64 = 0x4649_0000_0000_0000;

/// Benchmark protocol knobs.
#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub split: SplitSpec,
    pub grid: PGrid,
    pub trim: TrimSpec,
    pub prior_mode: PriorMode,
    pub classifier: ClassifierKind,
    /// Also run the l_2-frozen baseline pipeline.
    pub baseline: bool,
}

impl BenchmarkConfig {
    pub fn new(split: SplitSpec) -> Self {
        Self {
            split,
            grid: PGrid::default(),
            trim: TrimSpec::default(),
            prior_mode: PriorMode::SampleProportions,
            classifier: ClassifierKind::DensityRatio,
            baseline: true,
        }
    }
}

/// Aggregated benchmark outcome for one classifier.
#[derive(Debug, Clone)]
pub struct BenchmarkClassifierOutcome {
    pub name: String,
    pub rep_rates: Vec<f64>,
    pub mean_rate: f64,
    pub se: f64,
}

/// Benchmark results plus skip accounting.
#[derive(Debug, Clone)]
pub struct BenchmarkResult {
    pub dataset: String,
    pub n: usize,
    pub dim: usize,
    pub reps: usize,
    pub seed: u64,
    pub skipped: usize,
    pub classifiers: Vec<BenchmarkClassifierOutcome>,
}

impl BenchmarkResult {
    pub fn report(&self) -> EvalReport {
        let header = vec![
            ("dataset".to_string(), self.dataset.clone()),
            ("rows".to_string(), self.n.to_string()),
            ("dim".to_string(), self.dim.to_string()),
            ("reps".to_string(), self.reps.to_string()),
            ("seed".to_string(), self.seed.to_string()),
            ("skipped_reps".to_string(), self.skipped.to_string()),
        ];
        let rows = self
            .classifiers
            .iter()
            .map(|clf| ReportRow {
                dataset: self.dataset.clone(),
                classifier: clf.name.clone(),
                mean_rate: clf.mean_rate,
                se: clf.se,
                bayes_risk: None,
                regret_ratio: None,
                efficiency: 0.0,
                skipped_reps: self.skipped,
            })
            .collect();
        EvalReport { header, rows }.with_efficiencies()
    }
}

struct RepRates {
    adaptive: f64,
    adaptive_binomial_se: f64,
    baseline: Option<f64>,
    baseline_binomial_se: f64,
}

fn class_data_for(ds: &Dataset, train: &[usize]) -> Result<Vec<ClassData>> {
    let mut out = Vec::with_capacity(ds.classes().len());
    let needed = ds.dim() + 2;
    for (class, label) in ds.classes().iter().enumerate() {
        let idx: Vec<usize> = train
            .iter()
            .cloned()
            .filter(|&i| ds.labels()[i] == class)
            .collect();
        if idx.len() < needed {
            return Err(Error::InsufficientData {
                needed,
                got: idx.len(),
            });
        }
        out.push(ClassData {
            label: label.clone(),
            rows: ds.rows(&idx),
        });
    }
    Ok(out)
}

fn score(
    kind: ClassifierKind,
    classes: &[ClassData],
    options: &TrainOptions,
    seed: u64,
    ds: &Dataset,
    test: &[usize],
) -> Result<(f64, f64)> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut predictions = Vec::with_capacity(test.len());
    match kind {
        ClassifierKind::MaxDepth => {
            let (clf, _) = MaxDepthClassifier::fit(classes, options, &mut rng)?;
            for &i in test {
                predictions.push(clf.classify(&ds.features().row(i).transpose())?);
            }
        }
        ClassifierKind::DensityRatio => {
            let (clf, _) = DensityRatioClassifier::fit(classes, options, &mut rng)?;
            for &i in test {
                predictions.push(clf.classify(&ds.features().row(i).transpose())?);
            }
        }
    }
    let truth: Vec<usize> = test.iter().map(|&i| ds.labels()[i]).collect();
    compute_metrics(&predictions, &truth)
}

fn run_replication(ds: &Dataset, config: &BenchmarkConfig, rep: usize) -> Result<RepRates> {
    let (train, test) = stratified_split(ds, &config.split, rep)?;
    let classes = class_data_for(ds, &train)?;
    let options = TrainOptions {
        grid: config.grid.clone(),
        trim: config.trim,
        prior_mode: config.prior_mode,
        ..Default::default()
    };
    let fit_seed = config.split.seed ^ FIT_STREAM_SALT ^ rep as u64;
    let (adaptive, adaptive_binomial_se) =
        score(config.classifier, &classes, &options, fit_seed, ds, &test)?;
    let (baseline, baseline_binomial_se) = if config.baseline {
        let options = TrainOptions {
            grid: PGrid::singleton(2.0)?,
            ..options
        };
        let (rate, se) = score(config.classifier, &classes, &options, fit_seed, ds, &test)?;
        (Some(rate), se)
    } else {
        (None, 0.0)
    };
    Ok(RepRates {
        adaptive,
        adaptive_binomial_se,
        baseline,
        baseline_binomial_se,
    })
}

/// Runs the replicated-split benchmark. Replications whose training classes
/// fall below d + 2 rows or hit numerically degenerate fits are skipped and
/// counted. The standard error convention follows the protocol: the binomial
/// formula for a single split (fixed test set), the replication standard
/// error otherwise.
pub fn run_benchmark(ds: &Dataset, config: &BenchmarkConfig) -> Result<BenchmarkResult> {
    let rep_results: Vec<Result<RepRates>> = (0..config.split.n_reps)
        .into_par_iter()
        .map(|rep| run_replication(ds, config, rep))
        .collect();

    let mut adaptive = Vec::new();
    let mut baseline = Vec::new();
    let mut binomial_ses = (0.0, 0.0);
    let mut skipped = 0usize;
    for r in rep_results {
        match r {
            Ok(rates) => {
                adaptive.push(rates.adaptive);
                binomial_ses.0 = rates.adaptive_binomial_se;
                if let Some(b) = rates.baseline {
                    baseline.push(b);
                    binomial_ses.1 = rates.baseline_binomial_se;
                }
            }
            Err(e) if matches!(e.class(), ErrorClass::Numeric | ErrorClass::Data) => {
                skipped += 1;
            }
            Err(e) => return Err(e),
        }
    }
    if adaptive.is_empty() {
        return Err(Error::DegenerateData(
            "every replication was skipped".into(),
        ));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let single_split = config.split.n_reps == 1;
    let mut classifiers = vec![BenchmarkClassifierOutcome {
        name: "LpD".into(),
        mean_rate: mean(&adaptive),
        se: if single_split {
            binomial_ses.0
        } else {
            replication_se(&adaptive)
        },
        rep_rates: adaptive,
    }];
    if config.baseline && !baseline.is_empty() {
        classifiers.push(BenchmarkClassifierOutcome {
            name: "MD".into(),
            mean_rate: mean(&baseline),
            se: if single_split {
                binomial_ses.1
            } else {
                replication_se(&baseline)
            },
            rep_rates: baseline,
        });
    }
    Ok(BenchmarkResult {
        dataset: ds.name().to_string(),
        n: ds.n(),
        dim: ds.dim(),
        reps: config.split.n_reps,
        seed: config.split.seed,
        skipped,
        classifiers,
    })
}
