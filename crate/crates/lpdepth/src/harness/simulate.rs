//! Simulated two-class experiments with known Bayes risk: train/test
//! generation, both pipelines (adaptive exponent grid and the l_2-frozen
//! baseline), misclassification rates, regret ratios.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Deserialize;

use crate::classify::{
    ClassData, DensityRatioClassifier, MaxDepthClassifier, PriorMode, TrainOptions,
};
use crate::error::{Error, ErrorClass, Result};
use crate::fit::{PGrid, TrimSpec};
use crate::synth::{bayes_risk_mc, LpSymmetricSpec, TwoClassProblem};

use super::metrics::replication_se;
use super::report::{EvalReport, ReportRow};

/// Stream salt separating the Bayes-risk draws from the replication draws.
const MC_STREAM_SALT: u64 = 0x4d43_0000_0000_0000;
/// Stream salt for per-replication fitting randomness.
const FIT_STREAM_SALT: u64 = 0x4649_0000_0000_0000;

/// Which classifier a problem evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifierKind {
    MaxDepth,
    DensityRatio,
}

impl Default for ClassifierKind {
    fn default() -> Self {
        Self::DensityRatio
    }
}

/// One class distribution, as written in the experiment config.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSpec {
    pub p: f64,
    pub location: Vec<f64>,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    /// Full row-major transform; wins over `diag` and `scale`.
    #[serde(default)]
    pub transform: Option<Vec<Vec<f64>>>,
    /// Diagonal transform entries.
    #[serde(default)]
    pub diag: Option<Vec<f64>>,
    /// Scalar multiple of the identity transform.
    #[serde(default)]
    pub scale: Option<f64>,
    /// Rotates the density contours by this angle (2-d only).
    #[serde(default)]
    pub rotation_deg: Option<f64>,
}

fn default_sigma() -> f64 {
    1.0
}

impl ClassSpec {
    pub fn build(&self) -> Result<LpSymmetricSpec> {
        let d = self.location.len();
        if d == 0 {
            return Err(Error::InvalidDimension);
        }
        let mut a = if let Some(rows) = &self.transform {
            if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                return Err(Error::Config(format!(
                    "transform must be {d} x {d} to match the location"
                )));
            }
            DMatrix::from_fn(d, d, |i, j| rows[i][j])
        } else if let Some(diag) = &self.diag {
            if diag.len() != d {
                return Err(Error::Config(format!(
                    "diag must have {d} entries to match the location"
                )));
            }
            DMatrix::from_fn(d, d, |i, j| if i == j { diag[i] } else { 0.0 })
        } else if let Some(s) = self.scale {
            DMatrix::identity(d, d) * s
        } else {
            DMatrix::identity(d, d)
        };
        if let Some(deg) = self.rotation_deg {
            if d != 2 {
                return Err(Error::UnsupportedDimension { dim: d });
            }
            let theta = deg.to_radians();
            let rot =
                DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()]);
            // Rotating the data by theta turns psi(||A0 y||) into
            // psi(||A0 R^T x||).
            a = a * rot.transpose();
        }
        LpSymmetricSpec::new(self.p, DVector::from_vec(self.location.clone()), a, self.sigma)
    }
}

/// A named two-class problem.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub name: String,
    pub class_a: ClassSpec,
    pub class_b: ClassSpec,
    #[serde(default = "default_priors")]
    pub priors: (f64, f64),
    #[serde(default)]
    pub classifier: ClassifierKind,
}

fn default_priors() -> (f64, f64) {
    (0.5, 0.5)
}

impl ProblemSpec {
    pub fn build(&self) -> Result<TwoClassProblem> {
        TwoClassProblem::new(self.class_a.build()?, self.class_b.build()?, self.priors)
    }
}

/// Full simulation configuration (deserializable from the experiment config
/// file).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub train_size: usize,
    pub test_size: usize,
    pub reps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_mc_draws")]
    pub mc_draws: usize,
    #[serde(default)]
    pub grid: Option<Vec<f64>>,
    #[serde(default)]
    pub trim: Option<(f64, f64)>,
    /// Also run the l_2-frozen baseline pipeline.
    #[serde(default = "default_true")]
    pub baseline: bool,
    pub problems: Vec<ProblemSpec>,
}

fn default_name() -> String {
    "simulation".into()
}

fn default_mc_draws() -> usize {
    100_000
}

fn default_true() -> bool {
    true
}

impl SimulationConfig {
    fn grid(&self) -> Result<PGrid> {
        match &self.grid {
            Some(v) => PGrid::new(v.clone()),
            None => Ok(PGrid::default()),
        }
    }

    fn trim(&self) -> Result<TrimSpec> {
        match self.trim {
            Some((lo, hi)) => TrimSpec::new(lo, hi),
            None => Ok(TrimSpec::default()),
        }
    }
}

/// Aggregated per-classifier outcome for one problem.
#[derive(Debug, Clone)]
pub struct ClassifierOutcome {
    pub name: String,
    pub rep_rates: Vec<f64>,
    pub mean_rate: f64,
    pub se: f64,
    pub regret_ratio: Option<f64>,
}

/// One problem's results.
#[derive(Debug, Clone)]
pub struct ProblemOutcome {
    pub name: String,
    pub bayes_risk: f64,
    pub bayes_se: f64,
    pub skipped: usize,
    pub classifiers: Vec<ClassifierOutcome>,
}

/// Full simulation results with per-replication rates retained.
#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub name: String,
    pub seed: u64,
    pub reps: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub mc_draws: usize,
    pub grid: Vec<f64>,
    pub trim: (f64, f64),
    pub problems: Vec<ProblemOutcome>,
}

impl SimulationResult {
    pub fn report(&self) -> EvalReport {
        let header = vec![
            ("experiment".to_string(), self.name.clone()),
            ("seed".to_string(), self.seed.to_string()),
            ("reps".to_string(), self.reps.to_string()),
            ("train_size".to_string(), self.train_size.to_string()),
            ("test_size".to_string(), self.test_size.to_string()),
            ("mc_draws".to_string(), self.mc_draws.to_string()),
            (
                "grid".to_string(),
                self.grid
                    .iter()
                    .map(|p| p.to_string())
                    .collect::<Vec<_>>()
                    .join(" "),
            ),
            (
                "trim".to_string(),
                format!("{} {}", self.trim.0, self.trim.1),
            ),
        ];
        let mut rows = Vec::new();
        for problem in &self.problems {
            for clf in &problem.classifiers {
                rows.push(ReportRow {
                    dataset: problem.name.clone(),
                    classifier: clf.name.clone(),
                    mean_rate: clf.mean_rate,
                    se: clf.se,
                    bayes_risk: Some(problem.bayes_risk),
                    regret_ratio: clf.regret_ratio,
                    efficiency: 0.0,
                    skipped_reps: problem.skipped,
                });
            }
        }
        EvalReport { header, rows }.with_efficiencies()
    }
}

struct RepRates {
    adaptive: f64,
    baseline: Option<f64>,
}

fn split_counts(total: usize, prior_a: f64) -> (usize, usize) {
    let a = ((total as f64) * prior_a).round() as usize;
    let a = a.clamp(1, total - 1);
    (a, total - a)
}

fn fit_and_score(
    kind: ClassifierKind,
    classes: &[ClassData],
    options: &TrainOptions,
    seed: u64,
    test: &DMatrix<f64>,
    truth: &[usize],
) -> Result<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let predict: Box<dyn Fn(&DVector<f64>) -> Result<usize>> = match kind {
        ClassifierKind::MaxDepth => {
            let (clf, _) = MaxDepthClassifier::fit(classes, options, &mut rng)?;
            Box::new(move |x| clf.classify(x))
        }
        ClassifierKind::DensityRatio => {
            let (clf, _) = DensityRatioClassifier::fit(classes, options, &mut rng)?;
            Box::new(move |x| clf.classify(x))
        }
    };
    let mut errors = 0usize;
    for i in 0..test.nrows() {
        let x = test.row(i).transpose();
        if predict(&x)? != truth[i] {
            errors += 1;
        }
    }
    Ok(errors as f64 / test.nrows() as f64)
}

fn run_replication(
    config: &SimulationConfig,
    spec: &ProblemSpec,
    problem: &TwoClassProblem,
    grid: &PGrid,
    trim: &TrimSpec,
    rep: usize,
) -> Result<RepRates> {
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed ^ rep as u64);
    let (n_a, n_b) = split_counts(config.train_size, problem.priors().0);
    let train_a = problem.spec_a.sample(n_a, &mut rng);
    let train_b = problem.spec_b.sample(n_b, &mut rng);
    let (t_a, t_b) = split_counts(config.test_size, problem.priors().0);
    let test_a = problem.spec_a.sample(t_a, &mut rng);
    let test_b = problem.spec_b.sample(t_b, &mut rng);
    let d = problem.spec_a.dim();
    let mut test = DMatrix::zeros(t_a + t_b, d);
    let mut truth = Vec::with_capacity(t_a + t_b);
    for i in 0..t_a {
        test.set_row(i, &test_a.row(i));
        truth.push(0);
    }
    for i in 0..t_b {
        test.set_row(t_a + i, &test_b.row(i));
        truth.push(1);
    }

    let classes = vec![
        ClassData {
            label: "a".into(),
            rows: train_a,
        },
        ClassData {
            label: "b".into(),
            rows: train_b,
        },
    ];
    let priors_equal = (problem.priors().0 - problem.priors().1).abs() < 1e-12;
    let base_options = TrainOptions {
        grid: grid.clone(),
        trim: *trim,
        prior_mode: if priors_equal {
            PriorMode::Equal
        } else {
            PriorMode::SampleProportions
        },
        ..Default::default()
    };
    let fit_seed = config.seed ^ FIT_STREAM_SALT ^ rep as u64;
    let adaptive = fit_and_score(
        spec.classifier,
        &classes,
        &base_options,
        fit_seed,
        &test,
        &truth,
    )?;
    let baseline = if config.baseline {
        let options = TrainOptions {
            grid: PGrid::singleton(2.0)?,
            ..base_options
        };
        Some(fit_and_score(
            spec.classifier,
            &classes,
            &options,
            fit_seed,
            &test,
            &truth,
        )?)
    } else {
        None
    };
    Ok(RepRates { adaptive, baseline })
}

/// Runs every configured problem: simulate train/test per replication, fit
/// the adaptive pipeline (and the l_2 baseline), score on the test set, and
/// attach the Monte-Carlo Bayes risk and regret ratios. Replications run
/// concurrently with per-replication seed streams; numerically degenerate
/// replications are skipped and counted, never silently dropped.
pub fn run_simulation_study(config: &SimulationConfig) -> Result<SimulationResult> {
    if config.problems.is_empty() {
        return Err(Error::Config("no problems configured".into()));
    }
    if config.reps == 0 {
        return Err(Error::Config("need at least one replication".into()));
    }
    let grid = config.grid()?;
    let trim = config.trim()?;

    let mut outcomes = Vec::with_capacity(config.problems.len());
    for (index, spec) in config.problems.iter().enumerate() {
        let problem = spec.build()?;
        let mut mc_rng =
            ChaCha12Rng::seed_from_u64(config.seed ^ MC_STREAM_SALT ^ index as u64);
        let (bayes_risk, bayes_se) = bayes_risk_mc(&problem, config.mc_draws, &mut mc_rng)?;

        let rep_results: Vec<Result<RepRates>> = (0..config.reps)
            .into_par_iter()
            .map(|rep| run_replication(config, spec, &problem, &grid, &trim, rep))
            .collect();

        let mut adaptive_rates = Vec::new();
        let mut baseline_rates = Vec::new();
        let mut skipped = 0usize;
        for r in rep_results {
            match r {
                Ok(rates) => {
                    adaptive_rates.push(rates.adaptive);
                    if let Some(b) = rates.baseline {
                        baseline_rates.push(b);
                    }
                }
                Err(e) if e.class() == ErrorClass::Numeric => skipped += 1,
                Err(e) => return Err(e),
            }
        }
        if adaptive_rates.is_empty() {
            return Err(Error::DegenerateData(format!(
                "problem '{}': every replication was degenerate",
                spec.name
            )));
        }

        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let adaptive_mean = mean(&adaptive_rates);
        let mut classifiers = vec![ClassifierOutcome {
            name: "LpD".into(),
            mean_rate: adaptive_mean,
            se: replication_se(&adaptive_rates),
            regret_ratio: regret_or_none(adaptive_mean, adaptive_mean, bayes_risk),
            rep_rates: adaptive_rates,
        }];
        if config.baseline && !baseline_rates.is_empty() {
            let baseline_mean = mean(&baseline_rates);
            classifiers.push(ClassifierOutcome {
                name: "MD".into(),
                mean_rate: baseline_mean,
                se: replication_se(&baseline_rates),
                regret_ratio: regret_or_none(baseline_mean, adaptive_mean, bayes_risk),
                rep_rates: baseline_rates,
            });
        }
        outcomes.push(ProblemOutcome {
            name: spec.name.clone(),
            bayes_risk,
            bayes_se,
            skipped,
            classifiers,
        });
    }
    Ok(SimulationResult {
        name: config.name.clone(),
        seed: config.seed,
        reps: config.reps,
        train_size: config.train_size,
        test_size: config.test_size,
        mc_draws: config.mc_draws,
        grid: grid.values().to_vec(),
        trim: (trim.lo(), trim.hi()),
        problems: outcomes,
    })
}

fn regret_or_none(rate_t: f64, reference: f64, bayes: f64) -> Option<f64> {
    super::metrics::regret_ratio(rate_t, reference, bayes).ok()
}
