//! The two depth-based classifiers: the maximum-depth rule with a common
//! exponent, and the generalized density-ratio rule with per-class exponents
//! and a cross-validated threshold, extended to more than two classes by
//! pairwise majority voting.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fit::{
    depth_sample, estimate_p, moment_estimates, tr_sqrt, trimmed_loglik, PEstimate, PGrid,
    TrimSpec, DEFAULT_SUBSET_TRIES,
};
use crate::kde::DepthKde;
use crate::lp::{ln_density_from_depth, DepthValue, LpModel, DENSITY_FLOOR};

/// Log-ratio saturation bound: ratios are clamped into
/// [exp(-RATIO_LN_BOUND), exp(RATIO_LN_BOUND)] so that threshold candidates
/// stay finite.
const RATIO_LN_BOUND: f64 = 690.0;

/// One fitted class: geometry, depth-density estimate, prior and label.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedClass {
    label: String,
    model: LpModel,
    kde: DepthKde,
    prior: f64,
    n: usize,
}

impl TrainedClass {
    pub fn new(label: String, model: LpModel, kde: DepthKde, prior: f64, n: usize) -> Result<Self> {
        if !(prior.is_finite() && prior > 0.0 && prior < 1.0) {
            return Err(Error::InvalidPriors(format!(
                "class prior must lie in (0, 1), got {prior}"
            )));
        }
        if n == 0 {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        Ok(Self {
            label,
            model,
            kde,
            prior,
            n,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn model(&self) -> &LpModel {
        &self.model
    }

    pub fn kde(&self) -> &DepthKde {
        &self.kde
    }

    pub fn prior(&self) -> f64 {
        self.prior
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depth(&self, x: &DVector<f64>) -> Result<DepthValue> {
        self.model.depth(x)
    }

    /// Log estimated density at `x`, with the pipeline's floor and cap
    /// conventions.
    pub fn ln_density(&self, x: &DVector<f64>) -> Result<f64> {
        let delta = self.model.depth(x)?;
        Ok(ln_density_from_depth(
            delta,
            self.kde.eval(delta.get()),
            &self.model,
        ))
    }

    /// Log density with one depth sample left out of the kernel estimate.
    fn ln_density_leaving_out(&self, x: &DVector<f64>, excluded_depth: f64) -> Result<f64> {
        let delta = self.model.depth(x)?;
        Ok(ln_density_from_depth(
            delta,
            self.kde.eval_excluding(delta.get(), excluded_depth),
            &self.model,
        ))
    }
}

/// Estimated class density at `x`, floored at 1e-300.
pub fn class_density(x: &DVector<f64>, class: &TrainedClass) -> Result<f64> {
    Ok(class.ln_density(x)?.exp().max(DENSITY_FLOOR))
}

/// Maximum-depth classification: the class giving `x` the largest depth wins;
/// exact ties go to the smallest class index. All classes are expected to
/// share one exponent.
pub fn classify_d1(x: &DVector<f64>, classes: &[TrainedClass]) -> Result<usize> {
    if classes.is_empty() {
        return Err(Error::Config("no classes to classify against".into()));
    }
    let mut best = 0usize;
    let mut best_depth = classes[0].depth(x)?.get();
    for (j, class) in classes.iter().enumerate().skip(1) {
        let d = class.depth(x)?.get();
        if d > best_depth {
            best = j;
            best_depth = d;
        }
    }
    Ok(best)
}

fn validate_priors(classes: &[TrainedClass]) -> Result<()> {
    let total: f64 = classes.iter().map(|c| c.prior()).sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidPriors(format!(
            "class priors sum to {total}, expected 1"
        )));
    }
    Ok(())
}

fn validate_labels(classes: &[TrainedClass]) -> Result<()> {
    for i in 0..classes.len() {
        for j in (i + 1)..classes.len() {
            if classes[i].label() == classes[j].label() {
                return Err(Error::Config(format!(
                    "duplicate class label '{}'",
                    classes[i].label()
                )));
            }
        }
    }
    Ok(())
}

/// The maximum-depth classifier: per-class geometry with one shared exponent.
#[derive(Debug, Clone)]
pub struct MaxDepthClassifier {
    classes: Vec<TrainedClass>,
    common_p: f64,
}

impl MaxDepthClassifier {
    pub fn new(classes: Vec<TrainedClass>, common_p: f64) -> Result<Self> {
        if classes.len() < 2 {
            return Err(Error::Config("need at least two classes".into()));
        }
        validate_labels(&classes)?;
        validate_priors(&classes)?;
        for c in &classes {
            if c.model().p() != common_p {
                return Err(Error::Config(
                    "all classes of a maximum-depth classifier share one exponent".into(),
                ));
            }
        }
        Ok(Self { classes, common_p })
    }

    pub fn classes(&self) -> &[TrainedClass] {
        &self.classes
    }

    pub fn common_p(&self) -> f64 {
        self.common_p
    }

    pub fn classify(&self, x: &DVector<f64>) -> Result<usize> {
        classify_d1(x, &self.classes)
    }

    pub fn fit<R: Rng + ?Sized>(
        classes: &[ClassData],
        options: &TrainOptions,
        rng: &mut R,
    ) -> Result<(Self, FitDiagnostics)> {
        let fitted = fit_geometries(classes, options, rng)?;
        let geometries: Vec<ClassGeometry<'_>> = fitted
            .iter()
            .zip(classes)
            .map(|(g, c)| ClassGeometry {
                data: &c.rows,
                location: &g.location,
                transform: &g.transform,
            })
            .collect();
        let common = fit_common_p(&geometries, &options.grid, &options.trim)?;
        let priors = class_priors(options.prior_mode, classes);
        let mut trained = Vec::with_capacity(classes.len());
        let mut diags = Vec::with_capacity(classes.len());
        for ((class, geom), prior) in classes.iter().zip(&fitted).zip(&priors) {
            let (tc, diag) = finish_class(class, geom, common.p_hat, *prior)?;
            trained.push(tc);
            diags.push(diag);
        }
        let out = Self::new(trained, common.p_hat)?;
        Ok((
            out,
            FitDiagnostics {
                classes: diags,
                thresholds: Vec::new(),
            },
        ))
    }
}

/// The generalized classifier: per-class exponents, density ratios and one
/// cross-validated threshold per unordered class pair.
#[derive(Debug, Clone)]
pub struct DensityRatioClassifier {
    classes: Vec<TrainedClass>,
    thresholds: BTreeMap<(usize, usize), f64>,
}

impl DensityRatioClassifier {
    pub fn new(classes: Vec<TrainedClass>, thresholds: BTreeMap<(usize, usize), f64>) -> Result<Self> {
        if classes.len() < 2 {
            return Err(Error::Config("need at least two classes".into()));
        }
        validate_labels(&classes)?;
        validate_priors(&classes)?;
        for i in 0..classes.len() {
            for j in (i + 1)..classes.len() {
                match thresholds.get(&(i, j)) {
                    Some(k) if k.is_finite() && *k > 0.0 => {}
                    Some(k) => {
                        return Err(Error::Config(format!(
                            "threshold for pair ({i}, {j}) must be finite and positive, got {k}"
                        )))
                    }
                    None => {
                        return Err(Error::Config(format!(
                            "missing threshold for class pair ({i}, {j})"
                        )))
                    }
                }
            }
        }
        Ok(Self {
            classes,
            thresholds,
        })
    }

    pub fn classes(&self) -> &[TrainedClass] {
        &self.classes
    }

    pub fn threshold(&self, i: usize, j: usize) -> Option<f64> {
        let key = if i < j { (i, j) } else { (j, i) };
        self.thresholds.get(&key).copied()
    }

    pub fn thresholds(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.thresholds
    }

    pub fn classify(&self, x: &DVector<f64>) -> Result<usize> {
        classify_d2(x, self)
    }

    pub fn fit<R: Rng + ?Sized>(
        classes: &[ClassData],
        options: &TrainOptions,
        rng: &mut R,
    ) -> Result<(Self, FitDiagnostics)> {
        let fitted = fit_geometries(classes, options, rng)?;
        let priors = class_priors(options.prior_mode, classes);
        let mut trained = Vec::with_capacity(classes.len());
        let mut diags = Vec::with_capacity(classes.len());
        for ((class, geom), prior) in classes.iter().zip(&fitted).zip(&priors) {
            let est = estimate_p(
                &class.rows,
                &geom.location,
                &geom.transform,
                &options.grid,
                &options.trim,
            )?;
            let (tc, diag) = finish_class(class, geom, est.p_hat, *prior)?;
            trained.push(tc);
            diags.push(diag);
        }
        let mut thresholds = BTreeMap::new();
        let mut threshold_diags = Vec::new();
        for i in 0..trained.len() {
            for j in (i + 1)..trained.len() {
                let (k, cv) = fit_threshold_k(
                    &trained[i],
                    &trained[j],
                    &classes[i].rows,
                    &classes[j].rows,
                )?;
                thresholds.insert((i, j), k);
                threshold_diags.push(ThresholdDiagnostics {
                    labels: (trained[i].label().to_string(), trained[j].label().to_string()),
                    k,
                    cv_error: cv,
                });
            }
        }
        let out = Self::new(trained, thresholds)?;
        Ok((
            out,
            FitDiagnostics {
                classes: diags,
                thresholds: threshold_diags,
            },
        ))
    }
}

/// Pairwise majority voting. For a pair (i, j) with i < j, class i gets the
/// vote when the density ratio f_i / f_j strictly exceeds the pair threshold;
/// the boundary goes to j. Vote ties resolve to the smallest class index.
pub fn classify_d2(x: &DVector<f64>, classifier: &DensityRatioClassifier) -> Result<usize> {
    let classes = classifier.classes();
    let ln_f: Vec<f64> = classes
        .iter()
        .map(|c| c.ln_density(x).map(|v| v.max(DENSITY_FLOOR.ln())))
        .collect::<Result<_>>()?;
    let mut votes = vec![0usize; classes.len()];
    for i in 0..classes.len() {
        for j in (i + 1)..classes.len() {
            let k = classifier
                .threshold(i, j)
                .expect("constructor guarantees a threshold per pair");
            let ratio = saturated_ratio(ln_f[i] - ln_f[j]);
            if ratio > k {
                votes[i] += 1;
            } else {
                votes[j] += 1;
            }
        }
    }
    let mut winner = 0usize;
    for (j, &v) in votes.iter().enumerate().skip(1) {
        if v > votes[winner] {
            winner = j;
        }
    }
    Ok(winner)
}

#[inline]
fn saturated_ratio(ln_ratio: f64) -> f64 {
    ln_ratio.clamp(-RATIO_LN_BOUND, RATIO_LN_BOUND).exp()
}

/// Leave-one-out cross-validated threshold for a class pair.
///
/// For every training point the likelihood ratio f_a / f_b is computed with
/// the held-out point's own class density refit without it (depth sample and
/// kernel sum exclude the point; location, transform and exponent are kept),
/// while the other class's density is the full fit. The returned threshold
/// minimizes the cross-validation error, which is piecewise constant with
/// breakpoints exactly at the observed ratios, so searching midpoints plus
/// one sentinel on each side is exact. Ties prefer the threshold closest to
/// prior_b / prior_a. Also returns the achieved cross-validation error.
pub fn fit_threshold_k(
    class_a: &TrainedClass,
    class_b: &TrainedClass,
    train_a: &DMatrix<f64>,
    train_b: &DMatrix<f64>,
) -> Result<(f64, f64)> {
    let n_a = train_a.nrows();
    let n_b = train_b.nrows();
    if n_a < 8 {
        return Err(Error::InsufficientData { needed: 8, got: n_a });
    }
    if n_b < 8 {
        return Err(Error::InsufficientData { needed: 8, got: n_b });
    }
    let depths_a = depth_sample(train_a, class_a.model())?;
    let depths_b = depth_sample(train_b, class_b.model())?;

    let ratios_a: Vec<f64> = (0..n_a)
        .into_par_iter()
        .map(|l| {
            let x = train_a.row(l).transpose();
            let ln_a = class_a.ln_density_leaving_out(&x, depths_a[l].get())?;
            let ln_b = class_b.ln_density(&x)?;
            Ok(saturated_ratio(ln_a - ln_b))
        })
        .collect::<Result<_>>()?;
    let ratios_b: Vec<f64> = (0..n_b)
        .into_par_iter()
        .map(|l| {
            let x = train_b.row(l).transpose();
            let ln_a = class_a.ln_density(&x)?;
            let ln_b = class_b.ln_density_leaving_out(&x, depths_b[l].get())?;
            Ok(saturated_ratio(ln_a - ln_b))
        })
        .collect::<Result<_>>()?;

    Ok(select_threshold(
        &ratios_a,
        &ratios_b,
        class_a.prior(),
        class_b.prior(),
    ))
}

/// Minimizes the leave-one-out cross-validation error over candidate
/// thresholds, given the class-a-oriented likelihood ratios of both classes'
/// held-out points.
///
/// A class-a point counts as an error when its ratio is <= k; a class-b point
/// when its ratio is >= k (equivalently its b-oriented ratio is <= 1/k). Each
/// error is weighted by prior / class count.
pub fn select_threshold(
    ratios_a: &[f64],
    ratios_b: &[f64],
    prior_a: f64,
    prior_b: f64,
) -> (f64, f64) {
    let mut breakpoints: Vec<f64> = ratios_a.iter().chain(ratios_b).cloned().collect();
    breakpoints.sort_by(|a, b| a.total_cmp(b));
    breakpoints.dedup();

    let mut candidates = Vec::with_capacity(breakpoints.len() + 1);
    candidates.push(breakpoints[0] * 0.5);
    for w in breakpoints.windows(2) {
        candidates.push(0.5 * (w[0] + w[1]));
    }
    candidates.push(breakpoints[breakpoints.len() - 1] * 2.0);

    let w_a = prior_a / ratios_a.len() as f64;
    let w_b = prior_b / ratios_b.len() as f64;
    let cv_error = |k: f64| -> f64 {
        let errs_a = ratios_a.iter().filter(|&&r| r <= k).count() as f64;
        let errs_b = ratios_b.iter().filter(|&&r| r >= k).count() as f64;
        w_a * errs_a + w_b * errs_b
    };

    let target = prior_b / prior_a;
    let mut best_k = candidates[0];
    let mut best_cv = cv_error(best_k);
    for &k in &candidates[1..] {
        let cv = cv_error(k);
        let better = cv < best_cv
            || (cv == best_cv && (k - target).abs() < (best_k - target).abs());
        if better {
            best_k = k;
            best_cv = cv;
        }
    }
    (best_k, best_cv)
}

/// Per-class data a classifier is fitted from.
#[derive(Debug, Clone)]
pub struct ClassData {
    pub label: String,
    pub rows: DMatrix<f64>,
}

/// How class priors are chosen at fit time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorMode {
    /// Sample proportions of the training classes.
    SampleProportions,
    /// Equal priors 1/J.
    Equal,
}

/// Knobs shared by both classifier fits.
#[derive(Debug, Clone)]
pub struct TrainOptions {
    pub grid: PGrid,
    pub trim: TrimSpec,
    pub prior_mode: PriorMode,
    pub subset_tries: usize,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            grid: PGrid::default(),
            trim: TrimSpec::default(),
            prior_mode: PriorMode::SampleProportions,
            subset_tries: DEFAULT_SUBSET_TRIES,
        }
    }
}

/// Fit summary printed by front ends.
#[derive(Debug, Clone)]
pub struct FitDiagnostics {
    pub classes: Vec<ClassDiagnostics>,
    pub thresholds: Vec<ThresholdDiagnostics>,
}

#[derive(Debug, Clone)]
pub struct ClassDiagnostics {
    pub label: String,
    pub n: usize,
    pub prior: f64,
    pub p_hat: f64,
    pub tr_ratio: f64,
    pub tr_tries: usize,
    pub bandwidth: f64,
}

#[derive(Debug, Clone)]
pub struct ThresholdDiagnostics {
    pub labels: (String, String),
    pub k: f64,
    pub cv_error: f64,
}

/// One class's data with its fitted location and transform, as consumed by
/// the common-exponent search.
#[derive(Debug, Clone, Copy)]
pub struct ClassGeometry<'a> {
    pub data: &'a DMatrix<f64>,
    pub location: &'a DVector<f64>,
    pub transform: &'a DMatrix<f64>,
}

/// Chooses one exponent for all classes by maximizing the sum of per-class
/// trimmed log-likelihoods over the grid; ties break toward the smaller
/// exponent. With a single class this reduces exactly to [`estimate_p`].
pub fn fit_common_p(
    classes: &[ClassGeometry<'_>],
    grid: &PGrid,
    trim: &TrimSpec,
) -> Result<PEstimate> {
    if classes.is_empty() {
        return Err(Error::Config("no classes given".into()));
    }
    let scores: Vec<(f64, f64)> = grid
        .values()
        .par_iter()
        .map(|&p| {
            let mut total = 0.0;
            for geom in classes {
                let model = LpModel::new(p, geom.location.clone(), geom.transform.clone())?;
                total += trimmed_loglik(geom.data, &model, trim)?.value;
            }
            Ok((p, total))
        })
        .collect::<Result<_>>()?;
    let mut best = scores[0];
    for &(p, s) in &scores[1..] {
        if s > best.1 {
            best = (p, s);
        }
    }
    Ok(PEstimate {
        p_hat: best.0,
        scores,
    })
}

struct FittedGeometry {
    location: DVector<f64>,
    transform: DMatrix<f64>,
    tr_ratio: f64,
    tr_tries: usize,
}

fn fit_geometries<R: Rng + ?Sized>(
    classes: &[ClassData],
    options: &TrainOptions,
    rng: &mut R,
) -> Result<Vec<FittedGeometry>> {
    if classes.len() < 2 {
        return Err(Error::Config("need at least two classes".into()));
    }
    classes
        .iter()
        .map(|class| {
            let est = moment_estimates(&class.rows)?;
            let tr = tr_sqrt(&class.rows, &est, rng, options.subset_tries)?;
            Ok(FittedGeometry {
                location: est.into_mean(),
                transform: tr.a_hat,
                tr_ratio: tr.ratio,
                tr_tries: tr.tries_used,
            })
        })
        .collect()
}

fn class_priors(mode: PriorMode, classes: &[ClassData]) -> Vec<f64> {
    match mode {
        PriorMode::Equal => vec![1.0 / classes.len() as f64; classes.len()],
        PriorMode::SampleProportions => {
            let total: usize = classes.iter().map(|c| c.rows.nrows()).sum();
            classes
                .iter()
                .map(|c| c.rows.nrows() as f64 / total as f64)
                .collect()
        }
    }
}

fn finish_class(
    class: &ClassData,
    geom: &FittedGeometry,
    p: f64,
    prior: f64,
) -> Result<(TrainedClass, ClassDiagnostics)> {
    let model = LpModel::new(p, geom.location.clone(), geom.transform.clone())?;
    let depths = depth_sample(&class.rows, &model)?;
    let raw: Vec<f64> = depths.iter().map(|d| d.get()).collect();
    let kde = DepthKde::fit(&raw)?;
    let diag = ClassDiagnostics {
        label: class.label.clone(),
        n: class.rows.nrows(),
        prior,
        p_hat: p,
        tr_ratio: geom.tr_ratio,
        tr_tries: geom.tr_tries,
        bandwidth: kde.bandwidth(),
    };
    let trained = TrainedClass::new(class.label.clone(), model, kde, prior, class.rows.nrows())?;
    Ok((trained, diag))
}
