//! Misclassification metrics: rates, standard errors, regret ratios and
//! efficiencies.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::stats;

/// Error fraction and its binomial standard error sqrt(rate (1-rate) / n),
/// the convention for a fixed test set.
pub fn compute_metrics(predictions: &[usize], truth: &[usize]) -> Result<(f64, f64)> {
    if predictions.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: predictions.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let n = predictions.len() as f64;
    let errors = predictions
        .iter()
        .zip(truth)
        .filter(|(p, t)| p != t)
        .count() as f64;
    let rate = errors / n;
    let se = (rate * (1.0 - rate) / n).sqrt();
    Ok((rate, se))
}

/// Standard error of the mean rate over replications: sd / sqrt(reps).
pub fn replication_se(rates: &[f64]) -> f64 {
    if rates.len() < 2 {
        return 0.0;
    }
    stats::sample_sd(rates) / (rates.len() as f64).sqrt()
}

/// Regret ratio (rate_t - bayes) / (rate_reference - bayes); undefined when
/// the reference does not exceed the Bayes risk.
pub fn regret_ratio(rate_t: f64, rate_reference: f64, bayes: f64) -> Result<f64> {
    if !(rate_reference > bayes) {
        return Err(Error::UndefinedRegret {
            reference: rate_reference,
            bayes,
        });
    }
    Ok((rate_t - bayes) / (rate_reference - bayes))
}

/// Efficiency e_t = min_rate / rate_t; the best classifier(s) get exactly 1.
/// When the best rate is zero, it gets 1 and every other classifier 0.
pub fn efficiency(rates: &BTreeMap<String, f64>) -> BTreeMap<String, f64> {
    let best = rates.values().cloned().fold(f64::INFINITY, f64::min);
    rates
        .iter()
        .map(|(name, &rate)| {
            let e = if rate == best {
                1.0
            } else if best == 0.0 {
                0.0
            } else {
                best / rate
            };
            (name.clone(), e)
        })
        .collect()
}
