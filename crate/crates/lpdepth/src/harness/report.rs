//! Report assembly: CSV (one row per classifier and dataset) plus a
//! human-readable text table. Output is deterministic byte for byte given
//! the same inputs.

use std::collections::BTreeMap;

use super::metrics::efficiency;

/// One classifier's line for one dataset or simulated problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub dataset: String,
    pub classifier: String,
    pub mean_rate: f64,
    pub se: f64,
    pub bayes_risk: Option<f64>,
    pub regret_ratio: Option<f64>,
    pub efficiency: f64,
    pub skipped_reps: usize,
}

/// A finished evaluation report: header metadata plus rows.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub header: Vec<(String, String)>,
    pub rows: Vec<ReportRow>,
}

impl EvalReport {
    /// Fills the efficiency column per dataset from the mean rates; the best
    /// classifier(s) of each dataset get exactly 1.
    pub fn with_efficiencies(mut self) -> Self {
        let mut groups: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for row in &self.rows {
            groups
                .entry(row.dataset.clone())
                .or_default()
                .insert(row.classifier.clone(), row.mean_rate);
        }
        let effs: BTreeMap<String, BTreeMap<String, f64>> = groups
            .into_iter()
            .map(|(ds, rates)| (ds.clone(), efficiency(&rates)))
            .collect();
        for row in &mut self.rows {
            row.efficiency = effs[&row.dataset][&row.classifier];
        }
        self
    }

    /// CSV rendering: `#`-prefixed metadata lines, a header row, then one
    /// row per classifier and dataset. Absent values render as empty fields.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.header {
            out.push_str(&format!("# {key}: {value}\n"));
        }
        out.push_str("dataset,classifier,mean_rate,se,bayes_risk,regret_ratio,efficiency,skipped_reps\n");
        for row in &self.rows {
            let bayes = row
                .bayes_risk
                .map(|v| v.to_string())
                .unwrap_or_default();
            let regret = row
                .regret_ratio
                .map(|v| v.to_string())
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                row.dataset,
                row.classifier,
                row.mean_rate,
                row.se,
                bayes,
                regret,
                row.efficiency,
                row.skipped_reps
            ));
        }
        out
    }

    /// Fixed-width text table for terminals.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.header {
            out.push_str(&format!("{key}: {value}\n"));
        }
        out.push_str(&format!(
            "{:<24} {:<12} {:>10} {:>10} {:>10} {:>8} {:>10} {:>8}\n",
            "dataset", "classifier", "rate", "se", "bayes", "regret", "efficiency", "skipped"
        ));
        for row in &self.rows {
            let bayes = row
                .bayes_risk
                .map(|v| format!("{v:.4}"))
                .unwrap_or_else(|| "-".into());
            let regret = row
                .regret_ratio
                .map(|v| format!("{v:.3}"))
                .unwrap_or_else(|| "-".into());
            out.push_str(&format!(
                "{:<24} {:<12} {:>10.4} {:>10.4} {:>10} {:>8} {:>10.3} {:>8}\n",
                row.dataset,
                row.classifier,
                row.mean_rate,
                row.se,
                bayes,
                regret,
                row.efficiency,
                row.skipped_reps
            ));
        }
        out
    }
}
