use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::conditioning::ConditioningResult;
use super::metrics::{MetricsRow, TransitionDistribution};

/// Metric rows for each melody source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub ground_truth: MetricsRow,
    /// Generator output snapped to legal values, without the scale step.
    pub model_raw: MetricsRow,
    pub model_tuned: MetricsRow,
    pub baseline: MetricsRow,
}

impl MetricsTable {
    fn columns(&self) -> [(&'static str, &MetricsRow); 4] {
        [
            ("ground_truth", &self.ground_truth),
            ("model_raw", &self.model_raw),
            ("model_tuned", &self.model_tuned),
            ("baseline", &self.baseline),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub sequences: usize,
    pub metrics: MetricsTable,
    /// MMD² between tuned model output and the ground truth.
    pub mmd2_model: f64,
    pub mmd2_baseline: f64,
    pub transitions: BTreeMap<String, TransitionDistribution>,
    pub conditioning: BTreeMap<String, ConditioningResult>,
    pub baseline_seed: u64,
}

impl EvalReport {
    /// One row per metric, one column per source.
    pub fn table_csv(&self) -> String {
        let cols = self.metrics.columns();
        let mut out = String::from("metric");
        for (name, _) in &cols {
            write!(out, ",{name}").unwrap();
        }
        out.push('\n');
        for (i, metric) in MetricsRow::COLUMNS.iter().enumerate() {
            out.push_str(metric);
            for (_, row) in &cols {
                write!(out, ",{}", row.values()[i]).unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Long format: source, semitone delta, probability.
    pub fn transitions_csv(&self) -> String {
        let deltas: BTreeSet<i32> = self
            .transitions
            .values()
            .flat_map(|d| d.probabilities.keys().copied())
            .collect();
        let mut out = String::from("delta");
        for name in self.transitions.keys() {
            write!(out, ",{name}").unwrap();
        }
        out.push('\n');
        for delta in deltas {
            write!(out, "{delta}").unwrap();
            for d in self.transitions.values() {
                write!(out, ",{}", d.probabilities.get(&delta).copied().unwrap_or(0.0)).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn conditioning_csv(&self) -> String {
        let mut out = String::from("attribute,kind,mean,median,q1,q3,min,max\n");
        for (attr, r) in &self.conditioning {
            writeln!(out, "{attr},d,{0},{0},{0},{0},{0},{0}", r.d).unwrap();
            for (kind, s) in [("rs", &r.rs), ("rn", &r.rn), ("rns", &r.rns)] {
                writeln!(
                    out,
                    "{attr},{kind},{},{},{},{},{},{}",
                    s.mean, s.median, s.q1, s.q3, s.min, s.max
                )
                .unwrap();
            }
        }
        out
    }
}
