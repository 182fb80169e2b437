//! JSON views of core results.

use distortion_core::bounds::InequalityCheck;
use distortion_core::election::{DistortionReport, MonteCarloEstimate, PairOutcome};
use distortion_core::line::TraceStep;
use distortion_core::search::SearchResult;
use serde::Serialize;

/// Pair tables are left out above this many points unless asked for.
pub const PAIR_LIMIT: usize = 64;

/// `None` encodes an infinite value, which JSON cannot hold.
fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

#[derive(Debug, Serialize)]
pub struct PairJson {
    pub i: usize,
    pub j: usize,
    pub winner: usize,
    pub opt: usize,
    pub ratio: Option<f64>,
}

impl From<&PairOutcome> for PairJson {
    fn from(o: &PairOutcome) -> Self {
        Self {
            i: o.i,
            j: o.j,
            winner: o.winner,
            opt: o.opt,
            ratio: finite(o.ratio),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct MonteCarloJson {
    pub mean: Option<f64>,
    pub std_error: Option<f64>,
    pub samples: u64,
}

#[derive(Debug, Serialize)]
pub struct ReportJson {
    pub n: usize,
    pub costs: Vec<f64>,
    pub expected: Option<f64>,
    pub max_pairwise: Option<f64>,
    pub infinite: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<PairJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<MonteCarloJson>,
}

impl ReportJson {
    pub fn new(report: &DistortionReport, force_pairs: bool) -> Self {
        let n = report.costs.len();
        Self {
            n,
            costs: report.costs.clone(),
            expected: finite(report.expected),
            max_pairwise: finite(report.max_pairwise),
            infinite: report.is_infinite(),
            pairs: (force_pairs || n <= PAIR_LIMIT)
                .then(|| report.pairs.iter().map(PairJson::from).collect()),
            monte_carlo: None,
        }
    }

    pub fn with_monte_carlo(mut self, mc: &MonteCarloEstimate) -> Self {
        self.monte_carlo = Some(MonteCarloJson {
            mean: finite(mc.mean),
            std_error: finite(mc.std_error),
            samples: mc.samples,
        });
        self
    }
}

#[derive(Debug, Serialize)]
pub struct TraceJson {
    pub lemma: &'static str,
    pub support: usize,
    pub distortion: f64,
}

impl From<&TraceStep> for TraceJson {
    fn from(s: &TraceStep) -> Self {
        Self {
            lemma: s.kind.name(),
            support: s.support,
            distortion: s.distortion,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CheckJson {
    pub name: String,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub slack: Option<f64>,
    pub pass: bool,
    pub applicable: bool,
}

impl From<&InequalityCheck> for CheckJson {
    fn from(c: &InequalityCheck) -> Self {
        Self {
            name: c.name.clone(),
            lhs: finite(c.lhs),
            rhs: finite(c.rhs),
            slack: finite(c.slack),
            pass: c.pass,
            applicable: c.applicable,
        }
    }
}

/// Summary printed by `search`, with the proven bound and the conjectured value side by side.
#[derive(Debug, Serialize)]
pub struct SearchJson {
    pub space: &'static str,
    pub n: usize,
    pub seed: u64,
    pub restarts: usize,
    pub steps_per_restart: usize,
    pub evaluations: u64,
    pub best_value: f64,
    pub best_restart: usize,
    pub proven_bound: f64,
    pub gap_to_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conjecture: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_to_conjecture: Option<f64>,
    pub per_restart_bests: Vec<f64>,
}

impl SearchJson {
    pub fn new(
        result: &SearchResult,
        n: usize,
        seed: u64,
        steps_per_restart: usize,
    ) -> Self {
        let bound = result.space.proven_bound();
        let conjecture = (result.space == distortion_core::search::SearchSpace::MetricPqEqual)
            .then_some(distortion_core::METRIC_CONJECTURE);
        Self {
            space: result.space.name(),
            n,
            seed,
            restarts: result.per_restart_bests.len(),
            steps_per_restart,
            evaluations: result.evaluations,
            best_value: result.best_value,
            best_restart: result.best_restart,
            proven_bound: bound,
            gap_to_bound: bound - result.best_value,
            conjecture,
            gap_to_conjecture: conjecture.map(|c| c - result.best_value),
            per_restart_bests: result.per_restart_bests.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RestartJson {
    pub restart: usize,
    pub value: f64,
    pub evaluations: u64,
    pub accepted: u64,
}

pub fn to_line<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("report types always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use distortion_core::election::{assemble_report, PairOutcome};

    #[test]
    fn infinite_values_become_null() {
        let pair = PairOutcome {
            i: 0,
            j: 1,
            winner: 1,
            opt: 0,
            ratio: f64::INFINITY,
        };
        let report = assemble_report(&[0.5, 0.5], vec![0.0, 1.0], vec![pair]);
        let text = to_line(&ReportJson::new(&report, false));
        assert!(text.contains(r#""expected":null"#));
        assert!(text.contains(r#""infinite":true"#));
        assert!(text.contains(r#""ratio":null"#));
    }
}
