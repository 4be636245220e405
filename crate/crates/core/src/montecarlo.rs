//! Seeded train/test trials on the disk problem and their summaries.
//!
//! Trial `(n, i)` draws `n` training points, trains a perceptron to zero
//! training error and measures the test error on a fresh sample. All of its
//! randomness comes from [`seed::trial_seed`], so trials can run in any
//! order or on any number of threads and still produce identical records.

use alloc::vec::Vec;

use crate::geometry::{DiskProblem, FeatureMap};
use crate::perceptron::{self, TrainConfig, DEFAULT_MAX_UPDATES};
use crate::seed::{self, Stream};
use crate::{Error, NeumaierSum, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_values: Vec<u64>,
    pub trials_per_n: u64,
    pub test_count: usize,
    pub feature_map: FeatureMap,
    pub master_seed: u64,
    pub epsilons: Vec<f64>,
    pub quantiles: Vec<f64>,
    pub max_updates: u64,
}

impl ExperimentConfig {
    /// Defaults: 10^5 test points, quartiles and median,
    /// exceedance thresholds 0.05 and 0.1.
    pub fn new(n_values: Vec<u64>, trials_per_n: u64, feature_map: FeatureMap, master_seed: u64) -> Self {
        ExperimentConfig {
            n_values,
            trials_per_n,
            test_count: 100_000,
            feature_map,
            master_seed,
            epsilons: alloc::vec![0.05, 0.1],
            quantiles: alloc::vec![0.25, 0.5, 0.75],
            max_updates: DEFAULT_MAX_UPDATES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() || self.n_values.iter().any(|&n| n < 1) {
            return Err(Error::invalid("n_values", "need at least one n and every n >= 1"));
        }
        if self.trials_per_n < 1 {
            return Err(Error::invalid("trials_per_n", "must be at least 1"));
        }
        if self.test_count < 1 {
            return Err(Error::InvalidCount(self.test_count));
        }
        if self.max_updates < 1 {
            return Err(Error::invalid("max_updates", "must be at least 1"));
        }
        validate_epsilons(&self.epsilons)?;
        validate_quantiles(&self.quantiles)
    }

    /// Every `(n, trial_index)` key in output order.
    pub fn trial_keys(&self) -> Vec<(u64, u64)> {
        let mut keys: Vec<(u64, u64)> = self
            .n_values
            .iter()
            .flat_map(|&n| (0..self.trials_per_n).map(move |i| (n, i)))
            .collect();
        keys.sort_unstable();
        keys.dedup();
        keys
    }
}

fn validate_epsilons(epsilons: &[f64]) -> Result<()> {
    if epsilons.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
        return Err(Error::invalid("epsilons", "must lie in (0, 1)"));
    }
    if epsilons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("epsilons", "must be strictly increasing"));
    }
    Ok(())
}

fn validate_quantiles(quantiles: &[f64]) -> Result<()> {
    if quantiles.iter().any(|&q| !(q > 0.0 && q < 1.0)) {
        return Err(Error::invalid("quantiles", "must lie in (0, 1)"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrialStatus {
    Ok,
    UpdateBudgetExceeded,
    Failed,
}

impl TrialStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TrialStatus::Ok => "ok",
            TrialStatus::UpdateBudgetExceeded => "update_budget_exceeded",
            TrialStatus::Failed => "failed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ok" => Some(TrialStatus::Ok),
            "update_budget_exceeded" => Some(TrialStatus::UpdateBudgetExceeded),
            "failed" => Some(TrialStatus::Failed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRecord {
    pub n: u64,
    pub trial_index: u64,
    pub trial_seed: u64,
    /// `None` unless `status` is [`TrialStatus::Ok`].
    pub test_error: Option<f64>,
    pub updates: u64,
    pub status: TrialStatus,
}

pub fn run_trial(config: &ExperimentConfig, problem: &DiskProblem, n: u64, trial_index: u64) -> TrialRecord {
    let trial_seed = seed::trial_seed(config.master_seed, n, trial_index);
    let failed = |status, updates| TrialRecord {
        n,
        trial_index,
        trial_seed,
        test_error: None,
        updates,
        status,
    };

    let points = problem.sample_points(n as usize, seed::stream_seed(trial_seed, Stream::Training));
    let train_config = TrainConfig {
        max_updates: config.max_updates,
        seed: seed::stream_seed(trial_seed, Stream::Initialization),
        feature_map: config.feature_map,
    };
    let trained = match perceptron::train(&points, &train_config) {
        Ok(t) => t,
        Err(Error::UpdateBudgetExceeded { max_updates }) => {
            return failed(TrialStatus::UpdateBudgetExceeded, max_updates)
        }
        Err(_) => return failed(TrialStatus::Failed, 0),
    };
    let test_seed = seed::stream_seed(trial_seed, Stream::Test);
    match problem.estimate_true_error(&trained.hypothesis, config.test_count, test_seed) {
        Ok(e) => TrialRecord {
            n,
            trial_index,
            trial_seed,
            test_error: Some(e),
            updates: trained.updates,
            status: TrialStatus::Ok,
        },
        Err(_) => failed(TrialStatus::Failed, trained.updates),
    }
}

/// Runs every trial on the calling thread, sorted by `(n, trial_index)`.
pub fn run_experiment(config: &ExperimentConfig, problem: &DiskProblem) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    Ok(config
        .trial_keys()
        .into_iter()
        .map(|(n, i)| run_trial(config, problem, n, i))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub n: u64,
    /// Trials that reached zero training error.
    pub trials: usize,
    /// Trials that did not, excluded from every statistic below.
    pub failed: usize,
    pub mean: f64,
    /// Sample standard deviation (zero for a single trial).
    pub std: f64,
    /// `(q, value)` pairs in the order requested.
    pub quantile_values: Vec<(f64, f64)>,
    /// `(epsilon, fraction of trials with test_error >= epsilon)`.
    pub exceed_fractions: Vec<(f64, f64)>,
}

impl SummaryRow {
    pub fn exceed_fraction(&self, epsilon: f64) -> Option<f64> {
        self.exceed_fractions
            .iter()
            .find(|(e, _)| *e == epsilon)
            .map(|&(_, f)| f)
    }

    pub fn quantile(&self, q: f64) -> Option<f64> {
        self.quantile_values.iter().find(|(p, _)| *p == q).map(|&(_, v)| v)
    }
}

/// Linear interpolation between order statistics at `h = (N - 1) q + 1`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Fraction of `errors` at or above `epsilon`.
pub fn exceed_fraction(errors: &[f64], epsilon: f64) -> f64 {
    errors.iter().filter(|&&e| e >= epsilon).count() as f64 / errors.len() as f64
}

pub fn summarize(records: &[TrialRecord], epsilons: &[f64], quantiles: &[f64]) -> Result<Vec<SummaryRow>> {
    validate_epsilons(epsilons)?;
    validate_quantiles(quantiles)?;
    let mut ns: Vec<u64> = records.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();

    ns.into_iter()
        .map(|n| {
            let group = records.iter().filter(|r| r.n == n);
            let mut errors: Vec<f64> = group.clone().filter_map(|r| r.test_error).collect();
            let failed = group.count() - errors.len();
            if errors.is_empty() {
                return Err(Error::NoRecords { n });
            }
            errors.sort_unstable_by(f64::total_cmp);
            let count = errors.len() as f64;
            let mean = errors.iter().copied().sum::<NeumaierSum>().value() / count;
            let std = if errors.len() > 1 {
                let ss = errors
                    .iter()
                    .map(|e| (e - mean) * (e - mean))
                    .sum::<NeumaierSum>()
                    .value();
                (ss / (count - 1.0)).sqrt()
            } else {
                0.0
            };
            Ok(SummaryRow {
                n,
                trials: errors.len(),
                failed,
                mean,
                std,
                quantile_values: quantiles.iter().map(|&q| (q, quantile_sorted(&errors, q))).collect(),
                exceed_fractions: epsilons.iter().map(|&e| (e, exceed_fraction(&errors, e))).collect(),
            })
        })
        .collect()
}

/// Least-squares slope of `ln(exceed fraction at epsilon)` against `n`,
/// restricted to rows whose fraction lies in `[lo, hi]`.
///
/// `None` when fewer than two rows qualify.
pub fn exceedance_log_slope(rows: &[SummaryRow], epsilon: f64, lo: f64, hi: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.exceed_fraction(epsilon).map(|f| (r.n as f64, f)))
        .filter(|&(_, f)| f >= lo && f <= hi && f > 0.0)
        .map(|(n, f)| (n, f.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}
