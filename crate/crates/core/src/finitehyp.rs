//! Exact enumeration over a finite input space and a finite hypothesis table.
//!
//! For a training set `S` of `n` i.i.d. draws, `H(S)` is the set of
//! hypotheses with zero training error and `H_eps(S)` the subset whose true
//! error is at least `eps`. Membership in `H(S)` depends only on the set of
//! distinct inputs in `S` (its support), which is represented as a bit mask.
//!
//! [`exact_report`] averages `|H_eps(S)|`, `|H(S)|` and their ratio over the
//! distribution of training sets in one of two independent ways:
//!
//! * [`EnumerationMode::Exhaustive`] walks every ordered `n`-tuple of inputs
//!   and multiplies the input probabilities;
//! * [`EnumerationMode::Support`] walks every subset `T` of inputs and gets
//!   `Pr(support = T) = sum_{U in T} (-1)^{|T|-|U|} p(U)^n` from a Möbius
//!   transform over the subset lattice.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, NeumaierSum, Result};

/// Largest number of tuples the exhaustive mode will visit.
pub const EXHAUSTIVE_LIMIT: f64 = 1e7;
/// Largest number of subsets the support mode will visit.
pub const SUPPORT_LIMIT: f64 = 1e6;

const PROBABILITY_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteProblem {
    probabilities: Vec<f64>,
    labels: Vec<u32>,
    predictions: Vec<Vec<u32>>,
    class_count: u32,
    /// Bit `i` of `correct[h]` is set when hypothesis `h` is right on input `i`.
    correct: Vec<u64>,
    errors: Vec<f64>,
}

impl FiniteProblem {
    /// `predictions[h][i]` is the class hypothesis `h` assigns to input `i`.
    pub fn new(
        probabilities: Vec<f64>,
        labels: Vec<u32>,
        predictions: Vec<Vec<u32>>,
        class_count: u32,
    ) -> Result<Self> {
        let m = probabilities.len();
        if m == 0 || m > 64 {
            return Err(Error::invalid("inputs", "need between 1 and 64 inputs"));
        }
        if labels.len() != m {
            return Err(Error::invalid("labels", "need one label per input"));
        }
        if class_count < 2 {
            return Err(Error::invalid("class_count", "need at least two classes"));
        }
        if probabilities.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
            return Err(Error::invalid("probabilities", "every probability must lie in (0, 1]"));
        }
        let total = probabilities.iter().copied().sum::<NeumaierSum>().value();
        if (total - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
            return Err(Error::invalid("probabilities", "must sum to 1"));
        }
        if labels.iter().any(|&y| y >= class_count) {
            return Err(Error::invalid("labels", "label outside 0..class_count"));
        }
        if predictions.is_empty() {
            return Err(Error::invalid("hypotheses", "need at least one hypothesis"));
        }
        if predictions.iter().any(|row| row.len() != m) {
            return Err(Error::invalid("hypotheses", "every row needs one prediction per input"));
        }
        if predictions.iter().flatten().any(|&c| c >= class_count) {
            return Err(Error::invalid("hypotheses", "prediction outside 0..class_count"));
        }

        let correct: Vec<u64> = predictions
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&labels)
                    .enumerate()
                    .filter(|(_, (h, y))| h == y)
                    .fold(0u64, |mask, (i, _)| mask | (1 << i))
            })
            .collect();
        let errors = predictions
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&labels)
                    .zip(&probabilities)
                    .filter(|((h, y), _)| h != y)
                    .map(|(_, &p)| p)
                    .sum::<NeumaierSum>()
                    .value()
                    .clamp(0.0, 1.0)
            })
            .collect();
        Ok(FiniteProblem {
            probabilities,
            labels,
            predictions,
            class_count,
            correct,
            errors,
        })
    }

    pub fn input_count(&self) -> usize {
        self.probabilities.len()
    }

    pub fn hypothesis_count(&self) -> usize {
        self.predictions.len()
    }

    pub fn class_count(&self) -> u32 {
        self.class_count
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn predictions(&self) -> &[Vec<u32>] {
        &self.predictions
    }

    /// True error of every hypothesis, in row order.
    pub fn errors(&self) -> &[f64] {
        &self.errors
    }

    pub fn exact_error(&self, h: usize) -> Result<f64> {
        self.errors.get(h).copied().ok_or(Error::IndexOutOfRange {
            index: h,
            len: self.errors.len(),
        })
    }

    /// Smallest true error in the table.
    pub fn min_error(&self) -> f64 {
        self.errors.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn support_mask(&self, support: &[usize]) -> Result<u64> {
        if support.is_empty() {
            return Err(Error::EmptySupport);
        }
        support.iter().try_fold(0u64, |mask, &i| {
            if i >= self.input_count() {
                Err(Error::IndexOutOfRange {
                    index: i,
                    len: self.input_count(),
                })
            } else {
                Ok(mask | (1 << i))
            }
        })
    }

    /// Rows with zero training error on any training set with this support.
    pub fn global_minima(&self, support: &[usize]) -> Result<Vec<usize>> {
        let mask = self.support_mask(support)?;
        Ok(self
            .correct
            .iter()
            .enumerate()
            .filter(|(_, &c)| mask & !c == 0)
            .map(|(h, _)| h)
            .collect())
    }

    /// `sum_{h : E(h) >= threshold} (1 - E(h))^n`, the mean number of such
    /// hypotheses that fit a random training set of size `n` perfectly.
    pub fn expected_fitting_count(&self, n: u32, threshold: f64) -> f64 {
        self.errors
            .iter()
            .filter(|&&e| e >= threshold)
            .map(|&e| (1.0 - e).powi(n as i32))
            .sum::<NeumaierSum>()
            .value()
    }

    /// `(|H(S)|, |H_eps(S)|)` for the support `mask`.
    fn counts(&self, mask: u64, epsilon: f64) -> (u32, u32) {
        self.correct
            .iter()
            .zip(&self.errors)
            .filter(|(&c, _)| mask & !c == 0)
            .fold((0, 0), |(all, bad), (_, &e)| (all + 1, bad + u32::from(e >= epsilon)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnumerationMode {
    Exhaustive,
    Support,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions {
    pub mode: EnumerationMode,
    /// Average ratios over training sets with non-empty `H(S)` only instead
    /// of failing with [`Error::EmptyMinimaSet`].
    pub condition_on_nonempty: bool,
}

impl ReportOptions {
    pub fn new(mode: EnumerationMode) -> Self {
        ReportOptions {
            mode,
            condition_on_nonempty: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnumerationReport {
    pub n: u32,
    pub epsilon: f64,
    pub mode: EnumerationMode,
    /// `<|H_eps(S)| / |H(S)|>`.
    pub lhs_mean_ratio: f64,
    /// `<|H_eps(S)|> / <|H(S)|>`.
    pub rhs_ratio_of_means: f64,
    /// `cov(|H_eps(S)| / |H(S)|, |H(S)|)`.
    pub covariance_term: f64,
    /// `<|H_eps(S)|>` by enumeration.
    pub mean_bad_count: f64,
    /// `sum_{h in H_eps} (1 - E(h))^n`.
    pub formula_bad_count: f64,
    /// `<|H(S)|>` by enumeration.
    pub mean_minima_count: f64,
    /// `sum_{h in H} (1 - E(h))^n`.
    pub formula_minima_count: f64,
    /// Probability that `H(S)` is non-empty. Ratio averages are conditioned
    /// on this event; counts are not.
    pub conditioning_probability: f64,
}

impl EnumerationReport {
    /// `rhs - lhs - cov / <|H(S)|>`, zero up to rounding.
    pub fn covariance_identity_residual(&self) -> f64 {
        let conditional_minima = self.mean_minima_count / self.conditioning_probability;
        self.rhs_ratio_of_means - self.lhs_mean_ratio - self.covariance_term / conditional_minima
    }
}

/// Probability-weighted visit of every reachable support. The callback may
/// be invoked several times for the same mask.
trait SupportDistribution {
    fn visit(&self, f: &mut dyn FnMut(f64, u64));
}

struct Tuples<'a> {
    probabilities: &'a [f64],
    n: usize,
}

impl SupportDistribution for Tuples<'_> {
    fn visit(&self, f: &mut dyn FnMut(f64, u64)) {
        let m = self.probabilities.len();
        let n = self.n;
        // prefix[k] holds the probability and mask of the first k draws.
        let mut digits = vec![0usize; n];
        let mut prefix_p = vec![1.0f64; n + 1];
        let mut prefix_mask = vec![0u64; n + 1];
        let mut from = 0;
        loop {
            for k in from..n {
                prefix_p[k + 1] = prefix_p[k] * self.probabilities[digits[k]];
                prefix_mask[k + 1] = prefix_mask[k] | (1 << digits[k]);
            }
            f(prefix_p[n], prefix_mask[n]);
            // Odometer increment, last digit fastest.
            let mut k = n;
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                digits[k] += 1;
                if digits[k] < m {
                    break;
                }
                digits[k] = 0;
            }
            from = k;
        }
    }
}

struct Supports {
    /// `(Pr(support = mask), mask)` for every reachable mask.
    table: Vec<(f64, u64)>,
}

impl Supports {
    fn new(probabilities: &[f64], n: u32) -> Self {
        let m = probabilities.len();
        let size = 1usize << m;
        // p(U)^n for every subset U, then Möbius inversion over subsets.
        let mut mass = vec![0.0f64; size];
        for mask in 1..size {
            let low = mask.trailing_zeros() as usize;
            mass[mask] = mass[mask & (mask - 1)] + probabilities[low];
        }
        let mut prob: Vec<f64> = mass.iter().map(|&p| p.powi(n as i32)).collect();
        for bit in 0..m {
            let b = 1usize << bit;
            for mask in 0..size {
                if mask & b != 0 {
                    prob[mask] -= prob[mask ^ b];
                }
            }
        }
        let table = (0..size)
            .filter(|&mask| is_reachable(mask as u64, n))
            .map(|mask| (prob[mask], mask as u64))
            .collect();
        Supports { table }
    }
}

impl SupportDistribution for Supports {
    fn visit(&self, f: &mut dyn FnMut(f64, u64)) {
        for &(p, mask) in &self.table {
            f(p, mask);
        }
    }
}

/// A support of `k` distinct inputs arises from `n` draws iff `1 <= k <= n`
/// or `k = n = 0`.
fn is_reachable(mask: u64, n: u32) -> bool {
    let k = mask.count_ones();
    if n == 0 {
        k == 0
    } else {
        k >= 1 && k <= n
    }
}

pub fn exact_report(
    problem: &FiniteProblem,
    n: u32,
    epsilon: f64,
    options: ReportOptions,
) -> Result<EnumerationReport> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::invalid("epsilon", "must lie in [0, 1]"));
    }
    let m = problem.input_count();
    match options.mode {
        EnumerationMode::Exhaustive => {
            let required = (m as f64).powi(n as i32);
            if required > EXHAUSTIVE_LIMIT {
                return Err(Error::BudgetExceeded {
                    required,
                    limit: EXHAUSTIVE_LIMIT,
                });
            }
            let dist = Tuples {
                probabilities: &problem.probabilities,
                n: n as usize,
            };
            moments(problem, n, epsilon, options, &dist)
        }
        EnumerationMode::Support => {
            let required = (2.0f64).powi(m as i32);
            if required > SUPPORT_LIMIT {
                return Err(Error::BudgetExceeded {
                    required,
                    limit: SUPPORT_LIMIT,
                });
            }
            let dist = Supports::new(&problem.probabilities, n);
            moments(problem, n, epsilon, options, &dist)
        }
    }
}

fn moments(
    problem: &FiniteProblem,
    n: u32,
    epsilon: f64,
    options: ReportOptions,
    dist: &dyn SupportDistribution,
) -> Result<EnumerationReport> {
    let mut nonempty = NeumaierSum::new();
    let mut bad = NeumaierSum::new();
    let mut minima = NeumaierSum::new();
    let mut ratio = NeumaierSum::new();
    let mut empty_reached = false;
    dist.visit(&mut |p, mask| {
        let (all, eps) = problem.counts(mask, epsilon);
        if all == 0 {
            empty_reached = true;
            return;
        }
        nonempty += p;
        bad += p * f64::from(eps);
        minima += p * f64::from(all);
        ratio += p * f64::from(eps) / f64::from(all);
    });
    if empty_reached && !options.condition_on_nonempty {
        return Err(Error::EmptyMinimaSet);
    }
    let p_nonempty = nonempty.value();
    if !(p_nonempty > 0.0) {
        return Err(Error::EmptyMinimaSet);
    }
    let mean_bad = bad.value();
    let mean_minima = minima.value();
    let lhs = ratio.value() / p_nonempty;
    let cond_minima = mean_minima / p_nonempty;

    // Second pass: centered covariance, conditioned on a non-empty H(S).
    let mut cov = NeumaierSum::new();
    dist.visit(&mut |p, mask| {
        let (all, eps) = problem.counts(mask, epsilon);
        if all > 0 {
            let f = f64::from(eps) / f64::from(all);
            cov += p * (f - lhs) * (f64::from(all) - cond_minima);
        }
    });

    Ok(EnumerationReport {
        n,
        epsilon,
        mode: options.mode,
        lhs_mean_ratio: lhs.clamp(0.0, 1.0),
        rhs_ratio_of_means: mean_bad / mean_minima,
        covariance_term: cov.value() / p_nonempty,
        mean_bad_count: mean_bad,
        formula_bad_count: problem.expected_fitting_count(n, epsilon),
        mean_minima_count: mean_minima,
        formula_minima_count: problem.expected_fitting_count(n, f64::NEG_INFINITY),
        conditioning_probability: p_nonempty,
    })
}
