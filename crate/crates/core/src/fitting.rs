//! Least-squares fit of the learning curve
//! `E(n) = e_min + (e0 - e_min) / (1 + n / eta)`.
//!
//! For fixed `eta` the model is linear in `(e_min, e0)`: with
//! `c = 1 / (1 + n / eta)` it reads `e_min (1 - c) + e0 c`. The inner
//! problem is solved exactly over `0 <= e_min <= e0 <= 1`, leaving a
//! one-dimensional search over `eta`: a log-spaced grid followed by
//! golden-section refinement around the best grid point.

use alloc::vec::Vec;

use crate::docmodel::learning_curve;
use crate::{Error, NeumaierSum, Result};

pub const ETA_GRID_MIN: f64 = 1e-2;
pub const ETA_GRID_MAX: f64 = 1e6;
pub const ETA_GRID_PER_DECADE: u32 = 200;
/// Width of the final golden-section bracket in `ln(eta)`.
const GOLDEN_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub n: f64,
    pub mean_error: f64,
    pub std_error: Option<f64>,
}

impl CurvePoint {
    pub fn new(n: f64, mean_error: f64) -> Self {
        CurvePoint {
            n,
            mean_error,
            std_error: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Weighting {
    Unweighted,
    /// Weights `1 / std^2`.
    InverseVariance,
    /// Some but not all points carried a positive std; weights were dropped.
    MixedStdIgnored,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveFit {
    pub e_min: f64,
    pub eta: f64,
    pub e0: f64,
    pub e0_fixed: bool,
    /// Weighted residual sum of squares.
    pub rss: f64,
    /// `model(n_i) - mean_i`, unweighted, in input order.
    pub residuals: Vec<f64>,
    pub weighting: Weighting,
}

impl CurveFit {
    pub fn model(&self, n: f64) -> f64 {
        learning_curve(n, self.e_min, self.eta, self.e0)
    }
}

/// `(C - 1) / C`, the error of guessing among `C` classes.
pub fn random_choice_error(classes: u32) -> f64 {
    let c = f64::from(classes);
    (c - 1.0) / c
}

/// The search grid for `eta`.
pub fn eta_grid() -> Vec<f64> {
    let decades = (ETA_GRID_MAX / ETA_GRID_MIN).log10().round() as u32;
    (0..=decades * ETA_GRID_PER_DECADE)
        .map(|k| ETA_GRID_MIN * 10f64.powf(f64::from(k) / f64::from(ETA_GRID_PER_DECADE)))
        .collect()
}

struct Problem<'a> {
    points: &'a [CurvePoint],
    weights: Vec<f64>,
    e0_fixed: Option<f64>,
}

/// Best `(e_min, e0)` for one `eta`, with its objective.
#[derive(Debug, Clone, Copy)]
struct Profile {
    e_min: f64,
    e0: f64,
    rss: f64,
}

impl Problem<'_> {
    fn rss(&self, eta: f64, e_min: f64, e0: f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| {
                let r = learning_curve(p.n, e_min, eta, e0) - p.mean_error;
                w * r * r
            })
            .sum::<NeumaierSum>()
            .value()
    }

    /// Minimizes over `t` in `[lo, hi]` for the model `offset(c) + t * slope(c)`.
    fn line_search<O, S>(&self, eta: f64, offset: O, slope: S, lo: f64, hi: f64) -> f64
    where
        O: Fn(f64) -> f64,
        S: Fn(f64) -> f64,
    {
        let mut num = NeumaierSum::new();
        let mut den = NeumaierSum::new();
        for (p, w) in self.points.iter().zip(&self.weights) {
            let c = share(p.n, eta);
            let q = slope(c);
            num += w * q * (p.mean_error - offset(c));
            den += w * q * q;
        }
        if den.value() > 0.0 {
            (num.value() / den.value()).clamp(lo, hi)
        } else {
            lo
        }
    }

    fn profile(&self, eta: f64) -> Profile {
        let candidates: Vec<(f64, f64)> = match self.e0_fixed {
            Some(e0) => {
                let e_min = self.line_search(eta, |c| e0 * c, |c| 1.0 - c, 0.0, e0);
                alloc::vec![(e_min, e0)]
            }
            None => {
                let mut out = Vec::with_capacity(4);
                if let Some((a, b)) = self.unconstrained(eta) {
                    if 0.0 <= a && a <= b && b <= 1.0 {
                        out.push((a, b));
                    }
                }
                if out.is_empty() {
                    // The optimum lies on an edge of 0 <= e_min <= e0 <= 1.
                    let b = self.line_search(eta, |_| 0.0, |c| c, 0.0, 1.0);
                    out.push((0.0, b));
                    let a = self.line_search(eta, |c| c, |c| 1.0 - c, 0.0, 1.0);
                    out.push((a, 1.0));
                    let t = self.line_search(eta, |_| 0.0, |_| 1.0, 0.0, 1.0);
                    out.push((t, t));
                }
                out
            }
        };
        candidates
            .into_iter()
            .map(|(e_min, e0)| Profile {
                e_min,
                e0,
                rss: self.rss(eta, e_min, e0),
            })
            .min_by(|x, y| x.rss.total_cmp(&y.rss))
            .expect("at least one candidate")
    }

    /// Solution of the 2x2 normal equations, if well conditioned.
    fn unconstrained(&self, eta: f64) -> Option<(f64, f64)> {
        let (mut uu, mut uc, mut cc, mut uy, mut cy) = (
            NeumaierSum::new(),
            NeumaierSum::new(),
            NeumaierSum::new(),
            NeumaierSum::new(),
            NeumaierSum::new(),
        );
        for (p, w) in self.points.iter().zip(&self.weights) {
            let c = share(p.n, eta);
            let u = 1.0 - c;
            uu += w * u * u;
            uc += w * u * c;
            cc += w * c * c;
            uy += w * u * p.mean_error;
            cy += w * c * p.mean_error;
        }
        let (uu, uc, cc) = (uu.value(), uc.value(), cc.value());
        let det = uu * cc - uc * uc;
        if !(det > 1e-14 * uu * cc) {
            return None;
        }
        let (uy, cy) = (uy.value(), cy.value());
        Some(((cc * uy - uc * cy) / det, (uu * cy - uc * uy) / det))
    }
}

/// Weight `c = 1 / (1 + n / eta)` that the curve gives to `e0`.
fn share(n: f64, eta: f64) -> f64 {
    1.0 / (1.0 + n / eta)
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

pub fn fit_curve(points: &[CurvePoint], e0_fixed: Option<f64>) -> Result<CurveFit> {
    if let Some(e0) = e0_fixed {
        if !(0.0..=1.0).contains(&e0) {
            return Err(Error::invalid("e0_fixed", "must lie in [0, 1]"));
        }
    }
    for p in points {
        if !(p.n >= 0.0 && p.n.is_finite()) {
            return Err(Error::invalid("n", "must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&p.mean_error) {
            return Err(Error::invalid("mean_error", "must lie in [0, 1]"));
        }
        if let Some(s) = p.std_error {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::invalid("std_error", "must be finite and >= 0"));
            }
        }
    }
    let needed = if e0_fixed.is_some() { 2 } else { 3 };
    if points.len() < needed {
        return Err(Error::InsufficientData {
            needed,
            got: points.len(),
        });
    }
    let mut ns: Vec<f64> = points.iter().map(|p| p.n).collect();
    ns.sort_unstable_by(f64::total_cmp);
    ns.dedup();
    if ns.len() == 1 {
        return Err(Error::Degenerate);
    }
    if ns.len() < needed {
        return Err(Error::InsufficientData { needed, got: ns.len() });
    }

    let with_std = points.iter().filter(|p| p.std_error.is_some_and(|s| s > 0.0)).count();
    let (weighting, weights) = if with_std == points.len() {
        let w = points
            .iter()
            .map(|p| p.std_error.map_or(1.0, |s| 1.0 / (s * s)))
            .collect();
        (Weighting::InverseVariance, w)
    } else if points.iter().any(|p| p.std_error.is_some()) {
        (Weighting::MixedStdIgnored, alloc::vec![1.0; points.len()])
    } else {
        (Weighting::Unweighted, alloc::vec![1.0; points.len()])
    };
    let problem = Problem {
        points,
        weights,
        e0_fixed,
    };

    let grid = eta_grid();
    let objective: Vec<f64> = grid.iter().map(|&eta| problem.profile(eta).rss).collect();
    // Strict comparison keeps the smallest eta among ties.
    let best = (1..objective.len()).fold(0, |b, k| if objective[k] < objective[b] { k } else { b });
    let lo = grid[best.saturating_sub(1)].ln();
    let hi = grid[(best + 1).min(grid.len() - 1)].ln();
    let refined = golden_section(|x| problem.profile(x.exp()).rss, lo, hi, GOLDEN_TOLERANCE).exp();

    let (eta, profile) = {
        let r = problem.profile(refined);
        let g = problem.profile(grid[best]);
        if r.rss <= g.rss {
            (refined, r)
        } else {
            (grid[best], g)
        }
    };
    let residuals = points
        .iter()
        .map(|p| learning_curve(p.n, profile.e_min, eta, profile.e0) - p.mean_error)
        .collect();
    Ok(CurveFit {
        e_min: profile.e_min,
        eta,
        e0: profile.e0,
        e0_fixed: e0_fixed.is_some(),
        rss: profile.rss,
        residuals,
        weighting,
    })
}

/// The objective profiled over `(e_min, e0)` at each `eta`, for diagnostics.
pub fn profile_objective(points: &[CurvePoint], e0_fixed: Option<f64>, etas: &[f64]) -> Vec<f64> {
    let problem = Problem {
        points,
        weights: alloc::vec![1.0; points.len()],
        e0_fixed,
    };
    etas.iter().map(|&eta| problem.profile(eta).rss).collect()
}

/// One row of the fitted curve with its deviation from `e_min` on log scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FittedRow {
    pub n: f64,
    pub model: f64,
    /// `ln(n)`, absent at `n = 0`.
    pub log_n: Option<f64>,
    /// `ln(model - e_min)`, absent when the deviation is not positive.
    pub log_deviation: Option<f64>,
}

pub fn fitted_curve(fit: &CurveFit, grid: &[f64]) -> Vec<FittedRow> {
    grid.iter()
        .map(|&n| {
            let model = fit.model(n);
            let deviation = model - fit.e_min;
            FittedRow {
                n,
                model,
                log_n: (n > 0.0).then(|| n.ln()),
                log_deviation: (deviation > 0.0).then(|| deviation.ln()),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn synthetic(e_min: f64, eta: f64, e0: f64, ns: &[f64]) -> Vec<CurvePoint> {
        ns.iter()
            .map(|&n| CurvePoint::new(n, learning_curve(n, e_min, eta, e0)))
            .collect()
    }

    #[test]
    fn grid_shape() {
        let g = eta_grid();
        assert_eq!(g.len(), 1601);
        assert!((g[0] - 1e-2).abs() < 1e-15);
        assert!((g[1600] / 1e6 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_choice() {
        assert!((random_choice_error(10) - 0.9).abs() < 1e-15);
        assert!((random_choice_error(2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn two_points_interpolated_with_fixed_e0() {
        let pts = synthetic(0.05, 120.0, 0.9, &[50.0, 800.0]);
        let fit = fit_curve(&pts, Some(0.9)).unwrap();
        assert!(fit.rss < 1e-20, "{}", fit.rss);
        assert!((fit.eta / 120.0 - 1.0).abs() < 1e-6);
        assert!((fit.e_min - 0.05).abs() < 1e-8);
        assert_eq!(fit.e0, 0.9);
        assert!(fit.e0_fixed);
    }

    #[test]
    fn preconditions() {
        let one = [CurvePoint::new(10.0, 0.5)];
        assert_eq!(
            fit_curve(&one, None),
            Err(Error::InsufficientData { needed: 3, got: 1 })
        );
        assert_eq!(
            fit_curve(&one, Some(0.9)),
            Err(Error::InsufficientData { needed: 2, got: 1 })
        );
        let same = [
            CurvePoint::new(10.0, 0.5),
            CurvePoint::new(10.0, 0.4),
            CurvePoint::new(10.0, 0.3),
        ];
        assert_eq!(fit_curve(&same, None), Err(Error::Degenerate));
    }

    #[test]
    fn fitted_curve_starts_at_e0() {
        let pts = synthetic(0.01, 300.0, 0.9, &[10.0, 100.0, 1000.0, 10000.0]);
        let fit = fit_curve(&pts, None).unwrap();
        let rows = fitted_curve(&fit, &[0.0, 1e9]);
        assert!((rows[0].model - fit.e0).abs() < 1e-15);
        assert_eq!(rows[0].log_n, None);
        assert!(rows[1].log_deviation.is_some());
    }

    #[test]
    fn mixed_std_falls_back_to_unweighted() {
        let mut pts = synthetic(0.01, 300.0, 0.9, &[10.0, 100.0, 1000.0]);
        pts[0].std_error = Some(0.01);
        let fit = fit_curve(&pts, None).unwrap();
        assert_eq!(fit.weighting, Weighting::MixedStdIgnored);
        for p in &mut pts {
            p.std_error = Some(0.02);
        }
        assert_eq!(fit_curve(&pts, None).unwrap().weighting, Weighting::InverseVariance);
    }

    #[test]
    fn constrained_to_ordered_unit_box() {
        // Increasing data would want e_min > e0.
        let pts = vec![
            CurvePoint::new(10.0, 0.1),
            CurvePoint::new(100.0, 0.3),
            CurvePoint::new(1000.0, 0.6),
        ];
        let fit = fit_curve(&pts, None).unwrap();
        assert!(0.0 <= fit.e_min && fit.e_min <= fit.e0 && fit.e0 <= 1.0);
    }
}
