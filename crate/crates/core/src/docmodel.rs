//! The density-of-classifiers (DOC) model.
//!
//! `D(E)` counts hypotheses by true error. Given `n` training points, a
//! hypothesis with true error `E` fits them all with probability `(1-E)^n`,
//! so the density of zero-training-error hypotheses is proportional to
//! `(1-E)^n D(E)`; its normalized form is [`q_n`] and its mean is the
//! learning curve [`expected_error_quadrature`].
//!
//! The parametric family is `D(E) = (E - e_min)^(alpha-1) (e_max - E)^(beta-1)`
//! on `(e_min, e_max)`. All integrals are evaluated in log space, shifted by
//! the maximum of the log-integrand, so `n` in the hundreds of thousands does
//! not underflow.

use alloc::vec::Vec;

use crate::quadrature::{self, Tolerance};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DocParams {
    e_min: f64,
    e_max: f64,
    alpha: f64,
    beta: f64,
}

impl DocParams {
    pub fn new(e_min: f64, e_max: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&e_min) {
            return Err(Error::invalid("e_min", "must lie in [0, 1)"));
        }
        if !(e_max > e_min && e_max <= 1.0) {
            return Err(Error::invalid("e_max", "must lie in (e_min, 1]"));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid("alpha", "must be positive and finite"));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid("beta", "must be positive and finite"));
        }
        Ok(DocParams {
            e_min,
            e_max,
            alpha,
            beta,
        })
    }

    pub fn e_min(&self) -> f64 {
        self.e_min
    }

    pub fn e_max(&self) -> f64 {
        self.e_max
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Interior maximum of `D`, defined when `alpha > 1` and `beta > 1`.
    pub fn mode(&self) -> Option<f64> {
        (self.alpha > 1.0 && self.beta > 1.0)
            .then(|| self.e_min + (self.alpha - 1.0) * (self.e_max - self.e_min) / (self.alpha + self.beta - 2.0))
    }

    pub fn log_density(&self, e: f64) -> f64 {
        if !(e > self.e_min && e < self.e_max) {
            return f64::NEG_INFINITY;
        }
        log_power(e - self.e_min, self.alpha - 1.0) + log_power(self.e_max - e, self.beta - 1.0)
    }

    /// Unnormalized `D(E)`; zero outside the open interval `(e_min, e_max)`.
    pub fn density(&self, e: f64) -> f64 {
        self.log_density(e).exp()
    }
}

/// `exponent * ln(base)` with `0 * ln(0) = 0`.
fn log_power(base: f64, exponent: f64) -> f64 {
    if exponent == 0.0 {
        0.0
    } else {
        exponent * base.ln()
    }
}

pub fn density(e: f64, params: &DocParams) -> f64 {
    params.density(e)
}

/// Factor that favors low error in the integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Weight {
    /// `(1 - E)^n`: probability of fitting `n` samples.
    Fit(f64),
    /// `exp(-n E)`: the Boltzmann factor of the partition function.
    Boltzmann(f64),
}

/// A point of the integration domain with its distances to both ends,
/// carried separately so they keep full relative precision near the ends.
#[derive(Debug, Clone, Copy)]
struct Point {
    e: f64,
    from_min: f64,
    to_max: f64,
}

#[derive(Debug, Clone, Copy)]
struct Integrand {
    params: DocParams,
    weight: Weight,
    /// Multiply by `E` (first moment).
    first_moment: bool,
}

impl Integrand {
    fn one_minus_e(&self, p: Point) -> f64 {
        (1.0 - self.params.e_max) + p.to_max
    }

    fn log_value(&self, p: Point) -> f64 {
        let d = log_power(p.from_min, self.params.alpha - 1.0) + log_power(p.to_max, self.params.beta - 1.0);
        let w = match self.weight {
            Weight::Fit(n) => log_power(self.one_minus_e(p), n),
            Weight::Boltzmann(n) => -n * p.e,
        };
        let m = if self.first_moment { p.e.ln() } else { 0.0 };
        d + w + m
    }

    fn log_derivative(&self, p: Point) -> f64 {
        let mut g = (self.params.alpha - 1.0) / p.from_min - (self.params.beta - 1.0) / p.to_max;
        g += match self.weight {
            Weight::Fit(n) => -n / self.one_minus_e(p),
            Weight::Boltzmann(n) => -n,
        };
        if self.first_moment {
            g += 1.0 / p.e;
        }
        g
    }

    fn log_curvature(&self, p: Point) -> f64 {
        let mut c =
            -(self.params.alpha - 1.0) / (p.from_min * p.from_min) - (self.params.beta - 1.0) / (p.to_max * p.to_max);
        if let Weight::Fit(n) = self.weight {
            let q = self.one_minus_e(p);
            c -= n / (q * q);
        }
        if self.first_moment {
            c -= 1.0 / (p.e * p.e);
        }
        c
    }

    fn point(&self, e: f64) -> Point {
        Point {
            e,
            from_min: e - self.params.e_min,
            to_max: self.params.e_max - e,
        }
    }

    /// Exponent of the integrand at the lower end, as `E -> e_min`.
    fn left_exponent(&self) -> f64 {
        self.params.alpha - 1.0
    }

    /// Exponent of the integrand at `e_max`.
    fn right_exponent(&self) -> f64 {
        match self.weight {
            Weight::Fit(n) if self.params.e_max == 1.0 => self.params.beta - 1.0 + n,
            _ => self.params.beta - 1.0,
        }
    }
}

/// How a panel maps the unit interval onto `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Map {
    Linear,
    /// `E = a + (b - a) t^k`, flattening a singularity at `a`.
    ClusterLeft(i32),
    /// `E = b - (b - a) (1 - t)^k`, flattening a singularity at `b`.
    ClusterRight(i32),
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    map: Map,
}

impl Panel {
    /// Point at local coordinate `t` in `(0, 1)` and the Jacobian `dE/dt`.
    fn point(&self, t: f64, params: &DocParams) -> (Point, f64) {
        let width = self.b - self.a;
        let (u, one_minus_u, jacobian) = match self.map {
            Map::Linear => (t, 1.0 - t, width),
            Map::ClusterLeft(k) => {
                let u = t.powi(k);
                (u, 1.0 - u, width * f64::from(k) * t.powi(k - 1))
            }
            Map::ClusterRight(k) => {
                let s = (1.0 - t).powi(k);
                (1.0 - s, s, width * f64::from(k) * (1.0 - t).powi(k - 1))
            }
        };
        let point = Point {
            e: self.a + width * u,
            from_min: (self.a - params.e_min) + width * u,
            to_max: (params.e_max - self.b) + width * one_minus_u,
        };
        (point, jacobian)
    }
}

/// Smallest integer `k >= 1` with `k * (exponent + 1) >= 1`.
fn cluster_power(exponent: f64) -> i32 {
    (1.0 / (exponent + 1.0)).ceil().max(1.0) as i32
}

/// Breakpoints of `(lo, hi)` that resolve each interior maximum of the
/// log-integrand on a geometric ladder of its own width.
fn breakpoints(integrand: &Integrand, lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let mut ts: Vec<f64> = (1..1024).map(|j| f64::from(j) / 1024.0).collect();
    for i in 1..=45 {
        let t = (0.5f64).powi(i) / 1024.0;
        ts.push(t);
        ts.push(1.0 - t);
    }
    ts.sort_unstable_by(f64::total_cmp);

    let derivative = |e: f64| integrand.log_derivative(integrand.point(e));
    let mut cuts = alloc::vec![lo, lo + 0.5 * span, hi];
    // Mass can also pile up against either end (alpha < 1, or beta < 1 at n = 0).
    for i in 2..=40 {
        let step = span * (0.5f64).powi(i);
        cuts.push(lo + step);
        cuts.push(hi - step);
    }
    let mut prev_e = lo + ts[0] * span;
    let mut prev_g = derivative(prev_e);
    for &t in &ts[1..] {
        let e = lo + t * span;
        let g = derivative(e);
        if prev_g > 0.0 && g <= 0.0 {
            let (mut a, mut b) = (prev_e, e);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if !(a < mid && mid < b) {
                    break;
                }
                if derivative(mid) > 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            let peak = 0.5 * (a + b);
            let curvature = integrand.log_curvature(integrand.point(peak));
            let width = if curvature < 0.0 && curvature.is_finite() {
                (-curvature).sqrt().recip()
            } else {
                span / 8.0
            };
            cuts.push(peak);
            let mut step = width;
            while step < span {
                for c in [peak - step, peak + step] {
                    if c > lo && c < hi {
                        cuts.push(c);
                    }
                }
                step *= 2.0;
            }
        }
        prev_e = e;
        prev_g = g;
    }
    cuts.sort_unstable_by(f64::total_cmp);
    cuts.dedup_by(|b, a| *b - *a <= 1e-14 * span);
    cuts
}

/// `ln` of the integral of the integrand over `(e_min, upper)`.
fn log_integral(integrand: Integrand, upper: f64) -> Result<f64> {
    let params = integrand.params;
    let lo = params.e_min;
    let hi = upper.min(params.e_max);
    if !(hi > lo) {
        return Ok(f64::NEG_INFINITY);
    }
    let cuts = breakpoints(&integrand, lo, hi);
    let last = cuts.len() - 2;
    let panels: Vec<Panel> = cuts
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let left = integrand.left_exponent();
            let right = integrand.right_exponent();
            let map = if i == 0 && left < 0.0 {
                Map::ClusterLeft(cluster_power(left))
            } else if i == last && hi == params.e_max && right < 0.0 {
                Map::ClusterRight(cluster_power(right))
            } else {
                Map::Linear
            };
            Panel { a: w[0], b: w[1], map }
        })
        .collect();

    // Shift by the largest finite log-integrand value seen at the cuts and
    // panel midpoints; near a flattened singularity the Jacobian keeps the
    // shifted integrand bounded.
    let shift = panels
        .iter()
        .flat_map(|p| [0.5 * (p.a + p.b), p.a, p.b])
        .filter(|&e| e > lo && e < hi)
        .map(|e| integrand.log_value(integrand.point(e)))
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return Err(Error::QuadratureFailure { evaluations: 0 });
    }

    let unit: Vec<f64> = (0..=panels.len()).map(|i| i as f64).collect();
    let r = quadrature::integrate(
        |x| {
            let i = (x.floor() as usize).min(panels.len() - 1);
            let (point, jacobian) = panels[i].point(x - i as f64, &params);
            let v = (integrand.log_value(point) - shift).exp() * jacobian;
            if v.is_nan() {
                0.0
            } else {
                v
            }
        },
        &unit,
        Tolerance::default(),
    )?;
    if r.value > 0.0 {
        Ok(shift + r.value.ln())
    } else {
        Ok(f64::NEG_INFINITY)
    }
}

fn check_n(n: f64) -> Result<()> {
    if n >= 0.0 && n.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("n", "must be a finite number >= 0"))
    }
}

/// `ln` of `int (1-E)^n D(E) dE`.
pub fn log_fit_normalizer(n: f64, params: &DocParams) -> Result<f64> {
    check_n(n)?;
    log_integral(
        Integrand {
            params: *params,
            weight: Weight::Fit(n),
            first_moment: false,
        },
        1.0,
    )
}

/// Normalized density of zero-training-error hypotheses at error `e`.
pub fn q_n(e: f64, n: f64, params: &DocParams) -> Result<f64> {
    Ok(log_q_n(e, n, params)?.exp())
}

pub fn log_q_n(e: f64, n: f64, params: &DocParams) -> Result<f64> {
    let log_z = log_fit_normalizer(n, params)?;
    Ok(log_q_with(e, n, params, log_z))
}

fn log_q_with(e: f64, n: f64, params: &DocParams, log_z: f64) -> f64 {
    let d = params.log_density(e);
    if d == f64::NEG_INFINITY {
        return d;
    }
    d + log_power(1.0 - e, n) - log_z
}

/// `q_n` on a grid of errors, sharing one normalization.
pub fn q_n_curve(grid: &[f64], n: f64, params: &DocParams) -> Result<Vec<f64>> {
    let log_z = log_fit_normalizer(n, params)?;
    Ok(grid.iter().map(|&e| log_q_with(e, n, params, log_z).exp()).collect())
}

/// Mean true error over all zero-training-error hypotheses:
/// `int E (1-E)^n D / int (1-E)^n D`.
pub fn expected_error_quadrature(n: f64, params: &DocParams) -> Result<f64> {
    check_n(n)?;
    let base = Integrand {
        params: *params,
        weight: Weight::Fit(n),
        first_moment: false,
    };
    let numerator = log_integral(
        Integrand {
            first_moment: true,
            ..base
        },
        1.0,
    )?;
    Ok((numerator - log_integral(base, 1.0)?).exp())
}

/// The learning curve in closed form, valid for `e_max = 1`:
/// `(e_min (beta + n) + alpha) / (alpha + beta + n)`.
pub fn expected_error_closed(n: f64, e_min: f64, alpha: f64, beta: f64) -> f64 {
    (e_min * (beta + n) + alpha) / (alpha + beta + n)
}

/// The same curve as `e_min + (e0 - e_min) / (1 + n / eta)`.
pub fn learning_curve(n: f64, e_min: f64, eta: f64, e0: f64) -> f64 {
    e_min + (e0 - e_min) / (1.0 + n / eta)
}

/// `(eta, e0)` of the closed-form curve: `eta = alpha + beta` and the
/// error at `n = 0`.
pub fn curve_parameters(e_min: f64, alpha: f64, beta: f64) -> (f64, f64) {
    let eta = alpha + beta;
    (eta, (alpha + beta * e_min) / eta)
}

/// `ln Z_n` with `Z_n = int exp(-n E) D(E) dE`.
pub fn log_partition(n: f64, params: &DocParams) -> Result<f64> {
    check_n(n)?;
    log_integral(
        Integrand {
            params: *params,
            weight: Weight::Boltzmann(n),
            first_moment: false,
        },
        1.0,
    )
}

/// `d ln Z_n / dn`, evaluated as minus the Boltzmann-weighted mean error.
pub fn dlogz_dn(n: f64, params: &DocParams) -> Result<f64> {
    check_n(n)?;
    let base = Integrand {
        params: *params,
        weight: Weight::Boltzmann(n),
        first_moment: false,
    };
    let numerator = log_integral(
        Integrand {
            first_moment: true,
            ..base
        },
        1.0,
    )?;
    Ok(-(numerator - log_integral(base, 1.0)?).exp())
}

/// `ln` of the upper bound `D(E) / int_0^a D * B(a)^-n` on `q_n(E)`, with
/// `B(a) = (1 - a) / (1 - E)`.
pub fn log_decay_bound(e: f64, a: f64, n: f64, params: &DocParams) -> Result<f64> {
    check_n(n)?;
    if !(params.e_min < a && a < e && e < 1.0) {
        return Err(Error::InvalidSplit);
    }
    let head = log_integral(
        Integrand {
            params: *params,
            weight: Weight::Fit(0.0),
            first_moment: false,
        },
        a,
    )?;
    Ok(params.log_density(e) - head - n * decay_base(e, a).ln())
}

pub fn decay_bound(e: f64, a: f64, n: f64, params: &DocParams) -> Result<f64> {
    Ok(log_decay_bound(e, a, n, params)?.exp())
}

/// `B(a) = (1 - a) / (1 - E)`, greater than 1 whenever `a < E`.
pub fn decay_base(e: f64, a: f64) -> f64 {
    (1.0 - a) / (1.0 - e)
}

/// `D(E) = delta(E - location)`: every hypothesis has the same error, as
/// under random labels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointMassDoc {
    location: f64,
}

impl PointMassDoc {
    pub fn new(location: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&location) {
            return Err(Error::invalid("location", "must lie in [0, 1]"));
        }
        Ok(PointMassDoc { location })
    }

    pub fn location(&self) -> f64 {
        self.location
    }
}

/// Quantities shared by every density of classifiers.
pub trait ClassifierDensity {
    fn expected_error(&self, n: f64) -> Result<f64>;
    fn log_partition(&self, n: f64) -> Result<f64>;
    fn dlogz_dn(&self, n: f64) -> Result<f64>;
}

impl ClassifierDensity for DocParams {
    fn expected_error(&self, n: f64) -> Result<f64> {
        expected_error_quadrature(n, self)
    }

    fn log_partition(&self, n: f64) -> Result<f64> {
        log_partition(n, self)
    }

    fn dlogz_dn(&self, n: f64) -> Result<f64> {
        dlogz_dn(n, self)
    }
}

impl ClassifierDensity for PointMassDoc {
    fn expected_error(&self, n: f64) -> Result<f64> {
        check_n(n)?;
        Ok(self.location)
    }

    fn log_partition(&self, n: f64) -> Result<f64> {
        check_n(n)?;
        Ok(-n * self.location)
    }

    fn dlogz_dn(&self, n: f64) -> Result<f64> {
        check_n(n)?;
        Ok(-self.location)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig3() -> DocParams {
        DocParams::new(0.1, 1.0, 57.0, 8.0).unwrap()
    }

    #[test]
    fn validation() {
        assert!(DocParams::new(0.1, 1.0, 0.0, 8.0).is_err());
        assert!(DocParams::new(0.5, 0.4, 2.0, 2.0).is_err());
        assert!(DocParams::new(-0.1, 1.0, 2.0, 2.0).is_err());
        assert!(DocParams::new(0.1, 1.1, 2.0, 2.0).is_err());
    }

    #[test]
    fn boundary_zeros() {
        let p = fig3();
        assert_eq!(p.density(0.1), 0.0);
        assert_eq!(p.density(1.0), 0.0);
        assert_eq!(p.density(0.05), 0.0);
        assert!(p.density(0.5) > 0.0);
    }

    #[test]
    fn mode_formula() {
        assert!((fig3().mode().unwrap() - 0.9).abs() < 1e-15);
    }

    #[test]
    fn beta_moment_at_zero_draws() {
        let e = expected_error_quadrature(0.0, &fig3()).unwrap();
        assert!((e - 57.8 / 65.0).abs() < 1e-10);
    }

    #[test]
    fn closed_form_reference_value() {
        let e = expected_error_closed(65.0, 0.1, 57.0, 8.0);
        assert!((e - (0.1 + 57.0 * 0.9 / 130.0)).abs() < 1e-15);
        let (eta, e0) = curve_parameters(0.1, 57.0, 8.0);
        assert!((learning_curve(65.0, 0.1, eta, e0) - e).abs() < 1e-15);
    }

    #[test]
    fn concentrates_at_minimum() {
        let e = expected_error_quadrature(1e6, &fig3()).unwrap();
        assert!((e - 0.1).abs() < 1e-3);
    }

    #[test]
    fn singular_endpoints() {
        // Beta(0.5, 0.5) on (0, 1): mean 1/2, mean with (1-E)^1 weight 1/4 / (1/2).
        let p = DocParams::new(0.0, 1.0, 0.5, 0.5).unwrap();
        let e0 = expected_error_quadrature(0.0, &p).unwrap();
        assert!((e0 - 0.5).abs() < 1e-10);
        let e1 = expected_error_quadrature(1.0, &p).unwrap();
        assert!((e1 - expected_error_closed(1.0, 0.0, 0.5, 0.5)).abs() < 1e-10);
    }

    #[test]
    fn point_mass() {
        let d = PointMassDoc::new(0.9).unwrap();
        for n in [0.0, 1e3, 1e6] {
            assert_eq!(d.expected_error(n), Ok(0.9));
        }
        assert_eq!(d.log_partition(10.0), Ok(-9.0));
        assert_eq!(d.dlogz_dn(10.0), Ok(-0.9));
    }

    #[test]
    fn split_ordering_checked() {
        let p = fig3();
        assert_eq!(decay_bound(0.5, 0.05, 1.0, &p), Err(Error::InvalidSplit));
        assert_eq!(decay_bound(0.5, 0.6, 1.0, &p), Err(Error::InvalidSplit));
        assert_eq!(decay_bound(1.0, 0.5, 1.0, &p), Err(Error::InvalidSplit));
        assert!(decay_base(0.5, 0.3) > 1.0);
    }
}
