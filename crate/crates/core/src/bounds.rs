//! Closed-form bounds on bad zero-training-error solutions and the sample
//! sizes that make them small.
//!
//! Every bound is evaluated through its logarithm, so large `d` and `n` do
//! not overflow.

use crate::{Error, Result};

/// How `(1 - eps)^n` is bounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecayForm {
    /// `R (1 - eps)^n`.
    Power,
    /// `R exp(-eps n)`, the looser closed form.
    Exponential,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("epsilon", "must lie in (0, 1]"))
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("delta", "must lie in (0, 1]"))
    }
}

fn check_ratio(r: f64) -> Result<()> {
    if r >= 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("R", "must be finite and >= 0"))
    }
}

/// `ln` of the VC bound `2 (2 e n / d)^d exp(-eps n / 2)`.
pub fn log_vc_bound(d: u32, n: u64, epsilon: f64) -> f64 {
    let d = f64::from(d);
    let n = n as f64;
    core::f64::consts::LN_2 + d * (2.0 * core::f64::consts::E * n / d).ln() - 0.5 * epsilon * n
}

/// Bound on the probability that some zero-training-error hypothesis has
/// true error at least `epsilon`, for VC dimension `d`. May exceed 1.
pub fn vc_bound(d: u32, n: u64, epsilon: f64) -> f64 {
    log_vc_bound(d, n, epsilon).exp()
}

/// Smallest `n` on the decreasing tail of [`vc_bound`] with bound `<= delta`.
///
/// The bound rises until `n = 2d / eps` and falls after it; the search
/// starts at that maximizer, doubles until the bound is small enough, then
/// bisects. Returns 1 if even the maximum of the bound is within `delta`.
pub fn vc_min_n(d: u32, epsilon: f64, delta: f64) -> Result<u64> {
    if d < 1 {
        return Err(Error::invalid("d", "must be at least 1"));
    }
    check_epsilon(epsilon)?;
    check_delta(delta)?;
    let target = delta.ln();
    let fits = |n: u64| log_vc_bound(d, n, epsilon) <= target;
    let peak = (2.0 * f64::from(d) / epsilon).floor().max(1.0) as u64;
    if fits(peak) && fits(peak + 1) {
        return Ok(1);
    }
    let mut lo = if fits(peak) { peak + 1 } else { peak };
    let mut hi = lo * 2;
    while !fits(hi) {
        lo = hi;
        hi = hi.checked_mul(2).filter(|&h| h <= 1 << 63).ok_or(Error::NoSolution)?;
    }
    // Invariant: bound(lo) > delta >= bound(hi).
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fits(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Mean fraction of bad global minima: `R (1 - eps)^n` or `R exp(-eps n)`.
pub fn frac_bound(r: f64, n: u64, epsilon: f64, form: DecayForm) -> f64 {
    if r == 0.0 || n == 0 {
        return r;
    }
    let n = n as f64;
    match form {
        DecayForm::Power => r * (n * (-epsilon).ln_1p()).exp(),
        DecayForm::Exponential => r * (-epsilon * n).exp(),
    }
}

/// Error level below which a fraction `q` of solutions is guaranteed on
/// average, from each decay form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuartileEps {
    /// `1 - (q / R)^(1/n)`.
    pub power: f64,
    /// `ln(R / q) / n`.
    pub exponential: f64,
}

pub fn quartile_eps(r: f64, n: u64, q: f64) -> Result<QuartileEps> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::invalid("q", "must lie in (0, 1)"));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid("R", "must be positive and finite"));
    }
    if n < 1 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let log_ratio = (r / q).ln();
    let n = n as f64;
    Ok(QuartileEps {
        power: (-(-log_ratio / n).exp_m1()).clamp(0.0, 1.0),
        exponential: (log_ratio / n).clamp(0.0, 1.0),
    })
}

/// Smallest `n` with `frac_bound(r, n, epsilon, form) <= delta`; 0 when `r <= delta`.
pub fn frac_min_n(r: f64, epsilon: f64, delta: f64, form: DecayForm) -> Result<u64> {
    check_ratio(r)?;
    check_epsilon(epsilon)?;
    check_delta(delta)?;
    if r <= delta {
        return Ok(0);
    }
    let rate = match form {
        DecayForm::Power => -(-epsilon).ln_1p(),
        DecayForm::Exponential => epsilon,
    };
    if rate == f64::INFINITY {
        // eps = 1 with the power form: one sample removes every bad solution.
        return Ok(1);
    }
    let mut n = ((r / delta).ln() / rate).ceil().max(0.0) as u64;
    // Guard the rounding of the closed form by direct evaluation.
    while frac_bound(r, n, epsilon, form) > delta {
        n += 1;
    }
    while n > 0 && frac_bound(r, n - 1, epsilon, form) <= delta {
        n -= 1;
    }
    Ok(n)
}

/// Smallest `R` for which `R * decay(n)` dominates every observed
/// `(n, fraction)` pair.
pub fn tight_ratio(observations: &[(u64, f64)], epsilon: f64, form: DecayForm) -> f64 {
    observations
        .iter()
        .map(|&(n, f)| f / frac_bound(1.0, n, epsilon, form))
        .fold(0.0, f64::max)
}
