//! Globally adaptive Gauss-Kronrod (7/15) quadrature.
#![allow(clippy::excessive_precision)]

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::{Error, NeumaierSum, Result};

// Kronrod abscissae on [-1, 1] (non-negative half, descending) and weights;
// odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_3,
    0.949_107_912_342_758_524_526_189_684_047_9,
    0.864_864_423_359_769_072_789_712_788_640_9,
    0.741_531_185_599_394_439_863_864_773_280_8,
    0.586_087_235_467_691_130_294_144_845_693_0,
    0.405_845_151_377_397_166_906_606_412_076_96,
    0.207_784_955_007_898_467_600_689_403_773_2,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_20,
    0.104_790_010_322_250_183_839_876_322_541_5,
    0.140_653_259_715_525_918_745_189_590_510_2,
    0.169_004_726_639_267_902_826_583_426_598_6,
    0.190_350_578_064_785_409_913_256_402_421_0,
    0.204_432_940_075_298_892_414_161_999_234_6,
    0.209_482_141_084_727_828_012_999_174_891_7,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_1,
    0.279_705_391_489_276_667_901_467_771_423_8,
    0.381_830_050_505_118_944_950_369_775_488_98,
    0.417_959_183_673_469_387_755_102_040_816_3,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub relative: f64,
    pub absolute: f64,
    pub max_evaluations: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            relative: 1e-10,
            absolute: 0.0,
            max_evaluations: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let pair = f(center - half * x) + f(center + half * x);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrates `f` over `[breakpoints[0], breakpoints[last]]`.
///
/// Each interval between consecutive breakpoints starts as its own segment;
/// the segment with the largest error estimate is bisected until the total
/// error is below `max(absolute, relative * |integral|)`. Integration points
/// never coincide with a breakpoint, so `f` may be singular there.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, breakpoints: &[f64], tol: Tolerance) -> Result<Integral> {
    if breakpoints.len() < 2 || breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid(
            "breakpoints",
            "need at least two strictly increasing points",
        ));
    }
    let mut heap = BinaryHeap::new();
    let mut settled = Vec::new();
    let mut evaluations = 0usize;
    for w in breakpoints.windows(2) {
        heap.push(kronrod15(&mut f, w[0], w[1]));
        evaluations += 15;
    }

    loop {
        let value = heap
            .iter()
            .chain(&settled)
            .map(|s: &Segment| s.value)
            .sum::<NeumaierSum>()
            .value();
        let error = heap
            .iter()
            .chain(&settled)
            .map(|s: &Segment| s.error)
            .sum::<NeumaierSum>()
            .value();
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::QuadratureFailure { evaluations });
        }
        if error <= tol.absolute.max(tol.relative * value.abs()) {
            return Ok(Integral {
                value,
                error,
                evaluations,
            });
        }
        let worst = match heap.pop() {
            Some(s) => s,
            // Every remaining segment is too narrow to split.
            None => return Err(Error::QuadratureFailure { evaluations }),
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            settled.push(worst);
            continue;
        }
        if evaluations + 30 > tol.max_evaluations {
            return Err(Error::QuadratureFailure { evaluations });
        }
        heap.push(kronrod15(&mut f, worst.a, mid));
        heap.push(kronrod15(&mut f, mid, worst.b));
        evaluations += 30;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x.powi(10) - 3.0 * x * x, &[0.0, 2.0], Tolerance::default()).unwrap();
        let exact = 2f64.powi(11) / 11.0 - 8.0;
        assert!((r.value - exact).abs() < 1e-12 * exact.abs());
    }

    #[test]
    fn oscillatory_integrand() {
        let r = integrate(|x| (20.0 * x).sin() * x, &[0.0, PI], Tolerance::default()).unwrap();
        // integral of x sin(20x) over [0, pi] is -pi/20.
        assert!((r.value + PI / 20.0).abs() < 1e-11);
    }

    #[test]
    fn endpoint_singularity() {
        let r = integrate(|x| 1.0 / x.sqrt(), &[0.0, 1.0], Tolerance::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn narrow_peak_needs_breakpoints() {
        let peak = |x: f64| (-((x - 0.3) / 1e-4).powi(2)).exp();
        let exact = 1e-4 * PI.sqrt();
        let r = integrate(
            peak,
            &[0.0, 0.2995, 0.2999, 0.3, 0.3001, 0.3005, 1.0],
            Tolerance::default(),
        )
        .unwrap();
        assert!((r.value - exact).abs() < 1e-10 * exact, "{} {} {:?}", r.value, exact, r);
    }

    #[test]
    fn budget_exhaustion_reported() {
        let tol = Tolerance {
            max_evaluations: 100,
            ..Tolerance::default()
        };
        let r = integrate(|x| (1.0 / x).sin(), &[1e-6, 1.0], tol);
        assert!(matches!(r, Err(Error::QuadratureFailure { .. })));
    }

    #[test]
    fn bad_breakpoints() {
        assert!(integrate(|x| x, &[1.0, 0.0], Tolerance::default()).is_err());
        assert!(integrate(|x| x, &[1.0], Tolerance::default()).is_err());
    }
}
