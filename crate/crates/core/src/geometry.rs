//! The separable disk problem and linear-in-parameters classifiers on it.
//!
//! Inputs are uniform on a disk from which two thin sectors have been
//! removed. The sectors are centered on a diameter (the separator) and lie
//! opposite each other; the upper half-disk is class +1 and the lower half
//! is class -1, so every diameter passing through both gaps separates the
//! classes perfectly. Angles are in degrees throughout.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::seed;
use crate::{Error, Result};

const FULL_TURN: f64 = 360.0;
const HALF_TURN: f64 = 180.0;

/// A class label in {-1, +1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Negative => -1.0,
            Label::Positive => 1.0,
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Negative => Label::Positive,
            Label::Positive => Label::Negative,
        }
    }

    /// Labels a score; zero goes to the positive class.
    pub fn from_score(score: f64) -> Label {
        if score >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn from_sign(sign: i32) -> Option<Label> {
        match sign {
            1 => Some(Label::Positive),
            -1 => Some(Label::Negative),
            _ => None,
        }
    }
}

/// Normalizes an angle to `[0, 360)`.
pub fn normalize_degrees(angle: f64) -> f64 {
    let a = angle % FULL_TURN;
    let a = if a < 0.0 { a + FULL_TURN } else { a };
    // `-tiny % 360 + 360` rounds to 360.
    if a >= FULL_TURN {
        0.0
    } else {
        a
    }
}

/// Length of the intersection of the arcs `[a, a + a_len)` and `[b, b + b_len)`.
fn arc_overlap(a: f64, a_len: f64, b: f64, b_len: f64) -> f64 {
    let offset = normalize_degrees(b - a);
    let overlap = |start: f64| {
        let lo = start.max(0.0);
        let hi = (start + b_len).min(a_len);
        (hi - lo).max(0.0)
    };
    overlap(offset) + overlap(offset - FULL_TURN)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskProblem {
    gap_halfwidth: f64,
    separator_angle: f64,
    radius: f64,
}

impl Default for DiskProblem {
    /// Unit disk, separator along the x-axis, two 3.6 degree gaps.
    fn default() -> Self {
        DiskProblem {
            gap_halfwidth: 1.8,
            separator_angle: 0.0,
            radius: 1.0,
        }
    }
}

impl DiskProblem {
    pub fn new(gap_halfwidth: f64, separator_angle: f64, radius: f64) -> Result<Self> {
        if !(gap_halfwidth > 0.0 && gap_halfwidth < 90.0) {
            return Err(Error::invalid("gap_halfwidth", "must lie in (0, 90) degrees"));
        }
        if !separator_angle.is_finite() {
            return Err(Error::invalid("separator_angle", "must be finite"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid("radius", "must be positive and finite"));
        }
        Ok(DiskProblem {
            gap_halfwidth,
            separator_angle: normalize_degrees(separator_angle),
            radius,
        })
    }

    pub fn gap_halfwidth(&self) -> f64 {
        self.gap_halfwidth
    }

    pub fn separator_angle(&self) -> f64 {
        self.separator_angle
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Angular measure of the support in degrees (352.8 at the defaults).
    pub fn support_measure(&self) -> f64 {
        FULL_TURN - 4.0 * self.gap_halfwidth
    }

    fn class_arc_len(&self) -> f64 {
        HALF_TURN - 2.0 * self.gap_halfwidth
    }

    /// Start angle of the arc carrying `label`; each class arc has length
    /// `180 - 2 * gap_halfwidth`.
    fn class_arc_start(&self, label: Label) -> f64 {
        match label {
            Label::Positive => self.separator_angle + self.gap_halfwidth,
            Label::Negative => self.separator_angle + HALF_TURN + self.gap_halfwidth,
        }
    }

    /// Whether a direction falls strictly inside one of the two gaps.
    pub fn in_gap(&self, angle: f64) -> bool {
        let rel = normalize_degrees(angle - self.separator_angle);
        let to_diameter = (rel % HALF_TURN).min(HALF_TURN - rel % HALF_TURN);
        to_diameter < self.gap_halfwidth
    }

    /// The exact labeling rule.
    pub fn true_label(&self, x: f64, y: f64) -> Result<Label> {
        let unsupported = Error::UnsupportedPoint { x, y };
        if !(x * x + y * y <= self.radius * self.radius) {
            return Err(unsupported);
        }
        let angle = y.atan2(x).to_degrees();
        if self.in_gap(angle) {
            return Err(unsupported);
        }
        let rel = normalize_degrees(angle - self.separator_angle);
        Ok(if rel < HALF_TURN {
            Label::Positive
        } else {
            Label::Negative
        })
    }

    /// Draws one point uniformly from the support.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> LabeledPoint {
        let arc = self.class_arc_len();
        let t = rng.random::<f64>() * self.support_measure();
        let (label, along) = if t < arc {
            (Label::Positive, t)
        } else {
            (Label::Negative, t - arc)
        };
        let angle = (self.class_arc_start(label) + along).to_radians();
        let r = self.radius * rng.random::<f64>().sqrt();
        let (sin, cos) = angle.sin_cos();
        LabeledPoint {
            x: r * cos,
            y: r * sin,
            label,
        }
    }

    /// `count` i.i.d. points, deterministic in `seed`.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<LabeledPoint> {
        let mut rng = seed::rng(seed);
        (0..count).map(|_| self.sample_point(&mut rng)).collect()
    }

    /// Exact true error of the half-plane classifier whose boundary is the
    /// diameter at `boundary_angle`.
    ///
    /// With `positive_side = Positive` the classifier predicts +1 on the
    /// directions `[boundary_angle, boundary_angle + 180)`, i.e. on the
    /// counterclockwise side of the boundary; `Negative` is the complement.
    pub fn linear_true_error(&self, boundary_angle: f64, positive_side: Label) -> f64 {
        let arc = self.class_arc_len();
        let pos_start = self.class_arc_start(Label::Positive);
        let neg_start = self.class_arc_start(Label::Negative);
        let side_start = normalize_degrees(boundary_angle);
        // Measure of the support on the side predicted +1 that is truly -1,
        // plus the measure predicted -1 that is truly +1.
        let false_pos = arc_overlap(side_start, HALF_TURN, neg_start, arc);
        let false_neg = arc - arc_overlap(side_start, HALF_TURN, pos_start, arc);
        let err = (false_pos + false_neg) / self.support_measure();
        let err = err.clamp(0.0, 1.0);
        match positive_side {
            Label::Positive => err,
            Label::Negative => 1.0 - err,
        }
    }

    /// Monte Carlo estimate of the true error of `h` on `test_count` fresh points.
    pub fn estimate_true_error(&self, h: &Hypothesis, test_count: usize, seed: u64) -> Result<f64> {
        if test_count < 1 {
            return Err(Error::InvalidCount(test_count));
        }
        let mut rng = seed::rng(seed);
        let mut features = vec![0.0; h.feature_map.output_dim()];
        let mut mistakes = 0usize;
        for _ in 0..test_count {
            let p = self.sample_point(&mut rng);
            h.feature_map.write_features(p.x, p.y, &mut features);
            if h.predict_features(&features) != p.label {
                mistakes += 1;
            }
        }
        Ok(mistakes as f64 / test_count as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledPoint {
    pub x: f64,
    pub y: f64,
    pub label: Label,
}

/// Map from a 2D input to the vector the weights act on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureMap {
    /// `(x, y)`.
    Identity,
    /// All monomials `x^i y^j` with `1 <= i + j <= degree`.
    Polynomial { degree: u32 },
}

impl FeatureMap {
    pub fn polynomial(degree: u32) -> Result<Self> {
        if degree < 1 {
            return Err(Error::InvalidDegree(degree));
        }
        Ok(FeatureMap::Polynomial { degree })
    }

    pub fn degree(&self) -> u32 {
        match *self {
            FeatureMap::Identity => 1,
            FeatureMap::Polynomial { degree } => degree,
        }
    }

    pub fn output_dim(&self) -> usize {
        let d = self.degree() as usize;
        d * (d + 3) / 2
    }

    /// Writes the features of `(x, y)` into `out`, which must hold exactly
    /// [`output_dim`](Self::output_dim) values.
    ///
    /// Order: by total degree, then by descending power of `x`:
    /// `x, y, x^2, xy, y^2, x^3, ...`.
    pub fn write_features(&self, x: f64, y: f64, out: &mut [f64]) {
        assert_eq!(out.len(), self.output_dim(), "feature buffer has wrong length");
        out[0] = x;
        out[1] = y;
        let mut prev = 0;
        for k in 2..=self.degree() as usize {
            let start = prev + k;
            for j in 0..k {
                out[start + j] = out[prev + j] * x;
            }
            out[start + k] = out[prev + k - 1] * y;
            prev = start;
        }
    }

    pub fn features(&self, x: f64, y: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.output_dim()];
        self.write_features(x, y, &mut out);
        out
    }
}

/// Monomials of `(x, y)` up to total degree `degree`.
pub fn poly_features(x: f64, y: f64, degree: u32) -> Result<Vec<f64>> {
    Ok(FeatureMap::polynomial(degree)?.features(x, y))
}

/// `sign(w . phi(x))` with ties predicting +1.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    weights: Vec<f64>,
    feature_map: FeatureMap,
}

impl Hypothesis {
    pub fn new(weights: Vec<f64>, feature_map: FeatureMap) -> Result<Self> {
        if weights.len() != feature_map.output_dim() {
            return Err(Error::invalid("weights", "length must equal the feature dimension"));
        }
        Ok(Hypothesis { weights, feature_map })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn feature_map(&self) -> FeatureMap {
        self.feature_map
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    pub fn score_features(&self, features: &[f64]) -> f64 {
        self.weights.iter().zip(features).map(|(w, f)| w * f).sum()
    }

    pub fn predict_features(&self, features: &[f64]) -> Label {
        Label::from_score(self.score_features(features))
    }

    pub fn predict(&self, x: f64, y: f64) -> Label {
        self.predict_features(&self.feature_map.features(x, y))
    }

    /// For an identity-map hypothesis, the boundary direction in degrees
    /// such that +1 is predicted on `[angle, angle + 180)`.
    pub fn linear_boundary(&self) -> Option<f64> {
        match self.feature_map {
            FeatureMap::Identity => {
                let normal = self.weights[1].atan2(self.weights[0]).to_degrees();
                Some(normalize_degrees(normal - 90.0))
            }
            FeatureMap::Polynomial { .. } => None,
        }
    }
}
