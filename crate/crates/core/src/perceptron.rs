//! Perceptron training to zero training error.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::geometry::{FeatureMap, Hypothesis, Label, LabeledPoint};
use crate::seed;
use crate::{Error, Result};

pub const DEFAULT_MAX_UPDATES: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub max_updates: u64,
    /// Seeds the random unit vector the weights start from.
    pub seed: u64,
    pub feature_map: FeatureMap,
}

impl TrainConfig {
    pub fn new(feature_map: FeatureMap, seed: u64) -> Self {
        TrainConfig {
            max_updates: DEFAULT_MAX_UPDATES,
            seed,
            feature_map,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainResult {
    pub hypothesis: Hypothesis,
    pub updates: u64,
    pub sweeps: u64,
    /// Fraction of training points misclassified by `hypothesis`; always 0.
    pub training_error: f64,
}

/// A uniformly distributed unit vector of dimension `dim`.
pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Trains from a random unit vector drawn with `config.seed`.
pub fn train(points: &[LabeledPoint], config: &TrainConfig) -> Result<TrainResult> {
    if config.max_updates < 1 {
        return Err(Error::invalid("max_updates", "must be at least 1"));
    }
    let mut rng = seed::rng(config.seed);
    let initial = random_unit_vector(config.feature_map.output_dim(), &mut rng);
    train_from(points, initial, config.feature_map, config.max_updates)
}

/// Runs the perceptron rule `w <- w + y * phi(x)` from explicit starting
/// weights, sweeping the points in order until a sweep makes no update.
pub fn train_from(
    points: &[LabeledPoint],
    initial_weights: Vec<f64>,
    feature_map: FeatureMap,
    max_updates: u64,
) -> Result<TrainResult> {
    if points.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let dim = feature_map.output_dim();
    if initial_weights.len() != dim {
        return Err(Error::invalid(
            "initial_weights",
            "length must equal the feature dimension",
        ));
    }
    let mut features = alloc::vec![0.0; points.len() * dim];
    for (row, p) in features.chunks_exact_mut(dim).zip(points) {
        feature_map.write_features(p.x, p.y, row);
    }

    let mut weights = initial_weights;
    let mut updates = 0u64;
    let mut sweeps = 0u64;
    loop {
        sweeps += 1;
        let mut clean = true;
        for (row, p) in features.chunks_exact(dim).zip(points) {
            let score: f64 = weights.iter().zip(row).map(|(w, f)| w * f).sum();
            if Label::from_score(score) != p.label {
                if updates == max_updates {
                    return Err(Error::UpdateBudgetExceeded { max_updates });
                }
                let y = p.label.sign();
                for (w, f) in weights.iter_mut().zip(row) {
                    *w += y * f;
                }
                updates += 1;
                clean = false;
            }
        }
        if clean {
            break;
        }
    }

    let hypothesis = Hypothesis::new(weights, feature_map)?;
    let mistakes = features
        .chunks_exact(dim)
        .zip(points)
        .filter(|(row, p)| hypothesis.predict_features(row) != p.label)
        .count();
    debug_assert_eq!(mistakes, 0);
    Ok(TrainResult {
        hypothesis,
        updates,
        sweeps,
        training_error: mistakes as f64 / points.len() as f64,
    })
}
