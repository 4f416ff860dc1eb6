//! Synthetic long-tailed classification data.
//!
//! Training-set class sizes follow the exponential subsampling law
//! `n_k = round(n_max * mu^(k / (K-1)))` with imbalance factor
//! `mu = 1/rho` (`rho = n_max / n_min` is the imbalance ratio), while the
//! test split stays balanced. Features are isotropic Gaussian clusters with
//! deterministically placed class means, so the skewed-class geometry is
//! preserved at desk scale without any image data.

use crate::math;
use crate::rng;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use rand_chacha::ChaCha8Rng;

/// Configuration of one synthetic long-tailed dataset.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LongTailConfig {
    /// Number of classes `K` (>= 2).
    pub num_classes: usize,
    /// Samples in the most frequent class (`n_max`).
    pub max_count: usize,
    /// Imbalance ratio `rho = n_max / n_min`, >= 1. `rho = 1` is balanced.
    pub imbalance_ratio: f64,
    pub feature_dim: usize,
    pub seed: u64,
    /// Minimum pairwise distance between class means.
    pub class_separation: f64,
    /// Balanced test split: samples per class.
    pub test_per_class: usize,
}

impl Default for LongTailConfig {
    fn default() -> Self {
        LongTailConfig {
            num_classes: 10,
            max_count: 200,
            imbalance_ratio: 1.0,
            feature_dim: 8,
            seed: 0,
            class_separation: 6.0,
            test_per_class: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Split::Train => write!(f, "train"),
            Split::Test => write!(f, "test"),
        }
    }
}

/// A labeled dataset with row-major features.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Dataset {
    pub num_classes: usize,
    pub feature_dim: usize,
    /// `len() * feature_dim` values, sample-major.
    pub features: Vec<f64>,
    pub labels: Vec<usize>,
    pub split: Split,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Feature row of sample `i`.
    pub fn sample(&self, i: usize) -> &[f64] {
        &self.features[i * self.feature_dim..(i + 1) * self.feature_dim]
    }

    /// Per-class label counts.
    pub fn class_histogram(&self) -> Vec<usize> {
        let mut h = vec![0usize; self.num_classes];
        for &l in &self.labels {
            h[l] += 1;
        }
        h
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LongTailError {
    /// `K = 1` makes the subsampling exponent 0/0; need at least 2 classes.
    TooFewClasses(usize),
    /// Ratio must be finite and >= 1.
    InvalidRatio(f64),
    /// Rounded count hit zero for this class; raise `max_count`.
    ZeroCount { class: usize },
    /// Weights need every count >= 1.
    EmptyClass { class: usize },
    InvalidConfig(&'static str),
}

impl fmt::Display for LongTailError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LongTailError::TooFewClasses(k) => write!(f, "need at least 2 classes, got {k}"),
            LongTailError::InvalidRatio(r) => {
                write!(f, "imbalance ratio must be finite and >= 1, got {r}")
            }
            LongTailError::ZeroCount { class } => {
                write!(f, "class {class} rounds to zero samples; raise max_count")
            }
            LongTailError::EmptyClass { class } => {
                write!(f, "class {class} has zero count")
            }
            LongTailError::InvalidConfig(msg) => write!(f, "invalid config: {msg}"),
        }
    }
}

impl core::error::Error for LongTailError {}

/// Per-class training counts `n_k = round(n_max * (1/rho)^(k/(K-1)))`,
/// rounded half up. Non-increasing; first entry is `n_max`, last is
/// `round(n_max / rho)`. A class rounding to zero is a configuration error.
pub fn class_counts(cfg: &LongTailConfig) -> Result<Vec<usize>, LongTailError> {
    if cfg.num_classes < 2 {
        return Err(LongTailError::TooFewClasses(cfg.num_classes));
    }
    if !(cfg.imbalance_ratio.is_finite() && cfg.imbalance_ratio >= 1.0) {
        return Err(LongTailError::InvalidRatio(cfg.imbalance_ratio));
    }
    if cfg.max_count == 0 {
        return Err(LongTailError::ZeroCount { class: 0 });
    }
    let k = cfg.num_classes;
    let mu = 1.0 / cfg.imbalance_ratio;
    let mut counts = Vec::with_capacity(k);
    for i in 0..k {
        let exponent = i as f64 / (k - 1) as f64;
        let exact = cfg.max_count as f64 * math::pow(mu, exponent);
        let n = math::round_half_up(exact) as usize;
        if n == 0 {
            return Err(LongTailError::ZeroCount { class: i });
        }
        counts.push(n);
    }
    Ok(counts)
}

/// Inverse-frequency class weights `total / (K * n_k)`, rescaled so the mean
/// weight is exactly 1 (keeps the weighted loss on the same scale as the
/// unweighted one; balanced counts give all-ones).
pub fn class_weights(counts: &[usize]) -> Result<Vec<f64>, LongTailError> {
    if counts.is_empty() {
        return Err(LongTailError::TooFewClasses(0));
    }
    for (class, &n) in counts.iter().enumerate() {
        if n == 0 {
            return Err(LongTailError::EmptyClass { class });
        }
    }
    let total: usize = counts.iter().sum();
    let k = counts.len() as f64;
    let mut weights: Vec<f64> =
        counts.iter().map(|&n| total as f64 / (k * n as f64)).collect();
    let mean = weights.iter().sum::<f64>() / k;
    for w in &mut weights {
        *w /= mean;
    }
    Ok(weights)
}

/// Deterministic class-mean placement: `K` standard normal points in
/// feature space, rescaled so the minimum pairwise distance is at least
/// `class_separation`.
pub fn class_means(cfg: &LongTailConfig) -> Vec<Vec<f64>> {
    place_means(&mut rng::seeded(cfg.seed), cfg)
}

fn place_means(rng: &mut ChaCha8Rng, cfg: &LongTailConfig) -> Vec<Vec<f64>> {
    let mut means: Vec<Vec<f64>> =
        (0..cfg.num_classes).map(|_| rng::normal_vec(rng, cfg.feature_dim)).collect();
    let mut min_dist = f64::INFINITY;
    for i in 0..means.len() {
        for j in (i + 1)..means.len() {
            let d2: f64 = means[i]
                .iter()
                .zip(&means[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            min_dist = min_dist.min(math::sqrt(d2));
        }
    }
    if min_dist > 0.0 && min_dist < cfg.class_separation {
        let scale = cfg.class_separation / min_dist;
        for m in &mut means {
            for v in m.iter_mut() {
                *v *= scale;
            }
        }
    }
    means
}

/// Generate the `(train, test)` pair. The train split follows
/// [`class_counts`] exactly (samples stored class-major); the test split has
/// `test_per_class` samples of every class. Bit-identical for a fixed seed.
pub fn generate(cfg: &LongTailConfig) -> Result<(Dataset, Dataset), LongTailError> {
    if cfg.feature_dim == 0 {
        return Err(LongTailError::InvalidConfig("feature_dim must be > 0"));
    }
    if cfg.test_per_class == 0 {
        return Err(LongTailError::InvalidConfig("test_per_class must be > 0"));
    }
    if !(cfg.class_separation.is_finite() && cfg.class_separation > 0.0) {
        return Err(LongTailError::InvalidConfig("class_separation must be > 0"));
    }
    let counts = class_counts(cfg)?;

    // one stream, fixed order: means, then train, then test
    let mut rng = rng::seeded(cfg.seed);
    let means = place_means(&mut rng, cfg);

    let draw = |rng: &mut ChaCha8Rng, counts: &[usize], split: Split| {
        let total: usize = counts.iter().sum();
        let mut features = Vec::with_capacity(total * cfg.feature_dim);
        let mut labels = Vec::with_capacity(total);
        for (class, &n) in counts.iter().enumerate() {
            for _ in 0..n {
                for &m in &means[class] {
                    features.push(m + rng::standard_normal(rng));
                }
                labels.push(class);
            }
        }
        Dataset {
            num_classes: cfg.num_classes,
            feature_dim: cfg.feature_dim,
            features,
            labels,
            split,
        }
    };

    let train = draw(&mut rng, &counts, Split::Train);
    let test_counts = vec![cfg.test_per_class; cfg.num_classes];
    let test = draw(&mut rng, &test_counts, Split::Test);
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(k: usize, n_max: usize, rho: f64) -> LongTailConfig {
        LongTailConfig {
            num_classes: k,
            max_count: n_max,
            imbalance_ratio: rho,
            feature_dim: 4,
            seed: 11,
            class_separation: 5.0,
            test_per_class: 8,
        }
    }

    #[test]
    fn counts_two_classes() {
        assert_eq!(class_counts(&cfg(2, 100, 4.0)).unwrap(), vec![100, 25]);
    }

    #[test]
    fn counts_balanced_degenerate() {
        assert_eq!(class_counts(&cfg(10, 100, 1.0)).unwrap(), vec![100; 10]);
    }

    #[test]
    fn counts_hundred_classes_ratio_hundred() {
        let counts = class_counts(&cfg(100, 500, 100.0)).unwrap();
        assert_eq!(counts[0], 500);
        assert_eq!(counts[99], 5);
        // frozen spot values from the 40-digit oracle
        assert_eq!(counts[1], 477);
        assert_eq!(counts[2], 456);
        assert_eq!(counts[50], 49);
        assert_eq!(counts[98], 5);
        assert!(counts.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn counts_error_paths() {
        assert!(matches!(class_counts(&cfg(1, 100, 2.0)), Err(LongTailError::TooFewClasses(1))));
        assert!(matches!(class_counts(&cfg(5, 100, 0.5)), Err(LongTailError::InvalidRatio(_))));
        // 1 * (1/10)^1 rounds to 0
        assert!(matches!(
            class_counts(&cfg(2, 1, 10.0)),
            Err(LongTailError::ZeroCount { class: 1 })
        ));
    }

    #[test]
    fn weights_examples() {
        assert_eq!(class_weights(&[100, 100]).unwrap(), vec![1.0, 1.0]);
        let w = class_weights(&[100, 25]).unwrap();
        // raw inverse-frequency weights [0.625, 2.5], mean-1 normalized
        assert!((w[0] - 0.4).abs() < 1e-15);
        assert!((w[1] - 1.6).abs() < 1e-15);
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        assert!((mean - 1.0).abs() < 1e-15);
        assert!(matches!(class_weights(&[10, 0]), Err(LongTailError::EmptyClass { class: 1 })));
    }

    #[test]
    fn generate_matches_counts_and_is_deterministic() {
        let c = cfg(5, 40, 8.0);
        let (train, test) = generate(&c).unwrap();
        assert_eq!(train.class_histogram(), class_counts(&c).unwrap());
        assert_eq!(test.class_histogram(), vec![8; 5]);
        assert_eq!(train.feature_dim, 4);
        assert!(train.features.iter().all(|v| v.is_finite()));

        let (train2, test2) = generate(&c).unwrap();
        assert_eq!(train, train2);
        assert_eq!(test, test2);

        let c3 = LongTailConfig { seed: 12, ..c };
        let (train3, _) = generate(&c3).unwrap();
        assert_ne!(train, train3);
    }

    #[test]
    fn generate_balanced_when_ratio_is_one() {
        let (train, _) = generate(&cfg(4, 30, 1.0)).unwrap();
        assert_eq!(train.class_histogram(), vec![30; 4]);
    }

    #[test]
    fn means_respect_separation() {
        let c = cfg(12, 10, 1.0);
        let means = class_means(&c);
        for i in 0..means.len() {
            for j in (i + 1)..means.len() {
                let d2: f64 = means[i]
                    .iter()
                    .zip(&means[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                assert!(
                    d2.sqrt() >= c.class_separation - 1e-9,
                    "means {i},{j} too close: {}",
                    d2.sqrt()
                );
            }
        }
    }
}
