//! Self-training benchmark on synthetic generators with known causal
//! category.
//!
//! The causal generator draws features from one smooth density and labels
//! them through a noisy threshold, so the feature marginal carries nothing
//! about the boundary. The anticausal generator draws the class first and
//! features from class-conditional Gaussians, giving the marginal a cluster
//! structure aligned with the classes. Self-training against a base
//! classifier should only help in the second case.

use rand::Rng;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, ExecMode};
use crate::seeding::{rng_for, split_seed};

/// Causal-category tag for generated datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Category {
    Causal,
    Anticausal,
}

/// Anticausal generator: class means 0 and 3 at unit variance.
const ANTICAUSAL_SEPARATION: f64 = 3.0;
/// Causal generator: label noise added to the cubic boundary score.
const CAUSAL_LABEL_NOISE: f64 = 0.5;
const N_CLASSES: usize = 2;

/// Features with class labels and a labeled/unlabeled mask.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
    labeled: Vec<bool>,
    n_classes: usize,
}

impl LabeledDataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<usize>, labeled: Vec<bool>) -> Result<Self> {
        if features.len() != labels.len() || features.len() != labeled.len() {
            return Err(Error::InvalidDataset("column lengths differ".into()));
        }
        if features.is_empty() {
            return Err(Error::InvalidDataset("no samples".into()));
        }
        let dim = features[0].len();
        if dim == 0 || dim > 3 {
            return Err(Error::InvalidDataset(format!(
                "feature dimension must be 1..=3, got {dim}"
            )));
        }
        if features.iter().any(|f| f.len() != dim) {
            return Err(Error::InvalidDataset("ragged features".into()));
        }
        let n_classes = labels.iter().max().map_or(0, |m| m + 1);
        for class in 0..n_classes {
            let has_labeled = labels
                .iter()
                .zip(labeled.iter())
                .any(|(&l, &m)| m && l == class);
            if !has_labeled {
                return Err(Error::InvalidDataset(format!(
                    "class {class} has no labeled sample"
                )));
            }
        }
        Ok(Self {
            features,
            labels,
            labeled,
            n_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        false // n >= 1 by construction
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn labeled_mask(&self) -> &[bool] {
        &self.labeled
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn labeled_subset(&self) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut feats = Vec::new();
        let mut labs = Vec::new();
        for i in 0..self.len() {
            if self.labeled[i] {
                feats.push(self.features[i].clone());
                labs.push(self.labels[i]);
            }
        }
        (feats, labs)
    }
}

/// Causal dataset: X ~ N(0,1) drawn first, then
/// `Y = 1{ X^3 + noise > 0 }`. The feature marginal is the same smooth
/// unimodal density whatever the labels turn out to be.
pub fn generate_causal(n_labeled: usize, n_unlabeled: usize, seed: u64) -> Result<LabeledDataset> {
    if n_labeled < 2 * N_CLASSES {
        return Err(Error::InvalidArgument(format!(
            "need at least {} labeled points, got {n_labeled}",
            2 * N_CLASSES
        )));
    }
    let n = n_labeled + n_unlabeled;
    for attempt in 0.. {
        let mut rng_x = rng_for(seed, 2 * attempt);
        let mut rng_noise = rng_for(seed, 2 * attempt + 1);
        let xs: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng_x)).collect();
        let labels: Vec<usize> = xs
            .iter()
            .map(|&x| {
                let score = x.powi(3) + CAUSAL_LABEL_NOISE * standard_normal(&mut rng_noise);
                usize::from(score > 0.0)
            })
            .collect();
        let labeled: Vec<bool> = (0..n).map(|i| i < n_labeled).collect();
        let features = xs.into_iter().map(|x| vec![x]).collect();
        if let Ok(data) = LabeledDataset::new(features, labels, labeled) {
            return Ok(data);
        }
    }
    unreachable!("rejection sampling terminates");
}

/// Anticausal dataset: Y ~ Bernoulli(1/2) drawn first, then
/// `X | Y ~ N(3Y, 1)`. The feature marginal is a two-cluster mixture
/// aligned with the classes.
pub fn generate_anticausal(
    n_labeled: usize,
    n_unlabeled: usize,
    seed: u64,
) -> Result<LabeledDataset> {
    if n_labeled < 2 * N_CLASSES {
        return Err(Error::InvalidArgument(format!(
            "need at least {} labeled points, got {n_labeled}",
            2 * N_CLASSES
        )));
    }
    let n = n_labeled + n_unlabeled;
    for attempt in 0.. {
        let mut rng_y = rng_for(seed, 2 * attempt);
        let mut rng_x = rng_for(seed, 2 * attempt + 1);
        let labels: Vec<usize> = (0..n).map(|_| usize::from(rng_y.gen::<f64>() < 0.5)).collect();
        let features: Vec<Vec<f64>> = labels
            .iter()
            .map(|&y| {
                vec![ANTICAUSAL_SEPARATION * y as f64 + standard_normal(&mut rng_x)]
            })
            .collect();
        let labeled: Vec<bool> = (0..n).map(|i| i < n_labeled).collect();
        if let Ok(data) = LabeledDataset::new(features, labels, labeled) {
            return Ok(data);
        }
    }
    unreachable!("rejection sampling terminates");
}

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller keeps the generators free of distribution-crate versioning.
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Base classifier families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClassifierKind {
    /// Per-class means with a shared diagonal variance; posteriors are
    /// continuous scores.
    Generative,
    /// 1-nearest-neighbor; posteriors are hard 0/1.
    OneNearestNeighbor,
}

/// A trained classifier.
#[derive(Debug, Clone)]
pub enum TrainedClassifier {
    Generative {
        means: Vec<Vec<f64>>,
        variances: Vec<f64>,
        log_priors: Vec<f64>,
        n_classes: usize,
    },
    OneNearestNeighbor {
        points: Vec<Vec<f64>>,
        labels: Vec<usize>,
        n_classes: usize,
    },
}

impl ClassifierKind {
    pub fn train(
        &self,
        features: &[Vec<f64>],
        labels: &[usize],
        n_classes: usize,
    ) -> Result<TrainedClassifier> {
        if features.is_empty() {
            return Err(Error::NoLabeledData);
        }
        match self {
            ClassifierKind::Generative => {
                let dim = features[0].len();
                let mut counts = vec![0usize; n_classes];
                let mut means = vec![vec![0.0; dim]; n_classes];
                for (f, &l) in features.iter().zip(labels) {
                    counts[l] += 1;
                    for d in 0..dim {
                        means[l][d] += f[d];
                    }
                }
                for c in 0..n_classes {
                    if counts[c] > 0 {
                        for d in 0..dim {
                            means[c][d] /= counts[c] as f64;
                        }
                    }
                }
                let mut variances = vec![0.0; dim];
                for (f, &l) in features.iter().zip(labels) {
                    for d in 0..dim {
                        let diff = f[d] - means[l][d];
                        variances[d] += diff * diff;
                    }
                }
                let denom = (features.len().saturating_sub(n_classes)).max(1) as f64;
                for v in &mut variances {
                    *v = (*v / denom).max(1e-9);
                }
                let total = features.len() as f64;
                let log_priors = counts
                    .iter()
                    .map(|&c| ((c.max(1)) as f64 / total).ln())
                    .collect();
                Ok(TrainedClassifier::Generative {
                    means,
                    variances,
                    log_priors,
                    n_classes,
                })
            }
            ClassifierKind::OneNearestNeighbor => Ok(TrainedClassifier::OneNearestNeighbor {
                points: features.to_vec(),
                labels: labels.to_vec(),
                n_classes,
            }),
        }
    }
}

impl TrainedClassifier {
    /// Class probabilities at `x`.
    pub fn posteriors(&self, x: &[f64]) -> Vec<f64> {
        match self {
            TrainedClassifier::Generative {
                means,
                variances,
                log_priors,
                n_classes,
            } => {
                let mut logs = Vec::with_capacity(*n_classes);
                for c in 0..*n_classes {
                    let mut ll = log_priors[c];
                    for d in 0..x.len() {
                        let diff = x[d] - means[c][d];
                        ll -= 0.5 * diff * diff / variances[d];
                    }
                    logs.push(ll);
                }
                let max = logs.iter().cloned().fold(f64::MIN, f64::max);
                let weights: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
                let sum: f64 = weights.iter().sum();
                weights.into_iter().map(|w| w / sum).collect()
            }
            TrainedClassifier::OneNearestNeighbor {
                points,
                labels,
                n_classes,
            } => {
                let mut best = (f64::MAX, 0usize);
                for (p, &l) in points.iter().zip(labels) {
                    let d: f64 = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                    if d < best.0 {
                        best = (d, l);
                    }
                }
                let mut probs = vec![0.0; *n_classes];
                probs[best.1] = 1.0;
                probs
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let probs = self.posteriors(x);
        let mut best = (0usize, f64::MIN);
        for (c, &p) in probs.iter().enumerate() {
            if p > best.1 {
                best = (c, p);
            }
        }
        best.0
    }

    pub fn error_rate(&self, features: &[Vec<f64>], labels: &[usize]) -> f64 {
        let wrong = features
            .iter()
            .zip(labels)
            .filter(|(f, &l)| self.predict(f) != l)
            .count();
        wrong as f64 / features.len() as f64
    }
}

/// Iterative pseudo-labeling: train on the labeled pool, absorb unlabeled
/// points whose top posterior clears `confidence_threshold`, repeat until
/// nothing qualifies or `max_rounds` is reached. With no unlabeled data the
/// first round finds nothing and the base classifier comes back unchanged.
pub fn self_train(
    data: &LabeledDataset,
    base: ClassifierKind,
    confidence_threshold: f64,
    max_rounds: usize,
) -> Result<TrainedClassifier> {
    if !(confidence_threshold > 0.5 && confidence_threshold <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "confidence threshold must lie in (0.5, 1], got {confidence_threshold}"
        )));
    }
    if max_rounds == 0 {
        return Err(Error::InvalidArgument("max_rounds must be positive".into()));
    }
    let (mut pool_feats, mut pool_labels) = data.labeled_subset();
    if pool_feats.is_empty() {
        return Err(Error::NoLabeledData);
    }
    let mut remaining: Vec<usize> = (0..data.len()).filter(|&i| !data.labeled_mask()[i]).collect();
    let mut clf = base.train(&pool_feats, &pool_labels, data.n_classes())?;
    for _ in 0..max_rounds {
        let mut qualified = Vec::new();
        let mut rest = Vec::new();
        for &i in &remaining {
            let probs = clf.posteriors(&data.features()[i]);
            let (class, conf) = probs
                .iter()
                .enumerate()
                .fold((0usize, f64::MIN), |acc, (c, &p)| {
                    if p > acc.1 {
                        (c, p)
                    } else {
                        acc
                    }
                });
            if conf >= confidence_threshold {
                qualified.push((i, class));
            } else {
                rest.push(i);
            }
        }
        if qualified.is_empty() {
            break;
        }
        for (i, class) in qualified {
            pool_feats.push(data.features()[i].clone());
            pool_labels.push(class);
        }
        remaining = rest;
        clf = base.train(&pool_feats, &pool_labels, data.n_classes())?;
    }
    Ok(clf)
}

/// Alternative hypothesis for the signed-rank test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Alternative {
    TwoSided,
    Greater,
}

/// Minimum count of nonzero differences.
pub const MIN_NONZERO_DIFFERENCES: usize = 5;
/// Largest sample handled by the exact signed-rank distribution.
const EXACT_LIMIT: usize = 20;

/// Wilcoxon signed-rank p-value for the hypothesis that `differences` are
/// symmetric around zero.
///
/// Exact distribution (all `2^m` sign patterns, tie-aware average ranks) for
/// `m <= 20`; tie-corrected normal approximation with continuity correction
/// above that. Exact zeros are dropped first.
pub fn wilcoxon_signed_rank(differences: &[f64], alternative: Alternative) -> Result<f64> {
    let nonzero: Vec<f64> = differences.iter().copied().filter(|d| *d != 0.0).collect();
    let m = nonzero.len();
    if m < MIN_NONZERO_DIFFERENCES {
        return Err(Error::TooFewNonzero {
            got: m,
            needed: MIN_NONZERO_DIFFERENCES,
        });
    }
    let ranks = average_ranks(&nonzero);
    let w_plus: f64 = nonzero
        .iter()
        .zip(ranks.iter())
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| *r)
        .sum();

    if m <= EXACT_LIMIT {
        // Average ranks are multiples of 1/2, so doubled ranks index exactly.
        let ranks2: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
        let total: usize = ranks2.iter().sum();
        let mut counts = vec![0.0_f64; total + 1];
        counts[0] = 1.0;
        for &r in &ranks2 {
            for w in (r..=total).rev() {
                counts[w] += counts[w - r];
            }
        }
        let scale = 0.5_f64.powi(m as i32);
        let w2 = (2.0 * w_plus).round() as usize;
        let p_ge: f64 = counts[w2..].iter().sum::<f64>() * scale;
        let p_le: f64 = counts[..=w2].iter().sum::<f64>() * scale;
        let p = match alternative {
            Alternative::Greater => p_ge,
            Alternative::TwoSided => (2.0 * p_ge.min(p_le)).min(1.0),
        };
        return Ok(p);
    }

    let mf = m as f64;
    let mu = mf * (mf + 1.0) / 4.0;
    let tie_term: f64 = tie_group_sizes(&nonzero)
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum::<f64>()
        / 48.0;
    let sigma = (mf * (mf + 1.0) * (2.0 * mf + 1.0) / 24.0 - tie_term).sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let p = match alternative {
        Alternative::Greater => 1.0 - normal.cdf((w_plus - mu - 0.5) / sigma),
        Alternative::TwoSided => {
            let z = ((w_plus - mu).abs() - 0.5).max(0.0) / sigma;
            (2.0 * (1.0 - normal.cdf(z))).min(1.0)
        }
    };
    Ok(p)
}

/// 1-based ranks of `|d|` with ties averaged.
fn average_ranks(differences: &[f64]) -> Vec<f64> {
    let m = differences.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        differences[a]
            .abs()
            .partial_cmp(&differences[b].abs())
            .expect("finite differences")
    });
    let mut ranks = vec![0.0; m];
    let mut i = 0;
    while i < m {
        let mut j = i;
        while j + 1 < m
            && differences[order[j + 1]].abs() == differences[order[i]].abs()
        {
            j += 1;
        }
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn tie_group_sizes(differences: &[f64]) -> Vec<usize> {
    let mut mags: Vec<f64> = differences.iter().map(|d| d.abs()).collect();
    mags.sort_by(|a, b| a.partial_cmp(b).expect("finite differences"));
    let mut groups = Vec::new();
    let mut i = 0;
    while i < mags.len() {
        let mut j = i;
        while j + 1 < mags.len() && mags[j + 1] == mags[i] {
            j += 1;
        }
        groups.push(j - i + 1);
        i = j + 1;
    }
    groups
}

/// One benchmark trial's scores.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub base_error: f64,
    pub self_train_error: f64,
    /// `(base - self) / base`; absent when the base error is zero.
    pub relative_decrease: Option<f64>,
}

/// Aggregated benchmark outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub category: Category,
    pub n_labeled: usize,
    pub n_unlabeled: usize,
    pub trials: Vec<TrialRecord>,
    pub mean_relative_decrease: f64,
    pub wilcoxon_pvalue: f64,
    pub zero_base_error_trials: usize,
}

/// Benchmark configuration; defaults follow the library-wide conventions.
#[derive(Debug, Clone, Copy)]
pub struct BenchConfig {
    pub trials: usize,
    pub n_labeled: usize,
    pub n_unlabeled: usize,
    pub seed: u64,
    pub base: ClassifierKind,
    pub confidence_threshold: f64,
    pub max_rounds: usize,
    pub test_size: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            trials: 100,
            n_labeled: 10,
            n_unlabeled: 500,
            seed: 0,
            base: ClassifierKind::Generative,
            confidence_threshold: 0.8,
            max_rounds: 10,
            test_size: 1000,
        }
    }
}

/// Runs `trials` independent comparisons of the base classifier against its
/// self-trained extension, each scored on a fresh held-out test draw, and
/// aggregates the relative error decrease with a one-sided signed-rank test.
pub fn run_benchmark(category: Category, config: &BenchConfig) -> Result<BenchReport> {
    run_benchmark_with(ExecMode::default(), category, config)
}

/// [`run_benchmark`] with an explicit execution strategy for the trial loop.
pub fn run_benchmark_with(
    mode: ExecMode,
    category: Category,
    config: &BenchConfig,
) -> Result<BenchReport> {
    if config.trials < 20 {
        return Err(Error::InvalidArgument(format!(
            "need at least 20 trials, got {}",
            config.trials
        )));
    }
    let generate = match category {
        Category::Causal => generate_causal,
        Category::Anticausal => generate_anticausal,
    };
    let outcomes = map_indexed(mode, config.trials, |t| -> Result<TrialRecord> {
        let train_seed = split_seed(config.seed, 2 * t as u64);
        let test_seed = split_seed(config.seed, 2 * t as u64 + 1);
        let data = generate(config.n_labeled, config.n_unlabeled, train_seed)?;
        let test = generate(config.test_size, 0, test_seed)?;
        let (labeled_feats, labeled_labels) = data.labeled_subset();
        let base_clf = config
            .base
            .train(&labeled_feats, &labeled_labels, data.n_classes())?;
        let self_clf = self_train(&data, config.base, config.confidence_threshold, config.max_rounds)?;
        let base_error = base_clf.error_rate(test.features(), test.labels());
        let self_error = self_clf.error_rate(test.features(), test.labels());
        let relative_decrease = if base_error > 0.0 {
            Some((base_error - self_error) / base_error)
        } else {
            None
        };
        Ok(TrialRecord {
            trial: t,
            base_error,
            self_train_error: self_error,
            relative_decrease,
        })
    });
    let mut trials = Vec::with_capacity(config.trials);
    for outcome in outcomes {
        trials.push(outcome?);
    }
    let included: Vec<f64> = trials.iter().filter_map(|t| t.relative_decrease).collect();
    let zero_base_error_trials = trials.len() - included.len();
    let mean_relative_decrease = if included.is_empty() {
        0.0
    } else {
        included.iter().sum::<f64>() / included.len() as f64
    };
    let differences: Vec<f64> = trials
        .iter()
        .map(|t| t.base_error - t.self_train_error)
        .collect();
    let wilcoxon_pvalue = wilcoxon_signed_rank(&differences, Alternative::Greater)?;
    Ok(BenchReport {
        category,
        n_labeled: config.n_labeled,
        n_unlabeled: config.n_unlabeled,
        trials,
        mean_relative_decrease,
        wilcoxon_pvalue,
        zero_base_error_trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn normal_pdf(x: f64, mu: f64) -> f64 {
        (-0.5 * (x - mu) * (x - mu)).exp() / (2.0 * std::f64::consts::PI).sqrt()
    }

    #[test]
    fn generators_are_deterministic() {
        let a = generate_causal(10, 50, 7).unwrap();
        let b = generate_causal(10, 50, 7).unwrap();
        assert_eq!(a.features(), b.features());
        assert_eq!(a.labels(), b.labels());
        let c = generate_anticausal(10, 50, 7).unwrap();
        let d = generate_anticausal(10, 50, 7).unwrap();
        assert_eq!(c.features(), d.features());
        assert_eq!(c.labels(), d.labels());
    }

    #[test]
    fn causal_class_balance_is_moderate() {
        for seed in 0..100 {
            let data = generate_causal(10, 500, seed).unwrap();
            let ones = data.labels().iter().filter(|&&l| l == 1).count();
            let balance = ones as f64 / data.len() as f64;
            assert!((0.3..=0.7).contains(&balance), "seed {seed}: {balance}");
        }
    }

    #[test]
    fn anticausal_bayes_error_is_small() {
        // Equal-prior Gaussians at separation 3 sigma: error Phi(-1.5) < 7%.
        let normal = Normal::new(0.0, 1.0).unwrap();
        assert!(normal.cdf(-ANTICAUSAL_SEPARATION / 2.0) < 0.07);
        // And empirically, the Bayes rule (threshold at the midpoint) is
        // close to that on generated data.
        let data = generate_anticausal(5000, 0, 3).unwrap();
        let mid = ANTICAUSAL_SEPARATION / 2.0;
        let wrong = data
            .features()
            .iter()
            .zip(data.labels())
            .filter(|(f, &l)| usize::from(f[0] > mid) != l)
            .count();
        assert!((wrong as f64 / data.len() as f64) < 0.08);
    }

    #[test]
    fn anticausal_marginal_is_bimodal() {
        // Mixture density dips between the modes for separation >= 2 sigma.
        let mid = ANTICAUSAL_SEPARATION / 2.0;
        let at_mode = 0.5 * normal_pdf(0.0, 0.0) + 0.5 * normal_pdf(0.0, ANTICAUSAL_SEPARATION);
        let at_mid = 0.5 * normal_pdf(mid, 0.0) + 0.5 * normal_pdf(mid, ANTICAUSAL_SEPARATION);
        assert!(at_mid < at_mode);
    }

    #[test]
    fn empty_unlabeled_pool_reduces_to_base() {
        let data = generate_anticausal(40, 0, 11).unwrap();
        let (feats, labels) = data.labeled_subset();
        let base = ClassifierKind::Generative
            .train(&feats, &labels, data.n_classes())
            .unwrap();
        let st = self_train(&data, ClassifierKind::Generative, 0.8, 10).unwrap();
        let mut rng = rng_for(12, 0);
        for _ in 0..10_000 {
            let x = vec![rng.gen_range(-5.0..8.0)];
            assert_eq!(base.predict(&x), st.predict(&x));
        }
    }

    #[test]
    fn unreachable_threshold_means_no_pseudo_labels() {
        let data = generate_anticausal(20, 200, 13).unwrap();
        let (feats, labels) = data.labeled_subset();
        let base = ClassifierKind::Generative
            .train(&feats, &labels, data.n_classes())
            .unwrap();
        let st = self_train(&data, ClassifierKind::Generative, 1.0, 10).unwrap();
        for f in data.features().iter().take(200) {
            assert_eq!(base.predict(f), st.predict(f));
        }
    }

    #[test]
    fn self_training_helps_on_clustered_data() {
        let mut base_total = 0.0;
        let mut self_total = 0.0;
        for seed in 0..25 {
            let data = generate_anticausal(10, 500, seed).unwrap();
            let test = generate_anticausal(1000, 0, seed + 10_000).unwrap();
            let (feats, labels) = data.labeled_subset();
            let base = ClassifierKind::Generative
                .train(&feats, &labels, data.n_classes())
                .unwrap();
            let st = self_train(&data, ClassifierKind::Generative, 0.8, 10).unwrap();
            base_total += base.error_rate(test.features(), test.labels());
            self_total += st.error_rate(test.features(), test.labels());
        }
        assert!(
            self_total < base_total,
            "self-train {self_total} vs base {base_total}"
        );
    }

    #[test]
    fn five_positive_differences_give_exact_p() {
        let p = wilcoxon_signed_rank(&[1.0, 2.0, 3.0, 4.0, 5.0], Alternative::Greater).unwrap();
        assert_eq!(p, 0.03125);
    }

    #[test]
    fn antisymmetric_differences_are_uninformative() {
        let p = wilcoxon_signed_rank(
            &[1.0, -1.0, 2.0, -2.0, 3.0, -3.0],
            Alternative::TwoSided,
        )
        .unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn zeros_are_dropped_and_counted() {
        assert!(matches!(
            wilcoxon_signed_rank(&[0.0, 0.0, 1.0, 2.0, -1.0, 0.0], Alternative::Greater),
            Err(Error::TooFewNonzero { got: 3, needed: 5 })
        ));
    }

    #[test]
    fn exact_matches_brute_enumeration() {
        // Independent oracle: walk all 2^m sign patterns directly.
        let mut rng = rng_for(99, 0);
        for trial in 0..40 {
            let m = 5 + (trial % 8);
            let diffs: Vec<f64> = (0..m)
                .map(|_| {
                    let v = (rng.gen_range(-4i32..=4) as f64) / 2.0;
                    if v == 0.0 {
                        0.25
                    } else {
                        v
                    }
                })
                .collect();
            let ranks = average_ranks(&diffs);
            let w_obs: f64 = diffs
                .iter()
                .zip(&ranks)
                .filter(|(d, _)| **d > 0.0)
                .map(|(_, r)| *r)
                .sum();
            let mut ge = 0u64;
            let mut le = 0u64;
            for mask in 0u64..(1 << m) {
                let w: f64 = (0..m)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| ranks[i])
                    .sum();
                if w >= w_obs {
                    ge += 1;
                }
                if w <= w_obs {
                    le += 1;
                }
            }
            let total = (1u64 << m) as f64;
            let oracle_greater = ge as f64 / total;
            let oracle_two = (2.0 * (ge as f64 / total).min(le as f64 / total)).min(1.0);
            let p_greater = wilcoxon_signed_rank(&diffs, Alternative::Greater).unwrap();
            let p_two = wilcoxon_signed_rank(&diffs, Alternative::TwoSided).unwrap();
            assert!(
                (p_greater - oracle_greater).abs() < 1e-15,
                "greater mismatch on {diffs:?}"
            );
            assert!((p_two - oracle_two).abs() < 1e-15, "two-sided mismatch on {diffs:?}");
        }
    }

    #[test]
    fn benchmark_is_bit_deterministic() {
        let cfg = BenchConfig {
            trials: 20,
            n_unlabeled: 100,
            ..BenchConfig::default()
        };
        let a = run_benchmark(Category::Anticausal, &cfg).unwrap();
        let b = run_benchmark(Category::Anticausal, &cfg).unwrap();
        assert_eq!(a, b);
        let seq = run_benchmark_with(ExecMode::Sequential, Category::Anticausal, &cfg).unwrap();
        assert_eq!(a, seq);
    }
}
