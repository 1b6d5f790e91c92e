//! Adaptation recipes for dataset shift, composed from the ANM and spectral
//! primitives: covariate shift, prior probability shift, output-change
//! localization with conditional re-estimation, and concept drift.

use serde::Serialize;

use crate::anm::{fit_anm, AnmConfig, Direction};
use crate::density::{
    check_steps, estimate_density, estimate_density_on_grid, sample_std, Bandwidth, GridDensity,
};
use crate::discrete::{DiscreteDistribution, StochasticMatrix};
use crate::error::{Error, Result};
use crate::regression::KernelRegressor;
use crate::spectral::{estimate_new_noise, localize_change, LocalizeConfig, ShiftDiagnosis, ShiftVerdict};
use crate::Dataset;

/// Whether a conditional models effect-given-cause or is used backwards
/// through Bayes' rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModelKind {
    /// Models `P(effect | cause)` directly.
    Causal,
    /// Models `P(input | cause)` and predicts the cause via Bayes' rule.
    Anticausal,
}

/// An evaluable mechanism.
#[derive(Debug, Clone)]
pub enum Mechanism {
    Identity,
    Affine { slope: f64, intercept: f64 },
    Fitted(KernelRegressor),
}

impl Mechanism {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Mechanism::Identity => x,
            Mechanism::Affine { slope, intercept } => slope * x + intercept,
            Mechanism::Fitted(r) => r.predict(x),
        }
    }
}

/// A conditional distribution as mechanism plus additive noise, optionally
/// with the cause marginal needed for anticausal use.
#[derive(Debug, Clone)]
pub struct ConditionalModel {
    pub kind: ModelKind,
    pub mechanism: Mechanism,
    pub noise: GridDensity,
    pub cause_marginal: Option<GridDensity>,
}

impl ConditionalModel {
    pub fn new(
        kind: ModelKind,
        mechanism: Mechanism,
        noise: GridDensity,
        cause_marginal: Option<GridDensity>,
    ) -> Result<Self> {
        if kind == ModelKind::Anticausal && cause_marginal.is_none() {
            return Err(Error::InvalidArgument(
                "anticausal models require a cause marginal".into(),
            ));
        }
        Ok(Self {
            kind,
            mechanism,
            noise,
            cause_marginal,
        })
    }
}

/// Importance-weighted refit configuration.
#[derive(Debug, Clone, Copy)]
pub struct CovariateShiftConfig {
    pub bandwidth: Bandwidth,
    /// Importance weights are clipped to `[0, w_max]`.
    pub w_max: f64,
    /// Minimum effective sample size `(sum w)^2 / sum w^2`.
    pub min_ess: f64,
}

impl Default for CovariateShiftConfig {
    fn default() -> Self {
        Self {
            bandwidth: Bandwidth::Auto,
            w_max: 10.0,
            min_ess: 10.0,
        }
    }
}

/// Refits the regression under a changed input marginal with clipped
/// importance weights `P'(x) / P(x)`. The conditional itself is unchanged by
/// assumption; only its finite-sample estimate is reweighted.
pub fn covariate_shift_refit(
    data: &Dataset,
    new_input_density: &GridDensity,
    old_input_density: &GridDensity,
    config: &CovariateShiftConfig,
) -> Result<KernelRegressor> {
    if data.len() < crate::anm::MIN_ANM_POINTS {
        return Err(Error::InsufficientData {
            needed: crate::anm::MIN_ANM_POINTS,
            got: data.len(),
        });
    }
    check_steps(new_input_density, old_input_density)?;
    let weights: Vec<f64> = data
        .xs()
        .iter()
        .map(|&x| {
            let p_new = new_input_density.value_at(x);
            let p_old = old_input_density.value_at(x);
            if p_old <= 1e-300 {
                if p_new <= 1e-300 {
                    1.0
                } else {
                    config.w_max
                }
            } else {
                (p_new / p_old).min(config.w_max)
            }
        })
        .collect();
    let sum: f64 = weights.iter().sum();
    let sum_sq: f64 = weights.iter().map(|w| w * w).sum();
    let ess = if sum_sq > 0.0 { sum * sum / sum_sq } else { 0.0 };
    if ess < config.min_ess {
        return Err(Error::WeightDegenerate {
            ess,
            min_ess: config.min_ess,
        });
    }
    KernelRegressor::fit_weighted(data.xs(), data.ys(), &weights, config.bandwidth)
}

/// A marginal over the cause, either gridded or discrete.
#[derive(Debug, Clone)]
pub enum Belief {
    Continuous(GridDensity),
    Discrete(DiscreteDistribution),
}

/// Posterior over the cause given one observed effect value, via
/// `posterior(y) ∝ noise(x - mechanism(y)) * prior(y)`.
///
/// A continuous prior must share the grid of the model's cause marginal; a
/// discrete prior is taken over the class indices `0..K`, mapped through the
/// mechanism.
pub fn bayes_posterior(model: &ConditionalModel, x: f64, prior: &Belief) -> Result<Belief> {
    if model.kind != ModelKind::Anticausal {
        return Err(Error::InvalidArgument(
            "bayes_posterior needs an anticausal model".into(),
        ));
    }
    match prior {
        Belief::Continuous(prior) => {
            let marginal = model
                .cause_marginal
                .as_ref()
                .expect("anticausal models carry a cause marginal");
            if (prior.origin() - marginal.origin()).abs() > 1e-9
                || (prior.step() - marginal.step()).abs() > crate::density::STEP_TOL
                || prior.len() != marginal.len()
            {
                return Err(Error::GridMismatch(
                    "prior must share the grid of the cause marginal".into(),
                ));
            }
            let weights: Vec<f64> = (0..prior.len())
                .map(|i| {
                    let y = prior.coord(i);
                    model.noise.value_at(x - model.mechanism.eval(y)) * prior.values()[i]
                })
                .collect();
            let normalizer: f64 = weights.iter().sum::<f64>() * prior.step();
            if normalizer < 1e-300 {
                return Err(Error::ZeroEvidence(format!(
                    "observation {x} unexplainable under the model"
                )));
            }
            Ok(Belief::Continuous(GridDensity::new(
                prior.origin(),
                prior.step(),
                weights,
            )?))
        }
        Belief::Discrete(prior) => {
            let weights: Vec<f64> = prior
                .probs()
                .iter()
                .enumerate()
                .map(|(k, &p)| model.noise.value_at(x - model.mechanism.eval(k as f64)) * p)
                .collect();
            let normalizer: f64 = weights.iter().sum();
            if normalizer < 1e-300 {
                return Err(Error::ZeroEvidence(format!(
                    "observation {x} unexplainable under the model"
                )));
            }
            Ok(Belief::Discrete(DiscreteDistribution::from_weights(
                weights,
            )?))
        }
    }
}

/// Posterior over the cause per observed state under a new cause prior,
/// keeping the causal conditional `P(observation | cause)` fixed.
///
/// `likelihood` columns are cause states, rows observation states. Returns
/// one distribution over causes per observation state.
pub fn prior_shift_correct(
    likelihood: &StochasticMatrix,
    new_prior: &DiscreteDistribution,
) -> Result<Vec<DiscreteDistribution>> {
    if new_prior.len() != likelihood.cols() {
        return Err(Error::InvalidArgument(format!(
            "prior has {} states, likelihood expects {}",
            new_prior.len(),
            likelihood.cols()
        )));
    }
    (0..likelihood.rows())
        .map(|x| {
            let weights: Vec<f64> = (0..likelihood.cols())
                .map(|y| likelihood.get(x, y) * new_prior.probs()[y])
                .collect();
            let normalizer: f64 = weights.iter().sum();
            if normalizer <= 1e-300 {
                return Err(Error::ZeroEvidence(format!(
                    "observation state {x} has zero probability under the new prior"
                )));
            }
            DiscreteDistribution::from_weights(weights)
        })
        .collect()
}

/// Result of refreshing the mechanism while keeping the old noise.
#[derive(Debug, Clone)]
pub struct DriftUpdate {
    /// Fresh mechanism paired with the invariant noise.
    pub model: ConditionalModel,
    /// Residual density of the new fit (what the noise looks like now).
    pub new_residual_density: GridDensity,
    /// L1 gap between the old noise (smoothed to the estimate's resolution)
    /// and the new residual density; large values flag that the noise
    /// changed too, violating the drift assumption.
    pub noise_shift_l1: f64,
}

/// Refits the mechanism on post-drift data and pairs it with the old noise.
pub fn concept_drift_update(
    new_data: &Dataset,
    old_noise: &GridDensity,
    config: &AnmConfig,
) -> Result<DriftUpdate> {
    let fit = fit_anm(new_data, Direction::XToY, config)?;
    let new_residual_density = estimate_density(&fit.residuals, 512, Bandwidth::Auto)?;
    // Smooth the reference by the KDE bandwidth so both sides live at the
    // same resolution before comparing.
    let h = Bandwidth::Auto.resolve(&fit.residuals)?;
    let reference = smooth_by(old_noise, h)?;
    let noise_shift_l1 = reference.l1_distance(&new_residual_density);
    Ok(DriftUpdate {
        model: ConditionalModel::new(
            ModelKind::Causal,
            Mechanism::Fitted(fit.phi),
            old_noise.clone(),
            None,
        )?,
        new_residual_density,
        noise_shift_l1,
    })
}

fn smooth_by(d: &GridDensity, h: f64) -> Result<GridDensity> {
    let step = d.step();
    let half_bins = ((4.0 * h) / step).ceil() as usize;
    if half_bins == 0 {
        return Ok(d.clone());
    }
    let len = 2 * half_bins + 1;
    let kernel = GridDensity::gaussian(0.0, h, -(half_bins as f64) * step, step, len)?;
    crate::density::convolve(d, &kernel)
}

/// Which role the dataset's columns play in [`adapt_output_change`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AdaptDirection {
    /// Inputs cause outputs: localize the change and re-estimate the noise.
    Causal,
    /// Outputs cause inputs: keep the conditional, replace the prior.
    Anticausal,
}

/// Configuration for [`adapt_output_change`].
#[derive(Debug, Clone)]
pub struct AdaptConfig {
    pub anm: AnmConfig,
    pub localize: LocalizeConfig,
    pub grid_size: usize,
    /// Spectral regularization for noise re-estimation.
    pub eps: f64,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        Self {
            anm: AnmConfig::default(),
            localize: LocalizeConfig::default(),
            grid_size: 512,
            eps: 1e-4,
        }
    }
}

/// Outcome of adapting to a changed output marginal.
#[derive(Debug, Clone)]
pub enum AdaptOutcome {
    Resolved {
        diagnosis: ShiftDiagnosis,
        model: ConditionalModel,
    },
    /// The diagnosis was ambiguous; both readings are returned.
    Unresolved {
        diagnosis: ShiftDiagnosis,
        if_noise_changed: ConditionalModel,
        if_cause_changed: ConditionalModel,
    },
}

impl AdaptOutcome {
    pub fn diagnosis(&self) -> &ShiftDiagnosis {
        match self {
            AdaptOutcome::Resolved { diagnosis, .. } => diagnosis,
            AdaptOutcome::Unresolved { diagnosis, .. } => diagnosis,
        }
    }
}

/// Adapts a fitted conditional to a fresh batch of output samples.
///
/// Causal direction: decide whether the cause marginal or the noise moved;
/// on a noise change re-estimate it by deconvolution, otherwise keep the
/// conditional. Anticausal direction: keep the conditional and swap in the
/// new output density as the prior.
pub fn adapt_output_change(
    train: &Dataset,
    new_output_samples: &[f64],
    direction: AdaptDirection,
    config: &AdaptConfig,
) -> Result<AdaptOutcome> {
    if new_output_samples.len() < crate::anm::MIN_ANM_POINTS {
        return Err(Error::InsufficientData {
            needed: crate::anm::MIN_ANM_POINTS,
            got: new_output_samples.len(),
        });
    }
    match direction {
        AdaptDirection::Causal => adapt_causal(train, new_output_samples, config),
        AdaptDirection::Anticausal => adapt_anticausal(train, new_output_samples, config),
    }
}

fn adapt_causal(
    train: &Dataset,
    new_output_samples: &[f64],
    config: &AdaptConfig,
) -> Result<AdaptOutcome> {
    let fit = fit_anm(train, Direction::XToY, &config.anm)?;
    let phi_values = fit.phi.predict_many(train.xs());

    // One bandwidth for every density in the pipeline: the smoothing then
    // cancels between the effect marginal and the mechanism pushforward
    // when the noise is recovered by deconvolution.
    let h = silverman_of(train.ys())
        .max(silverman_of(new_output_samples))
        .max(silverman_of(&phi_values));
    if h <= 0.0 {
        return Err(Error::DegenerateSample(
            "output samples have zero spread".into(),
        ));
    }

    // Common grid over both output batches, padded below so the recovered
    // noise never wraps across the grid boundary.
    let (lo_old, hi_old) = crate::density::min_max(train.ys());
    let (lo_new, hi_new) = crate::density::min_max(new_output_samples);
    let lo = lo_old.min(lo_new) - 3.0 * h;
    let hi = hi_old.max(hi_new) + 3.0 * h;
    let margin = 0.15 * (hi - lo);
    let origin = lo - margin;
    let step = (hi + margin - origin) / (config.grid_size - 1) as f64;
    let old_marginal =
        estimate_density_on_grid(train.ys(), Bandwidth::Fixed(h), origin, step, config.grid_size)?;
    let new_marginal = estimate_density_on_grid(
        new_output_samples,
        Bandwidth::Fixed(h),
        origin,
        step,
        config.grid_size,
    )?;

    // Sampling noise floor for the estimated-density comparisons: the
    // expected L1 gap between two estimates of one density at these sample
    // sizes, via sqrt(4 R(K) / pi) * sqrt(1/(n1 h) + 1/(n2 h)) * int sqrt(f).
    let floor = sampling_l1_floor(&old_marginal, &new_marginal, train.len(), new_output_samples.len(), h);
    let mut local_cfg = config.localize;
    local_cfg.tol_nochange = local_cfg.tol_nochange.max(2.0 * floor);
    local_cfg.remainder_l1_tol = local_cfg.remainder_l1_tol.max(6.0 * floor);

    let diagnosis = localize_change(&old_marginal, &new_marginal, &local_cfg)?;

    let old_noise = estimate_density(&fit.residuals, config.grid_size, Bandwidth::Auto)?;
    let unchanged = ConditionalModel::new(
        ModelKind::Causal,
        Mechanism::Fitted(fit.phi.clone()),
        old_noise,
        None,
    )?;
    match diagnosis.verdict {
        ShiftVerdict::NoChange | ShiftVerdict::CauseMarginalChanged => Ok(AdaptOutcome::Resolved {
            diagnosis,
            model: unchanged,
        }),
        ShiftVerdict::NoiseChanged => {
            let model = reestimate_noise_model(&fit, &phi_values, &new_marginal, h, step, config)?;
            Ok(AdaptOutcome::Resolved { diagnosis, model })
        }
        ShiftVerdict::Ambiguous => {
            let if_noise_changed =
                reestimate_noise_model(&fit, &phi_values, &new_marginal, h, step, config)?;
            Ok(AdaptOutcome::Unresolved {
                diagnosis,
                if_noise_changed,
                if_cause_changed: unchanged,
            })
        }
    }
}

fn reestimate_noise_model(
    fit: &crate::anm::AnmFit,
    phi_values: &[f64],
    new_marginal: &GridDensity,
    h: f64,
    step: f64,
    config: &AdaptConfig,
) -> Result<ConditionalModel> {
    let (lo_phi, hi_phi) = crate::density::min_max(phi_values);
    let phi_origin = lo_phi - 3.0 * h;
    let phi_len = (((hi_phi + 3.0 * h) - phi_origin) / step).ceil() as usize + 1;
    let phi_density = estimate_density_on_grid(
        phi_values,
        Bandwidth::Fixed(h),
        phi_origin,
        step,
        phi_len.max(2),
    )?;
    let new_noise = estimate_new_noise(&phi_density, new_marginal, config.eps)?;
    ConditionalModel::new(
        ModelKind::Causal,
        Mechanism::Fitted(fit.phi.clone()),
        new_noise,
        None,
    )
}

fn adapt_anticausal(
    train: &Dataset,
    new_output_samples: &[f64],
    config: &AdaptConfig,
) -> Result<AdaptOutcome> {
    // Outputs are the cause here: fit the causal conditional input-given-
    // output and recompose with the new output density as prior.
    let fit = fit_anm(train, Direction::YToX, &config.anm)?;
    let noise = estimate_density(&fit.residuals, config.grid_size, Bandwidth::Auto)?;
    let new_prior = estimate_density(new_output_samples, config.grid_size, Bandwidth::Auto)?;
    let old_prior = estimate_density(train.ys(), config.grid_size, Bandwidth::Auto)?;
    let l1 = old_prior.l1_distance(&new_prior);
    let model = ConditionalModel::new(
        ModelKind::Anticausal,
        Mechanism::Fitted(fit.phi),
        noise,
        Some(new_prior),
    )?;
    Ok(AdaptOutcome::Resolved {
        diagnosis: ShiftDiagnosis {
            verdict: ShiftVerdict::CauseMarginalChanged,
            l1_distance: l1,
            evidence: Vec::new(),
        },
        model,
    })
}

fn silverman_of(samples: &[f64]) -> f64 {
    let sd = sample_std(samples);
    if sd > 0.0 {
        1.06 * sd * (samples.len() as f64).powf(-0.2)
    } else {
        0.0
    }
}

fn sampling_l1_floor(
    old: &GridDensity,
    new: &GridDensity,
    n_old: usize,
    n_new: usize,
    h: f64,
) -> f64 {
    let r_k = 0.5 / std::f64::consts::PI.sqrt(); // roughness of the Gaussian kernel
    let pooled_sqrt_integral: f64 = (0..old.len())
        .map(|i| (0.5 * (old.values()[i] + new.values()[i])).sqrt())
        .sum::<f64>()
        * old.step();
    (4.0 * r_k / std::f64::consts::PI).sqrt()
        * (1.0 / (n_old as f64 * h) + 1.0 / (n_new as f64 * h)).sqrt()
        * pooled_sqrt_integral
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::rng_for;
    use rand::Rng;

    fn std_normal_grid(sigma: f64, halfwidth: f64, n: usize) -> GridDensity {
        let step = 2.0 * halfwidth / (n - 1) as f64;
        GridDensity::gaussian(0.0, sigma, -halfwidth, step, n).unwrap()
    }

    #[test]
    fn no_shift_weights_reduce_to_unweighted_fit() {
        let mut rng = rng_for(51, 0);
        let xs: Vec<f64> = (0..200).map(|_| rng.gen::<f64>()).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (4.0 * x).sin()).collect();
        let data = Dataset::new(xs.clone(), ys.clone()).unwrap();
        let density = estimate_density(&xs, 256, Bandwidth::Auto).unwrap();
        let weighted =
            covariate_shift_refit(&data, &density, &density, &CovariateShiftConfig::default())
                .unwrap();
        let plain = KernelRegressor::fit(&xs, &ys, Bandwidth::Auto).unwrap();
        for q in [0.1, 0.3, 0.5, 0.7, 0.9] {
            assert!((weighted.predict(q) - plain.predict(q)).abs() < 1e-9);
        }
    }

    #[test]
    fn disjoint_support_degenerates() {
        let mut rng = rng_for(52, 0);
        let xs: Vec<f64> = (0..100).map(|_| rng.gen::<f64>()).collect();
        let ys = xs.clone();
        let data = Dataset::new(xs.clone(), ys).unwrap();
        let old = estimate_density(&xs, 256, Bandwidth::Auto).unwrap();
        let far: Vec<f64> = (0..100).map(|_| 50.0 + rng.gen::<f64>()).collect();
        let new = estimate_density_on_grid(&far, Bandwidth::Auto, 50.0, old.step(), 256).unwrap();
        assert!(matches!(
            covariate_shift_refit(&data, &new, &old, &CovariateShiftConfig::default()),
            Err(Error::WeightDegenerate { .. })
        ));
    }

    #[test]
    fn weighted_fit_is_still_the_same_line() {
        // Dense noiseless linear data: importance weighting must not move
        // the fit anywhere both densities are supported.
        let xs: Vec<f64> = (0..400).map(|i| i as f64 / 399.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        let data = Dataset::new(xs.clone(), ys.clone()).unwrap();
        let old = estimate_density(&xs, 256, Bandwidth::Auto).unwrap();
        let shifted: Vec<f64> = xs.iter().map(|x| 0.5 + 0.5 * x).collect();
        let new =
            estimate_density_on_grid(&shifted, Bandwidth::Auto, old.origin(), old.step(), 256)
                .unwrap();
        let weighted =
            covariate_shift_refit(&data, &new, &old, &CovariateShiftConfig::default()).unwrap();
        let plain = KernelRegressor::fit(&xs, &ys, Bandwidth::Auto).unwrap();
        for i in 0..=20 {
            let q = i as f64 / 20.0;
            assert!(
                (weighted.predict(q) - plain.predict(q)).abs() < 1e-6,
                "q = {q}"
            );
        }
    }

    #[test]
    fn conjugate_gaussian_posterior_matches_closed_form() {
        let sigma = 0.3;
        let tau = 0.5;
        let prior = std_normal_grid(tau, 3.0, 512);
        let noise = std_normal_grid(sigma, 3.0, 512);
        let model = ConditionalModel::new(
            ModelKind::Anticausal,
            Mechanism::Identity,
            noise,
            Some(prior.clone()),
        )
        .unwrap();
        let posterior = match bayes_posterior(&model, 0.0, &Belief::Continuous(prior)).unwrap() {
            Belief::Continuous(d) => d,
            _ => unreachable!(),
        };
        let post_var = 1.0 / (sigma.powi(-2) + tau.powi(-2));
        let analytic =
            GridDensity::gaussian(0.0, post_var.sqrt(), posterior.origin(), posterior.step(), posterior.len())
                .unwrap();
        let l1 = posterior.l1_distance(&analytic);
        assert!(l1 < 1e-3, "L1 {l1}");
        assert!((posterior.mean()).abs() < 1e-6);
    }

    #[test]
    fn uniform_prior_posterior_peaks_at_observation() {
        let n = 512;
        let step = 6.0 / (n - 1) as f64;
        let prior = GridDensity::new(-3.0, step, vec![1.0; n]).unwrap();
        let noise = std_normal_grid(0.4, 3.0, 512);
        let model = ConditionalModel::new(
            ModelKind::Anticausal,
            Mechanism::Identity,
            noise,
            Some(prior.clone()),
        )
        .unwrap();
        let x = 0.73;
        let posterior = match bayes_posterior(&model, x, &Belief::Continuous(prior)).unwrap() {
            Belief::Continuous(d) => d,
            _ => unreachable!(),
        };
        assert!((posterior.mode() - x).abs() <= step);
    }

    #[test]
    fn unexplainable_observation_is_zero_evidence() {
        let prior = std_normal_grid(0.5, 2.0, 128);
        let noise = std_normal_grid(0.2, 2.0, 128);
        let model = ConditionalModel::new(
            ModelKind::Anticausal,
            Mechanism::Identity,
            noise,
            Some(prior.clone()),
        )
        .unwrap();
        assert!(matches!(
            bayes_posterior(&model, 1e6, &Belief::Continuous(prior)),
            Err(Error::ZeroEvidence(_))
        ));
    }

    #[test]
    fn prior_shift_matches_hand_bayes_table() {
        let likelihood =
            StochasticMatrix::from_columns(&[vec![0.8, 0.2], vec![0.3, 0.7]]).unwrap();
        let new_prior = DiscreteDistribution::new(vec![0.9, 0.1]).unwrap();
        let posterior = prior_shift_correct(&likelihood, &new_prior).unwrap();
        // P'(y=0 | x=0) = 0.8*0.9 / (0.8*0.9 + 0.3*0.1) = 0.72 / 0.75 = 0.96.
        assert!((posterior[0].probs()[0] - 0.96).abs() < 1e-12);
        assert!((posterior[0].probs()[1] - 0.04).abs() < 1e-12);
    }

    #[test]
    fn no_shift_prior_reproduces_training_posterior() {
        let likelihood =
            StochasticMatrix::from_columns(&[vec![0.8, 0.2], vec![0.3, 0.7]]).unwrap();
        let training_prior = DiscreteDistribution::new(vec![0.5, 0.5]).unwrap();
        let posterior = prior_shift_correct(&likelihood, &training_prior).unwrap();
        // Analytic training posterior for x = 0: 0.4 / (0.4 + 0.15).
        let expected = 0.4 / 0.55;
        assert!((posterior[0].probs()[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn zero_prior_state_annihilates() {
        let likelihood =
            StochasticMatrix::from_columns(&[vec![0.8, 0.2], vec![0.3, 0.7]]).unwrap();
        let new_prior = DiscreteDistribution::new(vec![1.0, 0.0]).unwrap();
        let posterior = prior_shift_correct(&likelihood, &new_prior).unwrap();
        for row in &posterior {
            assert_eq!(row.probs()[1], 0.0);
        }
    }

    #[test]
    fn bayes_recomposition_reproduces_the_joint() {
        let likelihood =
            StochasticMatrix::from_columns(&[vec![0.8, 0.2], vec![0.3, 0.7]]).unwrap();
        let new_prior = DiscreteDistribution::new(vec![0.6, 0.4]).unwrap();
        let posterior = prior_shift_correct(&likelihood, &new_prior).unwrap();
        for x in 0..likelihood.rows() {
            let p_x: f64 = (0..likelihood.cols())
                .map(|y| likelihood.get(x, y) * new_prior.probs()[y])
                .sum();
            for y in 0..likelihood.cols() {
                let joint_via_posterior = posterior[x].probs()[y] * p_x;
                let joint_direct = likelihood.get(x, y) * new_prior.probs()[y];
                assert!((joint_via_posterior - joint_direct).abs() < 1e-12);
            }
        }
    }
}
