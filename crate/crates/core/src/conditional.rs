//! Shared-mechanism fits across datasets whose noise distributions differ.
//!
//! All points are pooled into one kernel regression; each dataset keeps its
//! own residual vector, offset and independence test. With a single dataset
//! this reduces observationally to a plain ANM fit.

use crate::anm::AnmConfig;
use crate::density::{estimate_density, Bandwidth, GridDensity};
use crate::error::{Error, Result};
use crate::hsic::hsic_test;
use crate::regression::KernelRegressor;
use crate::Dataset;

/// Default grid size for the per-domain noise densities.
const NOISE_GRID: usize = 512;

/// Per-dataset view of a shared fit.
#[derive(Debug, Clone)]
pub struct PerDatasetFit {
    /// Additive shift absorbing this dataset's residual mean relative to the
    /// shared mechanism.
    pub offset: f64,
    /// Zero-mean residuals in this dataset's input order.
    pub residuals: Vec<f64>,
    pub independence_pvalue: f64,
    pub hsic_value: f64,
}

/// One mechanism, several noise distributions.
#[derive(Debug, Clone)]
pub struct SharedAnmFit {
    /// Shared mechanism; includes the pooled residual mean.
    pub phi: KernelRegressor,
    pub per_dataset: Vec<PerDatasetFit>,
}

impl SharedAnmFit {
    /// Mechanism value for domain `index` (shared curve plus domain offset).
    pub fn mechanism_for(&self, index: usize, x: f64) -> Result<f64> {
        let entry = self
            .per_dataset
            .get(index)
            .ok_or(Error::IndexOutOfRange {
                index,
                len: self.per_dataset.len(),
            })?;
        Ok(self.phi.predict(x) + entry.offset)
    }
}

/// Fits one mechanism on the pooled points, re-centering residuals per
/// dataset, then tests independence separately per dataset.
pub fn fit_shared_anm(datasets: &[Dataset], config: &AnmConfig) -> Result<SharedAnmFit> {
    if datasets.is_empty() {
        return Err(Error::EmptyInput);
    }
    for d in datasets {
        if d.len() < crate::anm::MIN_ANM_POINTS {
            return Err(Error::InsufficientData {
                needed: crate::anm::MIN_ANM_POINTS,
                got: d.len(),
            });
        }
    }
    let mut pooled_x = Vec::new();
    let mut pooled_y = Vec::new();
    for d in datasets {
        pooled_x.extend_from_slice(d.xs());
        pooled_y.extend_from_slice(d.ys());
    }
    // Stage 1: unweighted pooled fit, used to gauge each domain's noise
    // scale. The regressor sorts its points, so the fit does not depend on
    // the order datasets were given in.
    let pilot = KernelRegressor::fit(&pooled_x, &pooled_y, config.bandwidth)?;
    let domain_variances: Vec<f64> = datasets
        .iter()
        .map(|d| {
            let fitted = pilot.predict_many(d.xs());
            let raw: Vec<f64> = d
                .ys()
                .iter()
                .zip(fitted.iter())
                .map(|(y, f)| y - f)
                .collect();
            let mean = raw.iter().sum::<f64>() / raw.len() as f64;
            raw.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / raw.len() as f64
        })
        .collect();
    // Pooled variance in a canonical order so dataset order cannot leak
    // into the bits of the final mechanism.
    let mut contributions: Vec<(f64, f64)> = datasets
        .iter()
        .zip(domain_variances.iter())
        .map(|(d, &v)| (v, d.len() as f64))
        .collect();
    contributions.sort_by(|a, b| a.partial_cmp(b).expect("finite variances"));
    let total: f64 = datasets.iter().map(|d| d.len() as f64).sum();
    let pooled_variance: f64 = contributions.iter().map(|(v, n)| v * n).sum::<f64>() / total;

    // Stage 2: refit with inverse-variance domain weights, so a quiet
    // domain is not forced to track noise fitted into a loud one. With a
    // single dataset every weight is exactly one and the fit reduces to the
    // plain ANM regression.
    let mut pooled_w = Vec::with_capacity(pooled_x.len());
    for (d, &v) in datasets.iter().zip(domain_variances.iter()) {
        let w = (pooled_variance / v.max(1e-300)).min(1e6);
        pooled_w.extend(std::iter::repeat(w).take(d.len()));
    }
    let regressor =
        KernelRegressor::fit_weighted(&pooled_x, &pooled_y, &pooled_w, config.bandwidth)?;

    let fitted_per: Vec<Vec<f64>> = datasets
        .iter()
        .map(|d| regressor.predict_many(d.xs()))
        .collect();
    // Pooled residual mean in the regressor's canonical point order, so the
    // shared mechanism is identical whatever order the datasets came in.
    let pooled_fitted = regressor.predict_many(regressor.training_xs());
    let global_offset = regressor
        .training_ys()
        .iter()
        .zip(pooled_fitted.iter())
        .map(|(y, f)| y - f)
        .sum::<f64>()
        / regressor.training_ys().len() as f64;

    let mut per_dataset = Vec::with_capacity(datasets.len());
    for (d, fitted) in datasets.iter().zip(fitted_per.iter()) {
        let raw: Vec<f64> = d
            .ys()
            .iter()
            .zip(fitted.iter())
            .map(|(y, f)| y - f)
            .collect();
        let own_offset = raw.iter().sum::<f64>() / raw.len() as f64;
        let residuals: Vec<f64> = raw.iter().map(|r| r - own_offset).collect();
        let (hsic_value, independence_pvalue) =
            if crate::anm::residuals_degenerate(&residuals, d.ys()) {
                (0.0, 1.0)
            } else {
                // Same seed for every dataset: the tests run on disjoint
                // data, and reordering datasets must not change any entry.
                hsic_test(d.xs(), &residuals, config.permutations, config.seed)?
            };
        per_dataset.push(PerDatasetFit {
            offset: own_offset - global_offset,
            residuals,
            independence_pvalue,
            hsic_value,
        });
    }
    Ok(SharedAnmFit {
        phi: regressor.with_offset(global_offset),
        per_dataset,
    })
}

/// Predictive conditional for one domain: mechanism value at `x` plus that
/// domain's residual density.
pub fn transfer_predict(
    shared: &SharedAnmFit,
    target_index: usize,
    x: f64,
) -> Result<(f64, GridDensity)> {
    let entry = shared
        .per_dataset
        .get(target_index)
        .ok_or(Error::IndexOutOfRange {
            index: target_index,
            len: shared.per_dataset.len(),
        })?;
    let mean = shared.phi.predict(x) + entry.offset;
    let noise = estimate_density(&entry.residuals, NOISE_GRID, Bandwidth::Auto)?;
    Ok((mean, noise))
}
