//! Density-level spectral machinery: regularized deconvolution, spectrum
//! zeros, change localization, maximal-width Gaussian extraction and
//! injective-conditional inversion.

use nalgebra::{DMatrix, DVector};
use rustfft::num_complex::Complex;
use serde::Serialize;

use crate::density::{check_steps, GridDensity};
use crate::discrete::{DiscreteDistribution, StochasticMatrix};
use crate::error::{Error, Result};
use crate::fft;

/// Fraction of result spectral energy on clamped bins above which a
/// deconvolution is rejected.
const CLAMP_ENERGY_LIMIT: f64 = 0.2;

/// Singular values below this multiple of the largest are treated as zero.
const RANK_TOL: f64 = 1e-10;

/// Largest constrained residual (sup norm) still considered producible.
const FEASIBLE_TOL: f64 = 1e-6;

/// Knobs for [`localize_change`].
#[derive(Debug, Clone, Copy)]
pub struct LocalizeConfig {
    /// L1 distance below which the two marginals count as unchanged.
    pub tol_nochange: f64,
    /// Relative spectral magnitude under which a bin counts as a zero.
    pub zero_rel_threshold: f64,
    /// Zero-matching tolerance in units of the coarser frequency bin.
    pub zero_match_bins: f64,
    /// Relative disagreement above which extracted Gaussian widths differ.
    pub tol_sigma: f64,
    /// L1 tolerance for matching deconvolved remainders.
    pub remainder_l1_tol: f64,
    /// Negative-mass tolerance for the maximal-width Gaussian search.
    pub neg_tol: f64,
}

impl Default for LocalizeConfig {
    fn default() -> Self {
        Self {
            tol_nochange: 0.02,
            zero_rel_threshold: 1e-2,
            zero_match_bins: 1.5,
            tol_sigma: 0.10,
            remainder_l1_tol: 0.05,
            neg_tol: 1e-3,
        }
    }
}

/// Which factor of `P(effect) = P(mechanism(cause)) * P(noise)` changed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ShiftVerdict {
    CauseMarginalChanged,
    NoiseChanged,
    NoChange,
    Ambiguous,
}

/// Per-zero or per-width diagnostic record backing a verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Evidence {
    ZeroPersistence {
        frequency: f64,
        magnitude_before: f64,
        magnitude_after: f64,
        persisted: bool,
    },
    GaussianWidth {
        sigma_before: f64,
        sigma_after: f64,
        remainder_l1: f64,
    },
}

/// Verdict on which factor of the effect marginal changed, with the
/// diagnostics that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftDiagnosis {
    pub verdict: ShiftVerdict,
    /// L1 distance between the two effect marginals.
    pub l1_distance: f64,
    pub evidence: Vec<Evidence>,
}

struct RawDeconvolution {
    values: Vec<f64>, // pre-clipping, length = cropped output
    clamped_energy_fraction: f64,
}

fn deconvolve_raw(observed: &GridDensity, known: &GridDensity, eps: f64) -> RawDeconvolution {
    let lo = observed.len();
    let nfft = (lo + known.len()).next_power_of_two();
    let fo = fft::forward(observed.values(), nfft);
    let fk = fft::forward(known.values(), nfft);
    let quotient = divide_spectra(&fo, &fk, eps, FloorPolicy::Clamp);
    let raw = fft::inverse_real(quotient.values);
    let inv_step = 1.0 / observed.step();
    RawDeconvolution {
        values: raw[..lo].iter().map(|v| v * inv_step).collect(),
        clamped_energy_fraction: quotient.clamped_energy_fraction,
    }
}

struct SpectralQuotient {
    values: Vec<Complex<f64>>,
    clamped_energy_fraction: f64,
}

/// Numerator bins below this relative magnitude are transform round-off,
/// not signal; their quotient is zeroed instead of amplified.
const NUMERATOR_NOISE_FLOOR: f64 = 1e-13;

/// What to do on bins where the divisor sits under its magnitude floor.
#[derive(Clone, Copy, PartialEq, Eq)]
enum FloorPolicy {
    /// Divide by the floor with the divisor's phase; the clamped-energy
    /// fraction then reports how much of the result this fabricated.
    Clamp,
    /// Drop the bin: the data carries no usable information there.
    Suppress,
}

/// Smooth fade-in over the two decades above the numerator noise floor;
/// a hard cut there would ring through the inverse transform.
fn noise_taper(mag: f64, floor: f64) -> f64 {
    if mag <= floor {
        return 0.0;
    }
    let s = ((mag / floor).ln() / (100.0_f64).ln()).clamp(0.0, 1.0);
    s * s * (3.0 - 2.0 * s)
}

/// Pointwise division with a phase-preserving magnitude floor at
/// `eps * max |divisor|`.
fn divide_spectra(
    num: &[Complex<f64>],
    den: &[Complex<f64>],
    eps: f64,
    policy: FloorPolicy,
) -> SpectralQuotient {
    let max_den = den.iter().map(|c| c.norm()).fold(0.0_f64, f64::max);
    let max_num = num.iter().map(|c| c.norm()).fold(0.0_f64, f64::max);
    let floor = eps * max_den;
    let num_floor = NUMERATOR_NOISE_FLOOR * max_num;
    let mut clamped_energy = 0.0;
    let mut total_energy = 0.0;
    let values: Vec<Complex<f64>> = num
        .iter()
        .zip(den.iter())
        .map(|(n, d)| {
            let taper = noise_taper(n.norm(), num_floor);
            if taper == 0.0 {
                return Complex::new(0.0, 0.0);
            }
            let mag = d.norm();
            let (q, clamped) = if mag >= floor {
                (n / d * taper, false)
            } else if policy == FloorPolicy::Suppress {
                (Complex::new(0.0, 0.0), false)
            } else if mag > 0.0 {
                (n / (d * (floor / mag)) * taper, true)
            } else {
                (n / Complex::new(floor, 0.0) * taper, true)
            };
            let e = q.norm_sqr();
            total_energy += e;
            if clamped {
                clamped_energy += e;
            }
            q
        })
        .collect();
    let fraction = if total_energy > 0.0 {
        clamped_energy / total_energy
    } else {
        0.0
    };
    SpectralQuotient {
        values,
        clamped_energy_fraction: fraction,
    }
}

/// Removes a known convolution factor by regularized spectral division.
///
/// Divisor bins with magnitude below `eps * max` are clamped to that floor
/// with their phase preserved; the inverse transform is clipped at zero and
/// renormalized. Fails when more than 20% of the result's spectral energy
/// sits on clamped bins.
pub fn deconvolve(observed: &GridDensity, known: &GridDensity, eps: f64) -> Result<GridDensity> {
    check_steps(observed, known)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "eps must lie in (0, 1), got {eps}"
        )));
    }
    let raw = deconvolve_raw(observed, known, eps);
    if raw.clamped_energy_fraction > CLAMP_ENERGY_LIMIT {
        return Err(Error::DeconvolutionIllConditioned {
            clamped_energy: raw.clamped_energy_fraction,
        });
    }
    let values: Vec<f64> = raw.values.iter().map(|v| v.max(0.0)).collect();
    GridDensity::new(
        observed.origin() - known.origin(),
        observed.step(),
        values,
    )
}

/// Recovers the changed noise factor from the new effect marginal, keeping
/// the mechanism pushforward fixed: the result is the new noise density, and
/// the conditional follows by shifting it along the mechanism.
pub fn estimate_new_noise(
    phi_of_cause: &GridDensity,
    effect_after: &GridDensity,
    eps: f64,
) -> Result<GridDensity> {
    deconvolve(effect_after, phi_of_cause, eps)
}

/// FFT length for spectrum analysis. Zeros of a spectrum sit between the
/// bins of an unpadded transform; a 128x padding makes the bins dense
/// enough to land inside the dips, and keeping the length an exact multiple
/// of `n` aligns the zeros of full-grid-support structures exactly.
fn analysis_len(n: usize) -> usize {
    128 * n
}

/// One frequency bin of the analysis transform, in cycles per grid unit.
pub fn spectrum_bin_width(d: &GridDensity) -> f64 {
    1.0 / (analysis_len(d.len()) as f64 * d.step())
}

struct SpectrumProfile {
    zeros: Vec<f64>,
    /// Highest frequency at which the magnitude still clears the threshold;
    /// beyond it dips are indistinguishable from overall decay.
    detect_limit: f64,
}

fn spectrum_profile(d: &GridDensity, rel_threshold: f64) -> Result<SpectrumProfile> {
    if !(rel_threshold > 0.0 && rel_threshold <= 0.1) {
        return Err(Error::InvalidArgument(format!(
            "rel_threshold must lie in (0, 0.1], got {rel_threshold}"
        )));
    }
    let nfft = analysis_len(d.len());
    let spectrum = fft::forward(d.values(), nfft);
    let mags: Vec<f64> = spectrum[..=nfft / 2].iter().map(|c| c.norm()).collect();
    let threshold = rel_threshold * mags[0];
    let guard = ((0.9 * (nfft / 2) as f64).floor() as usize).max(1);
    let bin_freq = 1.0 / (nfft as f64 * d.step());

    let mut zeros = Vec::new();
    let mut run_start: Option<usize> = None;
    let mut detect_limit = 0.0;
    for bin in 1..=guard {
        let below = mags[bin] < threshold;
        if !below {
            detect_limit = bin as f64 * bin_freq;
        }
        match (below, run_start) {
            (true, None) => run_start = Some(bin),
            (false, Some(start)) => {
                // Rebounded above threshold: keep the run's deepest bin.
                let rep = (start..bin)
                    .min_by(|&a, &b| mags[a].partial_cmp(&mags[b]).expect("finite magnitudes"))
                    .expect("non-empty run");
                zeros.push(rep as f64 * bin_freq);
                run_start = None;
            }
            _ => {}
        }
    }
    // A run still open at the guard never rebounded; it is overall decay,
    // not a zero.
    Ok(SpectrumProfile {
        zeros,
        detect_limit,
    })
}

/// Frequencies (cycles per grid unit) where the spectrum dips below
/// `rel_threshold` times its zero-frequency magnitude and rebounds.
///
/// Runs that never rebound inside the band (e.g. the tail of a Gaussian
/// spectrum sinking into round-off) are not zeros. The top 10% of the band
/// is excluded as a Nyquist guard.
pub fn spectrum_zeros(d: &GridDensity, rel_threshold: f64) -> Result<Vec<f64>> {
    Ok(spectrum_profile(d, rel_threshold)?.zeros)
}

fn spectrum_magnitude_at(d: &GridDensity, frequency: f64) -> f64 {
    let nfft = analysis_len(d.len());
    let spectrum = fft::forward(d.values(), nfft);
    let bin = ((frequency * nfft as f64 * d.step()).round() as usize).min(nfft / 2);
    spectrum[bin].norm()
}

/// Deconvolves `d` by a zero-phase Gaussian of width `sigma` periodized on
/// `d`'s own grid; the result stays on that grid.
fn gaussian_quotient_raw(d: &GridDensity, sigma: f64) -> (Vec<f64>, f64) {
    let n = d.len();
    let step = d.step();
    let kernel: Vec<f64> = if sigma == 0.0 {
        let mut k = vec![0.0; n];
        k[0] = 1.0;
        k
    } else {
        (0..n)
            .map(|j| {
                let dist = j.min(n - j) as f64 * step;
                let z = dist / sigma;
                (-0.5 * z * z).exp()
            })
            .collect()
    };
    let mass: f64 = kernel.iter().sum::<f64>() * step;
    let kernel: Vec<f64> = kernel.iter().map(|k| k / mass).collect();
    let fd = fft::forward(d.values(), n);
    let fk = fft::forward(&kernel, n);
    let quotient = divide_spectra(&fd, &fk, 1e-12, FloorPolicy::Suppress);
    let inv_step = 1.0 / step;
    let values: Vec<f64> = fft::inverse_real(quotient.values)
        .iter()
        .map(|v| v * inv_step)
        .collect();
    let neg_mass: f64 = values.iter().map(|v| (-v).max(0.0)).sum::<f64>() * step;
    (values, if neg_mass.is_finite() { neg_mass } else { f64::INFINITY })
}

#[doc(hidden)]
pub fn debug_neg_mass(d: &GridDensity, sigma: f64) -> f64 {
    gaussian_quotient_raw(d, sigma).1
}

/// Finds the widest Gaussian factor whose removal still leaves a density.
///
/// Binary search over `sigma` in `[0, span/2]`: the negative mass of the
/// pre-clipping quotient grows with `sigma`, and the largest `sigma` keeping
/// it under `neg_tol` is returned (to within `step/100`) together with the
/// clipped, renormalized remainder. `sigma = 0` with remainder equal to the
/// input is the answer for Gaussian-indecomposable inputs.
pub fn gaussian_max_width_deconv(d: &GridDensity, neg_tol: f64) -> Result<(f64, GridDensity)> {
    if !(neg_tol > 0.0 && neg_tol <= 0.05) {
        return Err(Error::InvalidArgument(format!(
            "neg_tol must lie in (0, 0.05], got {neg_tol}"
        )));
    }
    let step = d.step();
    let span = step * (d.len() - 1) as f64;
    let admissible = |sigma: f64| gaussian_quotient_raw(d, sigma).1 < neg_tol;

    let mut lo = 0.0;
    let mut hi = span / 2.0;
    if admissible(hi) {
        lo = hi;
    } else {
        while hi - lo > step / 100.0 {
            let mid = 0.5 * (lo + hi);
            if admissible(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let sigma = lo;
    let (raw, _) = gaussian_quotient_raw(d, sigma);
    let values: Vec<f64> = raw.iter().map(|v| v.max(0.0)).collect();
    let remainder = GridDensity::new(d.origin(), step, values)?;
    Ok((sigma, remainder))
}

/// Result of splitting an output marginal into a Gaussian noise factor and
/// an indecomposable signal factor.
#[derive(Debug, Clone)]
pub struct NoiseExtraction {
    pub sigma: f64,
    /// Gaussian of width `sigma` on a symmetric grid sharing the input step.
    pub noise: GridDensity,
    /// Deconvolved remainder (the mechanism pushforward estimate).
    pub signal: GridDensity,
    /// True when the signal collapsed to a near-spike, i.e. the marginal was
    /// itself (near-)Gaussian and the decomposition is not unique.
    pub degenerate: bool,
}

/// Splits an effect marginal into its maximal Gaussian factor and remainder.
pub fn extract_noise_from_output_marginal(
    effect_marginal: &GridDensity,
    neg_tol: f64,
) -> Result<NoiseExtraction> {
    let (sigma, signal) = gaussian_max_width_deconv(effect_marginal, neg_tol)?;
    let step = effect_marginal.step();
    let noise = if sigma == 0.0 {
        GridDensity::point_mass(0.0, step)?
    } else {
        let half_bins = ((4.0 * sigma) / step).ceil() as usize;
        let len = 2 * half_bins + 1;
        GridDensity::gaussian(0.0, sigma, -(half_bins as f64) * step, step, len)?
    };
    let degenerate = signal.mass_within(signal.mode(), 3.0 * step) > 0.9;
    Ok(NoiseExtraction {
        sigma,
        noise,
        signal,
        degenerate,
    })
}

/// Decides whether the cause marginal or the noise changed between two
/// effect marginals sharing a grid step.
///
/// Zero persistence is checked first when the before-spectrum has zeros;
/// otherwise both marginals are split by maximal-width Gaussian
/// deconvolution and widths and remainders are compared.
pub fn localize_change(
    effect_before: &GridDensity,
    effect_after: &GridDensity,
    config: &LocalizeConfig,
) -> Result<ShiftDiagnosis> {
    check_steps(effect_before, effect_after)?;
    let l1 = effect_before.l1_distance(effect_after);
    if l1 < config.tol_nochange {
        return Ok(ShiftDiagnosis {
            verdict: ShiftVerdict::NoChange,
            l1_distance: l1,
            evidence: Vec::new(),
        });
    }

    let before = spectrum_profile(effect_before, config.zero_rel_threshold)?;
    let after = spectrum_profile(effect_after, config.zero_rel_threshold)?;
    // Zeros can only be voted on where both spectra are still detectable;
    // beyond either detection limit a dip is indistinguishable from decay.
    let usable_limit = 0.95 * before.detect_limit.min(after.detect_limit);
    let votable: Vec<f64> = before
        .zeros
        .iter()
        .copied()
        .filter(|f| *f <= usable_limit)
        .collect();
    if !votable.is_empty() {
        let tol = config.zero_match_bins
            * spectrum_bin_width(effect_before).max(spectrum_bin_width(effect_after));
        let mut evidence = Vec::new();
        let mut persisted = 0usize;
        for &f in &votable {
            let hit = after.zeros.iter().any(|&g| (g - f).abs() <= tol);
            if hit {
                persisted += 1;
            }
            evidence.push(Evidence::ZeroPersistence {
                frequency: f,
                magnitude_before: spectrum_magnitude_at(effect_before, f),
                magnitude_after: spectrum_magnitude_at(effect_after, f),
                persisted: hit,
            });
        }
        let verdict = if persisted == votable.len() {
            // The zero-bearing factor survived; with Gaussian-type noise the
            // zeros belong to the mechanism pushforward, so the noise moved.
            ShiftVerdict::NoiseChanged
        } else if persisted == 0 {
            ShiftVerdict::CauseMarginalChanged
        } else {
            ShiftVerdict::Ambiguous
        };
        return Ok(ShiftDiagnosis {
            verdict,
            l1_distance: l1,
            evidence,
        });
    }

    // No usable zeros: compare maximal Gaussian factors.
    let (sigma_before, rem_before) = gaussian_max_width_deconv(effect_before, config.neg_tol)?;
    let (sigma_after, rem_after) = gaussian_max_width_deconv(effect_after, config.neg_tol)?;
    let widest = sigma_before.max(sigma_after);
    let rel_diff = if widest > 0.0 {
        (sigma_after - sigma_before).abs() / widest
    } else {
        0.0
    };
    let remainder_l1 = rem_before.l1_distance(&rem_after);
    let evidence = vec![Evidence::GaussianWidth {
        sigma_before,
        sigma_after,
        remainder_l1,
    }];
    let sigma_differs = rel_diff > config.tol_sigma;
    let remainders_match = remainder_l1 < config.remainder_l1_tol;
    let verdict = match (sigma_differs, remainders_match) {
        (true, true) => ShiftVerdict::NoiseChanged,
        (false, false) => ShiftVerdict::CauseMarginalChanged,
        _ => ShiftVerdict::Ambiguous,
    };
    Ok(ShiftDiagnosis {
        verdict,
        l1_distance: l1,
        evidence,
    })
}

/// Input distribution recovered from an observed output marginal, with the
/// residual of the forward reconstruction.
#[derive(Debug, Clone, Serialize)]
pub struct InversionResult {
    pub distribution: DiscreteDistribution,
    /// Sup-norm of `M p - q`.
    pub residual_inf: f64,
}

/// Solves `q = M p` for a probability vector `p`.
///
/// Uses an unconstrained least-squares solve when that already lands on the
/// simplex, otherwise an exact active-set sweep over zero patterns (the
/// state spaces here are small). Injectivity requires full column rank.
pub fn invert_stochastic_matrix(
    m: &StochasticMatrix,
    q: &DiscreteDistribution,
) -> Result<InversionResult> {
    let rows = m.rows();
    let cols = m.cols();
    if q.len() != rows {
        return Err(Error::InvalidArgument(format!(
            "marginal has {} states, matrix produces {rows}",
            q.len()
        )));
    }
    let mat = DMatrix::from_row_slice(rows, cols, m.entries());
    let rank = numerical_rank(&mat);
    if rank < cols {
        return Err(Error::NotInjective { rank, cols });
    }
    if cols > 16 {
        return Err(Error::InvalidArgument(
            "constrained inversion supports at most 16 input states".into(),
        ));
    }
    let qv = DVector::from_column_slice(q.probs());

    // Unconstrained least squares first; exact for square full-rank systems.
    let svd = mat.clone().svd(true, true);
    if let Ok(sol) = svd.solve(&qv, RANK_TOL) {
        let min = sol.iter().cloned().fold(f64::MAX, f64::min);
        let sum: f64 = sol.iter().sum();
        if min >= -1e-9 && (sum - 1.0).abs() <= 1e-6 {
            let clipped: Vec<f64> = sol.iter().map(|p| p.max(0.0)).collect();
            let distribution = DiscreteDistribution::from_weights(clipped)?;
            let residual = residual_inf(&mat, &distribution, &qv);
            if residual <= FEASIBLE_TOL {
                return Ok(InversionResult {
                    distribution,
                    residual_inf: residual,
                });
            }
        }
    }

    // Active-set sweep: try every pattern of coordinates pinned to zero and
    // keep the feasible candidate with the smallest residual.
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << cols) {
        let free: Vec<usize> = (0..cols).filter(|i| mask & (1 << i) == 0).collect();
        if free.is_empty() {
            continue;
        }
        if let Some(candidate) = solve_equality_constrained(&mat, &qv, &free) {
            if candidate.iter().all(|&p| p >= -1e-12) {
                let clipped: Vec<f64> = candidate.iter().map(|p| p.max(0.0)).collect();
                if let Ok(dist) = DiscreteDistribution::from_weights(clipped) {
                    let res = residual_l2(&mat, &dist, &qv);
                    if best.as_ref().map_or(true, |(b, _)| res < *b) {
                        best = Some((res, dist.probs().to_vec()));
                    }
                }
            }
        }
    }
    let (_, probs) = best.ok_or(Error::InfeasibleMarginal { residual: f64::MAX })?;
    let distribution = DiscreteDistribution::new(probs)?;
    let residual = residual_inf(&mat, &distribution, &qv);
    if residual > FEASIBLE_TOL {
        return Err(Error::InfeasibleMarginal { residual });
    }
    Ok(InversionResult {
        distribution,
        residual_inf: residual,
    })
}

fn numerical_rank(mat: &DMatrix<f64>) -> usize {
    let svd = mat.clone().svd(false, false);
    let max_sv = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    svd.singular_values
        .iter()
        .filter(|&&s| s > RANK_TOL * max_sv)
        .count()
}

/// Minimizes `|M_F p_F - q|^2` subject to `sum p_F = 1` via the KKT system.
fn solve_equality_constrained(
    mat: &DMatrix<f64>,
    q: &DVector<f64>,
    free: &[usize],
) -> Option<Vec<f64>> {
    let k = free.len();
    let sub = mat.select_columns(free.iter());
    let gram = sub.transpose() * &sub;
    let rhs_top = sub.transpose() * q;
    let mut kkt = DMatrix::zeros(k + 1, k + 1);
    for i in 0..k {
        for j in 0..k {
            kkt[(i, j)] = 2.0 * gram[(i, j)];
        }
        kkt[(i, k)] = 1.0;
        kkt[(k, i)] = 1.0;
    }
    let mut rhs = DVector::zeros(k + 1);
    for i in 0..k {
        rhs[i] = 2.0 * rhs_top[i];
    }
    rhs[k] = 1.0;
    let sol = kkt.lu().solve(&rhs)?;
    let mut full = vec![0.0; mat.ncols()];
    for (slot, &col) in free.iter().enumerate() {
        full[col] = sol[slot];
    }
    Some(full)
}

fn residual_inf(mat: &DMatrix<f64>, p: &DiscreteDistribution, q: &DVector<f64>) -> f64 {
    let pv = DVector::from_column_slice(p.probs());
    (mat * pv - q).abs().max()
}

fn residual_l2(mat: &DMatrix<f64>, p: &DiscreteDistribution, q: &DVector<f64>) -> f64 {
    let pv = DVector::from_column_slice(p.probs());
    (mat * pv - q).norm_squared()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::convolve;

    fn uniform_density(lo: f64, width: f64, step: f64) -> GridDensity {
        let n = (width / step).round() as usize + 1;
        GridDensity::new(lo, step, vec![1.0; n]).unwrap()
    }

    fn two_spike(a: f64, b: f64, wa: f64, step: f64, span_lo: f64, span_hi: f64) -> GridDensity {
        let n = ((span_hi - span_lo) / step).round() as usize + 1;
        let mut v = vec![0.0; n];
        let ia = ((a - span_lo) / step).round() as usize;
        let ib = ((b - span_lo) / step).round() as usize;
        v[ia] = wa / step;
        v[ib] = (1.0 - wa) / step;
        GridDensity::new(span_lo, step, v).unwrap()
    }

    #[test]
    fn deconvolving_by_point_mass_is_identity() {
        let d = crate::density::estimate_density(
            &[0.0, 0.4, 1.1, 1.6],
            64,
            crate::density::Bandwidth::Fixed(0.3),
        )
        .unwrap();
        let delta = GridDensity::point_mass(0.0, d.step()).unwrap();
        let out = deconvolve(&d, &delta, 1e-4).unwrap();
        assert!((out.origin() - d.origin()).abs() < 1e-12);
        for i in 0..d.len() {
            assert!((out.values()[i] - d.values()[i]).abs() < 1e-9, "bin {i}");
        }
    }

    /// Smooth test density: mixture of two Gaussians, wider than any factor
    /// that will be divided out of it.
    fn smooth_mixture(step: f64) -> GridDensity {
        let n = (6.0 / step).round() as usize + 1;
        let values: Vec<f64> = (0..n)
            .map(|i| {
                let x = -3.0 + i as f64 * step;
                (-0.5 * ((x + 1.0) / 0.35_f64).powi(2)).exp()
                    + 0.7 * (-0.5 * ((x - 0.8) / 0.45_f64).powi(2)).exp()
            })
            .collect();
        GridDensity::new(-3.0, step, values).unwrap()
    }

    #[test]
    fn gaussian_factor_roundtrip_is_tight() {
        let step = 6.0 / 1023.0;
        let a = smooth_mixture(step);
        let b = GridDensity::gaussian(0.0, 0.25, -1.5, step, 512).unwrap();
        let c = convolve(&a, &b).unwrap();
        let rec = deconvolve(&c, &b, 1e-4).unwrap();
        assert!(rec.l1_distance(&a) < 1e-3, "l1 {}", rec.l1_distance(&a));
    }

    #[test]
    fn uniform_divisor_is_ill_conditioned() {
        // A 64-bin block divisor: its padded spectrum has exact zeros, and a
        // spiky observed density keeps real energy on those bins.
        let step = 1.0 / 64.0;
        let known = GridDensity::new(0.0, step, vec![1.0; 64]).unwrap();
        let observed = two_spike(-1.0, 1.0, 0.5, step, -3.5, 3.5);
        match deconvolve(&observed, &known, 1e-4) {
            Err(Error::DeconvolutionIllConditioned { clamped_energy }) => {
                assert!(clamped_energy > 0.2)
            }
            other => panic!(
                "expected ill-conditioned error, got {:?}",
                other.map(|d| d.values().iter().take(4).copied().collect::<Vec<_>>())
            ),
        }
    }

    #[test]
    fn gaussian_spectrum_has_no_zeros() {
        let d = GridDensity::gaussian(0.0, 0.5, -4.0, 8.0 / 511.0, 512).unwrap();
        assert!(spectrum_zeros(&d, 1e-2).unwrap().is_empty());
    }

    #[test]
    fn uniform_spectrum_zeros_sit_at_harmonics() {
        let step = 8.0 / 1023.0;
        let d = uniform_density(0.0, 1.0, step);
        let zeros = spectrum_zeros(&d, 1e-2).unwrap();
        assert!(zeros.len() >= 3, "found {zeros:?}");
        // A block of m bins at spacing `step` is a width m*step rectangle.
        let width = d.len() as f64 * step;
        let bin = super::spectrum_bin_width(&d);
        for (k, z) in zeros.iter().take(3).enumerate() {
            let target = (k + 1) as f64 / width;
            assert!((z - target).abs() <= bin, "zero {z} vs {target}");
        }
    }

    #[test]
    fn factor_zeros_persist_in_convolutions() {
        let step = 8.0 / 1023.0;
        let u = uniform_density(0.0, 1.0, step);
        let g = GridDensity::gaussian(0.0, 0.1, -0.6, step, 154).unwrap();
        let c = convolve(&u, &g).unwrap();
        let zu = spectrum_zeros(&u, 1e-2).unwrap();
        let zc = spectrum_zeros(&c, 1e-2).unwrap();
        let tol = 1.5 * super::spectrum_bin_width(&u).max(super::spectrum_bin_width(&c));
        for z in zu.iter().take(2) {
            assert!(
                zc.iter().any(|w| (w - z).abs() <= tol),
                "zero {z} lost: {zc:?}"
            );
        }
    }

    #[test]
    fn max_width_on_pure_gaussian_recovers_its_width() {
        let step = 8.0 / 511.0;
        let d = GridDensity::gaussian(0.0, 0.5, -4.0, step, 512).unwrap();
        let (sigma, remainder) = gaussian_max_width_deconv(&d, 1e-3).unwrap();
        assert!(sigma >= 0.5 - step, "sigma {sigma}");
        assert!(
            remainder.mass_within(remainder.mode(), 3.0 * step) > 0.975,
            "remainder not spike-like"
        );
    }

    #[test]
    fn two_spike_mixture_is_gaussian_indecomposable() {
        let step = 6.0 / 511.0;
        let d = two_spike(-1.0, 1.0, 0.5, step, -3.0, 3.0);
        let (sigma, _) = gaussian_max_width_deconv(&d, 1e-3).unwrap();
        assert!(sigma < 2.0 * step, "sigma {sigma}");
    }

    #[test]
    fn forward_constructed_width_is_recovered() {
        let step = 8.0 / 1023.0;
        let spikes = two_spike(-1.0, 1.0, 0.5, step, -3.0, 3.0);
        let g = GridDensity::gaussian(0.0, 0.3, -1.5, step, 385).unwrap();
        let d = convolve(&spikes, &g).unwrap();
        let (sigma, remainder) = gaussian_max_width_deconv(&d, 1e-3).unwrap();
        assert!((sigma - 0.3).abs() < 0.03, "sigma {sigma}");
        assert!(
            remainder.l1_distance(&spikes) < 0.05,
            "remainder l1 {}",
            remainder.l1_distance(&spikes)
        );
    }

    #[test]
    fn negativity_grows_with_width() {
        let step = 6.0 / 511.0;
        let spikes = two_spike(-1.0, 1.0, 0.5, step, -3.0, 3.0);
        let g = GridDensity::gaussian(0.0, 0.25, -1.5, step, 301).unwrap();
        let d = convolve(&spikes, &g).unwrap();
        let mut last = -1.0;
        for k in 0..12 {
            let sigma = k as f64 * 0.05;
            let (_, neg) = gaussian_quotient_raw(&d, sigma);
            assert!(neg >= last - 1e-12, "negative mass dipped at sigma {sigma}");
            last = neg;
        }
    }

    #[test]
    fn identity_matrix_inverts_exactly() {
        let m = StochasticMatrix::identity(3).unwrap();
        let q = DiscreteDistribution::new(vec![0.2, 0.5, 0.3]).unwrap();
        let r = invert_stochastic_matrix(&m, &q).unwrap();
        for (p, e) in r.distribution.probs().iter().zip(q.probs()) {
            assert!((p - e).abs() < 1e-12);
        }
    }

    #[test]
    fn hand_computed_two_state_inversion() {
        let m = StochasticMatrix::from_columns(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let q = DiscreteDistribution::new(vec![0.55, 0.45]).unwrap();
        let r = invert_stochastic_matrix(&m, &q).unwrap();
        assert!((r.distribution.probs()[0] - 0.5).abs() < 1e-12);
        assert!((r.distribution.probs()[1] - 0.5).abs() < 1e-12);
        assert!(r.residual_inf < 1e-12);
    }

    #[test]
    fn rank_deficient_matrix_is_not_injective() {
        let m = StochasticMatrix::from_columns(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let q = DiscreteDistribution::new(vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            invert_stochastic_matrix(&m, &q),
            Err(Error::NotInjective { rank: 1, cols: 2 })
        ));
    }

    #[test]
    fn unreachable_marginal_is_infeasible() {
        // Outputs of this M always put mass >= 0.1 on state 1.
        let m = StochasticMatrix::from_columns(&[vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap();
        let q = DiscreteDistribution::new(vec![1.0, 0.0]).unwrap();
        assert!(matches!(
            invert_stochastic_matrix(&m, &q),
            Err(Error::InfeasibleMarginal { .. })
        ));
    }

    #[test]
    fn new_noise_roundtrip_and_noise_free_limit() {
        let step = 8.0 / 1023.0;
        let phi_c = two_spike(-1.0, 1.0, 0.6, step, -3.0, 3.0);
        let noise = GridDensity::gaussian(0.0, 0.2, -1.0, step, 257).unwrap();
        let effect = convolve(&phi_c, &noise).unwrap();
        let rec = estimate_new_noise(&phi_c, &effect, 1e-4).unwrap();
        assert!(rec.l1_distance(&noise) < 1e-3, "l1 {}", rec.l1_distance(&noise));

        let same = estimate_new_noise(&phi_c, &phi_c, 1e-4).unwrap();
        assert!(same.mass_within(0.0, 3.0 * step) > 0.99);
    }

    #[test]
    fn extraction_matches_forward_construction() {
        let step = 8.0 / 1023.0;
        let spikes = two_spike(-1.0, 1.0, 0.5, step, -3.0, 3.0);
        let g = GridDensity::gaussian(0.0, 0.3, -1.5, step, 385).unwrap();
        let marginal = convolve(&spikes, &g).unwrap();
        let ex = extract_noise_from_output_marginal(&marginal, 1e-3).unwrap();
        assert!((ex.sigma - 0.3).abs() < 0.03, "sigma {}", ex.sigma);
        assert!(!ex.degenerate);

        let pure = extract_noise_from_output_marginal(&spikes, 1e-3).unwrap();
        assert!(pure.sigma < 2.0 * step);
        assert!(pure.signal.l1_distance(&spikes) < 0.05);

        let gauss = GridDensity::gaussian(0.0, 0.5, -4.0, step, 1024).unwrap();
        let deg = extract_noise_from_output_marginal(&gauss, 1e-3).unwrap();
        assert!(deg.degenerate, "sigma {} should flag near-spike", deg.sigma);
        assert!((deg.sigma - 0.5).abs() < 0.1);
    }

    #[test]
    fn identical_marginals_are_no_change() {
        let d = GridDensity::gaussian(0.0, 0.5, -3.0, 6.0 / 511.0, 512).unwrap();
        let diag = localize_change(&d, &d, &LocalizeConfig::default()).unwrap();
        assert_eq!(diag.verdict, ShiftVerdict::NoChange);
        assert_eq!(diag.l1_distance, 0.0);
    }

    #[test]
    fn persisting_zeros_mean_noise_changed() {
        let step = 8.0 / 1023.0;
        let phi_c = uniform_density(0.0, 1.0, step);
        let n1 = GridDensity::gaussian(0.0, 0.1, -0.6, step, 154).unwrap();
        let n2 = GridDensity::gaussian(0.0, 0.2, -1.0, step, 257).unwrap();
        let before = convolve(&phi_c, &n1).unwrap();
        let after = convolve(&phi_c, &n2).unwrap();
        let diag = localize_change(&before, &after, &LocalizeConfig::default()).unwrap();
        assert_eq!(diag.verdict, ShiftVerdict::NoiseChanged, "{diag:?}");
    }

    #[test]
    fn moved_remainder_means_cause_changed() {
        // Uneven spikes keep the spectrum clear of zeros so the Gaussian
        // width comparison decides.
        let step = 8.0 / 1023.0;
        let noise = GridDensity::gaussian(0.0, 0.2, -1.0, step, 257).unwrap();
        let before = convolve(&two_spike(-1.0, 1.0, 0.6, step, -3.0, 3.0), &noise).unwrap();
        let after = convolve(&two_spike(-0.4, 1.4, 0.6, step, -3.0, 3.0), &noise).unwrap();
        let diag = localize_change(&before, &after, &LocalizeConfig::default()).unwrap();
        assert_eq!(diag.verdict, ShiftVerdict::CauseMarginalChanged, "{diag:?}");
    }
}
