//! Probability densities on uniform 1-D grids: estimation and convolution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;

/// Tolerance for declaring two grid steps equal.
pub const STEP_TOL: f64 = 1e-12;

/// Bandwidth choice for kernel estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    /// Silverman's rule, `1.06 * sd * n^(-1/5)`.
    Auto,
    Fixed(f64),
}

impl Bandwidth {
    /// Resolves to a concrete bandwidth for `samples`.
    pub fn resolve(self, samples: &[f64]) -> Result<f64> {
        match self {
            Bandwidth::Fixed(h) => {
                if h.is_finite() && h > 0.0 {
                    Ok(h)
                } else {
                    Err(Error::InvalidArgument(format!(
                        "bandwidth must be positive and finite, got {h}"
                    )))
                }
            }
            Bandwidth::Auto => {
                let sd = sample_std(samples);
                if sd <= 0.0 {
                    return Err(Error::DegenerateSample(
                        "zero spread makes the automatic bandwidth undefined".into(),
                    ));
                }
                Ok(1.06 * sd * (samples.len() as f64).powf(-0.2))
            }
        }
    }
}

pub(crate) fn sample_std(samples: &[f64]) -> f64 {
    let n = samples.len();
    if n < 2 {
        return 0.0;
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let ss = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    (ss / (n as f64 - 1.0)).sqrt()
}

/// A probability density sampled on a uniform grid.
///
/// Grid point `i` sits at `origin + i * step`; `values[i]` is the density
/// height there. After construction `step * sum(values) = 1` within `1e-9`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDensity {
    origin: f64,
    step: f64,
    values: Vec<f64>,
}

impl GridDensity {
    /// Builds a density from non-negative heights, renormalizing so the grid
    /// integral is one.
    pub fn new(origin: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid step must be positive, got {step}"
            )));
        }
        if !origin.is_finite() {
            return Err(Error::InvalidArgument("grid origin must be finite".into()));
        }
        if values.len() < 2 {
            return Err(Error::InvalidArgument(
                "a grid density needs at least 2 points".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument(
                "density heights must be finite and non-negative".into(),
            ));
        }
        let mass: f64 = step * values.iter().sum::<f64>();
        if mass <= 0.0 {
            return Err(Error::DegenerateSample("density has zero mass".into()));
        }
        let values = values.into_iter().map(|v| v / mass).collect();
        Ok(Self {
            origin,
            step,
            values,
        })
    }

    /// A Gaussian with mean `center` and width `sigma` sampled on the given
    /// grid. `sigma = 0` degenerates to a single-bin spike at the grid point
    /// nearest `center`.
    pub fn gaussian(center: f64, sigma: f64, origin: f64, step: f64, len: usize) -> Result<Self> {
        if sigma < 0.0 || !sigma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "sigma must be non-negative, got {sigma}"
            )));
        }
        if sigma == 0.0 {
            let mut values = vec![0.0; len.max(2)];
            let idx = (((center - origin) / step).round().max(0.0) as usize).min(values.len() - 1);
            values[idx] = 1.0 / step;
            return GridDensity::new(origin, step, values);
        }
        let values = (0..len.max(2))
            .map(|i| {
                let x = origin + i as f64 * step;
                let z = (x - center) / sigma;
                (-0.5 * z * z).exp()
            })
            .collect();
        GridDensity::new(origin, step, values)
    }

    /// A single-bin spike carrying all mass at `coord`.
    pub fn point_mass(coord: f64, step: f64) -> Result<Self> {
        GridDensity::new(coord, step, vec![1.0 / step, 0.0])
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // len >= 2 by construction
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Coordinate of grid point `i`.
    pub fn coord(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.step
    }

    /// Coordinate of the last grid point.
    pub fn end(&self) -> f64 {
        self.coord(self.values.len() - 1)
    }

    /// `step * sum(values)`; one up to rounding.
    pub fn total_mass(&self) -> f64 {
        self.step * self.values.iter().sum::<f64>()
    }

    /// Density height at `x` by linear interpolation, zero outside the grid.
    pub fn value_at(&self, x: f64) -> f64 {
        let t = (x - self.origin) / self.step;
        if t < 0.0 || t > (self.values.len() - 1) as f64 {
            return 0.0;
        }
        let i = (t.floor() as usize).min(self.values.len() - 2);
        let frac = t - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    pub fn mean(&self) -> f64 {
        let m: f64 = (0..self.len())
            .map(|i| self.coord(i) * self.values[i])
            .sum();
        m * self.step
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        let v: f64 = (0..self.len())
            .map(|i| {
                let d = self.coord(i) - mu;
                d * d * self.values[i]
            })
            .sum();
        v * self.step
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().max(0.0).sqrt()
    }

    /// `L1` distance to `other`, integrated on the union of both supports at
    /// the finer of the two resolutions. Grids need not align.
    pub fn l1_distance(&self, other: &GridDensity) -> f64 {
        let step = self.step.min(other.step);
        let lo = self.origin.min(other.origin);
        let hi = self.end().max(other.end());
        let n = ((hi - lo) / step).ceil() as usize + 1;
        let mut acc = 0.0;
        for i in 0..n {
            let x = lo + i as f64 * step;
            acc += (self.value_at(x) - other.value_at(x)).abs();
        }
        acc * step
    }

    /// Fraction of total mass within `radius` of `center`.
    pub fn mass_within(&self, center: f64, radius: f64) -> f64 {
        let m: f64 = (0..self.len())
            .filter(|&i| (self.coord(i) - center).abs() <= radius)
            .map(|i| self.values[i])
            .sum();
        m * self.step / self.total_mass()
    }

    /// Coordinate of the highest grid point.
    pub fn mode(&self) -> f64 {
        let (idx, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |best, (i, &v)| {
                if v > best.1 {
                    (i, v)
                } else {
                    best
                }
            });
        self.coord(idx)
    }
}

pub(crate) fn check_steps(a: &GridDensity, b: &GridDensity) -> Result<()> {
    if (a.step() - b.step()).abs() > STEP_TOL {
        return Err(Error::GridMismatch(format!(
            "steps differ: {} vs {}",
            a.step(),
            b.step()
        )));
    }
    Ok(())
}

/// Gaussian-kernel density estimate of `samples` on a `grid_size`-point grid
/// spanning `[min - 3h, max + 3h]`.
pub fn estimate_density(samples: &[f64], grid_size: usize, bandwidth: Bandwidth) -> Result<GridDensity> {
    if grid_size < 16 {
        return Err(Error::InvalidArgument(format!(
            "grid_size must be at least 16, got {grid_size}"
        )));
    }
    check_samples(samples)?;
    let h = bandwidth.resolve(samples)?;
    let (min, max) = min_max(samples);
    // Work in coordinates relative to the sample minimum so that shifting
    // every sample by a constant shifts the origin and nothing else.
    let rel: Vec<f64> = samples.iter().map(|x| x - min).collect();
    let span = (max - min) + 6.0 * h;
    let step = span / (grid_size - 1) as f64;
    let values = kde_values(&rel, h, -3.0 * h, step, grid_size);
    GridDensity::new(min - 3.0 * h, step, values)
}

/// Gaussian-kernel density estimate evaluated on an explicitly given grid.
/// Used when several estimates must share one grid.
pub fn estimate_density_on_grid(
    samples: &[f64],
    bandwidth: Bandwidth,
    origin: f64,
    step: f64,
    len: usize,
) -> Result<GridDensity> {
    check_samples(samples)?;
    let h = bandwidth.resolve(samples)?;
    let values = kde_values(samples, h, origin, step, len);
    GridDensity::new(origin, step, values)
}

fn kde_values(samples: &[f64], h: f64, origin: f64, step: f64, len: usize) -> Vec<f64> {
    let inv_h = 1.0 / h;
    (0..len)
        .map(|i| {
            let g = origin + i as f64 * step;
            samples
                .iter()
                .map(|&x| {
                    let z = (g - x) * inv_h;
                    (-0.5 * z * z).exp()
                })
                .sum::<f64>()
        })
        .collect()
}

fn check_samples(samples: &[f64]) -> Result<()> {
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite sample".into()));
    }
    let distinct = {
        let (min, max) = min_max(samples);
        samples.len() >= 2 && max > min
    };
    if !distinct {
        return Err(Error::DegenerateSample(
            "need at least 2 distinct samples".into(),
        ));
    }
    Ok(())
}

pub(crate) fn min_max(samples: &[f64]) -> (f64, f64) {
    samples.iter().fold((f64::MAX, f64::MIN), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    })
}

/// Discrete linear convolution of two densities sharing a step.
///
/// The result lives on the sum grid (`origin = a.origin + b.origin`, length
/// `a.len() + b.len() - 1`) and is renormalized to unit mass.
pub fn convolve(a: &GridDensity, b: &GridDensity) -> Result<GridDensity> {
    check_steps(a, b)?;
    let out_len = a.len() + b.len() - 1;
    let nfft = out_len.next_power_of_two();
    let fa = fft::forward(a.values(), nfft);
    let fb = fft::forward(b.values(), nfft);
    let product: Vec<_> = fa.iter().zip(fb.iter()).map(|(x, y)| x * y).collect();
    let raw = fft::inverse_real(product);
    let step = a.step();
    let values: Vec<f64> = raw[..out_len]
        .iter()
        .map(|v| (v * step).max(0.0)) // clip FFT round-off negatives
        .collect();
    GridDensity::new(a.origin() + b.origin(), step, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent O(n^2) convolution used as the oracle for the FFT path.
    fn convolve_direct(a: &GridDensity, b: &GridDensity) -> Vec<f64> {
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (i, &av) in a.values().iter().enumerate() {
            for (j, &bv) in b.values().iter().enumerate() {
                out[i + j] += av * bv * a.step();
            }
        }
        out
    }

    fn normal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
        let z = (x - mu) / sigma;
        (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
    }

    #[test]
    fn symmetric_samples_give_symmetric_density() {
        let samples = [-1.0, 1.0, -1.0, 1.0, -1.0, 1.0];
        let d = estimate_density(&samples, 101, Bandwidth::Fixed(0.5)).unwrap();
        let n = d.len();
        for i in 0..n {
            let diff = (d.values()[i] - d.values()[n - 1 - i]).abs();
            assert!(diff < 1e-9, "asymmetry {diff} at {i}");
        }
    }

    #[test]
    fn kde_close_to_analytic_normal() {
        // 10_000 standard-normal draws -> L1 distance to the closed form < 0.05.
        use rand_distr::{Distribution, Normal};
        let mut rng = crate::seeding::rng_for(42, 0);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let samples: Vec<f64> = (0..10_000).map(|_| normal.sample(&mut rng)).collect();
        let d = estimate_density(&samples, 512, Bandwidth::Auto).unwrap();
        let l1: f64 = (0..d.len())
            .map(|i| (d.values()[i] - normal_pdf(d.coord(i), 0.0, 1.0)).abs() * d.step())
            .sum();
        assert!(l1 < 0.05, "L1 to analytic normal: {l1}");
    }

    #[test]
    fn identical_samples_are_degenerate() {
        assert!(matches!(
            estimate_density(&[5.0, 5.0, 5.0], 64, Bandwidth::Auto),
            Err(Error::DegenerateSample(_))
        ));
    }

    #[test]
    fn grid_size_floor_enforced() {
        assert!(matches!(
            estimate_density(&[0.0, 1.0], 8, Bandwidth::Auto),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn density_mass_is_one() {
        let d = estimate_density(&[0.0, 0.3, 1.0, 2.0], 64, Bandwidth::Auto).unwrap();
        assert!((d.total_mass() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn convolving_with_point_mass_is_identity() {
        let d = estimate_density(&[0.0, 0.5, 1.0, 1.5], 64, Bandwidth::Fixed(0.3)).unwrap();
        let delta = GridDensity::point_mass(0.0, d.step()).unwrap();
        let c = convolve(&d, &delta).unwrap();
        assert!((c.origin() - d.origin()).abs() < 1e-12);
        for i in 0..d.len() {
            assert!(
                (c.values()[i] - d.values()[i]).abs() < 1e-9,
                "mismatch at {i}"
            );
        }
    }

    #[test]
    fn uniform_convolution_is_triangular() {
        // Two uniforms on [0,1] -> triangle on [0,2] peaking at 1.
        let n = 201;
        let step = 1.0 / (n - 1) as f64;
        let u = GridDensity::new(0.0, step, vec![1.0; n]).unwrap();
        let c = convolve(&u, &u).unwrap();
        let direct = convolve_direct(&u, &u);
        let mass: f64 = direct.iter().sum::<f64>() * step;
        // FFT path matches the direct-summation oracle bin by bin.
        for (i, &dv) in direct.iter().enumerate() {
            assert!((c.values()[i] - dv / mass).abs() < 1e-9, "bin {i}");
        }
        // Peak at coordinate 1, density ~1.
        let peak_idx = (1.0_f64 / step).round() as usize;
        assert!((c.coord(peak_idx) - 1.0).abs() < step);
        assert!((c.values()[peak_idx] - 1.0).abs() < 0.02);
        // Near-zero at the edges.
        assert!(c.values()[1] < 0.02 && c.values()[c.len() - 2] < 0.02);
    }

    #[test]
    fn convolution_commutes_bitwise() {
        let a = estimate_density(&[0.0, 0.4, 0.9], 48, Bandwidth::Fixed(0.25)).unwrap();
        let b = GridDensity::gaussian(0.3, 0.4, -1.0, a.step(), 80).unwrap();
        let ab = convolve(&a, &b).unwrap();
        let ba = convolve(&b, &a).unwrap();
        for i in 0..ab.len() {
            assert_eq!(ab.values()[i].to_bits(), ba.values()[i].to_bits());
        }
    }

    #[test]
    fn convolve_rejects_mismatched_steps() {
        let a = GridDensity::new(0.0, 0.1, vec![1.0; 16]).unwrap();
        let b = GridDensity::new(0.0, 0.2, vec![1.0; 16]).unwrap();
        assert!(matches!(convolve(&a, &b), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn translation_equivariance_bitwise() {
        // Dyadic samples, dyadic shift and fixed dyadic bandwidth keep every
        // floating-point operation exact, so heights must match bit for bit.
        let samples = [0.125, 0.5, 0.75, 1.0, 0.25];
        let shift = 3.5;
        let shifted: Vec<f64> = samples.iter().map(|x| x + shift).collect();
        let d0 = estimate_density(&samples, 64, Bandwidth::Fixed(0.25)).unwrap();
        let d1 = estimate_density(&shifted, 64, Bandwidth::Fixed(0.25)).unwrap();
        assert_eq!(d0.step().to_bits(), d1.step().to_bits());
        assert!((d1.origin() - d0.origin() - shift).abs() < 1e-12);
        for i in 0..d0.len() {
            assert_eq!(d0.values()[i].to_bits(), d1.values()[i].to_bits());
        }
    }

    #[test]
    fn value_at_interpolates_and_vanishes_outside() {
        let d = GridDensity::new(0.0, 0.5, vec![1.0, 3.0]).unwrap();
        assert_eq!(d.value_at(-0.1), 0.0);
        assert_eq!(d.value_at(0.6), 0.0);
        let mid = d.value_at(0.25);
        assert!((mid - 0.5 * (d.values()[0] + d.values()[1])).abs() < 1e-12);
    }

    #[test]
    fn json_shape_matches_contract() {
        let d = GridDensity::new(1.0, 0.5, vec![1.0, 1.0]).unwrap();
        let json = serde_json::to_value(&d).unwrap();
        assert!(json.get("origin").is_some());
        assert!(json.get("step").is_some());
        assert!(json.get("values").unwrap().is_array());
    }
}
