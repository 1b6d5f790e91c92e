//! Hilbert-Schmidt independence criterion with permutation p-values.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, ExecMode};
use crate::seeding::rng_for;

/// Minimum sample size for the test.
pub const MIN_HSIC_POINTS: usize = 10;
/// Minimum permutation count.
pub const MIN_PERMUTATIONS: usize = 99;

/// Biased HSIC statistic between `u` and `v` with Gaussian kernels
/// (median-heuristic bandwidths) and a permutation p-value.
///
/// The p-value is `(1 + #{permuted >= observed}) / (1 + permutations)`.
/// Each permutation draws from its own seed-derived stream, so the result is
/// deterministic and independent of evaluation order.
pub fn hsic_test(u: &[f64], v: &[f64], permutations: usize, seed: u64) -> Result<(f64, f64)> {
    hsic_test_with(ExecMode::default(), u, v, permutations, seed)
}

/// [`hsic_test`] with an explicit execution strategy for the permutation loop.
pub fn hsic_test_with(
    mode: ExecMode,
    u: &[f64],
    v: &[f64],
    permutations: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let n = u.len();
    if v.len() != n {
        return Err(Error::InvalidDataset(
            "u and v must have equal length".into(),
        ));
    }
    if n < MIN_HSIC_POINTS {
        return Err(Error::InsufficientData {
            needed: MIN_HSIC_POINTS,
            got: n,
        });
    }
    if permutations < MIN_PERMUTATIONS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_PERMUTATIONS} permutations, got {permutations}"
        )));
    }
    let ku = centered_gram(u)?;
    let kv = centered_gram(v)?;
    let scale = 1.0 / (n as f64 * n as f64);
    let observed = (0..n * n).map(|i| ku[i] * kv[i]).sum::<f64>() * scale;
    let observed = observed.max(0.0);

    let exceed = map_indexed(mode, permutations, |t| {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng_for(seed, t as u64 + 1));
        let mut acc = 0.0;
        for i in 0..n {
            let row_k = &ku[i * n..(i + 1) * n];
            let row_v = &kv[perm[i] * n..perm[i] * n + n];
            for j in 0..n {
                acc += row_k[j] * row_v[perm[j]];
            }
        }
        u32::from(acc * scale >= observed)
    })
    .into_iter()
    .map(u64::from)
    .sum::<u64>();

    let pvalue = (1 + exceed) as f64 / (1 + permutations) as f64;
    Ok((observed, pvalue))
}

/// Gaussian Gram matrix of `x` with the median-heuristic bandwidth, doubly
/// centered.
fn centered_gram(x: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    let sigma = median_heuristic(x)?;
    let inv = 1.0 / (2.0 * sigma * sigma);
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        k[i * n + i] = 1.0;
        for j in (i + 1)..n {
            let d = x[i] - x[j];
            let val = (-d * d * inv).exp();
            k[i * n + j] = val;
            k[j * n + i] = val;
        }
    }
    // Double centering: K <- K - row means - col means + grand mean.
    let mut row_means = vec![0.0; n];
    for i in 0..n {
        row_means[i] = k[i * n..(i + 1) * n].iter().sum::<f64>() / n as f64;
    }
    let grand = row_means.iter().sum::<f64>() / n as f64;
    for i in 0..n {
        for j in 0..n {
            k[i * n + j] += grand - row_means[i] - row_means[j];
        }
    }
    Ok(k)
}

/// Median pairwise distance; falls back to the median of nonzero distances
/// when ties drive the plain median to zero.
fn median_heuristic(x: &[f64]) -> Result<f64> {
    let (min, max) = crate::density::min_max(x);
    if !(max > min) {
        return Err(Error::DegenerateSample(
            "zero spread: median-heuristic bandwidth undefined".into(),
        ));
    }
    let n = x.len();
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            dists.push((x[i] - x[j]).abs());
        }
    }
    dists.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let med = dists[dists.len() / 2];
    if med > 0.0 {
        return Ok(med);
    }
    let first_nonzero = dists.iter().position(|d| *d > 0.0).expect("spread checked");
    let nonzero = &dists[first_nonzero..];
    Ok(nonzero[nonzero.len() / 2])
}
