//! Thin wrappers around rustfft for real-valued grid work.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Forward DFT of `values` zero-padded to `n`.
pub(crate) fn forward(values: &[f64], n: usize) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    buf.resize(n, Complex::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf
}

/// Inverse DFT; returns the real parts scaled by `1/n`.
pub(crate) fn inverse_real(mut spectrum: Vec<Complex<f64>>) -> Vec<f64> {
    let n = spectrum.len();
    FftPlanner::new()
        .plan_fft_inverse(n)
        .process(&mut spectrum);
    let scale = 1.0 / n as f64;
    spectrum.iter().map(|c| c.re * scale).collect()
}
