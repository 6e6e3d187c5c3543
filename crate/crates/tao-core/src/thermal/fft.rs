//! FFT-backed linear convolution used by the thermal engine.
//!
//! The kernel spectrum is computed once so Monte Carlo callers can reuse one
//! `Convolver` across many power traces (it is `Send + Sync`).

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

pub(crate) struct Convolver {
    size: usize,
    kernel_len: usize,
    kernel_fft: Vec<Complex<f64>>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl Convolver {
    pub fn new(kernel: &[f64], signal_len: usize) -> Self {
        let size = (signal_len + kernel.len()).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(size);
        let ifft = planner.plan_fft_inverse(size);
        let mut kernel_fft = vec![Complex::new(0.0, 0.0); size];
        for (dst, &src) in kernel_fft.iter_mut().zip(kernel) {
            dst.re = src;
        }
        fft.process(&mut kernel_fft);
        Self {
            size,
            kernel_len: kernel.len(),
            kernel_fft,
            fft,
            ifft,
        }
    }

    /// First `signal.len()` samples of the causal linear convolution
    /// `out[n] = sum_k signal[k] * kernel[n - k]`.
    pub fn convolve(&self, signal: &[f64]) -> Vec<f64> {
        // circular wraparound must stay out of the first signal.len() samples
        assert!(
            signal.len() + self.kernel_len <= self.size + 1,
            "signal longer than the convolver was planned for"
        );
        let mut buf = vec![Complex::new(0.0, 0.0); self.size];
        for (dst, &src) in buf.iter_mut().zip(signal) {
            dst.re = src;
        }
        self.fft.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel_fft) {
            *b *= *k;
        }
        self.ifft.process(&mut buf);
        let scale = 1.0 / self.size as f64;
        buf[..signal.len()].iter().map(|c| c.re * scale).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(signal: &[f64], kernel: &[f64]) -> Vec<f64> {
        (0..signal.len())
            .map(|n| {
                (0..=n)
                    .filter(|&k| n - k < kernel.len())
                    .map(|k| signal[k] * kernel[n - k])
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_convolution() {
        let signal: Vec<f64> = (0..257).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let kernel: Vec<f64> = (0..93).map(|i| (-(i as f64) / 20.0).exp()).collect();
        let conv = Convolver::new(&kernel, signal.len());
        let got = conv.convolve(&signal);
        let want = naive(&signal, &kernel);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-9, "{g} vs {w}");
        }
    }

    #[test]
    fn reusable_across_signals() {
        let kernel = [1.0, 0.5, 0.25];
        let conv = Convolver::new(&kernel, 16);
        let a = conv.convolve(&[1.0; 16]);
        let b = conv.convolve(&[1.0; 16]);
        assert_eq!(a, b);
    }
}
