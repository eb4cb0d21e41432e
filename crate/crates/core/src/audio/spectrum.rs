//! Short-time spectra shared by the MFCC and spectral-descriptor paths.

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use super::{frame_count, AudioConfig};

/// Periodic Hann window of length `n`.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
        .collect()
}

/// Centre frequency in Hz of each one-sided FFT bin.
pub fn bin_frequencies(n_fft: usize, sample_rate: u32) -> Vec<f64> {
    (0..=n_fft / 2)
        .map(|k| k as f64 * f64::from(sample_rate) / n_fft as f64)
        .collect()
}

/// One-sided spectra of Hann-windowed, zero-padded frames.
#[derive(Debug, Clone)]
pub struct Spectrogram {
    /// `|X_k|` per frame, `n_fft/2 + 1` bins each.
    pub magnitude: Vec<Vec<f64>>,
    /// `|X_k|^2` per frame.
    pub power: Vec<Vec<f64>>,
}

impl Spectrogram {
    pub fn frames(&self) -> usize {
        self.magnitude.len()
    }
}

/// Frames a signal and runs the FFT. Holds the planned transform and the
/// window so repeated calls allocate only their output.
pub struct Stft {
    frame_len: usize,
    hop: usize,
    n_fft: usize,
    window: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Stft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Stft")
            .field("frame_len", &self.frame_len)
            .field("hop", &self.hop)
            .field("n_fft", &self.n_fft)
            .finish()
    }
}

impl Stft {
    pub fn new(cfg: &AudioConfig) -> Self {
        assert!(cfg.n_fft >= cfg.frame_len, "n_fft must cover the frame");
        let mut planner = FftPlanner::new();
        Self {
            frame_len: cfg.frame_len,
            hop: cfg.hop,
            n_fft: cfg.n_fft,
            window: hann(cfg.frame_len),
            fft: planner.plan_fft_forward(cfg.n_fft),
        }
    }

    /// Raw (unwindowed) frames.
    pub fn frames<'a>(&'a self, signal: &'a [f64]) -> impl Iterator<Item = &'a [f64]> + 'a {
        let n = frame_count(signal.len(), self.frame_len, self.hop);
        (0..n).map(move |t| &signal[t * self.hop..t * self.hop + self.frame_len])
    }

    pub fn spectrogram(&self, signal: &[f64]) -> Spectrogram {
        let bins = self.n_fft / 2 + 1;
        let mut buf = vec![Complex::new(0.0, 0.0); self.n_fft];
        let mut scratch = vec![Complex::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        let mut magnitude = Vec::new();
        let mut power = Vec::new();
        for frame in self.frames(signal) {
            for (i, slot) in buf.iter_mut().enumerate() {
                let v = if i < self.frame_len { frame[i] * self.window[i] } else { 0.0 };
                *slot = Complex::new(v, 0.0);
            }
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            let pow: Vec<f64> = buf[..bins].iter().map(|c| c.norm_sqr()).collect();
            magnitude.push(pow.iter().map(|p| p.sqrt()).collect());
            power.push(pow);
        }
        Spectrogram { magnitude, power }
    }
}
