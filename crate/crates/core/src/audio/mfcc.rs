//! Mel filterbank, cepstral coefficients, temporal statistics and
//! regression deltas.

use serde::{Deserialize, Serialize};

use super::spectrum::{bin_frequencies, Spectrogram, Stft};
use super::{AudioConfig, AudioError, Segment};

/// Coefficient-by-frame matrix, stored as `K` rows of `T` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfccMatrix {
    rows: Vec<Vec<f64>>,
}

impl MfccMatrix {
    /// Panics if rows are ragged or empty.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        assert!(!rows.is_empty(), "matrix needs at least one row");
        let t = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == t), "ragged matrix");
        Self { rows }
    }

    pub fn coefficients(&self) -> usize {
        self.rows.len()
    }

    pub fn frames(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn get(&self, k: usize, t: usize) -> f64 {
        self.rows[k][t]
    }
}

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular filters on the HTK mel scale, evaluated at exact bin
/// frequencies. Peak weight is 1; filters are not area-normalized.
pub fn mel_filterbank(cfg: &AudioConfig) -> Vec<Vec<f64>> {
    let lo = hz_to_mel(cfg.fmin);
    let hi = hz_to_mel(cfg.fmax);
    let edges: Vec<f64> = (0..cfg.n_mels + 2)
        .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (cfg.n_mels + 1) as f64))
        .collect();
    let freqs = bin_frequencies(cfg.n_fft, cfg.sample_rate);
    (0..cfg.n_mels)
        .map(|m| {
            let (left, centre, right) = (edges[m], edges[m + 1], edges[m + 2]);
            freqs
                .iter()
                .map(|&f| {
                    if f >= left && f <= centre && centre > left {
                        (f - left) / (centre - left)
                    } else if f > centre && f <= right && right > centre {
                        (right - f) / (right - centre)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// Orthonormal DCT-II basis, `n_out` rows of length `n_in`.
pub fn dct_matrix(n_out: usize, n_in: usize) -> Vec<Vec<f64>> {
    let n = n_in as f64;
    (0..n_out)
        .map(|k| {
            let scale = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
            (0..n_in)
                .map(|i| {
                    scale * (std::f64::consts::PI * k as f64 * (2 * i + 1) as f64 / (2.0 * n)).cos()
                })
                .collect()
        })
        .collect()
}

/// MFCC computation from a power spectrogram.
#[derive(Debug, Clone)]
pub struct MfccBank {
    filters: Vec<Vec<f64>>,
    dct: Vec<Vec<f64>>,
    log_floor: f64,
}

impl MfccBank {
    pub fn new(cfg: &AudioConfig) -> Self {
        Self {
            filters: mel_filterbank(cfg),
            dct: dct_matrix(cfg.n_mfcc, cfg.n_mels),
            log_floor: cfg.log_floor,
        }
    }

    pub fn from_spectrogram(&self, spec: &Spectrogram) -> MfccMatrix {
        let k = self.dct.len();
        let mut rows = vec![Vec::with_capacity(spec.frames()); k];
        for power in &spec.power {
            let log_mel: Vec<f64> = self
                .filters
                .iter()
                .map(|filt| {
                    let e: f64 = filt.iter().zip(power).map(|(w, p)| w * p).sum();
                    e.max(self.log_floor).ln()
                })
                .collect();
            for (row, basis) in rows.iter_mut().zip(&self.dct) {
                row.push(basis.iter().zip(&log_mel).map(|(b, x)| b * x).sum());
            }
        }
        MfccMatrix { rows }
    }
}

/// MFCC matrix of one segment with `n_mfcc` coefficients.
pub fn mfcc(seg: &Segment, n_mfcc: usize, cfg: &AudioConfig) -> MfccMatrix {
    let cfg = AudioConfig {
        n_mfcc,
        ..cfg.clone()
    };
    let spec = Stft::new(&cfg).spectrogram(seg.samples());
    MfccBank::new(&cfg).from_spectrogram(&spec)
}

/// Per-coefficient temporal mean and population standard deviation.
pub fn mfcc_statistics(m: &MfccMatrix) -> (Vec<f64>, Vec<f64>) {
    let t = m.frames() as f64;
    m.rows
        .iter()
        .map(|row| {
            let mean = row.iter().sum::<f64>() / t;
            let var = row.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / t;
            (mean, var.sqrt())
        })
        .unzip()
}

/// Regression delta with half-window `n` and edge replication:
/// `d_t = sum_{i=1..n} i (c_{t+i} - c_{t-i}) / (2 sum i^2)`.
pub fn delta(m: &MfccMatrix, half_window: usize) -> Result<MfccMatrix, AudioError> {
    let t_len = m.frames();
    if t_len < 3 {
        return Err(AudioError::TooFewFrames(t_len));
    }
    let denom = 2.0 * (1..=half_window).map(|i| (i * i) as f64).sum::<f64>();
    let last = t_len as isize - 1;
    let rows = m
        .rows
        .iter()
        .map(|row| {
            (0..t_len as isize)
                .map(|t| {
                    let mut acc = 0.0;
                    for i in 1..=half_window as isize {
                        let ahead = row[(t + i).min(last) as usize];
                        let behind = row[(t - i).max(0) as usize];
                        acc += i as f64 * (ahead - behind);
                    }
                    acc / denom
                })
                .collect()
        })
        .collect();
    Ok(MfccMatrix { rows })
}

/// First (`order = 1`) or second (`order = 2`) order deltas.
pub fn deltas(m: &MfccMatrix, order: u8, half_window: usize) -> Result<MfccMatrix, AudioError> {
    match order {
        1 => delta(m, half_window),
        2 => delta(&delta(m, half_window)?, half_window),
        other => panic!("delta order must be 1 or 2, got {other}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statistics_constant_row() {
        let (mu, sd) = mfcc_statistics(&MfccMatrix::from_rows(vec![vec![1.0, 1.0, 1.0]]));
        assert_eq!(mu, vec![1.0]);
        assert_eq!(sd, vec![0.0]);
    }

    #[test]
    fn statistics_population_sigma() {
        let (mu, sd) = mfcc_statistics(&MfccMatrix::from_rows(vec![vec![0.0, 2.0]]));
        assert_eq!(mu, vec![1.0]);
        assert_eq!(sd, vec![1.0]);
    }

    #[test]
    fn statistics_single_frame() {
        let (_, sd) = mfcc_statistics(&MfccMatrix::from_rows(vec![vec![3.0], vec![-2.0]]));
        assert_eq!(sd, vec![0.0, 0.0]);
    }

    #[test]
    fn delta_of_constant_is_zero() {
        let m = MfccMatrix::from_rows(vec![vec![4.0; 7], vec![-1.5; 7]]);
        let d = deltas(&m, 1, 2).unwrap();
        assert!(d.rows().iter().flatten().all(|&x| x == 0.0));
    }

    #[test]
    fn delta_of_ramp() {
        let m = MfccMatrix::from_rows(vec![vec![0.0, 1.0, 2.0, 3.0, 4.0]]);
        let d = deltas(&m, 1, 2).unwrap();
        assert_eq!(d.get(0, 2), 1.0);
        // edge replication flattens the ends
        assert_eq!(d.get(0, 0), 0.5);
        assert_eq!(d.get(0, 1), 0.8);

        let long = MfccMatrix::from_rows(vec![(0..12).map(f64::from).collect()]);
        let d2 = deltas(&long, 2, 2).unwrap();
        for t in 4..8 {
            assert!(d2.get(0, t).abs() < 1e-15);
        }
    }

    #[test]
    fn delta_needs_three_frames() {
        let m = MfccMatrix::from_rows(vec![vec![0.0, 1.0]]);
        assert_eq!(deltas(&m, 1, 2), Err(AudioError::TooFewFrames(2)));
    }

    #[test]
    fn dct_is_orthonormal() {
        let d = dct_matrix(26, 26);
        for i in 0..26 {
            for j in 0..26 {
                let dot: f64 = d[i].iter().zip(&d[j]).map(|(a, b)| a * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn silence_gives_constant_frames() {
        let cfg = AudioConfig::default();
        let seg = Segment::from_samples(vec![0.0; 32_000], 0);
        let m = mfcc(&seg, 13, &cfg);
        assert_eq!(m.coefficients(), 13);
        assert_eq!(m.frames(), 198);
        let c0 = (26f64).sqrt() * (1e-10f64).ln();
        for t in 0..m.frames() {
            assert!((m.get(0, t) - c0).abs() < 1e-9);
            for k in 0..13 {
                assert_eq!(m.get(k, t), m.get(k, 0));
            }
            for k in 1..13 {
                assert!(m.get(k, t).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn mel_round_trip() {
        for hz in [0.0, 300.0, 1000.0, 8000.0] {
            assert!((mel_to_hz(hz_to_mel(hz)) - hz).abs() < 1e-9);
        }
    }
}
