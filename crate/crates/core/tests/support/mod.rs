//! Reference implementations used only by tests. They follow the textbook
//! definitions directly (naive DFT, explicit sums) and share no code with
//! the library.

#![allow(dead_code)]

use std::f64::consts::PI;

pub const SR: f64 = 16_000.0;
pub const FRAME: usize = 400;
pub const HOP: usize = 160;
pub const NFFT: usize = 512;
pub const NMELS: usize = 26;
pub const NMFCC: usize = 13;
pub const FLOOR: f64 = 1e-10;

/// `|a - b| <= tol * max(|b|, 1)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

/// Naive DFT power spectrum of a zero-padded frame, bins `0..=n/2`.
pub struct Dft {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Dft {
    pub fn new() -> Self {
        let cos = (0..NFFT).map(|m| (2.0 * PI * m as f64 / NFFT as f64).cos()).collect();
        let sin = (0..NFFT).map(|m| (2.0 * PI * m as f64 / NFFT as f64).sin()).collect();
        Self { cos, sin }
    }

    pub fn power(&self, x: &[f64]) -> Vec<f64> {
        (0..=NFFT / 2)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (n, v) in x.iter().enumerate() {
                    let m = (k * n) % NFFT;
                    re += v * self.cos[m];
                    im -= v * self.sin[m];
                }
                re * re + im * im
            })
            .collect()
    }
}

pub fn frames(x: &[f64]) -> Vec<&[f64]> {
    let t = 1 + (x.len() - FRAME) / HOP;
    (0..t).map(|i| &x[i * HOP..i * HOP + FRAME]).collect()
}

pub fn windowed(frame: &[f64]) -> Vec<f64> {
    frame
        .iter()
        .enumerate()
        .map(|(n, v)| v * (0.5 - 0.5 * (2.0 * PI * n as f64 / FRAME as f64).cos()))
        .collect()
}

fn mel(f: f64) -> f64 {
    1127.0 * (1.0 + f / 700.0).ln()
}

fn inv_mel(m: f64) -> f64 {
    700.0 * ((m / 1127.0).exp() - 1.0)
}

/// Triangular filters on the HTK mel scale, sampled at bin centres.
pub fn filterbank() -> Vec<Vec<f64>> {
    let top = mel(SR / 2.0);
    let pts: Vec<f64> = (0..NMELS + 2).map(|i| inv_mel(top * i as f64 / (NMELS + 1) as f64)).collect();
    (0..NMELS)
        .map(|m| {
            (0..=NFFT / 2)
                .map(|k| {
                    let f = k as f64 * SR / NFFT as f64;
                    let up = (f - pts[m]) / (pts[m + 1] - pts[m]);
                    let down = (pts[m + 2] - f) / (pts[m + 2] - pts[m + 1]);
                    up.min(down).max(0.0)
                })
                .collect()
        })
        .collect()
}

/// Orthonormal DCT-II of one vector, first `k` outputs.
pub fn dct2(x: &[f64], k: usize) -> Vec<f64> {
    let n = x.len() as f64;
    (0..k)
        .map(|q| {
            let s: f64 = x
                .iter()
                .enumerate()
                .map(|(i, v)| v * (PI * q as f64 * (i as f64 + 0.5) / n).cos())
                .sum();
            s * if q == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() }
        })
        .collect()
}

/// Regression deltas with N = 2 and edge replication, per row.
pub fn deltas(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| {
            let t = r.len() as i64;
            let at = |i: i64| r[i.clamp(0, t - 1) as usize];
            (0..t)
                .map(|i| ((at(i + 1) - at(i - 1)) + 2.0 * (at(i + 2) - at(i - 2))) / 10.0)
                .collect()
        })
        .collect()
}

pub fn mean_std(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (m, (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt())
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let i = h.floor() as usize;
    if i + 1 >= sorted.len() {
        return sorted[i];
    }
    sorted[i] + (h - i as f64) * (sorted[i + 1] - sorted[i])
}

/// mean, std, min, max, p25, p75, skew, excess kurtosis (population).
pub fn summary(x: &[f64]) -> Vec<f64> {
    let mut s = x.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (lo, hi) = (s[0], s[s.len() - 1]);
    if lo == hi {
        return vec![lo, 0.0, lo, hi, lo, hi, 0.0, 0.0];
    }
    let (m, sd) = mean_std(x);
    let n = x.len() as f64;
    let skew = x.iter().map(|v| ((v - m) / sd).powi(3)).sum::<f64>() / n;
    let kurt = x.iter().map(|v| ((v - m) / sd).powi(4)).sum::<f64>() / n - 3.0;
    vec![m, sd, lo, hi, quantile(&s, 0.25), quantile(&s, 0.75), skew, kurt]
}

/// The 126 acoustic features of one normalized 2 s segment.
pub fn features(seg: &[f64]) -> Vec<f64> {
    let dft = Dft::new();
    let fb = filterbank();
    let freqs: Vec<f64> = (0..=NFFT / 2).map(|k| k as f64 * SR / NFFT as f64).collect();
    let frs = frames(seg);

    let mut mfcc = vec![Vec::new(); NMFCC];
    let mut lld = vec![Vec::new(); 6];
    for fr in &frs {
        let p = dft.power(&windowed(fr));
        let logmel: Vec<f64> = fb
            .iter()
            .map(|f| f.iter().zip(&p).map(|(w, v)| w * v).sum::<f64>().max(FLOOR).ln())
            .collect();
        for (row, c) in mfcc.iter_mut().zip(dct2(&logmel, NMFCC)) {
            row.push(c);
        }

        lld[0].push((fr.iter().map(|v| v * v).sum::<f64>() / FRAME as f64).sqrt());
        let zc = (1..FRAME).filter(|&i| (fr[i] >= 0.0) != (fr[i - 1] >= 0.0)).count();
        lld[1].push(zc as f64 / FRAME as f64);

        let mag: Vec<f64> = p.iter().map(|v| v.sqrt()).collect();
        let total: f64 = mag.iter().sum();
        if total > 0.0 {
            let c = mag.iter().zip(&freqs).map(|(m, f)| m * f).sum::<f64>() / total;
            let bw = (mag.iter().zip(&freqs).map(|(m, f)| m * (f - c).powi(2)).sum::<f64>() / total).sqrt();
            let mut acc = 0.0;
            let mut roll = freqs[NFFT / 2];
            for (m, f) in mag.iter().zip(&freqs) {
                acc += m;
                if acc >= 0.85 * total {
                    roll = *f;
                    break;
                }
            }
            lld[2].push(c);
            lld[3].push(bw);
            lld[4].push(roll);
        } else {
            lld[2].push(0.0);
            lld[3].push(0.0);
            lld[4].push(0.0);
        }
        let fl: Vec<f64> = p.iter().map(|v| v.max(FLOOR)).collect();
        let geo = (fl.iter().map(|v| v.ln()).sum::<f64>() / fl.len() as f64).exp();
        let ari = fl.iter().sum::<f64>() / fl.len() as f64;
        lld[5].push(geo / ari);
    }

    let d1 = deltas(&mfcc);
    let d2 = deltas(&d1);
    let mut out = Vec::with_capacity(126);
    for mat in [&mfcc, &d1, &d2] {
        let stats: Vec<(f64, f64)> = mat.iter().map(|r| mean_std(r)).collect();
        out.extend(stats.iter().map(|s| s.0));
        out.extend(stats.iter().map(|s| s.1));
    }
    for seq in &lld {
        out.extend(summary(seq));
    }
    out
}

/// Peak-normalize to 0.95 as the front end does.
pub fn normalize(x: &[f64]) -> Vec<f64> {
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return x.to_vec();
    }
    x.iter().map(|v| v * 0.95 / peak).collect()
}

/// AUROC as the fraction of positive/negative pairs ranked correctly,
/// ties counting one half.
pub fn auroc_pairs(labels: &[u8], scores: &[f64]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (i, &li) in labels.iter().enumerate() {
        if li != 1 {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj != 0 {
                continue;
            }
            den += 1.0;
            if scores[i] > scores[j] {
                num += 1.0;
            } else if scores[i] == scores[j] {
                num += 0.5;
            }
        }
    }
    num / den
}

/// 15-bin ECE with top-label confidence, written out longhand.
pub fn ece_reference(labels: &[u8], probs: &[f64], bins: usize) -> f64 {
    let mut count = vec![0usize; bins];
    let mut conf_sum = vec![0.0; bins];
    let mut hit = vec![0usize; bins];
    for (&y, &p) in labels.iter().zip(probs) {
        let (pred, conf) = if p >= 0.5 { (1u8, p) } else { (0u8, 1.0 - p) };
        let mut b = (conf * bins as f64).floor() as usize;
        if b >= bins {
            b = bins - 1;
        }
        count[b] += 1;
        conf_sum[b] += conf;
        if pred == y {
            hit[b] += 1;
        }
    }
    let n = labels.len() as f64;
    (0..bins)
        .filter(|&b| count[b] > 0)
        .map(|b| {
            let c = count[b] as f64;
            (c / n) * (hit[b] as f64 / c - conf_sum[b] / c).abs()
        })
        .sum()
}

/// Score from the additive symptom rule, written as a lookup.
pub fn triage_oracle(cough: bool, fever: bool, sob: u8, risk: bool) -> u8 {
    let table = [(cough, 2u8), (fever, 1), (sob == 1, 2), (risk, 1)];
    table.iter().filter(|(on, _)| *on).map(|(_, w)| w).sum()
}
