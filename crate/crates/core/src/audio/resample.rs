//! Band-limited resampling with a Kaiser-windowed sinc kernel.
//!
//! Each output sample is evaluated at its exact rational position in the
//! input stream using 32 taps (16 either side). Samples outside the input
//! are treated as zero. Upsampling by an integer factor reproduces the
//! original samples exactly at coincident positions.

/// Kaiser window shape parameter.
pub const KAISER_BETA: f64 = 8.6;
/// Kernel taps evaluated per output sample.
pub const TAPS: usize = 32;

const HALF_TAPS: i64 = (TAPS / 2) as i64;

/// Zeroth-order modified Bessel function of the first kind (power series).
pub(crate) fn bessel_i0(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..64 {
        term *= (half / k as f64) * (half / k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn kaiser(offset: f64, half_width: f64, i0_beta: f64) -> f64 {
    let r = offset / half_width;
    if r.abs() >= 1.0 {
        return 0.0;
    }
    bessel_i0(KAISER_BETA * (1.0 - r * r).sqrt()) / i0_beta
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Resample `input` from `from_rate` to `to_rate`.
///
/// Output length is `floor(len * to_rate / from_rate)`. Equal rates return a
/// copy.
pub fn resample(input: &[f64], from_rate: u32, to_rate: u32) -> Vec<f64> {
    if from_rate == to_rate || input.is_empty() {
        return input.to_vec();
    }
    let from = u64::from(from_rate);
    let to = u64::from(to_rate);
    let out_len = (input.len() as u128 * u128::from(to) / u128::from(from)) as usize;
    // cutoff relative to the input Nyquist
    let cutoff = (to as f64 / from as f64).min(1.0);
    let half_width = HALF_TAPS as f64;
    let i0_beta = bessel_i0(KAISER_BETA);
    let n_in = input.len() as i64;

    (0..out_len)
        .map(|j| {
            let num = j as u64 * from;
            let base = (num / to) as i64;
            let frac = (num % to) as f64 / to as f64;
            let mut acc = 0.0;
            for k in (base - HALF_TAPS + 1)..=(base + HALF_TAPS) {
                if k < 0 || k >= n_in {
                    continue;
                }
                let offset = (k - base) as f64 - frac;
                let w = cutoff * sinc(cutoff * offset) * kaiser(offset, half_width, i0_beta);
                acc += w * input[k as usize];
            }
            acc
        })
        .collect()
}
