//! Synthetic domain perturbations.
//!
//! - Clean: identity
//! - Blur: separable Gaussian, mirror padding without edge repeat
//!   (`d c b | a b c d | c b a`)
//! - Noise: additive `N(0, sigma)` per pixel, clamped to `[0, 1]`
//! - Contrast: `0.5 + c (x - 0.5)`, clamped, with `c` drawn from a fixed set
//!
//! All randomness comes from a ChaCha8 stream seeded by the caller.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{DomainLabel, GrayImage, ImagingError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerturbConfig {
    pub blur_sigma: f64,
    pub blur_radius: usize,
    pub noise_std: f64,
    /// Candidate contrast factors, one picked uniformly per image.
    pub contrast_factors: Vec<f64>,
    /// Overrides the random pick when set.
    pub contrast_fixed: Option<f64>,
}

impl Default for PerturbConfig {
    fn default() -> Self {
        Self {
            blur_sigma: 1.0,
            blur_radius: 2,
            noise_std: 0.1,
            contrast_factors: vec![0.5, 1.5],
            contrast_fixed: None,
        }
    }
}

/// Normalized 1-D Gaussian taps, length `2 * radius + 1`.
pub fn gaussian_kernel(sigma: f64, radius: usize) -> Vec<f64> {
    let r = radius as i64;
    let raw: Vec<f64> = (-r..=r)
        .map(|x| (-((x * x) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / sum).collect()
}

/// Mirror index into `0..n` without repeating the edge sample.
fn mirror(i: i64, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as i64 - 1);
    let m = i.rem_euclid(period);
    if m >= n as i64 {
        (period - m) as usize
    } else {
        m as usize
    }
}

pub fn gaussian_blur(img: &GrayImage, sigma: f64, radius: usize) -> GrayImage {
    let k = gaussian_kernel(sigma, radius);
    let r = radius as i64;
    let (w, h) = (img.width(), img.height());
    let src = img.pixels();

    let mut horiz = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            horiz[y * w + x] = k
                .iter()
                .enumerate()
                .map(|(j, wt)| wt * src[y * w + mirror(x as i64 + j as i64 - r, w)])
                .sum();
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let v: f64 = k
                .iter()
                .enumerate()
                .map(|(j, wt)| wt * horiz[mirror(y as i64 + j as i64 - r, h) * w + x])
                .sum();
            out[y * w + x] = v.clamp(0.0, 1.0);
        }
    }
    GrayImage::from_parts(w, h, out)
}

pub fn add_gaussian_noise(img: &GrayImage, std: f64, rng: &mut impl Rng) -> GrayImage {
    let normal = Normal::new(0.0, std).expect("noise std must be finite and non-negative");
    let pixels = img
        .pixels()
        .iter()
        .map(|p| (p + normal.sample(rng)).clamp(0.0, 1.0))
        .collect();
    GrayImage::from_parts(img.width(), img.height(), pixels)
}

pub fn scale_contrast(img: &GrayImage, factor: f64) -> GrayImage {
    let pixels = img
        .pixels()
        .iter()
        .map(|p| (0.5 + factor * (p - 0.5)).clamp(0.0, 1.0))
        .collect();
    GrayImage::from_parts(img.width(), img.height(), pixels)
}

/// Contrast factor the given seed selects.
pub fn contrast_factor(cfg: &PerturbConfig, rng: &mut impl Rng) -> f64 {
    match cfg.contrast_fixed {
        Some(c) => c,
        None => cfg.contrast_factors[rng.random_range(0..cfg.contrast_factors.len())],
    }
}

pub fn perturb_with(img: &GrayImage, domain: DomainLabel, seed: u64, cfg: &PerturbConfig) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match domain {
        DomainLabel::Clean => img.clone(),
        DomainLabel::Blur => gaussian_blur(img, cfg.blur_sigma, cfg.blur_radius),
        DomainLabel::Noise => add_gaussian_noise(img, cfg.noise_std, &mut rng),
        DomainLabel::Contrast => scale_contrast(img, contrast_factor(cfg, &mut rng)),
    }
}

/// Apply one domain with default magnitudes.
pub fn perturb(img: &GrayImage, domain: DomainLabel, seed: u64) -> GrayImage {
    perturb_with(img, domain, seed, &PerturbConfig::default())
}

/// `(image, label, domain)` tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSample {
    pub image: GrayImage,
    pub label: u8,
    pub domain: DomainLabel,
}

/// Assign each image a uniformly random domain and perturb it. Domain draws
/// come from one stream seeded by `seed`; image `i` is perturbed with seed
/// `seed ^ i`, so results do not depend on processing order.
pub fn build_domain_dataset(
    images: &[(GrayImage, u8)],
    seed: u64,
    cfg: &PerturbConfig,
) -> Result<Vec<DomainSample>, ImagingError> {
    if images.is_empty() {
        return Err(ImagingError::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let domains: Vec<DomainLabel> = images
        .iter()
        .map(|_| DomainLabel::ALL[rng.random_range(0..DomainLabel::ALL.len())])
        .collect();
    Ok(images
        .iter()
        .zip(domains)
        .enumerate()
        .map(|(i, ((img, label), domain))| DomainSample {
            image: perturb_with(img, domain, seed ^ i as u64, cfg),
            label: *label,
            domain,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gradient(w: usize, h: usize) -> GrayImage {
        let px = (0..w * h).map(|i| (i % w) as f64 / (w - 1) as f64).collect();
        GrayImage::new(w, h, px).unwrap()
    }

    #[test]
    fn kernel_sums_to_one() {
        let k = gaussian_kernel(1.0, 2);
        assert_eq!(k.len(), 5);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(k[0], k[4]);
    }

    #[test]
    fn mirror_indices() {
        let got: Vec<usize> = (-3..7).map(|i| mirror(i, 4)).collect();
        assert_eq!(got, vec![3, 2, 1, 0, 1, 2, 3, 2, 1, 0]);
        assert_eq!(mirror(-5, 1), 0);
        assert_eq!(mirror(3, 2), 1);
        assert_eq!(mirror(-1, 2), 1);
    }

    #[test]
    fn clean_is_identity() {
        let img = gradient(9, 5);
        assert_eq!(perturb(&img, DomainLabel::Clean, 3), img);
    }

    #[test]
    fn blur_of_constant() {
        let img = GrayImage::filled(7, 6, 0.37).unwrap();
        let out = perturb(&img, DomainLabel::Blur, 0);
        for p in out.pixels() {
            assert!((p - 0.37).abs() < 1e-12);
        }
    }

    #[test]
    fn blur_tiny_images() {
        let img = GrayImage::new(1, 2, vec![0.0, 1.0]).unwrap();
        let out = perturb(&img, DomainLabel::Blur, 0);
        assert_eq!(out.width(), 1);
        assert!(out.pixels().iter().all(|p| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn contrast_formula() {
        let img = GrayImage::new(1, 1, vec![0.9]).unwrap();
        let out = scale_contrast(&img, 0.5);
        assert!((out.pixels()[0] - 0.7).abs() < 1e-15);
        assert_eq!(scale_contrast(&gradient(5, 2), 1.0), gradient(5, 2));
        let cfg = PerturbConfig { contrast_fixed: Some(0.5), ..Default::default() };
        assert!((perturb_with(&img, DomainLabel::Contrast, 11, &cfg).pixels()[0] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn noise_is_seeded() {
        let img = GrayImage::filled(16, 16, 0.5).unwrap();
        let a = perturb(&img, DomainLabel::Noise, 42);
        let b = perturb(&img, DomainLabel::Noise, 42);
        let c = perturb(&img, DomainLabel::Noise, 43);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn dataset_preserves_labels_and_is_deterministic() {
        let images: Vec<(GrayImage, u8)> = (0..40).map(|i| (gradient(4, 4), (i % 2) as u8)).collect();
        let a = build_domain_dataset(&images, 9, &PerturbConfig::default()).unwrap();
        let b = build_domain_dataset(&images, 9, &PerturbConfig::default()).unwrap();
        assert_eq!(a, b);
        for (s, (_, y)) in a.iter().zip(&images) {
            assert_eq!(s.label, *y);
        }
        assert_eq!(
            build_domain_dataset(&[], 1, &PerturbConfig::default()),
            Err(ImagingError::EmptyDataset)
        );
    }
}
