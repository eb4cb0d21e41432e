// Synthetic acquisition domains for radiograph robustness evaluation.

use pneumo_core::imaging::io::{decode_pgm, encode_pgm, resize_bilinear};
use pneumo_core::imaging::{build_domain_dataset, perturb, DomainLabel, GrayImage, PerturbConfig};

fn phantom(size: usize) -> GrayImage {
    let c = size as f64 / 2.0;
    let px = (0..size * size)
        .map(|i| {
            let (x, y) = ((i % size) as f64 - c, (i / size) as f64 - c);
            let r = (x * x + y * y).sqrt() / c;
            (0.8 - 0.6 * r).clamp(0.05, 0.95)
        })
        .collect();
    GrayImage::new(size, size, px).expect("valid phantom")
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let img = resize_bilinear(&phantom(28), 64, 64)?;
    for d in DomainLabel::ALL {
        let out = perturb(&img, d, 11);
        let diff = out.pixels().iter().zip(img.pixels()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("{} {:<8} mean {:.4}  max |change| {:.4}", d.code(), d.name(), out.mean(), diff);
    }

    let images: Vec<(GrayImage, u8)> = (0..200).map(|i| (phantom(16), (i % 2) as u8)).collect();
    let samples = build_domain_dataset(&images, 2024, &PerturbConfig::default())?;
    let mut counts = [0usize; 4];
    for s in &samples {
        counts[usize::from(s.domain.code())] += 1;
    }
    println!("domain counts over 200 images: {counts:?}");

    let bytes = encode_pgm(&samples[0].image);
    let back = decode_pgm(&bytes)?;
    println!("PGM round trip: {} bytes, {}x{}", bytes.len(), back.width(), back.height());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
