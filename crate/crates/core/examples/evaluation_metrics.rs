// Accuracy, macro-F1, AUROC and calibration error with per-domain
// breakdowns, printed as aligned tables.

use pneumo_core::imaging::DomainLabel;
use pneumo_core::metrics::{report, PredictionRecord, DEFAULT_BINS, DEFAULT_THRESHOLD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut records = Vec::new();
    for i in 0..400 {
        let domain = DomainLabel::ALL[i % 4];
        let label = u8::from(rng.random_bool(0.4));
        // harder domains get noisier scores
        let noise = 0.15 + 0.1 * f64::from(domain.code());
        let centre = if label == 1 { 0.7 } else { 0.3 };
        let p = (centre + rng.random_range(-noise..noise)).clamp(0.0, 1.0);
        records.push(PredictionRecord::new(label, p)?.with_domain(domain));
    }
    let r = report(&records, DEFAULT_THRESHOLD, DEFAULT_BINS)?;
    print!("{}", r.render_text());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
