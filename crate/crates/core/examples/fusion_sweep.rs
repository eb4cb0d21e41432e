// Weighted late fusion, missing modalities, and weight sensitivity.

use pneumo_core::fusion::{fuse, render_report, sensitivity, sweep_configs, FusionConfig, Modality, ModalitySignals};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let signals = ModalitySignals {
        img: Some(0.9),
        sym: Some(0.2),
        cgh: Some(0.1),
        sp: Some(0.2),
        urgent: false,
    };
    println!("{:<20} {:>5} {:>5} {:>5} {:>5} {:>7}  band", "config", "img", "sym", "cgh", "sp", "S");
    for row in sweep_configs(&signals, &FusionConfig::presets())? {
        let w = row.weights;
        println!(
            "{:<20} {:>5.2} {:>5.2} {:>5.2} {:>5.2} {:>7.4}  {}",
            row.config, w.img, w.sym, w.cgh, w.sp, row.score, row.band.as_str()
        );
    }

    let base = FusionConfig::base();
    let s = sensitivity(&signals, &base, 0.10, Modality::Img, Modality::Sym)?;
    println!(
        "\nmoving 0.10 of weight img -> sym: S {:.4} -> {:.4} (change {:+.4}), band changed: {}",
        s.score_before, s.score_after, s.delta_s, s.band_changed
    );

    let partial = ModalitySignals::default().with(Modality::Sym, 0.5).with(Modality::Sp, 0.3);
    let r = fuse(&partial, &base)?;
    println!("\nwith cough and imaging missing, effective weights {:?}", r.effective_weights);
    print!("\n{}", render_report(None, None, None, None, &r));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
