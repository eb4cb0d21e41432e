// A whole encounter: every channel, fusion, report and the journal.

use pneumo_core::audio::wav::{encode_wav, SampleFormat};
use pneumo_core::audio::FeatureExtractor;
use pneumo_core::encounter::{EncounterDraft, Journal};
use pneumo_core::fusion::FusionConfig;
use pneumo_core::gbdt::{score_wav, Aggregation, TreeEnsembleModel, DEMO_MODEL_JSON};
use pneumo_core::imaging::ImageSignal;
use pneumo_core::text::KeywordVocabulary;
use pneumo_core::triage::{ShortnessOfBreath, SymptomResponse};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("pneumo-example-{}", std::process::id()));
    let journal = Journal::open(&dir)?;
    let extractor = FeatureExtractor::default();
    let model = TreeEnsembleModel::from_json_with_schema(DEMO_MODEL_JSON.as_bytes(), extractor.names())?;

    let mut draft = EncounterDraft::new();
    draft.add_symptoms(SymptomResponse {
        cough_or_difficult_breathing: true,
        fever_or_chills: true,
        shortness_of_breath: ShortnessOfBreath::Mild,
        ..SymptomResponse::healthy_adult()
    })?;

    let samples: Vec<f64> = (0..80_000).map(|i| 0.4 * ((i * 37 % 101) as f64 / 50.0 - 1.0)).collect();
    let wav = encode_wav(&samples, 16_000, 1, SampleFormat::Pcm16);
    let cough = score_wav(&wav, &model, &extractor, Aggregation::Mean)?;
    draft.add_cough(journal.put_blob(&wav)?, cough);
    draft.add_transcript("fever since Monday and a wet cough", &KeywordVocabulary::default());
    draft.add_image_signal(ImageSignal::new(0.9, "external-cxr-model")?);

    let record = draft.finalize(&FusionConfig::base())?;
    journal.append(&record)?;
    record.verify()?;
    println!("encounter {} stored; {} record(s) in {}", record.id, journal.len(), dir.display());
    print!("\n{}", record.report);

    drop(journal);
    let reopened = Journal::open(&dir)?;
    assert_eq!(reopened.get(&record.id).as_ref(), Some(&record));
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
