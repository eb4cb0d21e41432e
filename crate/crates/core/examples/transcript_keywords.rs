// Keyword concern score from a free-text transcript.

use pneumo_core::text::{analyze_transcript, KeywordVocabulary};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let vocab = KeywordVocabulary::default();
    for text in [
        "I have had a fever and a cough for three days, the cough is worse at night.",
        "Chest pain when I breathe in, and I feel short of breath climbing stairs.",
        "Fine today, just came for a check-up.",
    ] {
        let s = analyze_transcript(text, &vocab);
        println!("{:.2}  {text}", s.score);
        for (cat, phrases) in &s.matched {
            for p in phrases {
                println!("      {:<16} {:?} x{}", cat.name(), p.phrase, p.count);
            }
        }
    }
    let custom = KeywordVocabulary::from_json(
        r#"{"fever": ["homa"], "cough": ["kikohozi"], "breathlessness": ["pumzi"], "chest_discomfort": ["kifua"]}"#,
    )?;
    println!("custom vocabulary: {:.2}", analyze_transcript("homa na kikohozi", &custom).score);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
