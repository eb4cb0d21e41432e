// Structured symptom triage: additive score, bands and escalation rules.

use pneumo_core::triage::{evaluate_triage, AgeGroup, ShortnessOfBreath, SymptomResponse};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let adult = SymptomResponse {
        cough_or_difficult_breathing: true,
        fever_or_chills: true,
        shortness_of_breath: ShortnessOfBreath::Mild,
        ..SymptomResponse::healthy_adult()
    };
    let r = evaluate_triage(&adult)?;
    println!("adult with cough, fever, mild breathlessness: score {} -> {}", r.score, r.band.as_str());
    assert_eq!(r.score, 5);

    let child: SymptomResponse = serde_json::from_str(
        r#"{
            "cough_or_difficult_breathing": true,
            "fever_or_chills": false,
            "shortness_of_breath": "None",
            "chest_pain_or_confusion": false,
            "major_risk_factor": false,
            "age_group": "UnderFive",
            "chest_indrawing": true
        }"#,
    )?;
    let r = evaluate_triage(&child)?;
    let rules: Vec<&str> = r.urgent_rules_fired.iter().map(|u| u.id()).collect();
    println!(
        "child with chest indrawing: score {} kept for audit, band {} ({})",
        r.score,
        r.band.as_str(),
        rules.join(", ")
    );
    assert!(r.is_urgent());

    let invalid = SymptomResponse {
        age_group: AgeGroup::FiveAndOver,
        unable_to_drink_or_feed: true,
        ..SymptomResponse::healthy_adult()
    };
    println!("pediatric field on an adult: {}", evaluate_triage(&invalid).unwrap_err());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
