//! Fixed-template screening summary.
//!
//! The text only restates values present in the inputs. Identical inputs
//! give byte-identical output.

use std::fmt::Write;

use crate::fusion::{FusionResult, Modality};
use crate::gbdt::CoughScore;
use crate::imaging::ImageSignal;
use crate::text::SpeechSignal;
use crate::triage::{RiskBand, TriageResult};

/// Order in which modalities appear in reports.
pub const DISPLAY_ORDER: [Modality; 4] = [Modality::Sym, Modality::Cgh, Modality::Sp, Modality::Img];

pub const DISCLAIMER: &str = "This summary is a screening aid generated from heuristic weights. \
It is not a diagnosis and does not replace clinical assessment, radiograph review by a qualified \
reader, or local referral guidelines.";

fn heading(m: Modality) -> &'static str {
    match m {
        Modality::Sym => "Symptoms (questionnaire)",
        Modality::Cgh => "Cough audio",
        Modality::Sp => "Speech transcript",
        Modality::Img => "Imaging",
    }
}

fn join<T: AsRef<str>>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|s| s.as_ref().to_owned()).collect::<Vec<_>>().join(", ")
}

/// Render the summary for one encounter.
///
/// The evidence arguments add provenance detail; the fused result alone is
/// enough to name every supplied and missing modality.
pub fn render_report(
    triage: Option<&TriageResult>,
    cough: Option<&CoughScore>,
    speech: Option<&SpeechSignal>,
    image: Option<&ImageSignal>,
    fusion: &FusionResult,
) -> String {
    let mut out = String::new();

    if fusion.urgent {
        let rules = triage
            .map(|t| join(t.urgent_rules_fired.iter().map(|r| r.id())))
            .filter(|s| !s.is_empty())
            .unwrap_or_else(|| "flag supplied with signals".into());
        let _ = writeln!(out, "*** URGENT: triage escalation ({rules}) ***");
        let _ = writeln!(
            out,
            "The URGENT band is carried over from the triage escalation rules as a safety rule. \
             It does not change the fused score."
        );
        out.push('\n');
    }

    out.push_str("Pneumonia screening summary\n");
    out.push_str("===========================\n");

    for m in DISPLAY_ORDER {
        let _ = writeln!(out, "\n{}", heading(m));
        let Some(signal) = fusion.signals.get(m) else {
            out.push_str("  not provided\n");
            continue;
        };
        let _ = writeln!(out, "  signal: {signal:.4}");
        match m {
            Modality::Sym => {
                if let Some(t) = triage {
                    let _ = writeln!(
                        out,
                        "  source: symptom rule score {}/6, triage band {}",
                        t.score,
                        t.band.as_str()
                    );
                    if t.is_urgent() {
                        let _ = writeln!(
                            out,
                            "  escalation rules fired: {}",
                            join(t.urgent_rules_fired.iter().map(|r| r.id()))
                        );
                    }
                }
            }
            Modality::Cgh => {
                if let Some(c) = cough {
                    let _ = writeln!(
                        out,
                        "  source: acoustic tree-ensemble model over {} segment(s); per-segment {}",
                        c.per_segment.len(),
                        join(c.per_segment.iter().map(|p| format!("{p:.4}")))
                    );
                }
            }
            Modality::Sp => {
                if let Some(s) = speech {
                    let matched = if s.matched.is_empty() {
                        "none".to_owned()
                    } else {
                        join(s.matched.iter().map(|(cat, phrases)| {
                            let hits = join(phrases.iter().map(|p| format!("\"{}\" x{}", p.phrase, p.count)));
                            format!("{} ({hits})", cat.name())
                        }))
                    };
                    let _ = writeln!(out, "  source: keyword matches: {matched}");
                }
            }
            Modality::Img => {
                if let Some(i) = image {
                    let _ = writeln!(out, "  source: external radiograph classifier \"{}\"", i.source);
                }
            }
        }
    }

    out.push('\n');
    let missing: Vec<&str> = DISPLAY_ORDER
        .iter()
        .filter(|m| fusion.missing.contains(m))
        .map(|m| m.label())
        .collect();
    if missing.is_empty() {
        out.push_str("Missing modalities: none\n");
    } else {
        let _ = writeln!(out, "Missing modalities: {}", missing.join(", "));
        out.push_str("Weights of the supplied modalities were rescaled to sum to one.\n");
    }

    out.push_str("\nFusion\n");
    for m in DISPLAY_ORDER {
        if let (Some(w), Some(c)) = (fusion.effective_weights.get(&m), fusion.contributions.get(&m)) {
            let _ = writeln!(out, "  {:<9} weight {w:.4}  contribution {c:.4}", m.label());
        }
    }
    let _ = writeln!(out, "  fused score: {:.4}", fusion.score);
    if fusion.band == RiskBand::Urgent {
        let _ = writeln!(
            out,
            "  band: URGENT (fused score alone gives {})",
            fusion.score_band.as_str()
        );
    } else {
        let _ = writeln!(out, "  band: {}", fusion.band.as_str());
    }

    let _ = writeln!(out, "\n{DISCLAIMER}");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::{fuse, FusionConfig, ModalitySignals};
    use crate::triage::{evaluate_triage, ShortnessOfBreath, SymptomResponse};

    #[test]
    fn missing_line_lists_in_display_order() {
        let s = ModalitySignals::default().with(Modality::Sym, 0.5).with(Modality::Sp, 0.3);
        let r = fuse(&s, &FusionConfig::base()).unwrap();
        let text = render_report(None, None, None, None, &r);
        assert!(text.contains("Missing modalities: cough, imaging\n"), "{text}");
        assert!(!text.contains("URGENT"));
        assert!(text.ends_with(&format!("{DISCLAIMER}\n")));
    }

    #[test]
    fn urgent_banner_leads() {
        let resp = SymptomResponse {
            shortness_of_breath: ShortnessOfBreath::Severe,
            ..SymptomResponse::healthy_adult()
        };
        let t = evaluate_triage(&resp).unwrap();
        let s = ModalitySignals {
            sym: Some(t.normalized),
            urgent: true,
            ..Default::default()
        };
        let r = fuse(&s, &FusionConfig::base()).unwrap();
        let text = render_report(Some(&t), None, None, None, &r);
        assert!(text.starts_with("*** URGENT: triage escalation (severe_sob) ***"), "{text}");
        assert!(text.contains("band: URGENT (fused score alone gives LOW)"));
    }

    #[test]
    fn deterministic() {
        let s = ModalitySignals {
            img: Some(0.9),
            sym: Some(0.2),
            cgh: Some(0.1),
            sp: Some(0.2),
            urgent: false,
        };
        let r = fuse(&s, &FusionConfig::base()).unwrap();
        let img = ImageSignal::new(0.9, "resnet").unwrap();
        let a = render_report(None, None, None, Some(&img), &r);
        let b = render_report(None, None, None, Some(&img), &r.clone());
        assert_eq!(a, b);
        assert!(a.contains("Missing modalities: none"));
        assert!(a.contains("fused score: 0.4600"));
    }
}
