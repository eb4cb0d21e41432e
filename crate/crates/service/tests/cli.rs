mod common;

use pneumo_core::encounter::EncounterRecord;
use pneumo_core::gbdt::DEMO_MODEL_JSON;
use pneumo_core::imaging::io::{decode_pgm, encode_pgm};
use pneumo_core::imaging::GrayImage;
use serde_json::{json, Value};
use std::path::Path;
use std::process::{Command, Output};

fn pneumo(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pneumo"))
        .args(args)
        .current_dir(dir)
        .env_remove("PF_CONFIG")
        .env_remove("PF_MODEL")
        .env_remove("PF_DATA_DIR")
        .env_remove("PF_BIND")
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let o = pneumo(dir, args);
    assert!(o.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn write(dir: &Path, name: &str, bytes: impl AsRef<[u8]>) {
    std::fs::write(dir.join(name), bytes).unwrap();
}

#[test]
fn features_then_score() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "c.wav", common::cough_wav(5.0, 22_050));
    write(d, "model.json", DEMO_MODEL_JSON);
    ok(d, &["extract-features", "c.wav", "--out", "f.csv"]);
    let csv = std::fs::read_to_string(d.join("f.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0].split(',').count(), 126);

    let as_json: Value = serde_json::from_str(&ok(d, &["extract-features", "c.wav", "--json"])).unwrap();
    assert_eq!(as_json.as_array().unwrap().len(), 2);

    let score: Value = serde_json::from_str(&ok(d, &["score", "--model", "model.json", "--features", "f.csv"])).unwrap();
    let p = score["recording_level"].as_f64().unwrap();
    assert!(p > 0.0 && p < 1.0);
    let max: Value =
        serde_json::from_str(&ok(d, &["score", "--model", "model.json", "--features", "f.csv", "--aggregation", "max"]))
            .unwrap();
    assert!(max["recording_level"].as_f64().unwrap() >= p);
}

#[test]
fn text_triage_and_fuse() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "t.txt", "Chest pain, some coughing. Cough!");
    let s: Value = serde_json::from_str(&ok(d, &["text-score", "--transcript", "t.txt"])).unwrap();
    // two categories, one repeat
    assert!((s["score"].as_f64().unwrap() - 0.55).abs() < 1e-12);

    write(d, "s.json", common::symptoms().to_string());
    let t: Value = serde_json::from_str(&ok(d, &["triage", "--symptoms", "s.json"])).unwrap();
    assert_eq!((t["score"].as_u64(), t["band"].as_str()), (Some(5), Some("HIGH")));

    write(d, "sig.json", json!({"img": 0.9, "sym": 0.3, "cgh": 0.2, "sp": 0.1}).to_string());
    let f: Value = serde_json::from_str(&ok(d, &["fuse", "--signals", "sig.json"])).unwrap();
    assert!((f["score"].as_f64().unwrap() - 0.48).abs() < 1e-12);
    let sweep = ok(d, &["fuse", "--signals", "sig.json", "--report", "--sweep"]);
    assert!(sweep.contains("fused score: 0.4800"));
    let table: Vec<&str> = sweep.lines().skip_while(|l| !l.starts_with("config")).skip(1).collect();
    assert_eq!(table.len(), 5);

    write(d, "c.json", json!({"weights": {"img": 1.0, "sym": 0.0, "cgh": 0.0, "sp": 0.0}}).to_string());
    let img_only: Value = serde_json::from_str(&ok(d, &["fuse", "--signals", "sig.json", "--config", "c.json"])).unwrap();
    assert_eq!(img_only["score"], 0.9);
    assert_eq!(img_only["band"], "HIGH");

    let o = pneumo(d, &["fuse", "--signals", "sig.json", "--preset", "nonsense"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn image_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let px: Vec<f64> = (0..16 * 12).map(|i| f64::from((i * 37) % 256) / 255.0).collect();
    let img = GrayImage::new(16, 12, px).unwrap();
    write(d, "a.pgm", encode_pgm(&img));
    write(d, "b.pgm", encode_pgm(&img));

    ok(d, &["perturb", "--in", "a.pgm", "--domain", "clean", "--out", "clean.pgm"]);
    assert_eq!(std::fs::read(d.join("clean.pgm")).unwrap(), std::fs::read(d.join("a.pgm")).unwrap());
    ok(d, &["perturb", "--in", "a.pgm", "--domain", "noise", "--seed", "7", "--out", "n1.pgm"]);
    ok(d, &["perturb", "--in", "a.pgm", "--domain", "noise", "--seed", "7", "--out", "n2.pgm"]);
    assert_eq!(std::fs::read(d.join("n1.pgm")).unwrap(), std::fs::read(d.join("n2.pgm")).unwrap());

    ok(d, &["resize", "--in", "a.pgm", "--size", "8", "--out", "small.pgm"]);
    let small = decode_pgm(&std::fs::read(d.join("small.pgm")).unwrap()).unwrap();
    assert_eq!((small.width(), small.height()), (8, 8));

    write(d, "manifest.csv", "path,label\na.pgm,1\nb.pgm,0\na.pgm,0\nb.pgm,1\n");
    let counts = ok(d, &["domain-dataset", "--manifest", "manifest.csv", "--seed", "3", "--out-dir", "out", "--size", "10"]);
    let total: usize = counts.lines().map(|l| l.split_whitespace().last().unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(total, 4);
    let written = std::fs::read_to_string(d.join("out/manifest.csv")).unwrap();
    let rows: Vec<&str> = written.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    for (row, label) in rows.iter().zip(["1", "0", "0", "1"]) {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[1], label);
        assert!(d.join("out").join(cols[0]).exists());
    }
}

#[test]
fn metrics_command() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "p.csv", "true_label,prob_positive,domain\n1,0.9,clean\n0,0.2,clean\n1,0.4,blur\n0,0.6,blur\n");
    let r: Value = serde_json::from_str(&ok(d, &["metrics", "--in", "p.csv", "--json"])).unwrap();
    assert_eq!(r["accuracy"], 0.5);
    assert_eq!(r["auroc"], 0.75);
    assert_eq!(r["per_domain"]["clean"]["accuracy"], 1.0);
    let text = ok(d, &["metrics", "--in", "p.csv", "--bins", "10", "--threshold", "0.3"]);
    assert!(text.contains("precision"));
}

#[test]
fn encounter_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "s.json", common::symptoms().to_string());
    write(d, "t.txt", "fever and chills");
    let rec: EncounterRecord =
        serde_json::from_str(&ok(d, &["encounter", "--symptoms", "s.json", "--transcript", "t.txt", "--data-dir", "j"]))
            .unwrap();
    rec.verify().unwrap();
    assert_eq!(rec.fusion.missing.len(), 2);
    assert!(rec.report.contains("Missing modalities: cough, imaging"));
    assert_eq!(ok(d, &["verify", "--data-dir", "j"]).trim(), "1 encounter(s) verified");

    write(d, "c.wav", common::cough_wav(3.0, 16_000));
    let o = pneumo(d, &["encounter", "--wav", "c.wav", "--data-dir", "j"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("needs a cough model"));
    assert_eq!(ok(d, &["verify", "--data-dir", "j"]).trim(), "1 encounter(s) verified");
}
