//! `pneumo` subcommands. Results go to the writer passed to [`run`]
//! (stdout in the binary); diagnostics go to stderr.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use pneumo_core::audio::features::{to_csv, from_csv};
use pneumo_core::audio::{ingest_wav, FeatureExtractor};
use pneumo_core::encounter::{EncounterDraft, Journal};
use pneumo_core::fusion::{fuse, render_report, sweep_configs, FusionConfig, ModalitySignals};
use pneumo_core::gbdt::{score_wav, Aggregation, TreeEnsembleModel};
use pneumo_core::imaging::io::{read_image, read_manifest, resize_bilinear, write_manifest, write_pgm, ManifestRow};
use pneumo_core::imaging::{build_domain_dataset, ingest_image_signal, perturb::perturb_with, DomainLabel, PerturbConfig};
use pneumo_core::metrics::{read_records_csv, report, DEFAULT_BINS, DEFAULT_THRESHOLD};
use pneumo_core::text::{analyze_transcript, KeywordVocabulary};
use pneumo_core::triage::{evaluate_triage, SymptomResponse};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::api::{serve, AppState};
use crate::config::ServiceConfig;

#[derive(Debug, Parser)]
#[command(name = "pneumo", version, about = "Offline multimodal pneumonia screening")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Acoustic feature vectors, one row per 2 s segment.
    ExtractFeatures {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON array instead of CSV.
        #[arg(long)]
        json: bool,
    },
    /// Score a feature CSV with a tree-ensemble model.
    Score {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long, default_value = "mean")]
        aggregation: Aggregation,
    },
    /// Keyword score of a transcript file.
    TextScore {
        #[arg(long)]
        transcript: PathBuf,
        #[arg(long)]
        vocab: Option<PathBuf>,
    },
    /// Apply one acquisition-domain perturbation to an image.
    Perturb {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        domain: DomainLabel,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Fix the contrast factor instead of drawing it from the seed.
        #[arg(long)]
        contrast: Option<f64>,
    },
    /// Bilinear resize to a fixed size.
    Resize {
        #[arg(long = "in")]
        input: PathBuf,
        /// Square side; overrides --width and --height.
        #[arg(long)]
        size: Option<usize>,
        #[arg(long, default_value_t = 224)]
        width: usize,
        #[arg(long, default_value_t = 224)]
        height: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Perturb every image of a `path,label` manifest with a random domain.
    DomainDataset {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
        /// Resize to a square of this side before perturbing.
        #[arg(long)]
        size: Option<usize>,
    },
    /// Accuracy, macro-F1, AUROC and ECE from `true_label,prob_positive[,domain]`.
    Metrics {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BINS)]
        bins: usize,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        json: bool,
    },
    /// Evaluate a symptom questionnaire.
    Triage {
        #[arg(long)]
        symptoms: PathBuf,
    },
    /// Fuse modality signals.
    Fuse {
        #[arg(long)]
        signals: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, conflicts_with = "config")]
        preset: Option<String>,
        /// Evaluate under every built-in weight preset.
        #[arg(long)]
        sweep: bool,
        /// Print the narrative report instead of JSON.
        #[arg(long)]
        report: bool,
    },
    /// Run a complete encounter and append it to the journal.
    Encounter {
        #[arg(long)]
        symptoms: Option<PathBuf>,
        #[arg(long)]
        wav: Option<PathBuf>,
        #[arg(long)]
        transcript: Option<PathBuf>,
        #[arg(long)]
        image_signal: Option<PathBuf>,
        /// Extra signal values supplied directly, as fusion input JSON.
        #[arg(long)]
        signals: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        report: bool,
    },
    /// Recompute every journaled encounter and compare with what is stored.
    Verify {
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Start the HTTP service.
    Serve {
        #[arg(long)]
        bind: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_slice(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_model(path: &Path, extractor: &FeatureExtractor) -> Result<TreeEnsembleModel> {
    TreeEnsembleModel::from_json_with_schema(&read(path)?, extractor.names())
        .with_context(|| format!("loading model {}", path.display()))
}

fn fusion_config(config: Option<&Path>, preset: Option<&str>) -> Result<FusionConfig> {
    if let Some(name) = preset {
        return FusionConfig::preset_named(name).with_context(|| format!("no preset named {name:?}"));
    }
    Ok(ServiceConfig::from_process_env(config)?.fusion()?)
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::ExtractFeatures { input, out: dest, json } => {
            let waveform = ingest_wav(&read(&input)?)?;
            let vectors = FeatureExtractor::default().extract_recording(&waveform)?;
            let text = if json {
                serde_json::to_string_pretty(&vectors)? + "\n"
            } else {
                to_csv(&vectors)
            };
            match dest {
                Some(p) => {
                    std::fs::write(&p, text)?;
                    eprintln!("wrote {} segment(s) to {}", vectors.len(), p.display());
                }
                None => out.write_all(text.as_bytes())?,
            }
        }
        Command::Score { model, features, aggregation } => {
            let extractor = FeatureExtractor::default();
            let model = load_model(&model, &extractor)?;
            let vectors = from_csv(&read_text(&features)?)?;
            if let Some(v) = vectors.first() {
                if v.names != model.feature_names {
                    bail!("feature CSV columns do not match the model's feature names");
                }
            }
            let score = model.score_recording(&vectors, aggregation)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&score)?)?;
        }
        Command::TextScore { transcript, vocab } => {
            let vocab = match vocab {
                Some(p) => KeywordVocabulary::from_json(&read_text(&p)?)?,
                None => KeywordVocabulary::default(),
            };
            let signal = analyze_transcript(&read_text(&transcript)?, &vocab);
            writeln!(out, "{}", serde_json::to_string_pretty(&signal)?)?;
        }
        Command::Perturb { input, domain, seed, out: dest, contrast } => {
            let img = read_image(&input)?;
            let cfg = PerturbConfig {
                contrast_fixed: contrast,
                ..PerturbConfig::default()
            };
            write_pgm(&dest, &perturb_with(&img, domain, seed, &cfg))?;
            writeln!(out, "{} -> {} ({domain}, seed {seed})", input.display(), dest.display())?;
        }
        Command::Resize { input, size, width, height, out: dest } => {
            let (width, height) = size.map_or((width, height), |s| (s, s));
            let img = read_image(&input)?;
            write_pgm(&dest, &resize_bilinear(&img, width, height)?)?;
            writeln!(out, "{} -> {} ({width}x{height})", input.display(), dest.display())?;
        }
        Command::DomainDataset { manifest, seed, out_dir, size } => {
            let rows = read_manifest(&read_text(&manifest)?)?;
            let base = manifest.parent().unwrap_or(Path::new("."));
            let mut images = Vec::with_capacity(rows.len());
            for row in &rows {
                let mut img = read_image(&base.join(&row.path))?;
                if let Some(s) = size {
                    img = resize_bilinear(&img, s, s)?;
                }
                images.push((img, row.label));
            }
            let samples = build_domain_dataset(&images, seed, &PerturbConfig::default())?;
            std::fs::create_dir_all(&out_dir)?;
            let mut counts: BTreeMap<DomainLabel, usize> = BTreeMap::new();
            let mut written = Vec::with_capacity(samples.len());
            for (i, s) in samples.iter().enumerate() {
                let name = format!("{i:05}_{}.pgm", s.domain.name().to_ascii_lowercase());
                write_pgm(&out_dir.join(&name), &s.image)?;
                *counts.entry(s.domain).or_default() += 1;
                written.push(ManifestRow {
                    path: name,
                    label: s.label,
                    domain: Some(s.domain),
                });
            }
            std::fs::write(out_dir.join("manifest.csv"), write_manifest(&written)?)?;
            for (d, n) in counts {
                writeln!(out, "{} {:<8} {n}", d.code(), d.name())?;
            }
        }
        Command::Metrics { input, bins, threshold, json } => {
            let records = read_records_csv(&read_text(&input)?)?;
            let r = report(&records, threshold, bins)?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&r)?)?;
            } else {
                out.write_all(r.render_text().as_bytes())?;
            }
        }
        Command::Triage { symptoms } => {
            let response: SymptomResponse = read_json(&symptoms)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&evaluate_triage(&response)?)?)?;
        }
        Command::Fuse { signals, config, preset, sweep, report: as_report } => {
            let signals: ModalitySignals = read_json(&signals)?;
            let cfg = fusion_config(config.as_deref(), preset.as_deref())?;
            let result = fuse(&signals, &cfg)?;
            if as_report {
                out.write_all(render_report(None, None, None, None, &result).as_bytes())?;
            } else {
                writeln!(out, "{}", serde_json::to_string_pretty(&result)?)?;
            }
            if sweep {
                writeln!(out, "\n{:<20} {:>5} {:>5} {:>5} {:>5} {:>8}  band", "config", "img", "sym", "cgh", "sp", "S")?;
                for row in sweep_configs(&signals, &FusionConfig::presets())? {
                    let w = row.weights;
                    writeln!(
                        out,
                        "{:<20} {:>5.2} {:>5.2} {:>5.2} {:>5.2} {:>8.4}  {}",
                        row.config,
                        w.img,
                        w.sym,
                        w.cgh,
                        w.sp,
                        row.score,
                        row.band.as_str()
                    )?;
                }
            }
        }
        Command::Encounter {
            symptoms,
            wav,
            transcript,
            image_signal,
            signals,
            config,
            preset,
            model,
            data_dir,
            report: as_report,
        } => {
            let mut svc = ServiceConfig::from_process_env(config.as_deref())?;
            if let Some(m) = model {
                svc.model = Some(m);
            }
            if let Some(d) = data_dir {
                svc.data_dir = d;
            }
            let cfg = match preset {
                Some(name) => FusionConfig::preset_named(&name).with_context(|| format!("no preset named {name:?}"))?,
                None => svc.fusion()?,
            };
            let journal = Journal::open(&svc.data_dir)?;
            let mut draft = EncounterDraft::new();
            if let Some(p) = symptoms {
                draft.add_symptoms(read_json(&p)?)?;
            }
            if let Some(p) = wav {
                let model_path = svc
                    .model
                    .as_deref()
                    .context("--wav needs a cough model (--model, PF_MODEL or the config file)")?;
                let extractor = FeatureExtractor::default();
                let model = load_model(model_path, &extractor)?;
                let bytes = read(&p)?;
                let score = score_wav(&bytes, &model, &extractor, svc.aggregation)?;
                let digest = journal.put_blob(&bytes)?;
                draft.add_cough(digest, score);
            }
            if let Some(p) = transcript {
                let vocab = match &svc.vocabulary {
                    Some(v) => KeywordVocabulary::from_json(&read_text(v)?)?,
                    None => KeywordVocabulary::default(),
                };
                draft.add_transcript(&read_text(&p)?, &vocab);
            }
            if let Some(p) = image_signal {
                draft.add_image_signal(ingest_image_signal(&read_json(&p)?)?);
            }
            if let Some(p) = signals {
                draft.merge_signals(&read_json(&p)?);
            }
            let record = draft.finalize(&cfg)?;
            journal.append(&record)?;
            eprintln!("encounter {} appended to {}", record.id, svc.data_dir.display());
            if as_report {
                out.write_all(record.report.as_bytes())?;
            } else {
                writeln!(out, "{}", serde_json::to_string_pretty(&record)?)?;
            }
        }
        Command::Verify { data_dir, config } => {
            let mut svc = ServiceConfig::from_process_env(config.as_deref())?;
            if let Some(d) = data_dir {
                svc.data_dir = d;
            }
            let journal = Journal::open(&svc.data_dir)?;
            let records = journal.list();
            for r in &records {
                r.verify()?;
            }
            writeln!(out, "{} encounter(s) verified", records.len())?;
        }
        Command::Serve { bind, config, model, data_dir } => {
            let mut svc = ServiceConfig::from_process_env(config.as_deref())?;
            if let Some(b) = bind {
                svc.bind = b;
            }
            if let Some(m) = model {
                svc.model = Some(m);
            }
            if let Some(d) = data_dir {
                svc.data_dir = d;
            }
            let state = Arc::new(AppState::new(svc)?);
            tokio::runtime::Runtime::new()?.block_on(serve(state))?;
        }
    }
    Ok(())
}
