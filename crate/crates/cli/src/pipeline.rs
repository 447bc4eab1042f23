//! `regimevol run`: validate, load, run the selected stages, write a manifest.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::config::{validate_config, ConfigIssue, PipelineConfig};
use crate::inputs::load_inputs;
use crate::stages::{stage, stages, Stage, StageContext};
use crate::CliError;

pub const MANIFEST: &str = "manifest.toml";
pub const FAILED: &str = "FAILED";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub stage: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub stages: Vec<&'static str>,
    /// Artifact file names with their SHA-256 digests, sorted by name.
    pub artifacts: Vec<(String, String)>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn selected(name: Option<&str>) -> Result<Vec<Box<dyn Stage>>, CliError> {
    match name {
        None => Ok(stages()),
        Some(n) => stage(n).map(|s| vec![s]).ok_or_else(|| {
            let known: Vec<_> = stages().iter().map(|s| s.name()).collect();
            CliError::Config(vec![ConfigIssue {
                key: "--stage".into(),
                message: format!("unknown stage `{n}` (known: {})", known.join(", ")),
            }])
        }),
    }
}

fn artifacts(out: &Path) -> std::io::Result<Vec<(String, String)>> {
    let mut list = Vec::new();
    for entry in std::fs::read_dir(out)? {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if !entry.file_type()?.is_file() || name == MANIFEST || name == FAILED {
            continue;
        }
        list.push((name, sha256_hex(&std::fs::read(entry.path())?)));
    }
    list.sort();
    Ok(list)
}

/// Deterministic manifest: no timestamps or absolute paths, so two runs with
/// the same config and seed write identical bytes.
fn manifest(cfg: &PipelineConfig, seed: u64, ran: &[&str], artifacts: &[(String, String)]) -> String {
    let mut doc = toml::Table::new();
    doc.insert("tool".into(), "regimevol".into());
    doc.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    doc.insert("seed".into(), toml::Value::Integer(seed as i64));
    doc.insert("stages".into(), toml::Value::Array(ran.iter().map(|s| (*s).into()).collect()));
    doc.insert("config_sha256".into(), sha256_hex(cfg.text.as_bytes()).into());
    doc.insert("config".into(), cfg.text.clone().into());
    let mut files = toml::Table::new();
    for (name, digest) in artifacts {
        files.insert(name.clone(), digest.clone().into());
    }
    doc.insert("artifacts".into(), toml::Value::Table(files));
    toml::to_string(&doc).expect("manifest serialises")
}

pub fn run(config_path: &Path, opts: &RunOptions) -> Result<RunSummary, CliError> {
    let cfg = validate_config(config_path).map_err(CliError::Config)?;
    let chosen = selected(opts.stage.as_deref())?;
    let seed = opts.seed.unwrap_or(cfg.seed);
    let out = opts.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    let inputs = load_inputs(&cfg)?;

    std::fs::create_dir_all(&out)?;
    let marker = out.join(FAILED);
    if marker.exists() {
        std::fs::remove_file(&marker)?;
    }
    let ctx = StageContext { config: &cfg, inputs: &inputs, out: &out, seed };
    let mut ran = Vec::new();
    for s in &chosen {
        if let Err(e) = s.run(&ctx) {
            std::fs::write(&marker, format!("stage {} failed: {}\n", s.name(), e.0))?;
            return Err(CliError::Stage { stage: s.name().into(), message: e.0 });
        }
        ran.push(s.name());
    }
    let list = artifacts(&out)?;
    std::fs::write(out.join(MANIFEST), manifest(&cfg, seed, &ran, &list))?;
    Ok(RunSummary { out_dir: out, stages: ran, artifacts: list })
}
