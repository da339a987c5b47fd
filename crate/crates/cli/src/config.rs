//! `key = value` pipeline configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use progtrans_core::{AugmentMode, SegmentSubset, UtilityKind, DEFAULT_EM_ITERATIONS};

pub const DEFAULT_MERGES: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub src: Option<PathBuf>,
    pub tgt: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub merges: usize,
    pub iterations: usize,
    pub segments: SegmentSubset,
    pub mode: AugmentMode,
    pub utility: UtilityKind,
    pub seed: u64,
    /// Minimum subword count for the target-vocabulary filter on lex/ali.
    pub vocab_threshold: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            src: None,
            tgt: None,
            out: None,
            merges: DEFAULT_MERGES,
            iterations: DEFAULT_EM_ITERATIONS,
            segments: SegmentSubset::all(),
            mode: AugmentMode::Full,
            utility: UtilityKind::Chrf,
            seed: 0,
            vocab_threshold: 1,
        }
    }
}

fn parse_value<T>(key: &str, value: &str) -> Result<T>
where
    T: FromStr,
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| anyhow!("invalid value {value:?} for {key}: {e}"))
}

impl PipelineConfig {
    /// Sets one key. Relative paths are resolved against `base`.
    pub fn set(&mut self, key: &str, value: &str, base: Option<&Path>) -> Result<()> {
        let path = |v: &str| match base {
            Some(b) if Path::new(v).is_relative() => b.join(v),
            _ => PathBuf::from(v),
        };
        match key {
            "src" => self.src = Some(path(value)),
            "tgt" => self.tgt = Some(path(value)),
            "out" => self.out = Some(path(value)),
            "merges" => self.merges = parse_value(key, value)?,
            "iterations" => self.iterations = parse_value(key, value)?,
            "segments" => self.segments = parse_value(key, value)?,
            "mode" => self.mode = parse_value(key, value)?,
            "utility" => self.utility = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "vocab_threshold" => self.vocab_threshold = parse_value(key, value)?,
            other => bail!("unknown configuration key {other:?}"),
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self> {
        let mut config = PipelineConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key = value", n + 1))?;
            config
                .set(key.trim(), value.trim(), base)
                .with_context(|| format!("line {}", n + 1))?;
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        PipelineConfig::parse(&text, path.parent())
            .with_context(|| format!("in config {}", path.display()))
    }

    /// The settings that determine artifact contents, one `key = value` per
    /// line in a fixed order. Paths are left out.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "merges = {}", self.merges);
        let _ = writeln!(out, "iterations = {}", self.iterations);
        let _ = writeln!(out, "segments = {}", self.segments);
        let _ = writeln!(out, "mode = {}", self.mode);
        let _ = writeln!(out, "utility = {}", self.utility);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "vocab_threshold = {}", self.vocab_threshold);
        out
    }

    pub fn require_paths(&self) -> Result<(&Path, &Path, &Path)> {
        let src = self.src.as_deref().ok_or_else(|| anyhow!("no source corpus (src)"))?;
        let tgt = self.tgt.as_deref().ok_or_else(|| anyhow!("no target corpus (tgt)"))?;
        let out = self.out.as_deref().ok_or_else(|| anyhow!("no output directory (out)"))?;
        for p in [src, tgt] {
            if !p.is_file() {
                bail!("{} does not exist", p.display());
            }
        }
        Ok((src, tgt, out))
    }
}
