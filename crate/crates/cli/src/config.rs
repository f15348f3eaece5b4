//! Run configuration: defaults, config-file overlay, flag overlay.
//!
//! Every output artifact echoes the resolved configuration in its header, so
//! a run can always be reproduced from any of its products. Precedence is
//! flags over config file over defaults; environment variables are never
//! consulted.

use std::path::Path;

use relvec_core::cooccur::TripleWeighting;
use relvec_core::measures::SiMeasure;
use relvec_core::relvec::BlockMode;

use crate::CliError;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub window: usize,
    pub dims: usize,
    pub epochs: usize,
    pub alpha: f64,
    pub seed: u64,
    pub measure: SiMeasure,
    pub lambda: f64,
    pub weighting: TripleWeighting,
    pub blocks: BlockMode,
    pub min_count: u64,
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            window: 10,
            dims: 300,
            epochs: 50,
            alpha: 1e-5,
            seed: 1,
            measure: SiMeasure::Si2,
            lambda: 1e-6,
            weighting: TripleWeighting::Distance,
            blocks: BlockMode::Full,
            min_count: 10,
            threads: 1,
        }
    }
}

/// Optional overrides collected from the command line.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct ConfigFlags {
    /// Flat key=value config file (flags still win)
    #[arg(long, global = true)]
    pub config: Option<std::path::PathBuf>,
    /// Co-occurrence window size
    #[arg(long, global = true)]
    pub window: Option<usize>,
    /// Embedding dimensionality
    #[arg(long, global = true)]
    pub dims: Option<usize>,
    /// Training epochs
    #[arg(long, global = true)]
    pub epochs: Option<usize>,
    /// Additive smoothing parameter (must be > 0)
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Master seed; all stage randomness derives from it
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// SI measure id (1-4) for relation vectors
    #[arg(long, global = true)]
    pub measure: Option<u8>,
    /// Ridge penalty for relation fits and fold-in
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Position weighting for triple statistics: distance | uniform
    #[arg(long, global = true)]
    pub weighting: Option<String>,
    /// Representation blocks: full | between-only
    #[arg(long, global = true)]
    pub blocks: Option<String>,
    /// Minimum token frequency kept in the vocabulary
    #[arg(long, global = true)]
    pub min_count: Option<u64>,
    /// Worker threads; 1 is the deterministic mode
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

impl RunConfig {
    /// defaults <- config file <- flags
    pub fn resolve(flags: &ConfigFlags) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &flags.config {
            cfg.apply_file(path)?;
        }
        cfg.apply_flags(flags)?;
        if cfg.alpha <= 0.0 {
            return Err(CliError::config(format!("alpha must be > 0, got {}", cfg.alpha)));
        }
        if cfg.window == 0 || cfg.dims == 0 {
            return Err(CliError::config("window and dims must be at least 1"));
        }
        Ok(cfg)
    }

    fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("config file {}: {e}", path.display())))?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("{}:{}: expected key=value", path.display(), lineno + 1)))?;
            self.apply_kv(key.trim(), value.trim())
                .map_err(|e| CliError::config(format!("{}:{}: {}", path.display(), lineno + 1, e.message())))?;
        }
        Ok(())
    }

    fn apply_kv(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
            value.parse().map_err(|_| CliError::config(format!("bad value for {key}: {value:?}")))
        }
        match key {
            "window" => self.window = parse(key, value)?,
            "dims" => self.dims = parse(key, value)?,
            "epochs" => self.epochs = parse(key, value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "measure" => self.measure = parse_measure(parse(key, value)?)?,
            "lambda" => self.lambda = parse(key, value)?,
            "weighting" => self.weighting = parse_weighting(value)?,
            "blocks" => self.blocks = parse_blocks(value)?,
            "min-count" | "min_count" => self.min_count = parse(key, value)?,
            "threads" => self.threads = parse(key, value)?,
            other => return Err(CliError::config(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    fn apply_flags(&mut self, flags: &ConfigFlags) -> Result<(), CliError> {
        if let Some(v) = flags.window {
            self.window = v;
        }
        if let Some(v) = flags.dims {
            self.dims = v;
        }
        if let Some(v) = flags.epochs {
            self.epochs = v;
        }
        if let Some(v) = flags.alpha {
            self.alpha = v;
        }
        if let Some(v) = flags.seed {
            self.seed = v;
        }
        if let Some(v) = flags.measure {
            self.measure = parse_measure(v)?;
        }
        if let Some(v) = flags.lambda {
            self.lambda = v;
        }
        if let Some(v) = &flags.weighting {
            self.weighting = parse_weighting(v)?;
        }
        if let Some(v) = &flags.blocks {
            self.blocks = parse_blocks(v)?;
        }
        if let Some(v) = flags.min_count {
            self.min_count = v;
        }
        if let Some(v) = flags.threads {
            self.threads = v;
        }
        Ok(())
    }

    /// Header echo, identical for every artifact of a run.
    pub fn echo_lines(&self) -> Vec<String> {
        vec![
            format!("config: window={}", self.window),
            format!("config: dims={}", self.dims),
            format!("config: epochs={}", self.epochs),
            format!("config: alpha={}", self.alpha),
            format!("config: seed={}", self.seed),
            format!("config: measure={}", self.measure.id()),
            format!("config: lambda={}", self.lambda),
            format!("config: weighting={}", self.weighting.name()),
            format!("config: blocks={}", self.blocks.name()),
            format!("config: min-count={}", self.min_count),
            format!("config: threads={}", self.threads),
        ]
    }
}

fn parse_measure(id: u8) -> Result<SiMeasure, CliError> {
    SiMeasure::from_id(id).ok_or_else(|| CliError::config(format!("measure must be 1-4, got {id}")))
}

fn parse_weighting(name: &str) -> Result<TripleWeighting, CliError> {
    TripleWeighting::from_name(name).ok_or_else(|| CliError::config(format!("weighting must be distance or uniform, got {name:?}")))
}

fn parse_blocks(name: &str) -> Result<BlockMode, CliError> {
    BlockMode::from_name(name).ok_or_else(|| CliError::config(format!("blocks must be full or between-only, got {name:?}")))
}
