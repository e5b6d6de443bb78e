//! Engine configuration: built-in defaults, overridden by a TOML file,
//! overridden by command-line flags.

use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use atomdoc::atomizer::CollisionMode;
use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub m: Option<usize>,
    pub theta: Option<f64>,
    pub collision_mode: Option<CollisionMode>,
    pub beam_width: Option<usize>,
    pub alpha: Option<f64>,
    pub scorer: Option<String>,
    pub scorer_timeout_secs: Option<f64>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub paths: PathsFile,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsFile {
    pub corpus: Option<PathBuf>,
    pub keywords: Option<Vec<PathBuf>>,
    pub embeddings: Option<PathBuf>,
    pub queries: Option<PathBuf>,
    pub qrels: Option<PathBuf>,
    pub training: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg: ConfigFile =
            toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        // Relative paths in the file are relative to the file itself.
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(p) = p {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        };
        let paths = &mut cfg.paths;
        for p in [
            &mut paths.corpus,
            &mut paths.embeddings,
            &mut paths.queries,
            &mut paths.qrels,
            &mut paths.training,
            &mut paths.index,
            &mut paths.output,
        ] {
            fix(p);
        }
        if let Some(ks) = &mut paths.keywords {
            for k in ks.iter_mut() {
                if k.is_relative() {
                    *k = base.join(&*k);
                }
            }
        }
        Ok(cfg)
    }
}

/// Fully resolved settings for one command.
#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub m: usize,
    pub theta: f64,
    pub collision_mode: CollisionMode,
    pub beam_width: usize,
    pub alpha: f64,
    pub scorer: String,
    pub scorer_timeout: Duration,
    pub seed: u64,
    pub paths: PathsFile,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            m: 3,
            theta: 0.8,
            collision_mode: CollisionMode::Permissive,
            beam_width: 10,
            alpha: 1.0,
            scorer: "uniform".into(),
            scorer_timeout: atomdoc::decoder::external::DEFAULT_TIMEOUT,
            seed: 7,
            paths: PathsFile::default(),
        }
    }
}

/// Values given on the command line; `None` means "not given".
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub m: Option<usize>,
    pub theta: Option<f64>,
    pub strict_collisions: bool,
    pub width: Option<usize>,
    pub alpha: Option<f64>,
    pub scorer: Option<String>,
    pub scorer_timeout_secs: Option<f64>,
    pub seed: Option<u64>,
    pub index: Option<PathBuf>,
}

impl EngineConfig {
    pub fn resolve(file: Option<ConfigFile>, flags: &Overrides) -> Result<Self> {
        let d = EngineConfig::default();
        let file = file.unwrap_or_default();
        let timeout_secs = flags.scorer_timeout_secs.or(file.scorer_timeout_secs);
        let mut cfg = EngineConfig {
            m: flags.m.or(file.m).unwrap_or(d.m),
            theta: flags.theta.or(file.theta).unwrap_or(d.theta),
            collision_mode: if flags.strict_collisions {
                CollisionMode::Strict
            } else {
                file.collision_mode.unwrap_or(d.collision_mode)
            },
            beam_width: flags.width.or(file.beam_width).unwrap_or(d.beam_width),
            alpha: flags.alpha.or(file.alpha).unwrap_or(d.alpha),
            scorer: flags.scorer.clone().or(file.scorer).unwrap_or(d.scorer),
            scorer_timeout: match timeout_secs {
                Some(s) if s.is_finite() && s > 0.0 => Duration::from_secs_f64(s),
                Some(s) => bail!("scorer timeout must be positive, got {s}"),
                None => d.scorer_timeout,
            },
            seed: flags.seed.or(file.seed).unwrap_or(d.seed),
            paths: file.paths,
        };
        if flags.index.is_some() {
            cfg.paths.index = flags.index.clone();
        }
        if cfg.m == 0 {
            bail!("m must be at least 1");
        }
        if !(cfg.theta.is_finite() && cfg.theta >= 0.0) {
            bail!("theta must be finite and nonnegative, got {}", cfg.theta);
        }
        if cfg.beam_width == 0 {
            bail!("beam width must be at least 1");
        }
        if !(cfg.alpha.is_finite() && cfg.alpha > 0.0) {
            bail!("alpha must be positive, got {}", cfg.alpha);
        }
        Ok(cfg)
    }
}

/// Picks the command-line path, else the configured one, else fails naming
/// the flag.
pub fn require(flag: Option<&PathBuf>, configured: Option<&PathBuf>, name: &str) -> Result<PathBuf> {
    match flag.or(configured) {
        Some(p) => Ok(p.clone()),
        None => bail!("no {name} path given (use --{name} or set paths.{name} in the config file)"),
    }
}
