//! Pipeline configuration: built-in defaults, overridden by a TOML file,
//! overridden by command-line flags.

use std::path::{Path, PathBuf};

use copydesc_core::StretchConfig;
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Query descriptor files, one per scale, in identical id order.
    pub queries: Vec<PathBuf>,
    pub references: Vec<PathBuf>,
    /// Training descriptors used only to compute stretch factors.
    pub training: Vec<PathBuf>,
    pub truth: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub stretch: bool,
    pub alpha: f64,
    pub n: usize,
    pub k: usize,
    pub ranks: Vec<usize>,
    pub curve: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let s = StretchConfig::default();
        Self {
            queries: Vec::new(),
            references: Vec::new(),
            training: Vec::new(),
            truth: None,
            out_dir: PathBuf::from("copydesc_out"),
            stretch: true,
            alpha: s.alpha,
            n: s.n,
            k: 10,
            ranks: vec![1, 10],
            curve: false,
        }
    }
}

/// Flag values that replace config-file values when present.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub queries: Vec<PathBuf>,
    pub references: Vec<PathBuf>,
    pub training: Vec<PathBuf>,
    pub truth: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub stretch: Option<bool>,
    pub alpha: Option<f64>,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub ranks: Option<Vec<usize>>,
    pub curve: Option<bool>,
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl PipelineConfig {
    /// Parses TOML; relative paths are taken relative to `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self, Failure> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| Failure::usage("config", e.to_string()))?;
        for p in cfg.queries.iter_mut().chain(&mut cfg.references).chain(&mut cfg.training) {
            resolve(base_dir, p);
        }
        if let Some(t) = &mut cfg.truth {
            resolve(base_dir, t);
        }
        resolve(base_dir, &mut cfg.out_dir);
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::usage("config", format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn apply(&mut self, o: Overrides) {
        if !o.queries.is_empty() {
            self.queries = o.queries;
        }
        if !o.references.is_empty() {
            self.references = o.references;
        }
        if !o.training.is_empty() {
            self.training = o.training;
        }
        if o.truth.is_some() {
            self.truth = o.truth;
        }
        if let Some(v) = o.out_dir {
            self.out_dir = v;
        }
        if let Some(v) = o.stretch {
            self.stretch = v;
        }
        if let Some(v) = o.alpha {
            self.alpha = v;
        }
        if let Some(v) = o.n {
            self.n = v;
        }
        if let Some(v) = o.k {
            self.k = v;
        }
        if let Some(v) = o.ranks {
            self.ranks = v;
        }
        if let Some(v) = o.curve {
            self.curve = v;
        }
    }

    pub fn stretch_config(&self) -> StretchConfig {
        StretchConfig { alpha: self.alpha, n: self.n }
    }

    /// Checks required inputs, parameter ranges and that input files exist.
    pub fn validate(&self) -> Result<(), Failure> {
        let usage = |m: String| Err(Failure::usage("config", m));
        if self.queries.is_empty() || self.references.is_empty() {
            return usage("queries and references are required".into());
        }
        if self.truth.is_none() {
            return usage("truth is required".into());
        }
        if self.stretch && self.training.is_empty() {
            return usage("stretching needs training descriptors".into());
        }
        if self.k == 0 {
            return usage("k must be at least 1".into());
        }
        if self.ranks.is_empty() || self.ranks.contains(&0) {
            return usage("ranks must be a non-empty list of positive integers".into());
        }
        if self.stretch {
            if let Err(e) = self.stretch_config().validate() {
                return usage(e.to_string());
            }
        }
        let training: &[PathBuf] = if self.stretch { &self.training } else { &[] };
        for p in self.queries.iter().chain(&self.references).chain(training).chain(self.truth.iter()) {
            if !p.is_file() {
                return usage(format!("input file not found: {}", p.display()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let cfg = PipelineConfig::from_toml_str(
            "queries = [\"q.iscd\"]\nreferences = [\"/abs/r.iscd\"]\nk = 5\nalpha = 3.0\n",
            Path::new("/base"),
        )
        .unwrap();
        assert_eq!(cfg.queries, vec![PathBuf::from("/base/q.iscd")]);
        assert_eq!(cfg.references, vec![PathBuf::from("/abs/r.iscd")]);
        assert_eq!((cfg.k, cfg.alpha, cfg.n), (5, 3.0, 5));

        let mut cfg = cfg;
        cfg.apply(Overrides { k: Some(7), stretch: Some(false), ..Overrides::default() });
        assert_eq!((cfg.k, cfg.alpha, cfg.stretch), (7, 3.0, false));
    }

    #[test]
    fn unknown_keys_and_missing_inputs_are_usage_errors() {
        let e = PipelineConfig::from_toml_str("bogus = 1", Path::new(".")).unwrap_err();
        assert_eq!(e.code, crate::failure::EXIT_USAGE);
        let e = PipelineConfig::default().validate().unwrap_err();
        assert_eq!(e.code, crate::failure::EXIT_USAGE);
    }
}
