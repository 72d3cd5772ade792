use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bayesian::{KappaMode, McmcConfig, PriorSpec, DEFAULT_THRESHOLD};
use crate::error::{CddError, Result};
use crate::frequentist::{DEFAULT_BOOTSTRAP, DEFAULT_LEVEL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Frequentist,
    Bayesian,
    Both,
}

impl Method {
    pub fn frequentist(self) -> bool {
        matches!(self, Method::Frequentist | Method::Both)
    }

    pub fn bayesian(self) -> bool {
        matches!(self, Method::Bayesian | Method::Both)
    }
}

impl std::str::FromStr for Method {
    type Err = CddError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "frequentist" => Ok(Method::Frequentist),
            "bayesian" => Ok(Method::Bayesian),
            "both" => Ok(Method::Both),
            other => Err(CddError::InvalidConfig(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Text,
    /// Pretty-printed JSON.
    Structured,
}

impl std::str::FromStr for OutputFormat {
    type Err = CddError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "text" => Ok(OutputFormat::Text),
            "structured" | "json" => Ok(OutputFormat::Structured),
            other => Err(CddError::InvalidConfig(format!("unknown output format {other:?}"))),
        }
    }
}

/// A column picked by header name or, failing that, by 0-based index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSelector(pub String);

/// Two columns: the first becomes `U`, the second `V`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSelector {
    pub u: ColumnSelector,
    pub v: ColumnSelector,
}

impl std::str::FromStr for PairSelector {
    type Err = CddError;

    /// `"A,B"` or `"A:B"`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split([',', ':']).map(str::trim).collect();
        match parts.as_slice() {
            [u, v] if !u.is_empty() && !v.is_empty() => Ok(PairSelector {
                u: ColumnSelector(u.to_string()),
                v: ColumnSelector(v.to_string()),
            }),
            _ => Err(CddError::InvalidConfig(format!(
                "pair selector {s:?} must name two columns as A,B"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub input: PathBuf,
    pub pairs: Vec<PairSelector>,
    pub method: Method,
    pub prior: PriorSpec,
    pub mcmc: McmcConfig,
    pub n_boot: usize,
    pub level: f64,
    pub seed: u64,
    pub threshold: f64,
    pub format: OutputFormat,
    pub chain_dump: Option<PathBuf>,
}

impl AnalysisConfig {
    pub fn new(input: impl Into<PathBuf>, pairs: Vec<PairSelector>) -> Self {
        Self {
            input: input.into(),
            pairs,
            method: Method::Both,
            prior: PriorSpec::default(),
            mcmc: McmcConfig::default(),
            n_boot: DEFAULT_BOOTSTRAP,
            level: DEFAULT_LEVEL,
            seed: 0,
            threshold: DEFAULT_THRESHOLD,
            format: OutputFormat::Text,
            chain_dump: None,
        }
    }

    /// Pushes the shared seed and level into the sampler settings.
    pub fn synced(mut self) -> Self {
        self.mcmc.seed = self.seed;
        self.mcmc.level = self.level;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.pairs.is_empty() {
            return Err(CddError::InvalidConfig("no column pairs selected".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(CddError::InvalidConfig(format!("level {} not in (0, 1)", self.level)));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(CddError::InvalidConfig(format!(
                "threshold {} not in (0, 1)",
                self.threshold
            )));
        }
        if self.method.bayesian() {
            self.prior.validate()?;
            self.mcmc.validate()?;
        }
        Ok(())
    }
}

/// Optional settings read from a key-value (TOML) config file or the
/// command line. Later layers override earlier ones.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub input: Option<PathBuf>,
    pub pairs: Option<Vec<String>>,
    pub method: Option<String>,
    pub n_iter: Option<usize>,
    pub burn_in: Option<usize>,
    pub thin: Option<usize>,
    pub n_boot: Option<usize>,
    pub level: Option<f64>,
    pub seed: Option<u64>,
    pub kappa_mode: Option<String>,
    pub gamma_a: Option<f64>,
    pub gamma_b: Option<f64>,
    pub sigma0: Option<f64>,
    pub sigma1: Option<f64>,
    pub threshold: Option<f64>,
    pub format: Option<String>,
    pub chain_dump: Option<PathBuf>,
}

impl ConfigLayer {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CddError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CddError::InvalidConfig(e.to_string()))
    }

    /// Fields set in `other` win.
    pub fn overlay(self, other: ConfigLayer) -> Self {
        macro_rules! pick {
            ($($f:ident),*) => { ConfigLayer { $($f: other.$f.or(self.$f)),* } };
        }
        pick!(
            input, pairs, method, n_iter, burn_in, thin, n_boot, level, seed, kappa_mode, gamma_a, gamma_b, sigma0,
            sigma1, threshold, format, chain_dump
        )
    }

    pub fn resolve(self) -> Result<AnalysisConfig> {
        let input = self
            .input
            .ok_or_else(|| CddError::InvalidConfig("no input file given".into()))?;
        let pairs = self
            .pairs
            .unwrap_or_default()
            .iter()
            .map(|p| p.parse())
            .collect::<Result<Vec<PairSelector>>>()?;
        let mut cfg = AnalysisConfig::new(input, pairs);
        if let Some(m) = self.method {
            cfg.method = m.parse()?;
        }
        if let Some(v) = self.n_iter {
            cfg.mcmc.n_iter = v;
        }
        if let Some(v) = self.burn_in {
            cfg.mcmc.burn_in = v;
        }
        if let Some(v) = self.thin {
            cfg.mcmc.thin = v;
        }
        if let Some(v) = self.n_boot {
            cfg.n_boot = v;
        }
        if let Some(v) = self.level {
            cfg.level = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.sigma0 {
            cfg.prior.sigma0 = v;
        }
        if let Some(v) = self.sigma1 {
            cfg.prior.sigma1 = v;
        }
        if let Some(v) = self.threshold {
            cfg.threshold = v;
        }
        let mode = self.kappa_mode.as_deref().unwrap_or("gamma");
        cfg.prior.kappa_mode = match mode.to_ascii_lowercase().as_str() {
            "gamma" => KappaMode::GammaPrior {
                a: self.gamma_a.unwrap_or(1.0),
                b: self.gamma_b.unwrap_or(1.0),
            },
            "link" | "link_derived" | "fixed" => KappaMode::LinkDerived,
            other => return Err(CddError::InvalidConfig(format!("unknown kappa mode {other:?}"))),
        };
        if let Some(f) = self.format {
            cfg.format = f.parse()?;
        }
        cfg.chain_dump = self.chain_dump;
        let cfg = cfg.synced();
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let file = ConfigLayer::parse(
            r#"
            input = "genes.csv"
            pairs = ["Nkx2.1,Sftpc", "1:2"]
            method = "frequentist"
            n_boot = 300
            seed = 7
            kappa_mode = "link"
            "#,
        )
        .unwrap();
        let flags = ConfigLayer {
            seed: Some(11),
            method: Some("both".into()),
            ..ConfigLayer::default()
        };
        let cfg = file.overlay(flags).resolve().unwrap();
        assert_eq!(cfg.input, PathBuf::from("genes.csv"));
        assert_eq!(cfg.pairs.len(), 2);
        assert_eq!(cfg.pairs[0].u, ColumnSelector("Nkx2.1".into()));
        assert_eq!(cfg.pairs[1].v, ColumnSelector("2".into()));
        assert_eq!(cfg.method, Method::Both);
        assert_eq!(cfg.n_boot, 300);
        assert_eq!(cfg.seed, 11);
        assert_eq!(cfg.mcmc.seed, 11);
        assert_eq!(cfg.prior.kappa_mode, KappaMode::LinkDerived);
    }

    #[test]
    fn defaults() {
        let layer = ConfigLayer {
            input: Some("x.csv".into()),
            pairs: Some(vec!["a,b".into()]),
            ..ConfigLayer::default()
        };
        let cfg = layer.resolve().unwrap();
        assert_eq!(cfg.method, Method::Both);
        assert_eq!(cfg.n_boot, 1000);
        assert_eq!(cfg.level, 0.95);
        assert_eq!(cfg.mcmc.n_iter, 10_000);
        assert_eq!(cfg.mcmc.burn_in, 2_000);
        assert_eq!(cfg.prior.kappa_mode, KappaMode::GammaPrior { a: 1.0, b: 1.0 });
        assert_eq!(cfg.prior.sigma0, 10.0);
    }

    #[test]
    fn rejects_bad_layers() {
        assert!(ConfigLayer::parse("bogus = 1").is_err());
        let no_pairs = ConfigLayer {
            input: Some("x.csv".into()),
            ..ConfigLayer::default()
        };
        assert!(no_pairs.resolve().is_err());
        assert!("a".parse::<PairSelector>().is_err());
        assert!("a,b,c".parse::<PairSelector>().is_err());
        assert!("nope".parse::<Method>().is_err());
    }
}
