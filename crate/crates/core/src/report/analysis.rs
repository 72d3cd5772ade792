use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayesian::{decide_direction_bayesian, estimate_bayesian, write_chain_dump, BayesianFit, KappaMode};
use crate::betareg::Direction;
use crate::error::{CddError, Result};
use crate::frequentist::{decide_direction_frequentist, estimate_frequentist, Decision, FrequentistFit};
use crate::report::config::{AnalysisConfig, Method};
use crate::report::ingest::Table;
use crate::sample::to_pseudo_observations;

pub const TOOL_NAME: &str = "cdd";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequentistRecord {
    pub fit: FrequentistFit,
    pub decision: Decision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesianRecord {
    pub fit: BayesianFit,
    /// Percentage of draws with `rho2_uv > rho2_vu`.
    pub pct_u_to_v: f64,
    pub pct_v_to_u: f64,
    pub threshold: f64,
    pub decision: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub index: usize,
    pub gene_u: String,
    pub gene_v: String,
    pub n_used: usize,
    pub n_dropped: usize,
    pub frequentist: Option<FrequentistRecord>,
    pub bayesian: Option<BayesianRecord>,
    /// Set when this pair could not be analyzed; the other fields are then partial.
    pub error: Option<String>,
}

impl PairRecord {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub method: Method,
    pub seed: u64,
    pub n_boot: usize,
    pub level: f64,
    pub n_iter: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub kappa_mode: KappaMode,
    pub sigma0: f64,
    pub sigma1: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CddReport {
    pub tool: String,
    pub version: String,
    pub input: String,
    pub settings: RunSettings,
    pub records: Vec<PairRecord>,
}

impl CddReport {
    pub fn all_ok(&self) -> bool {
        self.records.iter().all(PairRecord::ok)
    }
}

fn dump_path(base: &Path, index: usize, pairs: usize) -> PathBuf {
    if pairs == 1 {
        return base.to_path_buf();
    }
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("chain");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    base.with_file_name(format!("{stem}.pair{index}.{ext}"))
}

fn analyze_pair(table: &Table, cfg: &AnalysisConfig, index: usize) -> PairRecord {
    let sel = &cfg.pairs[index];
    let mut record = PairRecord {
        index,
        gene_u: sel.u.0.clone(),
        gene_v: sel.v.0.clone(),
        n_used: 0,
        n_dropped: 0,
        frequentist: None,
        bayesian: None,
        error: None,
    };
    let ingested = match table.pair(sel) {
        Ok(i) => i,
        Err(e) => {
            record.error = Some(e.to_string());
            return record;
        }
    };
    let (u, v) = ingested.sample.labels();
    record.gene_u = u.to_string();
    record.gene_v = v.to_string();
    record.n_used = ingested.sample.len();
    record.n_dropped = ingested.dropped;

    let mut errors = Vec::new();
    if cfg.method.frequentist() {
        match estimate_frequentist(&ingested.sample, cfg.n_boot, cfg.level, cfg.seed) {
            Ok(fit) => {
                let decision = decide_direction_frequentist(&fit);
                record.frequentist = Some(FrequentistRecord { fit, decision });
            }
            Err(e) => errors.push(format!("frequentist: {e}")),
        }
    }
    if cfg.method.bayesian() {
        let run = to_pseudo_observations(&ingested.sample).and_then(|ps| estimate_bayesian(&ps, &cfg.prior, &cfg.mcmc));
        match run {
            Ok((draws, fit)) => {
                if let Some(base) = &cfg.chain_dump {
                    let path = dump_path(base, index, cfg.pairs.len());
                    let written = std::fs::File::create(&path)
                        .map_err(|source| CddError::Io { path, source })
                        .and_then(|f| write_chain_dump(std::io::BufWriter::new(f), &draws));
                    if let Err(e) = written {
                        errors.push(format!("chain dump: {e}"));
                    }
                }
                let pct_u_to_v = 100.0 * fit.prob_u_to_v;
                let decision = decide_direction_bayesian(&fit, cfg.threshold);
                record.bayesian = Some(BayesianRecord {
                    pct_v_to_u: 100.0 - pct_u_to_v,
                    pct_u_to_v,
                    threshold: cfg.threshold,
                    decision,
                    fit,
                });
            }
            Err(e) => errors.push(format!("bayesian: {e}")),
        }
    }
    if !errors.is_empty() {
        record.error = Some(errors.join("; "));
    }
    record
}

/// Runs the configured estimators on every selected pair.
///
/// Failures are recorded per pair; only an unreadable input aborts the run.
/// Records come back in selector order.
pub fn run_analysis(cfg: &AnalysisConfig) -> Result<CddReport> {
    cfg.validate()?;
    let table = Table::read(&cfg.input)?;
    let records = (0..cfg.pairs.len())
        .into_par_iter()
        .map(|i| analyze_pair(&table, cfg, i))
        .collect();
    Ok(CddReport {
        tool: TOOL_NAME.to_string(),
        version: VERSION.to_string(),
        input: cfg.input.display().to_string(),
        settings: RunSettings {
            method: cfg.method,
            seed: cfg.seed,
            n_boot: cfg.n_boot,
            level: cfg.level,
            n_iter: cfg.mcmc.n_iter,
            burn_in: cfg.mcmc.burn_in,
            thin: cfg.mcmc.thin,
            kappa_mode: cfg.prior.kappa_mode,
            sigma0: cfg.prior.sigma0,
            sigma1: cfg.prior.sigma1,
            threshold: cfg.threshold,
        },
        records,
    })
}
