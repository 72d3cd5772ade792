use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cdd::betareg::Direction;
use cdd::oracle::{generate_directed, sample_copula, validation_suite, AsymmetricBeta, CopulaSpec};
use cdd::report::{render_structured, render_text, run_analysis, ConfigLayer, OutputFormat};
use cdd::{CddError, Result};

#[derive(Parser)]
#[command(
    name = "cdd",
    version,
    about = "Copula directional dependence between paired measurements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Estimate the dependence direction for one or more column pairs.
    Analyze(AnalyzeArgs),
    /// Write a synthetic two-column dataset.
    Simulate(SimulateArgs),
    /// Check quadrature and sampling against closed-form values.
    Validate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Comma- or tab-delimited table with a header row.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Column pair `U,V` by header name or 0-based index; repeatable.
    #[arg(long = "pair")]
    pairs: Vec<String>,
    /// frequentist, bayesian or both.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    n_iter: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    #[arg(long)]
    n_boot: Option<usize>,
    #[arg(long)]
    level: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// gamma (free precision with a Gamma prior) or link.
    #[arg(long)]
    kappa_mode: Option<String>,
    #[arg(long)]
    gamma_a: Option<f64>,
    #[arg(long)]
    gamma_b: Option<f64>,
    #[arg(long)]
    sigma0: Option<f64>,
    #[arg(long)]
    sigma1: Option<f64>,
    /// Posterior probability above which U->V is reported.
    #[arg(long)]
    threshold: Option<f64>,
    /// text or structured (JSON).
    #[arg(long)]
    format: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// TOML file with any of the settings above; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV of retained posterior draws.
    #[arg(long)]
    chain_dump: Option<PathBuf>,
}

impl AnalyzeArgs {
    fn layer(&self) -> ConfigLayer {
        ConfigLayer {
            input: self.input.clone(),
            pairs: (!self.pairs.is_empty()).then(|| self.pairs.clone()),
            method: self.method.clone(),
            n_iter: self.n_iter,
            burn_in: self.burn_in,
            thin: self.thin,
            n_boot: self.n_boot,
            level: self.level,
            seed: self.seed,
            kappa_mode: self.kappa_mode.clone(),
            gamma_a: self.gamma_a,
            gamma_b: self.gamma_b,
            sigma0: self.sigma0,
            sigma1: self.sigma1,
            threshold: self.threshold,
            format: self.format.clone(),
            chain_dump: self.chain_dump.clone(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Independence,
    Fgm,
    Gaussian,
    Asymmetric,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirArg {
    #[value(name = "u-to-v", alias = "uv")]
    UToV,
    #[value(name = "v-to-u", alias = "vu")]
    VToU,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    #[arg(long, default_value_t = -1.5, allow_hyphen_values = true)]
    beta0: f64,
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    beta1: f64,
    /// Fixed precision; omit for the link-derived precision.
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long, value_enum, default_value = "u-to-v")]
    direction: DirArg,
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CddError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CddError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn analyze(args: AnalyzeArgs) -> Result<bool> {
    let base = match &args.config {
        Some(p) => ConfigLayer::from_file(p)?,
        None => ConfigLayer::default(),
    };
    let cfg = base.overlay(args.layer()).resolve()?;
    let report = run_analysis(&cfg)?;
    let text = match cfg.format {
        OutputFormat::Text => render_text(&report),
        OutputFormat::Structured => render_structured(&report)?,
    };
    write_out(args.output.as_deref(), &text)?;
    for r in report.records.iter().filter(|r| !r.ok()) {
        eprintln!(
            "cdd: pair {} ({}, {}): {}",
            r.index,
            r.gene_u,
            r.gene_v,
            r.error.as_deref().unwrap_or("")
        );
    }
    Ok(report.all_ok())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let (x1, x2) = match args.family {
        Family::Asymmetric => {
            let direction = match args.direction {
                DirArg::UToV => Direction::UToV,
                DirArg::VToU => Direction::VToU,
            };
            let spec = match args.kappa {
                Some(k) => AsymmetricBeta::new(args.beta0, args.beta1, k, direction)?,
                None => AsymmetricBeta::link_derived(args.beta0, args.beta1, direction),
            };
            let s = generate_directed(&spec, args.n, args.seed);
            (s.x1().to_vec(), s.x2().to_vec())
        }
        family => {
            let spec = match family {
                Family::Fgm => CopulaSpec::Fgm { theta: args.theta },
                Family::Gaussian => CopulaSpec::Gaussian { rho: args.rho },
                _ => CopulaSpec::Independence,
            };
            spec.validate()?;
            sample_copula(&spec, args.n, args.seed)
        }
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["U", "V"])?;
    for (a, b) in x1.iter().zip(&x2) {
        w.write_record([a.to_string(), b.to_string()])?;
    }
    let bytes = w.into_inner().map_err(|e| CddError::Parse(e.to_string()))?;
    write_out(args.output.as_deref(), &String::from_utf8_lossy(&bytes))
}

fn validate(seed: u64) -> Result<bool> {
    let checks = validation_suite(seed)?;
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &checks {
        println!(
            "{}  {:<width$}  computed {:.10}  expected {:.10}  tol {:e}",
            if c.passed { "ok  " } else { "FAIL" },
            c.name,
            c.computed,
            c.expected,
            c.tolerance
        );
    }
    Ok(checks.iter().all(|c| c.passed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Analyze(args) => analyze(args),
        Command::Simulate(args) => simulate(args).map(|_| true),
        Command::Validate { seed } => validate(seed),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e @ CddError::InvalidConfig(_)) => {
            eprintln!("cdd: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("cdd: {e}");
            ExitCode::FAILURE
        }
    }
}
