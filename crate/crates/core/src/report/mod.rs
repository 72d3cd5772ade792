//! Input ingestion, run configuration, orchestration over column pairs, and
//! report rendering.

pub mod analysis;
pub mod config;
pub mod ingest;
pub mod render;

pub use analysis::{run_analysis, BayesianRecord, CddReport, FrequentistRecord, PairRecord};
pub use config::{AnalysisConfig, ColumnSelector, ConfigLayer, Method, OutputFormat, PairSelector};
pub use ingest::{ingest, Ingested, Table};
pub use render::{parse_structured, render_structured, render_text};
