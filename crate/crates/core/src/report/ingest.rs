use std::path::Path;

use crate::error::{CddError, Result};
use crate::report::config::{ColumnSelector, PairSelector};
use crate::sample::{PairedSample, MIN_OBSERVATIONS};

/// A delimited table held as text cells.
#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub delimiter: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub sample: PairedSample,
    /// Rows skipped for a missing or non-numeric entry in either column.
    pub dropped: usize,
}

/// Comma or tab, judged from the header line alone.
pub fn detect_delimiter(header_line: &str) -> Result<u8> {
    let commas = header_line.matches(',').count();
    let tabs = header_line.matches('\t').count();
    match (commas, tabs) {
        (c, 0) if c > 0 => Ok(b','),
        (0, t) if t > 0 => Ok(b'\t'),
        _ => Err(CddError::AmbiguousDelimiter),
    }
}

impl Table {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CddError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let first = text.lines().next().unwrap_or("");
        let delimiter = detect_delimiter(first)?;
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(delimiter)
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = reader.headers()?.iter().map(str::to_string).collect();
        let rows = reader
            .records()
            .map(|r| r.map(|rec| rec.iter().map(str::to_string).collect()))
            .collect::<std::result::Result<Vec<Vec<String>>, _>>()?;
        Ok(Self {
            header,
            rows,
            delimiter,
        })
    }

    /// Header name first; otherwise a 0-based column index.
    pub fn resolve(&self, sel: &ColumnSelector) -> Result<usize> {
        if let Some(i) = self.header.iter().position(|h| h == &sel.0) {
            return Ok(i);
        }
        match sel.0.parse::<usize>() {
            Ok(i) if i < self.header.len() => Ok(i),
            _ => Err(CddError::MissingColumn(sel.0.clone())),
        }
    }

    pub fn pair(&self, sel: &PairSelector) -> Result<Ingested> {
        let iu = self.resolve(&sel.u)?;
        let iv = self.resolve(&sel.v)?;
        let parse = |row: &[String], i: usize| -> Option<f64> {
            row.get(i)
                .filter(|s| !s.is_empty())
                .and_then(|s| s.parse::<f64>().ok())
                .filter(|x| x.is_finite())
        };
        let mut x1 = Vec::with_capacity(self.rows.len());
        let mut x2 = Vec::with_capacity(self.rows.len());
        let mut dropped = 0;
        for row in &self.rows {
            match (parse(row, iu), parse(row, iv)) {
                (Some(a), Some(b)) => {
                    x1.push(a);
                    x2.push(b);
                }
                _ => dropped += 1,
            }
        }
        if x1.len() < MIN_OBSERVATIONS {
            return Err(CddError::TooFewObservations {
                got: x1.len(),
                min: MIN_OBSERVATIONS,
            });
        }
        let labels = (self.header[iu].clone(), self.header[iv].clone());
        Ok(Ingested {
            sample: PairedSample::new(x1, x2, labels)?,
            dropped,
        })
    }
}

/// Reads `path` and extracts one column pair.
pub fn ingest(path: &Path, sel: &PairSelector) -> Result<Ingested> {
    Table::read(path)?.pair(sel)
}
