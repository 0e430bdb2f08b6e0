use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{Format, ScanConfig};
use crate::error::{Error, Result};
use crate::expsum::max_nontrivial_fourier;
use crate::field::{primes_in, FieldContext};
use crate::par;

pub const CSV_HEADER: &str = "p,subgroup_order,index,alpha,max_coeff,beta_emp,argmax_xi,elapsed_ms";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub p: u64,
    pub subgroup_order: u64,
    pub index: u64,
    pub alpha: f64,
    pub max_coeff: f64,
    pub beta_emp: f64,
    pub argmax_xi: u64,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub rows: usize,
    pub max_beta_emp: Option<f64>,
    /// SHA-256 over the rows with `elapsed_ms` left out.
    pub hash: String,
}

/// Computes the rows of a scan, sorted by `(p, index)`.
pub fn scan_rows(cfg: &ScanConfig) -> Result<Vec<ResultRow>> {
    let primes: Vec<u64> = primes_in(cfg.p_min.max(3), cfg.p_max);
    let per_prime = par::with_threads(cfg.parallelism, || {
        par::map_slice(&primes, |&p| -> Result<Vec<ResultRow>> {
            let ctx = FieldContext::new(p)?;
            let mut rows = Vec::new();
            for h in ctx.all_subgroups().into_iter().rev() {
                let index = (p - 1) / h.order() as u64;
                if !cfg.selection.accepts(index, h.alpha()) {
                    continue;
                }
                let start = Instant::now();
                let b = max_nontrivial_fourier(&ctx, &h);
                rows.push(ResultRow {
                    p,
                    subgroup_order: h.order() as u64,
                    index,
                    alpha: h.alpha(),
                    max_coeff: b.max_nontrivial,
                    beta_emp: b.beta_emp,
                    argmax_xi: b.argmax_xi,
                    elapsed_ms: start.elapsed().as_millis() as u64,
                });
            }
            Ok(rows)
        })
    });
    let mut rows = Vec::new();
    for r in per_prime {
        rows.extend(r?);
    }
    rows.sort_by_key(|r| (r.p, r.index));
    Ok(rows)
}

pub fn determinism_hash(rows: &[ResultRow]) -> String {
    let mut h = Sha256::new();
    for r in rows {
        h.update(format!(
            "{},{},{},{},{},{},{}\n",
            r.p, r.subgroup_order, r.index, r.alpha, r.max_coeff, r.beta_emp, r.argmax_xi
        ));
    }
    hex::encode(h.finalize())
}

fn summarize(rows: &[ResultRow]) -> ScanSummary {
    ScanSummary {
        rows: rows.len(),
        max_beta_emp: rows.iter().map(|r| r.beta_emp).reduce(f64::max),
        hash: determinism_hash(rows),
    }
}

/// Writes rows plus a trailing summary; the file appears only once complete.
pub fn write_rows(path: &Path, format: Format, rows: &[ResultRow]) -> Result<ScanSummary> {
    let summary = summarize(rows);
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let out = tmp.as_file_mut();
        match format {
            Format::Csv => {
                let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut *out);
                w.write_record(CSV_HEADER.split(','))
                    .and_then(|_| rows.iter().try_for_each(|r| w.serialize(r)))
                    .and_then(|_| w.flush().map_err(Into::into))
                    .map_err(|e| Error::Io(e.to_string()))?;
                drop(w);
                let max = summary.max_beta_emp.map_or("none".to_string(), |v| v.to_string());
                writeln!(out, "# rows={} max_beta_emp={}", summary.rows, max)?;
            }
            Format::Jsonl => {
                for r in rows {
                    writeln!(out, "{}", serde_json::to_string(r).map_err(|e| Error::Io(e.to_string()))?)?;
                }
                let s = serde_json::json!({"summary": {"rows": summary.rows, "max_beta_emp": summary.max_beta_emp}});
                writeln!(out, "{s}")?;
            }
        }
        out.flush()?;
    }
    tmp.persist(path).map_err(|e| Error::Io(e.to_string()))?;
    Ok(summary)
}

/// Reads rows back, skipping the summary line.
pub fn read_rows(path: &Path, format: Format) -> Result<Vec<ResultRow>> {
    let file = std::fs::File::open(path)?;
    match format {
        Format::Csv => {
            let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file);
            r.deserialize().map(|row| row.map_err(|e| Error::Io(e.to_string()))).collect()
        }
        Format::Jsonl => {
            let mut rows = Vec::new();
            for line in BufReader::new(file).lines() {
                let line = line?;
                if line.trim().is_empty() || line.starts_with("{\"summary\"") {
                    continue;
                }
                rows.push(serde_json::from_str(&line).map_err(|e| Error::Io(e.to_string()))?);
            }
            Ok(rows)
        }
    }
}

/// Runs a scan and writes its output file.
pub fn run_scan(cfg: &ScanConfig) -> Result<ScanSummary> {
    let rows = scan_rows(cfg)?;
    write_rows(&cfg.output, cfg.format, &rows)
}
