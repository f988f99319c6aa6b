//! CSV and JSON serialization of operators, spectra, scans and simulation
//! results, plus an atomic file writer.
//!
//! CSV output may begin with `#`-prefixed comment lines. Floats use the
//! shortest round-trip form, so identical values always give identical
//! bytes.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::bgstates::{ScanResult, Verdict};
use crate::error::{Error, Result};
use crate::fockreal::{FockOperator, TwoModeBasisIndex};
use crate::nfm::MonteCarloSummary;
use crate::phaseops::DiagonalIdentities;
use crate::repalg::TruncatedOperator;
use crate::Complex64;

fn export_err(e: impl std::fmt::Display) -> Error {
    Error::Export(e.to_string())
}

/// CSV builder with leading comment lines.
struct Csv {
    out: Vec<u8>,
    writer: Option<csv::Writer<Vec<u8>>>,
}

impl Csv {
    fn new(comments: &[String], header: &[&str]) -> Result<Self> {
        let mut out = Vec::new();
        for c in comments {
            for line in c.lines() {
                writeln!(out, "# {line}").map_err(export_err)?;
            }
        }
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).map_err(export_err)?;
        Ok(Self {
            out,
            writer: Some(writer),
        })
    }

    fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer
            .as_mut()
            .expect("open writer")
            .write_record(fields)
            .map_err(export_err)
    }

    fn finish(mut self) -> Result<Vec<u8>> {
        let body = self
            .writer
            .take()
            .expect("open writer")
            .into_inner()
            .map_err(export_err)?;
        self.out.extend(body);
        Ok(self.out)
    }
}

/// Shortest round-trip form, with an exponent for very small or large
/// magnitudes.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Nonzero entries, row-major, columns `i,j,re,im`.
pub fn matrix_csv(m: &DMatrix<Complex64>, comments: &[String]) -> Result<Vec<u8>> {
    let mut csv = Csv::new(comments, &["i", "j", "re", "im"])?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = m[(i, j)];
            if v.re != 0.0 || v.im != 0.0 {
                csv.row([i.to_string(), j.to_string(), num(v.re), num(v.im)])?;
            }
        }
    }
    csv.finish()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixEntry {
    pub i: usize,
    pub j: usize,
    pub re: f64,
    pub im: f64,
}

/// JSON envelope for one operator; `k` and `omega` are absent for Fock
/// operators without a single irrep label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixEnvelope {
    pub name: String,
    pub k: Option<f64>,
    pub dim: usize,
    /// `[re, im]`
    pub omega: Option<[f64; 2]>,
    pub entries: Vec<MatrixEntry>,
}

fn entries(m: &DMatrix<Complex64>) -> Vec<MatrixEntry> {
    let mut out = Vec::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = m[(i, j)];
            if v.re != 0.0 || v.im != 0.0 {
                out.push(MatrixEntry {
                    i,
                    j,
                    re: v.re,
                    im: v.im,
                });
            }
        }
    }
    out
}

impl MatrixEnvelope {
    pub fn from_operator(op: &TruncatedOperator) -> Self {
        Self {
            name: op.name.clone(),
            k: Some(op.k),
            dim: op.dim(),
            omega: Some([op.omega.re, op.omega.im]),
            entries: entries(&op.entries),
        }
    }

    pub fn from_fock(op: &FockOperator, k: Option<f64>) -> Self {
        Self {
            name: op.name.clone(),
            k,
            dim: op.dim(),
            omega: None,
            entries: entries(&op.entries),
        }
    }
}

pub fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value).map_err(export_err)?;
    out.push(b'\n');
    Ok(out)
}

/// Columns `index,eigenvalue`.
pub fn spectrum_csv(eigenvalues: &[f64], comments: &[String]) -> Result<Vec<u8>> {
    let mut csv = Csv::new(comments, &["index", "eigenvalue"])?;
    for (i, v) in eigenvalues.iter().enumerate() {
        csv.row([i.to_string(), num(*v)])?;
    }
    csv.finish()
}

/// Columns `n,commutator_diag,sum_squares_diag`.
pub fn diagonal_identities_csv(d: &DiagonalIdentities, comments: &[String]) -> Result<Vec<u8>> {
    let mut csv = Csv::new(comments, &["n", "commutator_diag", "sum_squares_diag"])?;
    for (n, (c, s)) in d.commutator_diag.iter().zip(&d.sum_squares_diag).enumerate() {
        csv.row([n.to_string(), num(*c), num(*s)])?;
    }
    csv.finish()
}

/// Columns `k,rho,ratio,verdict`, one row per grid point.
pub fn scan_csv(scan: &ScanResult, comments: &[String]) -> Result<Vec<u8>> {
    let mut csv = Csv::new(comments, &["k", "rho", "ratio", "verdict"])?;
    for (ik, k) in scan.k_values.iter().enumerate() {
        let verdict = scan.verdicts[ik].to_string();
        for (ir, rho) in scan.rho_values.iter().enumerate() {
            csv.row([num(*k), num(*rho), num(scan.ratio[ik][ir]), verdict.clone()])?;
        }
    }
    csv.finish()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanSummaryRow {
    pub k: f64,
    pub sup: f64,
    pub argmax_rho: f64,
    pub verdict: Verdict,
}

pub fn scan_summary(scan: &ScanResult) -> Vec<ScanSummaryRow> {
    (0..scan.k_values.len())
        .map(|i| ScanSummaryRow {
            k: scan.k_values[i],
            sup: scan.sup_per_k[i],
            argmax_rho: scan.argmax_rho[i],
            verdict: scan.verdicts[i],
        })
        .collect()
}

/// Columns `n1,n2,sector,irrep_k,irrep_n`.
pub fn sector_table_csv(table: &[TwoModeBasisIndex], comments: &[String]) -> Result<Vec<u8>> {
    let mut csv = Csv::new(comments, &["n1", "n2", "sector", "irrep_k", "irrep_n"])?;
    for e in table {
        csv.row([
            e.n1.to_string(),
            e.n2.to_string(),
            e.sector.to_string(),
            num(e.irrep_k),
            e.irrep_n.to_string(),
        ])?;
    }
    csv.finish()
}

/// One row per trial; empty cells where a value is undefined (no phase on a
/// flat pattern, no `ρ` for number states).
pub fn nfm_trials_csv(summary: &MonteCarloSummary, comments: &[String]) -> Result<Vec<u8>> {
    let mut csv = Csv::new(
        comments,
        &[
            "trial",
            "recovered_rho",
            "recovered_phi",
            "err_k1",
            "err_k2",
            "err_rho",
            "err_phi",
        ],
    )?;
    for t in &summary.trials {
        csv.row([
            t.trial.to_string(),
            num(t.recovered_rho),
            opt(t.recovered_phi),
            num(t.err_k1),
            num(t.err_k2),
            opt(t.err_rho),
            opt(t.err_phi),
        ])?;
    }
    csv.finish()
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so a failed run never leaves a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::Export(format!("{}: {e}", dir.display())))?;
    tmp.write_all(bytes).map_err(export_err)?;
    tmp.as_file().sync_all().map_err(export_err)?;
    tmp.persist(path)
        .map_err(|e| Error::Export(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bgstates::kbound_scan;
    use crate::repalg::{build_kplus, RepLabel};

    #[test]
    fn matrix_csv_layout() {
        let op = build_kplus(&RepLabel::universal(0.5).unwrap(), 3).unwrap();
        let text = String::from_utf8(matrix_csv(&op.entries, &["phasequant test".into()]).unwrap()).unwrap();
        assert_eq!(text, "# phasequant test\ni,j,re,im\n1,0,1.0,0.0\n2,1,2.0,0.0\n");
        let env = MatrixEnvelope::from_operator(&op);
        let json = String::from_utf8(json_bytes(&env).unwrap()).unwrap();
        let keys: Vec<usize> = ["\"name\"", "\"k\"", "\"dim\"", "\"omega\"", "\"entries\""]
            .iter()
            .map(|k| json.find(k).unwrap())
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn scan_outputs() {
        let scan = kbound_scan(&[0.5, 1.0], &[1.0, 2.0]).unwrap();
        let text = String::from_utf8(scan_csv(&scan, &[]).unwrap()).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("k,rho,ratio,verdict\n0.5,1.0,"));
        let rows = scan_summary(&scan);
        assert_eq!(rows.len(), 2);
        assert!(String::from_utf8(json_bytes(&rows).unwrap())
            .unwrap()
            .contains("\"BOUNDED\""));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
        assert!(write_atomic(&dir.path().join("missing/out.csv"), b"x").is_err());
    }
}
