//! CSV and gnuplot `.dat` emission.
//!
//! Every row is self-describing:
//! `scheme,N,M,Ts_s,r_um,d_um,snr_db,ser_sim,ci95,ser_analytic,analytic_kind,symbols,replications,seed`.
//! `symbols` is per replication. Floats use the shortest representation that
//! parses back to the same `f64`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::AnalyticKind;
use crate::engine::{RunConfig, SerCurve, SerPoint};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "scheme,N,M,Ts_s,r_um,d_um,snr_db,ser_sim,ci95,ser_analytic,analytic_kind,symbols,replications,seed";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub scheme: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "Ts_s")]
    pub ts_s: f64,
    pub r_um: f64,
    pub d_um: f64,
    pub snr_db: f64,
    pub ser_sim: Option<f64>,
    pub ci95: Option<f64>,
    pub ser_analytic: Option<f64>,
    pub analytic_kind: Option<String>,
    pub symbols: u64,
    pub replications: u32,
    pub seed: u64,
}

/// Long-format row: a curve label in front of the regular columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LongRow<'a> {
    curve: &'a str,
    detector: &'a str,
    scheme: &'a str,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "Ts_s")]
    ts_s: f64,
    r_um: f64,
    d_um: f64,
    snr_db: f64,
    ser_sim: Option<f64>,
    ci95: Option<f64>,
    ser_analytic: Option<f64>,
    analytic_kind: Option<&'a str>,
    symbols: u64,
    replications: u32,
    seed: u64,
}

/// Metres to micrometres, rounded to 1e-9 µm so that `12.5e-6` prints as
/// `12.5`.
fn to_um(x: f64) -> f64 {
    (x * 1e15).round() / 1e9
}

impl CsvRow {
    fn base(config: &RunConfig, snr_db: f64) -> Self {
        Self {
            scheme: config.scheme.kind().as_str().to_string(),
            n: config.scheme.n_links(),
            m: config.scheme.csk_order(),
            ts_s: config.symbol_duration,
            r_um: to_um(config.geometry.separation()),
            d_um: to_um(config.geometry.link_distance()),
            snr_db,
            ser_sim: None,
            ci95: None,
            ser_analytic: None,
            analytic_kind: None,
            symbols: config.symbols,
            replications: config.replications,
            seed: config.seed,
        }
    }

    pub fn from_point(config: &RunConfig, point: &SerPoint) -> Self {
        Self {
            ser_sim: Some(point.ser_sim),
            ci95: Some(point.ci95),
            ser_analytic: point.ser_analytic,
            analytic_kind: point.analytic_kind.map(|k| k.as_str().to_string()),
            ..Self::base(config, point.snr_db)
        }
    }

    /// Row for an analysis-only sweep: no simulated columns, zero symbols.
    pub fn analytic_only(config: &RunConfig, snr_db: f64, value: f64, kind: AnalyticKind) -> Self {
        Self {
            ser_analytic: Some(value),
            analytic_kind: Some(kind.as_str().to_string()),
            symbols: 0,
            replications: 0,
            ..Self::base(config, snr_db)
        }
    }

    /// Rebuilds the simulated point. The error count is recovered from the
    /// pooled rate and the total number of symbols.
    pub fn to_point(&self) -> Result<SerPoint> {
        let ser_sim = self
            .ser_sim
            .ok_or_else(|| Error::arg("row has no simulated SER"))?;
        let total = self.symbols * self.replications as u64;
        let analytic_kind = match self.analytic_kind.as_deref() {
            None | Some("") => None,
            Some("exact") => Some(AnalyticKind::Exact),
            Some("bound") => Some(AnalyticKind::UpperBound),
            Some(other) => return Err(Error::arg(format!("unknown analytic kind `{other}`"))),
        };
        Ok(SerPoint {
            snr_db: self.snr_db,
            ser_sim,
            ci95: self.ci95.unwrap_or(f64::NAN),
            ser_analytic: self.ser_analytic,
            analytic_kind,
            errors: (ser_sim * total as f64).round() as u64,
            symbols: total,
        })
    }
}

pub fn write_rows(path: &Path, rows: &[CsvRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_curve_csv(path: &Path, curve: &SerCurve) -> Result<()> {
    let rows: Vec<CsvRow> = curve
        .points
        .iter()
        .map(|p| CsvRow::from_point(&curve.config, p))
        .collect();
    write_rows(path, &rows)
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::arg(format!("unexpected CSV header in {}", path.display())));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// All curves of a figure in one file, one row per point.
pub fn write_long_csv(path: &Path, curves: &[(String, &'static str, SerCurve)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (label, detector, curve) in curves {
        for p in &curve.points {
            let row = CsvRow::from_point(&curve.config, p);
            w.serialize(LongRow {
                curve: label,
                detector,
                scheme: &row.scheme,
                n: row.n,
                m: row.m,
                ts_s: row.ts_s,
                r_um: row.r_um,
                d_um: row.d_um,
                snr_db: row.snr_db,
                ser_sim: row.ser_sim,
                ci95: row.ci95,
                ser_analytic: row.ser_analytic,
                analytic_kind: row.analytic_kind.as_deref(),
                symbols: row.symbols,
                replications: row.replications,
                seed: row.seed,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Whitespace-separated columns for gnuplot: snr, simulated SER, CI
/// half-width, analytic SER (`NaN` when absent).
pub fn write_dat(path: &Path, label: &str, curve: &SerCurve) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# {label}")?;
    writeln!(w, "# snr_db ser_sim ci95 ser_analytic")?;
    for p in &curve.points {
        writeln!(
            w,
            "{} {} {} {}",
            p.snr_db,
            p.ser_sim,
            p.ci95,
            p.ser_analytic.unwrap_or(f64::NAN)
        )?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::RunConfig;
    use crate::modulation::Scheme;
    use crate::channel::SystemGeometry;
    use proptest::prelude::*;

    fn curve(points: Vec<SerPoint>) -> SerCurve {
        let g = SystemGeometry::new(2, 20e-6, 12.5e-6, 0.1e-6, 2.2e-9).unwrap();
        SerCurve {
            config: RunConfig::new(Scheme::ssk(2).unwrap(), g, 0.8),
            points,
        }
    }

    #[test]
    fn header_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        write_curve_csv(&path, &curve(vec![])).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().trim_end(), CSV_HEADER);
        assert_eq!(to_um(12.5e-6), 12.5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn csv_round_trip(errors in 0u64..500_000, snr in -10.0f64..30.0, analytic in proptest::option::of(0.0f64..1.0)) {
            let total = 500_000u64;
            let ser = errors as f64 / total as f64;
            let point = SerPoint {
                snr_db: snr,
                ser_sim: ser,
                ci95: 1.96 * (ser * (1.0 - ser) / total as f64).sqrt(),
                ser_analytic: analytic,
                analytic_kind: analytic.map(|_| AnalyticKind::Exact),
                errors,
                symbols: total,
            };
            let c = curve(vec![point.clone()]);
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("c.csv");
            write_curve_csv(&path, &c).unwrap();
            let rows = read_csv(&path).unwrap();
            prop_assert_eq!(rows.len(), 1);
            prop_assert_eq!(rows[0].to_point().unwrap(), point);
        }
    }
}
