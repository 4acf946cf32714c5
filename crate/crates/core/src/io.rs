//! File formats: series CSV, spectral-grid CSV, filter JSON and factor JSON.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::allpass::CepstralParams;
use crate::error::{Error, Result};
use crate::factorize::VmaFactor;
use crate::linalg::{from_rows, to_rows, RMat};
use crate::scalar::{lit, Real};
use crate::series::{MapFilter, MultiSeries};
use crate::sim::ModelFile;
use crate::spectral::SpectralGrid;

/// A series together with its `time` column labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTable<T: Real = f64> {
    pub times: Vec<String>,
    pub series: MultiSeries<T>,
}

impl<T: Real> SeriesTable<T> {
    /// Integer time labels `0..len`.
    pub fn indexed(series: MultiSeries<T>) -> Self {
        SeriesTable {
            times: (0..series.len()).map(|t| t.to_string()).collect(),
            series,
        }
    }
}

/// Parses `time,<name1>,...,<namen>` CSV text.
pub fn parse_series_csv<T: Real, R: Read>(reader: R) -> Result<SeriesTable<T>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.get(0) != Some("time") {
        return Err(Error::Parse(format!(
            "series CSV must start with a `time` column, found {:?}",
            header.get(0).unwrap_or("")
        )));
    }
    let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    if names.is_empty() {
        return Err(Error::Parse("series CSV has no value columns".into()));
    }
    let mut times = Vec::new();
    let mut data = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != names.len() + 1 {
            return Err(Error::Parse(format!(
                "row {} has {} fields, expected {}",
                row + 1,
                rec.len(),
                names.len() + 1
            )));
        }
        times.push(rec[0].to_string());
        for (col, field) in rec.iter().skip(1).enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                Error::Parse(format!(
                    "row {}, column `{}`: cannot parse {field:?} as a number",
                    row + 1,
                    names[col]
                ))
            })?;
            if !v.is_finite() {
                return Err(Error::Parse(format!(
                    "row {}, column `{}`: non-finite value",
                    row + 1,
                    names[col]
                )));
            }
            data.push(lit::<T>(v));
        }
    }
    let values = RMat::from_row_slice(times.len(), names.len(), &data);
    Ok(SeriesTable {
        times,
        series: MultiSeries::new(values, names)?,
    })
}

pub fn read_series_csv<T: Real>(path: &Path) -> Result<SeriesTable<T>> {
    parse_series_csv(File::open(path)?)
}

/// Writes `time,<names>` CSV; values use the shortest round-trip representation.
pub fn write_series_csv_to<T: Real, W: Write>(writer: W, table: &SeriesTable<T>) -> Result<()> {
    let s = &table.series;
    if table.times.len() != s.len() {
        return Err(Error::Shape(format!(
            "{} time labels for {} rows",
            table.times.len(),
            s.len()
        )));
    }
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["time".to_string()];
    header.extend(s.names().iter().cloned());
    w.write_record(&header)?;
    for (t, label) in table.times.iter().enumerate() {
        let mut rec = vec![label.clone()];
        rec.extend((0..s.dim()).map(|i| s.values()[(t, i)].as_f64().to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_series_csv<T: Real>(path: &Path, table: &SeriesTable<T>) -> Result<()> {
    write_series_csv_to(File::create(path)?, table)
}

/// Spectral grid as CSV: `j, lambda, re_kl, im_kl` for every entry `(k, l)` (1-based).
pub fn write_spectrum_csv_to<T: Real, W: Write>(writer: W, s: &SpectralGrid<T>) -> Result<()> {
    let n = s.dim();
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["j".to_string(), "lambda".to_string()];
    for k in 1..=n {
        for l in 1..=n {
            header.push(format!("re_{k}{l}"));
            header.push(format!("im_{k}{l}"));
        }
    }
    w.write_record(&header)?;
    for (j, m) in s.mats().iter().enumerate() {
        let mut rec = vec![j.to_string(), s.grid().lambda(j).as_f64().to_string()];
        for k in 0..n {
            for l in 0..n {
                rec.push(m[(k, l)].re.as_f64().to_string());
                rec.push(m[(k, l)].im.as_f64().to_string());
            }
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Serialized S-MAP filter; `coeffs` runs over `k = -M..M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterFile {
    pub halfwidth: usize,
    pub coeffs: Vec<Vec<Vec<f64>>>,
    pub smap_error: f64,
    pub theta: Vec<f64>,
    pub r: usize,
    #[serde(default)]
    pub tail_norm: f64,
}

impl FilterFile {
    pub fn new<T: Real>(filter: &MapFilter<T>, theta: &CepstralParams<T>, smap_error: T) -> Self {
        FilterFile {
            halfwidth: filter.halfwidth(),
            coeffs: filter.coeffs().iter().map(to_rows).collect(),
            smap_error: smap_error.as_f64(),
            theta: theta.as_slice().iter().map(|v| v.as_f64()).collect(),
            r: theta.r(),
            tail_norm: filter.tail_norm().as_f64(),
        }
    }

    pub fn to_filter<T: Real>(&self) -> Result<MapFilter<T>> {
        if self.coeffs.len() != 2 * self.halfwidth + 1 {
            return Err(Error::Parse(format!(
                "filter file has {} coefficients for halfwidth {}",
                self.coeffs.len(),
                self.halfwidth
            )));
        }
        let coeffs = self.coeffs.iter().map(|m| from_rows(m)).collect::<Result<Vec<_>>>()?;
        MapFilter::new(coeffs, lit(self.tail_norm))
    }
}

/// Model-file view of a factor: `ma = [Θ_1..Θ_q]` and `sigma`.
pub fn factor_to_model<T: Real>(f: &VmaFactor<T>) -> ModelFile {
    ModelFile {
        ar: Vec::new(),
        ma: f.theta()[1..].iter().map(to_rows).collect(),
        sigma: Some(to_rows(f.sigma())),
        arch: None,
    }
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_json<S: for<'de> Deserialize<'de>>(path: &Path) -> Result<S> {
    Ok(serde_json::from_reader(std::io::BufReader::new(File::open(path)?))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{FreqGrid, SpectrumKind};
    use nalgebra::Complex;

    #[test]
    fn series_csv_roundtrip() {
        let text = "time,a,b\n1997-Q1,1.5,2\n1997-Q2,-0.25,3e2\n";
        let table: SeriesTable = parse_series_csv(text.as_bytes()).unwrap();
        assert_eq!(table.times, ["1997-Q1", "1997-Q2"]);
        assert_eq!(table.series.names(), &["a", "b"]);
        assert_eq!(table.series.values()[(1, 1)], 300.0);
        let mut out = Vec::new();
        write_series_csv_to(&mut out, &table).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "time,a,b\n1997-Q1,1.5,2\n1997-Q2,-0.25,300\n"
        );
    }

    #[test]
    fn exact_float_roundtrip() {
        let values = RMat::from_row_slice(2, 1, &[0.1 + 0.2, 1.0 / 3.0]);
        let table = SeriesTable::indexed(MultiSeries::from_values(values.clone()).unwrap());
        let mut out = Vec::new();
        write_series_csv_to(&mut out, &table).unwrap();
        let back: SeriesTable = parse_series_csv(out.as_slice()).unwrap();
        assert_eq!(back.series.values(), &values);
    }

    #[test]
    fn malformed_csv_is_rejected() {
        assert!(parse_series_csv::<f64, _>("t,a\n0,1\n".as_bytes()).is_err());
        let err = parse_series_csv::<f64, _>("time,a\n0,x\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("column `a`"));
        assert!(parse_series_csv::<f64, _>("time,a\n0,NaN\n".as_bytes()).is_err());
        assert!(parse_series_csv::<f64, _>("time\n0\n".as_bytes()).is_err());
    }

    #[test]
    fn spectrum_csv_layout() {
        let grid = FreqGrid::<f64>::new(8).unwrap();
        let mats = vec![crate::linalg::CMat::from_element(1, 1, Complex::new(2.0, 0.5)); 8];
        let s = SpectralGrid::new(grid, mats, SpectrumKind::Joint).unwrap();
        let mut out = Vec::new();
        write_spectrum_csv_to(&mut out, &s).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("j,lambda,re_11,im_11"));
        assert!(lines.next().unwrap().ends_with(",2,0.5"));
        assert_eq!(text.lines().count(), 9);
    }

    #[test]
    fn filter_file_roundtrip() {
        let coeffs = vec![
            RMat::from_element(1, 1, 0.25),
            RMat::from_element(1, 1, 1.0),
            RMat::from_element(1, 1, -0.25),
        ];
        let f = MapFilter::new(coeffs, 1e-9).unwrap();
        let theta = CepstralParams::new(1, 1, vec![0.5]).unwrap();
        let file = FilterFile::new(&f, &theta, 1e-12);
        let json = serde_json::to_value(&file).unwrap();
        for key in ["halfwidth", "coeffs", "smap_error", "theta", "r"] {
            assert!(json.get(key).is_some(), "{key}");
        }
        assert_eq!(file.to_filter::<f64>().unwrap(), f);
    }

    #[test]
    fn factor_serializes_as_model() {
        let f = VmaFactor::new(
            vec![RMat::identity(2, 2), RMat::from_row_slice(2, 2, &[0.5, 0.1, 0.0, 0.2])],
            RMat::identity(2, 2),
        )
        .unwrap();
        let model = factor_to_model(&f);
        assert!(model.ar.is_empty());
        assert_eq!(model.ma, vec![vec![vec![0.5, 0.1], vec![0.0, 0.2]]]);
        assert!(matches!(model.into_model().unwrap(), crate::sim::SimModel::Vma { .. }));
    }
}
