//! Ingestion of long-format QWI Explorer exports.
//!
//! Accepted columns (header names are matched case-insensitively):
//! - geography: `geography_label`, `geography`, `county` or `area`
//! - period: `year` plus `quarter` (1-4), or a single `period` / `time` column
//!   formatted `YYYY-Qn` or `YYYYQn`
//! - the measure column, named exactly as requested (for example `Emp`)
//!
//! Counties match a geography value when they agree after lowercasing and
//! dropping any `, <state>` suffix and a trailing ` county`, so `Baltimore`
//! matches `Baltimore County, MD` but not `Baltimore city, MD`.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use mapfilt_core::io::SeriesTable;
use mapfilt_core::linalg::RMat;
use mapfilt_core::series::MultiSeries;
use mapfilt_core::{Error, Result};

const GEOGRAPHY: &[&str] = &["geography_label", "geography", "county", "area"];
const PERIOD: &[&str] = &["period", "time"];

/// Calendar quarter `(year, 1..=4)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Quarter {
    pub year: i32,
    pub quarter: u8,
}

impl Quarter {
    fn index(self) -> i64 {
        self.year as i64 * 4 + (self.quarter as i64 - 1)
    }

    fn from_index(i: i64) -> Self {
        Quarter {
            year: i.div_euclid(4) as i32,
            quarter: (i.rem_euclid(4) + 1) as u8,
        }
    }

    pub fn label(self) -> String {
        format!("{}-Q{}", self.year, self.quarter)
    }

    pub fn parse(text: &str) -> Option<Self> {
        let t = text.trim().to_ascii_uppercase();
        let (y, q) = t.split_once('Q')?;
        let year = y.trim_end_matches(['-', ' ', ':']).parse().ok()?;
        Self::new(year, q.parse().ok()?)
    }

    fn new(year: i32, quarter: u8) -> Option<Self> {
        (1..=4).contains(&quarter).then_some(Quarter { year, quarter })
    }
}

fn normalize(name: &str) -> String {
    let head = name.split(',').next().unwrap_or("").trim().to_lowercase();
    head.strip_suffix(" county").unwrap_or(&head).trim().to_string()
}

fn find_column(header: &csv::StringRecord, names: &[&str]) -> Option<usize> {
    names
        .iter()
        .find_map(|want| header.iter().position(|h| h.trim().eq_ignore_ascii_case(want)))
}

/// Pivots the export into one column per county, quarters ascending.
pub fn ingest<R: Read>(reader: R, counties: &[String], measure: &str) -> Result<SeriesTable> {
    if counties.is_empty() {
        return Err(Error::InvalidArgument("at least one county is required".into()));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let available = || header.iter().collect::<Vec<_>>().join(", ");
    let geo = find_column(&header, GEOGRAPHY).ok_or_else(|| {
        Error::Parse(format!(
            "no geography column; expected one of {GEOGRAPHY:?}, found: {}",
            available()
        ))
    })?;
    let value_col = header.iter().position(|h| h.trim() == measure).ok_or_else(|| {
        Error::Parse(format!(
            "unknown measure `{measure}`; available columns: {}",
            available()
        ))
    })?;
    let period = match (find_column(&header, &["year"]), find_column(&header, &["quarter"])) {
        (Some(y), Some(q)) => PeriodColumns::Split(y, q),
        _ => PeriodColumns::Single(find_column(&header, PERIOD).ok_or_else(|| {
            Error::Parse(format!(
                "no period columns; expected `year` and `quarter` or `period`, found: {}",
                available()
            ))
        })?),
    };

    let wanted: Vec<String> = counties.iter().map(|c| normalize(c)).collect();
    let mut seen_geos = BTreeSet::new();
    let mut cells: BTreeMap<(usize, Quarter), f64> = BTreeMap::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = line + 2;
        let field = |i: usize| rec.get(i).unwrap_or("").trim();
        let geo_name = field(geo);
        seen_geos.insert(geo_name.to_string());
        let Some(county) = wanted.iter().position(|w| *w == normalize(geo_name)) else {
            continue;
        };
        let quarter = match period {
            PeriodColumns::Split(y, q) => field(y)
                .parse()
                .ok()
                .zip(field(q).trim_start_matches(['Q', 'q']).parse().ok())
                .and_then(|(y, q)| Quarter::new(y, q)),
            PeriodColumns::Single(p) => Quarter::parse(field(p)),
        }
        .ok_or_else(|| Error::Parse(format!("row {row}: unreadable period")))?;
        let raw = field(value_col);
        let value: f64 = raw
            .replace(',', "")
            .parse()
            .map_err(|_| Error::Parse(format!("row {row}: `{measure}` value {raw:?} is not a number")))?;
        if cells.insert((county, quarter), value).is_some() {
            return Err(Error::Parse(format!(
                "duplicate row for {} in {}",
                counties[county],
                quarter.label()
            )));
        }
    }
    for (i, c) in counties.iter().enumerate() {
        if !cells.keys().any(|(k, _)| *k == i) {
            return Err(Error::Parse(format!(
                "county `{c}` not found; available geographies: {}",
                seen_geos.into_iter().collect::<Vec<_>>().join("; ")
            )));
        }
    }
    let first = cells.keys().map(|(_, q)| q.index()).min().expect("non-empty");
    let last = cells.keys().map(|(_, q)| q.index()).max().expect("non-empty");
    let quarters: Vec<Quarter> = (first..=last).map(Quarter::from_index).collect();
    let mut gaps = Vec::new();
    let mut data = Vec::with_capacity(quarters.len() * counties.len());
    for q in &quarters {
        for (i, c) in counties.iter().enumerate() {
            match cells.get(&(i, *q)) {
                Some(v) => data.push(*v),
                None => {
                    gaps.push(format!("{c} {}", q.label()));
                    data.push(f64::NAN);
                }
            }
        }
    }
    if !gaps.is_empty() {
        return Err(Error::Parse(format!("missing quarters: {}", gaps.join(", "))));
    }
    let values = RMat::from_row_slice(quarters.len(), counties.len(), &data);
    let series = MultiSeries::new(values, counties.to_vec())?.with_period(Some(4));
    Ok(SeriesTable {
        times: quarters.iter().map(|q| q.label()).collect(),
        series,
    })
}

#[derive(Debug, Clone, Copy)]
enum PeriodColumns {
    Split(usize, usize),
    Single(usize),
}
