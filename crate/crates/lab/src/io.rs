//! Panel file formats: the canonical long CSV and World Bank wide exports.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use ardl_core::frame::{IndicatorMap, Observation, PanelTable, UnknownCodePolicy, YearRange};
use ardl_core::CoreError;

use crate::error::{LabError, Result};

pub const LONG_HEADER: [&str; 4] = ["country", "indicator", "year", "value"];

/// Ingest options shared by both formats.
#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    pub range: Option<YearRange>,
    pub unknown_codes: UnknownCodePolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PanelFormat {
    Long,
    WbWide,
}

fn open(path: &Path) -> Result<String> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| LabError::io(path, e))?;
    Ok(text)
}

fn data_err(path: &Path, line: usize, msg: impl std::fmt::Display) -> LabError {
    LabError::Data(format!("{}: row {line}: {msg}", path.display()))
}

fn csv_err(path: &Path, e: csv::Error) -> LabError {
    match e.position() {
        Some(pos) => data_err(path, pos.line() as usize, e),
        None => LabError::Data(format!("{}: {e}", path.display())),
    }
}

fn parse_value(raw: &str) -> std::result::Result<Option<f64>, String> {
    let raw = raw.trim();
    if raw.is_empty() || raw == ".." || raw.eq_ignore_ascii_case("NA") {
        return Ok(None);
    }
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(format!("value `{raw}` is not a finite number")),
    }
}

/// Builds the panel, translating record indices back to file lines.
fn assemble(path: &Path, rows: Vec<(usize, Observation)>, range: Option<YearRange>) -> Result<PanelTable> {
    let lines: Vec<usize> = rows.iter().map(|(l, _)| *l).collect();
    PanelTable::from_observations(rows.into_iter().map(|(_, o)| o), range).map_err(|e| match e {
        CoreError::DuplicateObservation {
            index,
            country,
            indicator,
            year,
        } => data_err(
            path,
            lines[index],
            format!("duplicate observation ({country}, {indicator}, {year})"),
        ),
        CoreError::YearOutOfRange { index, year, first, last } => {
            data_err(path, lines[index], format!("year {year} outside {first}..={last}"))
        }
        other => LabError::Data(format!("{}: {other}", path.display())),
    })
}

/// Reads a long CSV with header exactly `country,indicator,year,value`.
pub fn load_long_csv(path: &Path, map: &IndicatorMap, opts: &IngestOptions) -> Result<PanelTable> {
    let text = open(path)?;
    parse_long_csv(path, &text, map, opts)
}

fn parse_long_csv(path: &Path, text: &str, map: &IndicatorMap, opts: &IngestOptions) -> Result<PanelTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().collect::<Vec<_>>() != LONG_HEADER {
        return Err(data_err(
            path,
            1,
            format!("header must be exactly `{}`", LONG_HEADER.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let country = record[0].trim();
        let code = record[1].trim();
        let indicator = map
            .resolve_with(code, opts.unknown_codes)
            .ok_or_else(|| data_err(path, line, format!("unknown indicator code `{code}`")))?;
        let year: i32 = record[2]
            .trim()
            .parse()
            .map_err(|_| data_err(path, line, format!("year `{}` is not an integer", &record[2])))?;
        let value = parse_value(&record[3]).map_err(|m| data_err(path, line, m))?;
        rows.push((
            line,
            Observation {
                country: country.into(),
                indicator,
                year,
                value,
            },
        ));
    }
    assemble(path, rows, opts.range)
}

/// Writes the panel as a long CSV; missing cells get an empty value field.
pub fn write_long_csv(panel: &PanelTable, out: impl Write) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(LONG_HEADER)?;
    for obs in panel.observations() {
        let value = obs.value.map(|v| v.to_string()).unwrap_or_default();
        w.write_record([obs.country, obs.indicator, obs.year.to_string(), value])?;
    }
    w.flush()?;
    Ok(())
}

/// `2007 [YR2007]` or `2007`.
fn year_label(label: &str) -> Option<i32> {
    let head = label.trim().split_whitespace().next()?;
    if head.len() == 4 {
        head.parse().ok()
    } else {
        None
    }
}

struct WideLayout {
    country: usize,
    code: usize,
    years: Vec<(usize, i32)>,
}

fn wide_layout(header: &csv::StringRecord) -> Option<WideLayout> {
    let find = |names: &[&str]| {
        header
            .iter()
            .position(|h| names.iter().any(|n| h.trim().eq_ignore_ascii_case(n)))
    };
    let country = find(&["Country Code"])?;
    let code = find(&["Series Code", "Indicator Code"])?;
    let years: Vec<(usize, i32)> = header
        .iter()
        .enumerate()
        .filter_map(|(i, h)| year_label(h).map(|y| (i, y)))
        .collect();
    (!years.is_empty()).then_some(WideLayout { country, code, years })
}

/// Reads a World Bank wide export (DataBank or bulk-download layout).
pub fn convert_wb_wide(path: &Path, map: &IndicatorMap, opts: &IngestOptions) -> Result<PanelTable> {
    let text = open(path)?;
    parse_wb_wide(path, &text, map, opts)
}

fn parse_wb_wide(path: &Path, text: &str, map: &IndicatorMap, opts: &IngestOptions) -> Result<PanelTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.trim_start_matches('\u{feff}').as_bytes());
    let header = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    let layout = wide_layout(&header).ok_or_else(|| {
        data_err(path, 1, "no `Country Code`, series code or year columns in header")
    })?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let country = record.get(layout.country).unwrap_or("").trim();
        let code = record.get(layout.code).unwrap_or("").trim();
        // DataBank appends blank rows and a "Data from database" footer.
        if country.is_empty() || code.is_empty() {
            continue;
        }
        let indicator = map
            .resolve_with(code, opts.unknown_codes)
            .ok_or_else(|| data_err(path, line, format!("unknown indicator code `{code}`")))?;
        for &(col, year) in &layout.years {
            let value = parse_value(record.get(col).unwrap_or("")).map_err(|m| data_err(path, line, m))?;
            rows.push((
                line,
                Observation {
                    country: country.into(),
                    indicator: indicator.clone(),
                    year,
                    value,
                },
            ));
        }
    }
    assemble(path, rows, opts.range)
}

/// Writes the panel in DataBank layout, using World Bank codes where mapped.
pub fn write_wb_wide(panel: &PanelTable, map: &IndicatorMap, out: impl Write) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["Country Code".to_string(), "Series Code".to_string()];
    header.extend(panel.years().iter().map(|y| format!("{y} [YR{y}]")));
    w.write_record(&header)?;
    for (e, entity) in panel.entities().iter().enumerate() {
        for (c, column) in panel.columns().iter().enumerate() {
            let code = map.code_for(column).unwrap_or(column);
            let mut row = vec![entity.clone(), code.to_string()];
            row.extend(
                panel
                    .series(e, c)
                    .iter()
                    .map(|v| v.map_or_else(|| "..".to_string(), |v| v.to_string())),
            );
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Picks the format from the header line. Anything starting with a
/// lower-case `country` column is treated as long CSV so that a malformed
/// long header is reported as such.
pub fn detect_format(text: &str) -> PanelFormat {
    let first = text.trim_start_matches('\u{feff}').lines().next().unwrap_or("");
    if first.starts_with("country") {
        PanelFormat::Long
    } else {
        PanelFormat::WbWide
    }
}

/// Loads either format, detected from the header.
pub fn load_panel(path: &Path, map: &IndicatorMap, opts: &IngestOptions) -> Result<PanelTable> {
    let text = open(path)?;
    match detect_format(&text) {
        PanelFormat::Long => parse_long_csv(path, &text, map, opts),
        PanelFormat::WbWide => parse_wb_wide(path, &text, map, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn long(text: &str) -> Result<PanelTable> {
        parse_long_csv(Path::new("t.csv"), text, &IndicatorMap::builtin(), &IngestOptions::default())
    }

    #[test]
    fn long_rows_and_missing() {
        let p = long("country,indicator,year,value\nUSA,TRD,2007,1\nUSA,TRD,2008,\nUSA,TRD,2009,3\nUSA,TRD,2010,4\n").unwrap();
        assert_eq!(p.years().len(), 4);
        assert_eq!(p.missing_count(), 1);
    }

    #[test]
    fn duplicate_names_second_row() {
        let err = long("country,indicator,year,value\nDEU,LPI1,2012,3\nDEU,LPI1,2013,3\nDEU,LPI1,2012,3.1\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 4"), "{msg}");
        assert!(msg.contains("DEU, LPI1, 2012"), "{msg}");
    }

    #[test]
    fn bad_header_and_year() {
        assert!(long("country,code,year,value\n").unwrap_err().to_string().contains("row 1"));
        let err = long("country,indicator,year,value\nUSA,TRD,20x7,1\n").unwrap_err();
        assert!(err.to_string().contains("row 2"));
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn unknown_code_policy() {
        let text = "country,indicator,year,value\nUSA,XX.YY,2007,1\n";
        assert!(long(text).is_err());
        let opts = IngestOptions {
            unknown_codes: UnknownCodePolicy::PassThrough,
            ..Default::default()
        };
        let p = parse_long_csv(Path::new("t"), text, &IndicatorMap::builtin(), &opts).unwrap();
        assert_eq!(p.columns(), ["XX.YY"]);
    }

    #[test]
    fn wide_databank_layout() {
        let text = "Country Name,Country Code,Series Name,Series Code,2007 [YR2007],2008 [YR2008],\n\
                    Germany,DEU,LPI,LP.LPI.OVRL.XQ,4.1,..,\n\
                    ,,,,,,\n\
                    Data from database: WDI,,,,,,\n";
        let p = parse_wb_wide(Path::new("w"), text, &IndicatorMap::builtin(), &IngestOptions::default()).unwrap();
        assert_eq!(p.get("DEU", "LPI1", 2007), Some(4.1));
        assert_eq!(p.get("DEU", "LPI1", 2008), None);
        assert_eq!(p.missing_count(), 1);
    }

    #[test]
    fn format_detection() {
        assert_eq!(detect_format("country,indicator,year,value\n"), PanelFormat::Long);
        assert_eq!(detect_format("Country Name,Country Code,Indicator Name,Indicator Code,2007\n"), PanelFormat::WbWide);
    }
}
