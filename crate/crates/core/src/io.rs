//! Text formats: series CSV, sign-report JSON and `LAPCHK v1` checkpoints.
//!
//! All output is 7-bit text with `\n` line endings.

use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::summatory::{Extremum, ScanState, SeriesState, SignChangeReport, SummatorySeries};

pub const CHECKPOINT_HEADER: &str = "LAPCHK v1";

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::from(e),
        kind => Error::Parse(format!("CSV: {kind:?}")),
    }
}

/// Writes `x,<label>,…` and one row per grid point.
///
/// Series from one scan share their grid; anything else is refused.
pub fn write_series_csv(w: impl Write, series: &[SummatorySeries]) -> Result<()> {
    let grid: Vec<u64> = series
        .first()
        .map(|s| s.checkpoints.iter().map(|&(x, _)| x).collect())
        .unwrap_or_default();
    if series.iter().any(|s| !s.checkpoints.iter().map(|&(x, _)| x).eq(grid.iter().copied())) {
        return Err(Error::Precondition("series do not share a checkpoint grid".into()));
    }
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    let header = std::iter::once("x").chain(series.iter().map(|s| s.spec.label()));
    out.write_record(header).map_err(csv_error)?;
    let mut row = Vec::with_capacity(series.len() + 1);
    for (i, x) in grid.iter().enumerate() {
        row.clear();
        row.push(x.to_string());
        row.extend(series.iter().map(|s| s.checkpoints[i].1.to_string()));
        out.write_record(&row).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

/// A parsed series CSV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesTable {
    pub labels: Vec<String>,
    pub xs: Vec<u64>,
    /// `columns[k][i]` is series `k` at `xs[i]`.
    pub columns: Vec<Vec<i64>>,
}

impl SeriesTable {
    /// `(x, value)` pairs of the column with this label.
    pub fn column(&self, label: &str) -> Option<Vec<(u64, i64)>> {
        let k = self.labels.iter().position(|l| l == label)?;
        Some(self.xs.iter().copied().zip(self.columns[k].iter().copied()).collect())
    }
}

fn parse_field<T: FromStr>(s: &str, what: &str, line: usize) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Parse(format!("line {line}: bad {what} {s:?}")))
}

pub fn read_series_csv(r: impl BufRead) -> Result<SeriesTable> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = rdr.headers().map_err(csv_error)?.clone();
    if header.get(0) != Some("x") {
        return Err(Error::Parse("CSV header must start with x".into()));
    }
    let labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut table = SeriesTable { columns: vec![Vec::new(); labels.len()], labels, xs: Vec::new() };
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(csv_error)?;
        let line = i + 2;
        let x: u64 = parse_field(&row[0], "x", line)?;
        if table.xs.last().is_some_and(|&prev| prev >= x) {
            return Err(Error::Parse(format!("line {line}: x not increasing")));
        }
        table.xs.push(x);
        for (col, v) in table.columns.iter_mut().zip(row.iter().skip(1)) {
            col.push(parse_field(v, "value", line)?);
        }
    }
    Ok(table)
}

pub fn report_json(report: &SignChangeReport) -> String {
    serde_json::to_string(report).expect("report serializes")
}

/// Reports as a pretty-printed JSON array.
pub fn write_reports_json(mut w: impl Write, reports: &[SignChangeReport]) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, reports).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn extremum_field(e: Option<Extremum>) -> String {
    e.map_or_else(|| "-".to_string(), |e| format!("{}:{}", e.x, e.value))
}

fn join<T: ToString>(items: impl Iterator<Item = T>) -> String {
    let s = items.map(|v| v.to_string()).collect::<Vec<_>>().join(",");
    if s.is_empty() {
        "-".to_string()
    } else {
        s
    }
}

/// Header, a config line (scan parameters and the last completed position), then one tab-separated record per series:
/// label, last completed position, sum, change count, first change, max, min,
/// carried sign, every sign event and every checkpoint so far.
pub fn write_checkpoint(mut w: impl Write, state: &ScanState) -> Result<()> {
    writeln!(w, "{CHECKPOINT_HEADER}")?;
    writeln!(
        w,
        "config\tq={}\txmax={}\tblock_size={}\tratio={}\tdone={}\tseries={}",
        state.modulus,
        state.xmax,
        state.block_size,
        state.ratio,
        state.next_lo - 1,
        state.series.len()
    )?;
    for s in &state.series {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            s.label,
            state.next_lo - 1,
            s.sum,
            s.change_count(),
            s.first_change().map_or_else(|| "-".to_string(), |n| n.to_string()),
            extremum_field(s.max),
            extremum_field(s.min),
            s.sign,
            join(s.events.iter()),
            join(s.checkpoints.iter().map(|(x, v)| format!("{x}:{v}"))),
        )?;
    }
    w.flush()?;
    Ok(())
}

fn bad(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("checkpoint line {line}: {msg}"))
}

fn parse_pair(s: &str, line: usize) -> Result<(u64, i64)> {
    let (x, v) = s.split_once(':').ok_or_else(|| bad(line, format!("bad pair {s:?}")))?;
    Ok((parse_field(x, "position", line)?, parse_field(v, "value", line)?))
}

fn parse_extremum(s: &str, line: usize) -> Result<Option<Extremum>> {
    if s == "-" {
        return Ok(None);
    }
    let (x, value) = parse_pair(s, line)?;
    Ok(Some(Extremum { x, value }))
}

fn parse_list<T>(s: &str, line: usize, item: impl Fn(&str, usize) -> Result<T>) -> Result<Vec<T>> {
    if s == "-" {
        return Ok(Vec::new());
    }
    s.split(',').map(|v| item(v, line)).collect()
}

pub fn read_checkpoint(r: impl BufRead) -> Result<ScanState> {
    let lines: Vec<String> = r.lines().collect::<std::io::Result<_>>()?;
    if lines.first().map(String::as_str) != Some(CHECKPOINT_HEADER) {
        return Err(Error::Parse(format!("not a {CHECKPOINT_HEADER} file")));
    }
    let config = lines.get(1).ok_or_else(|| bad(2, "missing config line"))?;
    let mut cfg = config.split('\t');
    if cfg.next() != Some("config") {
        return Err(bad(2, "expected config"));
    }
    let mut value = |key: &str| -> Result<String> {
        cfg.next()
            .and_then(|f| f.strip_prefix(key))
            .map(str::to_string)
            .ok_or_else(|| bad(2, format!("expected {key}")))
    };
    let modulus = parse_field(&value("q=")?, "q", 2)?;
    let xmax = parse_field(&value("xmax=")?, "xmax", 2)?;
    let block_size = parse_field(&value("block_size=")?, "block size", 2)?;
    let ratio: f64 = parse_field(&value("ratio=")?, "ratio", 2)?;
    let done: u64 = parse_field(&value("done=")?, "position", 2)?;
    let next_lo = done.checked_add(1).ok_or_else(|| bad(2, "position out of range"))?;
    let count: usize = parse_field(&value("series=")?, "series count", 2)?;

    let records = &lines[2..];
    if records.len() != count {
        return Err(bad(2, format!("{} series records, header says {count}", records.len())));
    }
    let mut series = Vec::with_capacity(count);
    for (i, rec) in records.iter().enumerate() {
        let line = i + 3;
        let f: Vec<&str> = rec.split('\t').collect();
        if f.len() != 10 {
            return Err(bad(line, format!("{} fields, expected 10", f.len())));
        }
        if parse_field::<u64>(f[1], "position", line)? != done {
            return Err(bad(line, "series position differs from the config line"));
        }
        let events = parse_list(f[8], line, |s, l| parse_field::<u64>(s, "event", l))?;
        let state = SeriesState {
            label: f[0].to_string(),
            sum: parse_field(f[2], "sum", line)?,
            sign: parse_field(f[7], "sign", line)?,
            max: parse_extremum(f[5], line)?,
            min: parse_extremum(f[6], line)?,
            checkpoints: parse_list(f[9], line, parse_pair)?,
            events,
        };
        let first = if f[4] == "-" { None } else { Some(parse_field(f[4], "first change", line)?) };
        if state.change_count() != parse_field::<u64>(f[3], "change count", line)?
            || state.first_change() != first
        {
            return Err(bad(line, "event summary disagrees with the event list"));
        }
        if !matches!(state.sign, -1..=1) {
            return Err(bad(line, "sign must be -1, 0 or 1"));
        }
        series.push(state);
    }
    Ok(ScanState {
        modulus,
        xmax,
        block_size,
        ratio,
        next_lo,
        series,
    })
}
